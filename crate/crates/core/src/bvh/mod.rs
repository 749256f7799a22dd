//! BVH motion capture: parsing, serialization, forward kinematics and
//! extraction of the four-joint pose characterization vector.

mod kinematics;
mod parse;
mod write;

pub use kinematics::{characterize_pose_virtual, forward_kinematics, local_transform, relative_transform};
pub use parse::parse_bvh;
pub use write::write_bvh;

use thiserror::Error;

use crate::pose::JointId;

#[derive(Debug, Error, PartialEq)]
pub enum BvhError {
    #[error("line {line}: expected {expected}, found `{found}`")]
    Unexpected {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: unknown channel tag `{tag}`")]
    UnknownChannel { line: usize, tag: String },
    #[error("line {line}: `{token}` is not a number")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: frame row {row} has {found} values, expected {expected}")]
    FrameArity {
        line: usize,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: channel count {declared} does not match header total {expected}")]
    ChannelCountMismatch {
        line: usize,
        declared: usize,
        expected: usize,
    },
    #[error("unexpected end of document while reading {0}")]
    UnexpectedEof(&'static str),
    #[error("joint `{0}` not found in skeleton")]
    UnknownJoint(String),
    #[error("frame index {frame} out of range ({frames} frames)")]
    FrameOutOfRange { frame: usize, frames: usize },
}

/// One positional or rotational degree of freedom of a joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    XPosition,
    YPosition,
    ZPosition,
    XRotation,
    YRotation,
    ZRotation,
}

impl Channel {
    pub fn tag(self) -> &'static str {
        match self {
            Channel::XPosition => "Xposition",
            Channel::YPosition => "Yposition",
            Channel::ZPosition => "Zposition",
            Channel::XRotation => "Xrotation",
            Channel::YRotation => "Yrotation",
            Channel::ZRotation => "Zrotation",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "Xposition" => Some(Channel::XPosition),
            "Yposition" => Some(Channel::YPosition),
            "Zposition" => Some(Channel::ZPosition),
            "Xrotation" => Some(Channel::XRotation),
            "Yrotation" => Some(Channel::YRotation),
            "Zrotation" => Some(Channel::ZRotation),
            _ => None,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            Channel::XRotation | Channel::YRotation | Channel::ZRotation
        )
    }

    /// Principal axis index for rotation channels.
    pub fn axis(self) -> usize {
        match self {
            Channel::XPosition | Channel::XRotation => 0,
            Channel::YPosition | Channel::YRotation => 1,
            Channel::ZPosition | Channel::ZRotation => 2,
        }
    }
}

/// A node of the skeleton hierarchy. End sites are stored on their owning
/// joint; they carry no channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: [f64; 3],
    pub channels: Vec<Channel>,
    /// Column of this joint's first channel in each frame row.
    pub channel_base: usize,
    pub end_site: Option<[f64; 3]>,
}

/// Parsed BVH document: hierarchy plus per-frame channel values. Joint
/// order and channel order are preserved exactly as declared; parents
/// always precede children.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonAnimation {
    joints: Vec<Joint>,
    frames: Vec<Vec<f64>>,
    frame_time: f64,
}

impl SkeletonAnimation {
    /// Assembles an animation from parts; joint order must place parents
    /// before children and `channel_base` offsets must be consistent.
    pub fn from_parts(joints: Vec<Joint>, frames: Vec<Vec<f64>>, frame_time: f64) -> Self {
        Self {
            joints,
            frames,
            frame_time,
        }
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, index: usize) -> &[f64] {
        &self.frames[index]
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame_time(&self) -> f64 {
        self.frame_time
    }

    pub fn channel_count(&self) -> usize {
        self.joints.iter().map(|j| j.channels.len()).sum()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }
}

/// The (parent, child) joint name pairs defining the pose characterization
/// vector, one per entry of [`JointId::ALL`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JointSet {
    pairs: [(String, String); 4],
}

impl JointSet {
    pub fn new(pairs: [(String, String); 4]) -> Self {
        Self { pairs }
    }

    /// Pairs matching the skeletons emitted by the in-silico generator.
    pub fn synthetic_default() -> Self {
        Self::new([
            ("RightForearm".into(), "RightHand".into()),
            ("LeftForearm".into(), "LeftHand".into()),
            ("RightShin".into(), "RightFoot".into()),
            ("LeftShin".into(), "LeftFoot".into()),
        ])
    }

    pub fn pair(&self, joint: JointId) -> (&str, &str) {
        let (p, c) = &self.pairs[joint.index()];
        (p, c)
    }

    /// Resolves all names against a skeleton, in canonical joint order.
    pub fn resolve(&self, anim: &SkeletonAnimation) -> Result<[(usize, usize); 4], BvhError> {
        let mut out = [(0usize, 0usize); 4];
        for joint in JointId::ALL {
            let (parent, child) = self.pair(joint);
            let p = anim
                .joint_index(parent)
                .ok_or_else(|| BvhError::UnknownJoint(parent.to_string()))?;
            let c = anim
                .joint_index(child)
                .ok_or_else(|| BvhError::UnknownJoint(child.to_string()))?;
            out[joint.index()] = (p, c);
        }
        Ok(out)
    }
}
