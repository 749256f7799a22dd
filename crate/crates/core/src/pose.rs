//! The four-joint posture descriptor shared by the virtual and wearable
//! pipelines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rotations::{vec3, AxisAngleCartesian, UnitQuaternion};

pub const JOINT_COUNT: usize = 4;
pub const FEATURES_PER_POSE: usize = 16;

/// The four distal joints, in the canonical order used everywhere a
/// posture is serialized or vectorized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JointId {
    RightWrist,
    LeftWrist,
    RightAnkle,
    LeftAnkle,
}

impl JointId {
    pub const ALL: [JointId; JOINT_COUNT] = [
        JointId::RightWrist,
        JointId::LeftWrist,
        JointId::RightAnkle,
        JointId::LeftAnkle,
    ];

    pub fn index(self) -> usize {
        match self {
            JointId::RightWrist => 0,
            JointId::LeftWrist => 1,
            JointId::RightAnkle => 2,
            JointId::LeftAnkle => 3,
        }
    }

    /// Two-letter code used by the IMU CSV log format.
    pub fn code(self) -> &'static str {
        match self {
            JointId::RightWrist => "RW",
            JointId::LeftWrist => "LW",
            JointId::RightAnkle => "RA",
            JointId::LeftAnkle => "LA",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "RW" => Some(JointId::RightWrist),
            "LW" => Some(JointId::LeftWrist),
            "RA" => Some(JointId::RightAnkle),
            "LA" => Some(JointId::LeftAnkle),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PoseError {
    #[error("joint {joint} axis is not unit length (norm {norm})")]
    NonUnitAxis { joint: usize, norm: f64 },
    #[error("joint {joint} angle {angle} outside [0, pi]")]
    AngleOutOfRange { joint: usize, angle: f64 },
    #[error("non-finite feature value at joint {joint}")]
    NonFinite { joint: usize },
}

/// Quadruple of joint orientations, one unit quaternion per entry of
/// [`JointId::ALL`]. The 16-scalar feature form lists, per joint, the
/// rotation axis components followed by the rotation angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseVector {
    joints: [UnitQuaternion; JOINT_COUNT],
}

impl PoseVector {
    pub fn new(joints: [UnitQuaternion; JOINT_COUNT]) -> Self {
        Self {
            joints: joints.map(|q| q.canonicalized()),
        }
    }

    pub fn identity() -> Self {
        Self::new([UnitQuaternion::identity(); JOINT_COUNT])
    }

    pub fn joint(&self, id: JointId) -> UnitQuaternion {
        self.joints[id.index()]
    }

    pub fn joints(&self) -> &[UnitQuaternion; JOINT_COUNT] {
        &self.joints
    }

    /// `[axis_x, axis_y, axis_z, angle]` per joint, concatenated in the
    /// canonical joint order.
    pub fn to_features(&self) -> [f64; FEATURES_PER_POSE] {
        let mut out = [0.0; FEATURES_PER_POSE];
        for (j, q) in self.joints.iter().enumerate() {
            let aa = q.to_axis_angle();
            out[4 * j..4 * j + 3].copy_from_slice(&aa.axis());
            out[4 * j + 3] = aa.angle();
        }
        out
    }

    /// Inverse of [`PoseVector::to_features`]. Validates unit axes and the
    /// angle range.
    pub fn from_features(features: &[f64; FEATURES_PER_POSE]) -> Result<Self, PoseError> {
        let mut joints = [UnitQuaternion::identity(); JOINT_COUNT];
        for (j, joint) in joints.iter_mut().enumerate() {
            let block = &features[4 * j..4 * j + 4];
            if block.iter().any(|v| !v.is_finite()) {
                return Err(PoseError::NonFinite { joint: j });
            }
            let axis = [block[0], block[1], block[2]];
            let norm = vec3::norm(axis);
            if (norm - 1.0).abs() > 1e-6 {
                return Err(PoseError::NonUnitAxis { joint: j, norm });
            }
            let angle = block[3];
            if !(-1e-9..=std::f64::consts::PI + 1e-9).contains(&angle) {
                return Err(PoseError::AngleOutOfRange { joint: j, angle });
            }
            *joint = AxisAngleCartesian::new(axis, angle.clamp(0.0, std::f64::consts::PI))
                .to_quat();
        }
        Ok(Self { joints })
    }
}
