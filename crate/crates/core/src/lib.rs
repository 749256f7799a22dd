//! Sleep posture characterization and one-shot learning pipeline.
//!
//! Body posture is described by the relative orientations of four distal
//! joints (right/left wrist, right/left ankle), obtained either from BVH
//! motion capture ([`bvh`]) or from fused dual-IMU wearable streams
//! ([`fusion`]). A single observation per posture class is expanded by
//! spherical axis-angle noise injection ([`augment`]) into a training set
//! for an SVM-ECOC multi-class model ([`classifier`]), evaluated with
//! accuracy, macro-F1 and a hybrid axis/angle similarity metric
//! ([`metrics`]). [`synth`] generates canonical postures, BVH motion
//! sequences and raw IMU streams with known ground truth; [`pipeline`]
//! wires everything into reproducible experiment runs.

pub mod augment;
pub mod bvh;
pub mod classifier;
pub mod fusion;
pub mod metrics;
pub mod pipeline;
pub mod pose;
pub mod rotations;
pub mod seeds;
pub mod synth;

pub use pose::{JointId, PoseVector, FEATURES_PER_POSE, JOINT_COUNT};
pub use rotations::{
    angular_offset, relative_quat, AxisAngleCartesian, AxisAngleSpherical, EulerOrder, Mat3,
    RigidTransform, UnitQuaternion,
};
