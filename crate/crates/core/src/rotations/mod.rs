//! Singularity-aware rotation algebra.
//!
//! Quaternions are scalar-first `[w, x, y, z]` and kept on the canonical
//! hemisphere (`w >= 0`) so that `q` and `-q`, which encode the same
//! rotation, compare equal after construction. Axis-angle values exist in
//! two forms: Cartesian (unit axis + angle in radians, used as the feature
//! representation) and spherical (polar/azimuth/angle in degrees, the space
//! noise is injected into).

mod axis_angle;
mod matrix;
mod quaternion;

pub mod vec3;

pub use axis_angle::{AxisAngleCartesian, AxisAngleSpherical};
pub use matrix::{Mat3, RigidTransform};
pub use quaternion::UnitQuaternion;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RotationError {
    #[error("unknown Euler rotation order tag `{0}`")]
    UnknownEulerOrder(String),
}

/// Intrinsic Euler composition order. `Zyx` means the first angle rotates
/// about z, the second about y, the third about x, composed as
/// `Rz * Ry * Rx` (the BVH channel semantics: first declared channel is the
/// outermost rotation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum EulerOrder {
    Xyz,
    Xzy,
    Yxz,
    Yzx,
    Zxy,
    Zyx,
}

impl EulerOrder {
    /// Axis indices (0 = x, 1 = y, 2 = z) in application order.
    pub fn axes(self) -> [usize; 3] {
        match self {
            EulerOrder::Xyz => [0, 1, 2],
            EulerOrder::Xzy => [0, 2, 1],
            EulerOrder::Yxz => [1, 0, 2],
            EulerOrder::Yzx => [1, 2, 0],
            EulerOrder::Zxy => [2, 0, 1],
            EulerOrder::Zyx => [2, 1, 0],
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self, RotationError> {
        match tag.to_ascii_uppercase().as_str() {
            "XYZ" => Ok(EulerOrder::Xyz),
            "XZY" => Ok(EulerOrder::Xzy),
            "YXZ" => Ok(EulerOrder::Yxz),
            "YZX" => Ok(EulerOrder::Yzx),
            "ZXY" => Ok(EulerOrder::Zxy),
            "ZYX" => Ok(EulerOrder::Zyx),
            other => Err(RotationError::UnknownEulerOrder(other.to_string())),
        }
    }
}

/// Composes elementary rotations in the declared order. Angles are degrees,
/// given in the same sequence as `order` (first angle belongs to the first
/// axis of the order).
pub fn euler_to_rotation(angles_deg: [f64; 3], order: EulerOrder) -> Mat3 {
    let axes = order.axes();
    let mut m = Mat3::identity();
    for (axis, angle) in axes.iter().zip(angles_deg.iter()) {
        let r = Mat3::rotation_about_axis(*axis, angle.to_radians());
        m = m * r;
    }
    m
}

/// Quaternion-path equivalent of [`euler_to_rotation`], used as the second
/// route of the dual-path consistency check.
pub fn euler_to_quat(angles_deg: [f64; 3], order: EulerOrder) -> UnitQuaternion {
    let axes = order.axes();
    let mut q = UnitQuaternion::identity();
    for (axis, angle) in axes.iter().zip(angles_deg.iter()) {
        let mut unit = [0.0; 3];
        unit[*axis] = 1.0;
        q = q * UnitQuaternion::from_axis_angle(unit, angle.to_radians());
    }
    q
}

/// Relative orientation of a parent sensor/segment seen from the child,
/// `conj(q_child_to_e) * q_parent_to_e`. The defining contract is the
/// round trip `q_child_to_e * relative == q_parent_to_e`.
pub fn relative_quat(q_parent_to_e: UnitQuaternion, q_child_to_e: UnitQuaternion) -> UnitQuaternion {
    (q_child_to_e.conjugate() * q_parent_to_e).canonicalized()
}

/// Rotation-space distance in radians, `2 * acos(|w(conj(a) * b)|)`,
/// in `[0, pi]`. Antipodal representations of the same rotation score 0.
pub fn angular_offset(a: UnitQuaternion, b: UnitQuaternion) -> f64 {
    let residual = a.conjugate() * b;
    2.0 * residual.w().abs().clamp(0.0, 1.0).acos()
}
