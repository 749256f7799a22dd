use std::ops::Mul;

use super::axis_angle::AxisAngleCartesian;
use super::matrix::Mat3;
use super::vec3;

/// Unit quaternion, scalar-first `[w, x, y, z]`.
///
/// Construction normalizes, so the unit-norm invariant holds on every value
/// that escapes this module. `canonicalized` maps onto the `w >= 0`
/// hemisphere; operations whose output feeds comparisons (relative
/// orientations, axis-angle extraction) apply it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    /// Normalizes the given components.
    ///
    /// Panics if the components are not finite or have (near-)zero norm;
    /// every in-pipeline caller constructs from already-valid rotations.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        assert!(
            norm.is_finite() && norm > 1e-12,
            "degenerate quaternion components ({w}, {x}, {y}, {z})"
        );
        Self {
            w: w / norm,
            x: x / norm,
            y: y / norm,
            z: z / norm,
        }
    }

    pub fn identity() -> Self {
        Self {
            w: 1.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Flips onto the `w >= 0` hemisphere; `q` and `-q` encode the same
    /// rotation.
    pub fn canonicalized(self) -> Self {
        if self.w < 0.0 {
            Self {
                w: -self.w,
                x: -self.x,
                y: -self.y,
                z: -self.z,
            }
        } else {
            self
        }
    }

    /// `(w, -x, -y, -z)`; the group inverse for unit quaternions.
    pub fn conjugate(self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// `axis` must be unit length; `angle` in radians.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let axis = vec3::normalize(axis);
        let half = 0.5 * angle;
        let s = half.sin();
        Self::new(half.cos(), axis[0] * s, axis[1] * s, axis[2] * s)
    }

    /// Extracts axis and angle with the angle canonicalized into `[0, pi]`.
    /// Rotations within 1e-8 rad of the identity return the conventional
    /// axis `(0, 0, 1)` with angle 0.
    pub fn to_axis_angle(self) -> AxisAngleCartesian {
        let q = self.canonicalized();
        let angle = 2.0 * q.w.clamp(-1.0, 1.0).acos();
        if angle < 1e-8 {
            return AxisAngleCartesian::new([0.0, 0.0, 1.0], 0.0);
        }
        let s = (0.5 * angle).sin();
        AxisAngleCartesian::new([q.x / s, q.y / s, q.z / s], angle)
    }

    /// Rotates a vector: `q * v * conj(q)`.
    pub fn rotate(self, v: [f64; 3]) -> [f64; 3] {
        // Expanded sandwich product, avoids building pure quaternions.
        let u = [self.x, self.y, self.z];
        let uv = vec3::cross(u, v);
        let uuv = vec3::cross(u, uv);
        [
            v[0] + 2.0 * (self.w * uv[0] + uuv[0]),
            v[1] + 2.0 * (self.w * uv[1] + uuv[1]),
            v[2] + 2.0 * (self.w * uv[2] + uuv[2]),
        ]
    }

    pub fn to_rotation_matrix(self) -> Mat3 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Mat3::new([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ])
    }

    /// Shepperd's method; stable for all rotation angles.
    pub fn from_rotation_matrix(m: &Mat3) -> Self {
        let r = m.rows();
        let trace = r[0][0] + r[1][1] + r[2][2];
        if trace > 0.0 {
            let s = (trace + 1.0).sqrt();
            let k = 0.5 / s;
            Self::new(
                0.5 * s,
                (r[2][1] - r[1][2]) * k,
                (r[0][2] - r[2][0]) * k,
                (r[1][0] - r[0][1]) * k,
            )
        } else if r[0][0] >= r[1][1] && r[0][0] >= r[2][2] {
            let s = (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt();
            let k = 0.5 / s;
            Self::new(
                (r[2][1] - r[1][2]) * k,
                0.5 * s,
                (r[0][1] + r[1][0]) * k,
                (r[0][2] + r[2][0]) * k,
            )
        } else if r[1][1] >= r[2][2] {
            let s = (1.0 - r[0][0] + r[1][1] - r[2][2]).sqrt();
            let k = 0.5 / s;
            Self::new(
                (r[0][2] - r[2][0]) * k,
                (r[0][1] + r[1][0]) * k,
                0.5 * s,
                (r[1][2] + r[2][1]) * k,
            )
        } else {
            let s = (1.0 - r[0][0] - r[1][1] + r[2][2]).sqrt();
            let k = 0.5 / s;
            Self::new(
                (r[1][0] - r[0][1]) * k,
                (r[0][2] + r[2][0]) * k,
                (r[1][2] + r[2][1]) * k,
                0.5 * s,
            )
        }
    }

    /// Rotation vector (axis scaled by angle, radians). Inverse of
    /// `from_rotation_vector`; used by the gyro synthesis finite differences.
    pub fn to_rotation_vector(self) -> [f64; 3] {
        let aa = self.to_axis_angle();
        vec3::scale(aa.axis(), aa.angle())
    }

    pub fn from_rotation_vector(v: [f64; 3]) -> Self {
        let angle = vec3::norm(v);
        if angle < 1e-12 {
            return Self::identity();
        }
        Self::from_axis_angle(vec3::scale(v, 1.0 / angle), angle)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Component-wise linear interpolation followed by renormalization,
    /// with hemisphere alignment so the short path is taken.
    pub fn nlerp(self, other: Self, t: f64) -> Self {
        let other = if self.dot(other) < 0.0 {
            Self {
                w: -other.w,
                x: -other.x,
                y: -other.y,
                z: -other.z,
            }
        } else {
            other
        };
        Self::new(
            self.w + t * (other.w - self.w),
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
            self.z + t * (other.z - self.z),
        )
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    /// Hamilton product, renormalized.
    fn mul(self, rhs: UnitQuaternion) -> UnitQuaternion {
        let (aw, ax, ay, az) = (self.w, self.x, self.y, self.z);
        let (bw, bx, by, bz) = (rhs.w, rhs.x, rhs.y, rhs.z);
        UnitQuaternion::new(
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        )
    }
}
