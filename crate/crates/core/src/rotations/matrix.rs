use std::ops::Mul;

use super::quaternion::UnitQuaternion;
use super::vec3;

/// Row-major 3x3 matrix. Used for rotation blocks of rigid transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub fn new(rows: [[f64; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    /// Elementary active rotation about a principal axis (0 = x, 1 = y,
    /// 2 = z), angle in radians.
    pub fn rotation_about_axis(axis: usize, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        match axis {
            0 => Self::new([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]),
            1 => Self::new([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]),
            2 => Self::new([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]),
            _ => panic!("axis index out of range: {axis}"),
        }
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self::new([
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        [
            vec3::dot(self.rows[0], v),
            vec3::dot(self.rows[1], v),
            vec3::dot(self.rows[2], v),
        ]
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows
            .iter()
            .zip(other.rows.iter())
            .all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol))
    }

    /// Orthonormal with determinant +1 within `tol`.
    pub fn is_rotation(&self, tol: f64) -> bool {
        let should_be_identity = *self * self.transpose();
        should_be_identity.approx_eq(&Mat3::identity(), tol) && (self.determinant() - 1.0).abs() <= tol
    }
}

impl Mul for Mat3 {
    type Output = Mat3;

    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * rhs.rows[k][j]).sum();
            }
        }
        Mat3::new(out)
    }
}

/// Rotation + translation acting on points as `R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: [f64; 3],
}

impl RigidTransform {
    pub fn new(rotation: Mat3, translation: [f64; 3]) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Mat3::identity(), [0.0; 3])
    }

    pub fn from_translation(translation: [f64; 3]) -> Self {
        Self::new(Mat3::identity(), translation)
    }

    pub fn from_rotation(rotation: Mat3) -> Self {
        Self::new(rotation, [0.0; 3])
    }

    /// `self` applied after `other`: `(self * other)(p) = self(other(p))`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform::new(
            self.rotation * other.rotation,
            vec3::add(self.rotation.apply(other.translation), self.translation),
        )
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform::new(rt, vec3::scale(rt.apply(self.translation), -1.0))
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        vec3::add(self.rotation.apply(p), self.translation)
    }

    /// Rotation part as a canonical quaternion; translation discarded.
    pub fn rotation_quat(&self) -> UnitQuaternion {
        UnitQuaternion::from_rotation_matrix(&self.rotation).canonicalized()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rotation.approx_eq(&other.rotation, tol)
            && vec3::norm(vec3::sub(self.translation, other.translation)) <= tol
    }
}
