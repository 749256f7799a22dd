use super::quaternion::UnitQuaternion;
use super::vec3;

/// Axis-angle with a unit Cartesian axis and the angle in radians,
/// canonically in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngleCartesian {
    axis: [f64; 3],
    angle: f64,
}

impl AxisAngleCartesian {
    /// Normalizes the axis. The angle must already lie in `[0, pi]`
    /// (a small tolerance absorbs round-off from conversions).
    pub fn new(axis: [f64; 3], angle: f64) -> Self {
        assert!(
            (-1e-9..=std::f64::consts::PI + 1e-9).contains(&angle),
            "axis-angle rotation angle out of range: {angle}"
        );
        Self {
            axis: vec3::normalize(axis),
            angle: angle.clamp(0.0, std::f64::consts::PI),
        }
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// `(cos(theta/2), axis * sin(theta/2))`, canonicalized.
    pub fn to_quat(&self) -> UnitQuaternion {
        UnitQuaternion::from_axis_angle(self.axis, self.angle).canonicalized()
    }

    /// Polar angle from the axis z component, azimuth from its x/y
    /// components. At the poles the azimuth is degenerate and set to 0.
    pub fn to_spherical(&self) -> AxisAngleSpherical {
        let [x, y, z] = self.axis;
        let polar = z.clamp(-1.0, 1.0).acos().to_degrees();
        let azimuth = if x.abs() < 1e-12 && y.abs() < 1e-12 {
            0.0
        } else {
            wrap_azimuth_deg(y.atan2(x).to_degrees())
        };
        AxisAngleSpherical::new(polar, azimuth, self.angle.to_degrees())
    }
}

/// Axis-angle with the rotation axis in spherical coordinates. All three
/// components are degrees: polar in `[0, 180]`, azimuth in `[0, 360)`,
/// angle in `[0, 180]`. This is the space the augmentation noise lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngleSpherical {
    polar_deg: f64,
    azimuth_deg: f64,
    angle_deg: f64,
}

impl AxisAngleSpherical {
    pub fn new(polar_deg: f64, azimuth_deg: f64, angle_deg: f64) -> Self {
        assert!(
            (0.0..=180.0).contains(&polar_deg),
            "polar angle out of range: {polar_deg}"
        );
        assert!(
            (0.0..360.0).contains(&azimuth_deg) || azimuth_deg == 0.0,
            "azimuth out of range: {azimuth_deg}"
        );
        assert!(
            (0.0..=180.0).contains(&angle_deg),
            "rotation angle out of range: {angle_deg}"
        );
        Self {
            polar_deg,
            azimuth_deg,
            angle_deg,
        }
    }

    pub fn polar_deg(&self) -> f64 {
        self.polar_deg
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_deg
    }

    /// `axis = (sin p cos a, sin p sin a, cos p)`, angle converted to
    /// radians.
    pub fn to_cartesian(&self) -> AxisAngleCartesian {
        let p = self.polar_deg.to_radians();
        let a = self.azimuth_deg.to_radians();
        let (sp, cp) = p.sin_cos();
        let (sa, ca) = a.sin_cos();
        AxisAngleCartesian::new([sp * ca, sp * sa, cp], self.angle_deg.to_radians())
    }
}

pub(crate) fn wrap_azimuth_deg(mut a: f64) -> f64 {
    a %= 360.0;
    if a < 0.0 {
        a += 360.0;
    }
    // The modulo above can still round to exactly 360.0.
    if a >= 360.0 {
        a = 0.0;
    }
    a
}
