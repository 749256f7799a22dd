//! Inverse sensor model: turns orientation trajectories into raw MARG
//! streams whose noiseless fusion recovers the trajectory.
//!
//! Earth references: specific force (0, 0, +9.81) m/s^2 (gravity pulls
//! down, a resting accelerometer reads up), magnetic field of unit
//! magnitude pointing north with a 60 degree downward dip. Gyro rates come
//! from central finite differences of the orientation log, one-sided at
//! the endpoints.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::fusion::{ImuSample, SensorModuleStream};
use crate::pose::{JointId, PoseVector};
use crate::rotations::{vec3, UnitQuaternion};
use crate::seeds;

pub const GRAVITY_UP: [f64; 3] = [0.0, 0.0, 9.81];
/// Unit field, 60 degree dip: (cos 60, 0, -sin 60).
pub const MAG_FIELD: [f64; 3] = [0.5, 0.0, -0.866_025_403_784_438_6];

/// Sensor noise parameters; all standard deviations, non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuNoiseModel {
    /// rad/s per axis.
    pub gyro_noise_std: f64,
    /// m/s^2 per axis.
    pub accel_noise_std: f64,
    /// Fraction of the (unit) field magnitude per axis.
    pub mag_noise_frac: f64,
    /// Constant per-axis gyro bias, rad/s.
    pub gyro_bias: [f64; 3],
}

impl ImuNoiseModel {
    pub fn noiseless() -> Self {
        Self {
            gyro_noise_std: 0.0,
            accel_noise_std: 0.0,
            mag_noise_frac: 0.0,
            gyro_bias: [0.0; 3],
        }
    }

    /// Off-the-shelf MEMS grade: gyro 0.005 rad/s, accel 0.05 m/s^2,
    /// mag 1% of field.
    pub fn realistic() -> Self {
        Self {
            gyro_noise_std: 0.005,
            accel_noise_std: 0.05,
            mag_noise_frac: 0.01,
            gyro_bias: [0.0; 3],
        }
    }

    pub fn validate(&self) {
        assert!(
            self.gyro_noise_std >= 0.0
                && self.accel_noise_std >= 0.0
                && self.mag_noise_frac >= 0.0,
            "noise standard deviations must be non-negative"
        );
    }
}

/// Uniformly sampled orientation trajectory (sensor-to-Earth per sample).
/// Uniformity is structural: samples share one rate and start time.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationTrajectory {
    pub rate_hz: f64,
    pub start_us: i64,
    pub quats: Vec<UnitQuaternion>,
}

impl OrientationTrajectory {
    pub fn timestamp_us(&self, index: usize) -> i64 {
        self.start_us + ((index as f64) * 1e6 / self.rate_hz).round() as i64
    }

    pub fn len(&self) -> usize {
        self.quats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quats.is_empty()
    }
}

pub fn static_trajectory(q: UnitQuaternion, seconds: f64, rate_hz: f64) -> OrientationTrajectory {
    let count = (seconds * rate_hz).round() as usize;
    OrientationTrajectory {
        rate_hz,
        start_us: 0,
        quats: vec![q; count.max(1)],
    }
}

/// Constant body-rate rotation about `axis` starting from `start`.
pub fn constant_rate_trajectory(
    start: UnitQuaternion,
    axis: [f64; 3],
    rate_rad_s: f64,
    seconds: f64,
    rate_hz: f64,
) -> OrientationTrajectory {
    let count = (seconds * rate_hz).round() as usize;
    let quats = (0..count.max(1))
        .map(|k| {
            let angle = rate_rad_s * k as f64 / rate_hz;
            (start * UnitQuaternion::from_axis_angle(axis, angle)).canonicalized()
        })
        .collect();
    OrientationTrajectory {
        rate_hz,
        start_us: 0,
        quats,
    }
}

/// Body angular rate at each sample by finite differences of the
/// orientation increments: central in the interior, one-sided at the ends.
fn gyro_from_trajectory(traj: &OrientationTrajectory) -> Vec<[f64; 3]> {
    let n = traj.quats.len();
    let dt = 1.0 / traj.rate_hz;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b, span) = if n == 1 {
            return vec![[0.0; 3]];
        } else if k == 0 {
            (0, 1, dt)
        } else if k == n - 1 {
            (n - 2, n - 1, dt)
        } else {
            (k - 1, k + 1, 2.0 * dt)
        };
        let increment = traj.quats[a].conjugate() * traj.quats[b];
        out.push(vec3::scale(increment.to_rotation_vector(), 1.0 / span));
    }
    out
}

/// One raw IMU stream for a single sensor following `traj`.
fn synthesize_single_imu(
    traj: &OrientationTrajectory,
    noise: &ImuNoiseModel,
    rng: &mut impl Rng,
) -> Vec<ImuSample> {
    noise.validate();
    let gyro_noise = Normal::new(0.0, noise.gyro_noise_std).expect("validated");
    let accel_noise = Normal::new(0.0, noise.accel_noise_std).expect("validated");
    let mag_noise = Normal::new(0.0, noise.mag_noise_frac * vec3::norm(MAG_FIELD))
        .expect("validated");
    let rates = gyro_from_trajectory(traj);
    let mut samples = Vec::with_capacity(traj.len());
    for (k, (q, rate)) in traj.quats.iter().zip(rates.iter()).enumerate() {
        let to_body = q.conjugate();
        let accel = to_body.rotate(GRAVITY_UP);
        let mag = to_body.rotate(MAG_FIELD);
        samples.push(ImuSample {
            timestamp_us: traj.timestamp_us(k),
            gyro: [
                rate[0] + noise.gyro_bias[0] + gyro_noise.sample(rng),
                rate[1] + noise.gyro_bias[1] + gyro_noise.sample(rng),
                rate[2] + noise.gyro_bias[2] + gyro_noise.sample(rng),
            ],
            accel: [
                accel[0] + accel_noise.sample(rng),
                accel[1] + accel_noise.sample(rng),
                accel[2] + accel_noise.sample(rng),
            ],
            mag: [
                mag[0] + mag_noise.sample(rng),
                mag[1] + mag_noise.sample(rng),
                mag[2] + mag_noise.sample(rng),
            ],
        });
    }
    samples
}

/// Dual-IMU module stream for one joint from parent and child
/// trajectories. Both trajectories must share rate, start and length
/// (enforced structurally by construction helpers).
pub fn synthesize_imu_streams(
    module_id: JointId,
    parent: &OrientationTrajectory,
    child: &OrientationTrajectory,
    noise: &ImuNoiseModel,
    seed: u64,
) -> SensorModuleStream {
    assert_eq!(parent.rate_hz, child.rate_hz, "trajectory rates must match");
    assert_eq!(parent.len(), child.len(), "trajectory lengths must match");
    let mut parent_rng = seeds::rng(seed, "imu-parent", module_id.index() as u64);
    let mut child_rng = seeds::rng(seed, "imu-child", module_id.index() as u64);
    SensorModuleStream {
        module_id,
        parent: synthesize_single_imu(parent, noise, &mut parent_rng),
        child: synthesize_single_imu(child, noise, &mut child_rng),
    }
}

/// Fixed mounting orientation of each module's parent IMU; distinct per
/// limb so the four absolute orientation problems differ.
fn parent_base(joint: JointId) -> UnitQuaternion {
    match joint {
        JointId::RightWrist => UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], 0.3),
        JointId::LeftWrist => UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], -0.6),
        JointId::RightAnkle => UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], 1.1),
        JointId::LeftAnkle => {
            UnitQuaternion::from_axis_angle([0.6, -0.6, 0.5], 0.8)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordingOptions {
    pub seconds: f64,
    pub rate_hz: f64,
    /// Common-mode limb sway amplitude (degrees); keeps the joint's
    /// relative orientation exact while the absolute orientations move.
    pub wobble_deg: f64,
    /// Independent per-IMU sway amplitude (degrees): soft-tissue style
    /// motion that makes the fused relative orientation jitter around the
    /// true joint rotation, as real recordings do.
    pub independent_wobble_deg: f64,
    pub noise: ImuNoiseModel,
}

impl Default for RecordingOptions {
    fn default() -> Self {
        Self {
            seconds: 30.0,
            rate_hz: 30.0,
            wobble_deg: 1.0,
            independent_wobble_deg: 1.0,
            noise: ImuNoiseModel::realistic(),
        }
    }
}

/// Synthesizes one posture-hold recording: four dual-IMU module streams
/// whose ground-truth relative orientations equal the posture's joint
/// quaternions throughout. Slow sinusoidal limb sway (common to both IMUs
/// of a module) keeps the absolute orientations moving.
pub fn synthesize_posture_recording(
    pose: &PoseVector,
    options: &RecordingOptions,
    seed: u64,
) -> Vec<SensorModuleStream> {
    let count = ((options.seconds * options.rate_hz).round() as usize).max(2);
    JointId::ALL
        .iter()
        .map(|joint| {
            let mut sway_rng = seeds::rng(seed, "sway", joint.index() as u64);
            let amplitude = options.wobble_deg.to_radians();
            let independent = options.independent_wobble_deg.to_radians();
            let mut sinusoid_params = || {
                let frequencies = [
                    sway_rng.gen_range(0.05..0.15),
                    sway_rng.gen_range(0.05..0.15),
                    sway_rng.gen_range(0.05..0.15),
                ];
                let phases = [
                    sway_rng.gen_range(0.0..std::f64::consts::TAU),
                    sway_rng.gen_range(0.0..std::f64::consts::TAU),
                    sway_rng.gen_range(0.0..std::f64::consts::TAU),
                ];
                (frequencies, phases)
            };
            let common = sinusoid_params();
            let parent_own = sinusoid_params();
            let child_own = sinusoid_params();
            let base = parent_base(*joint);
            let joint_quat = pose.joint(*joint);

            let sway_at = |params: &([f64; 3], [f64; 3]), amp: f64, t: f64| {
                let (frequencies, phases) = params;
                [
                    amp * (std::f64::consts::TAU * frequencies[0] * t + phases[0]).sin(),
                    amp * (std::f64::consts::TAU * frequencies[1] * t + phases[1]).sin(),
                    amp * (std::f64::consts::TAU * frequencies[2] * t + phases[2]).sin(),
                ]
            };

            let mut parent_quats = Vec::with_capacity(count);
            let mut child_quats = Vec::with_capacity(count);
            for k in 0..count {
                let t = k as f64 / options.rate_hz;
                let limb = (base
                    * UnitQuaternion::from_rotation_vector(sway_at(&common, amplitude, t)))
                .canonicalized();
                // Child placed so the parent-in-child relative orientation
                // equals the joint quaternion (conj(child) * parent = q_j),
                // then each IMU wanders independently by a small amount.
                let parent_q = (limb
                    * UnitQuaternion::from_rotation_vector(sway_at(&parent_own, independent, t)))
                .canonicalized();
                let child_q = (limb
                    * joint_quat.conjugate()
                    * UnitQuaternion::from_rotation_vector(sway_at(&child_own, independent, t)))
                .canonicalized();
                parent_quats.push(parent_q);
                child_quats.push(child_q);
            }
            let parent_traj = OrientationTrajectory {
                rate_hz: options.rate_hz,
                start_us: 0,
                quats: parent_quats,
            };
            let child_traj = OrientationTrajectory {
                rate_hz: options.rate_hz,
                start_us: 0,
                quats: child_quats,
            };
            synthesize_imu_streams(*joint, &parent_traj, &child_traj, &options.noise, seed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{estimate_stream_orientation, fuse_module};
    use crate::rotations::angular_offset;

    #[test]
    fn static_identity_produces_reference_vectors() {
        let traj = static_trajectory(UnitQuaternion::identity(), 1.0, 30.0);
        let mut rng = seeds::rng(0, "t", 0);
        let samples = synthesize_single_imu(&traj, &ImuNoiseModel::noiseless(), &mut rng);
        for s in &samples {
            assert!(vec3::norm(s.gyro) < 1e-12);
            assert!(vec3::norm(vec3::sub(s.accel, GRAVITY_UP)) < 1e-12);
            assert!(vec3::norm(vec3::sub(s.mag, MAG_FIELD)) < 1e-12);
        }
    }

    #[test]
    fn constant_rate_gyro_matches_analytic_rate() {
        let rate = 10f64.to_radians();
        let traj = constant_rate_trajectory(
            UnitQuaternion::identity(),
            [0.0, 0.0, 1.0],
            rate,
            5.0,
            30.0,
        );
        let mut rng = seeds::rng(0, "t", 1);
        let samples = synthesize_single_imu(&traj, &ImuNoiseModel::noiseless(), &mut rng);
        // Interior samples use central differences; boundary excluded.
        for s in &samples[1..samples.len() - 1] {
            assert!((s.gyro[2] - rate).abs() < 1e-6, "gyro z {}", s.gyro[2]);
            assert!(s.gyro[0].abs() < 1e-9 && s.gyro[1].abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_loop_recovers_static_orientation() {
        let truth = UnitQuaternion::from_axis_angle([0.4, 0.3, 0.87], 0.7);
        let traj = static_trajectory(truth, 20.0, 30.0);
        let mut rng = seeds::rng(1, "t", 2);
        let samples = synthesize_single_imu(&traj, &ImuNoiseModel::noiseless(), &mut rng);
        let (estimates, _) =
            estimate_stream_orientation(&samples, 0.1, UnitQuaternion::identity(), 30.0).unwrap();
        let err = angular_offset(estimates.last().unwrap().q, truth).to_degrees();
        assert!(err < 0.5, "terminal error {err} deg");
    }

    #[test]
    fn recording_fusion_recovers_joint_quaternions() {
        let pose = PoseVector::new([
            UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], 0.6),
            UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], -0.4),
            UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], 0.9),
            UnitQuaternion::from_axis_angle([0.5, 0.5, 0.7], 0.5),
        ]);
        let options = RecordingOptions {
            seconds: 30.0,
            noise: ImuNoiseModel::noiseless(),
            independent_wobble_deg: 0.0,
            ..RecordingOptions::default()
        };
        let streams = synthesize_posture_recording(&pose, &options, 3);
        assert_eq!(streams.len(), 4);
        for stream in &streams {
            let (parent, _) = estimate_stream_orientation(
                &stream.parent,
                0.1,
                UnitQuaternion::identity(),
                options.rate_hz,
            )
            .unwrap();
            let (child, _) = estimate_stream_orientation(
                &stream.child,
                0.1,
                UnitQuaternion::identity(),
                options.rate_hz,
            )
            .unwrap();
            let (fused, _) = fuse_module(&parent, &child, 16_666).unwrap();
            let expected = pose.joint(stream.module_id);
            // Cold-start convergence runs at ~2*beta rad/s, so large
            // mounting rotations need a generous warm-up.
            let warm = 15 * 30;
            let errors: Vec<f64> = fused[warm..]
                .iter()
                .map(|s| angular_offset(s.q, expected).to_degrees())
                .collect();
            let rms = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
            assert!(rms < 1.0, "module {:?} rms {rms} deg", stream.module_id);
        }
    }

    #[test]
    fn synthesis_is_deterministic_under_seed() {
        let pose = PoseVector::identity();
        let options = RecordingOptions::default();
        let a = synthesize_posture_recording(&pose, &options, 9);
        let b = synthesize_posture_recording(&pose, &options, 9);
        assert_eq!(a, b);
        let c = synthesize_posture_recording(&pose, &options, 10);
        assert_ne!(a, c);
    }
}
