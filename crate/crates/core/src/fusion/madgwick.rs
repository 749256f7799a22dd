//! Gradient-descent MARG attitude filter.
//!
//! The state quaternion maps sensor-frame vectors into the Earth frame
//! (z up, x north). Each update fuses the gyro-propagated orientation rate
//! with a normalized gradient step that pulls the estimate toward
//! agreement with the measured gravity and magnetic field directions. The
//! magnetic reference is reconstructed from the measurement itself as
//! `b = (bx, 0, bz)`, which keeps the filter immune to an unknown dip
//! angle.

use super::{FilterState, FusionError, ImuSample, OrientationSample};
use crate::rotations::{vec3, UnitQuaternion};

/// Whether a step used the full MARG correction or fell back to gyro
/// integration (zero-norm accelerometer or magnetometer sample).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    Marg,
    GyroOnly,
}

/// One filter step over `dt` seconds.
pub fn madgwick_update(state: &FilterState, sample: &ImuSample, dt: f64) -> (FilterState, UpdateMode) {
    assert!(dt > 0.0, "madgwick_update requires dt > 0");
    let q = state.q;
    let (qw, qx, qy, qz) = (q.w(), q.x(), q.y(), q.z());
    let [gx, gy, gz] = sample.gyro;

    // Orientation rate from the gyro: 0.5 * q x (0, omega).
    let mut dw = 0.5 * (-qx * gx - qy * gy - qz * gz);
    let mut dx = 0.5 * (qw * gx + qy * gz - qz * gy);
    let mut dy = 0.5 * (qw * gy - qx * gz + qz * gx);
    let mut dz = 0.5 * (qw * gz + qx * gy - qy * gx);

    let accel_norm = vec3::norm(sample.accel);
    let mag_norm = vec3::norm(sample.mag);
    let mut mode = UpdateMode::GyroOnly;
    if accel_norm > 0.0 && mag_norm > 0.0 {
        let [ax, ay, az] = vec3::scale(sample.accel, 1.0 / accel_norm);
        let [mx, my, mz] = vec3::scale(sample.mag, 1.0 / mag_norm);

        // Measured field in the Earth frame; reference uses its horizontal
        // magnitude and vertical component only.
        let h = q.rotate([mx, my, mz]);
        let bx = (h[0] * h[0] + h[1] * h[1]).sqrt();
        let bz = h[2];

        // Objective: rotate the references into the sensor frame and
        // subtract the measurements. Gravity reference is Earth-up.
        let f1 = 2.0 * (qx * qz - qw * qy) - ax;
        let f2 = 2.0 * (qw * qx + qy * qz) - ay;
        let f3 = 2.0 * (0.5 - qx * qx - qy * qy) - az;
        let f4 = 2.0 * bx * (0.5 - qy * qy - qz * qz) + 2.0 * bz * (qx * qz - qw * qy) - mx;
        let f5 = 2.0 * bx * (qx * qy - qw * qz) + 2.0 * bz * (qw * qx + qy * qz) - my;
        let f6 = 2.0 * bx * (qw * qy + qx * qz) + 2.0 * bz * (0.5 - qx * qx - qy * qy) - mz;

        // Gradient = J^T f with the analytic Jacobian of the objective.
        let s0 = -2.0 * qy * f1 + 2.0 * qx * f2 - 2.0 * bz * qy * f4
            + (-2.0 * bx * qz + 2.0 * bz * qx) * f5
            + 2.0 * bx * qy * f6;
        let s1 = 2.0 * qz * f1 + 2.0 * qw * f2 - 4.0 * qx * f3 + 2.0 * bz * qz * f4
            + (2.0 * bx * qy + 2.0 * bz * qw) * f5
            + (2.0 * bx * qz - 4.0 * bz * qx) * f6;
        let s2 = -2.0 * qw * f1 + 2.0 * qz * f2 - 4.0 * qy * f3
            + (-4.0 * bx * qy - 2.0 * bz * qw) * f4
            + (2.0 * bx * qx + 2.0 * bz * qz) * f5
            + (2.0 * bx * qw - 4.0 * bz * qy) * f6;
        let s3 = 2.0 * qx * f1 + 2.0 * qy * f2 + (-4.0 * bx * qz + 2.0 * bz * qx) * f4
            + (-2.0 * bx * qw + 2.0 * bz * qy) * f5
            + 2.0 * bx * qx * f6;

        let norm = (s0 * s0 + s1 * s1 + s2 * s2 + s3 * s3).sqrt();
        // At the optimum the gradient vanishes; skipping the step there
        // keeps exact measurements a fixed point instead of dividing by
        // a vanishing norm.
        if norm > 1e-12 {
            dw -= state.beta * s0 / norm;
            dx -= state.beta * s1 / norm;
            dy -= state.beta * s2 / norm;
            dz -= state.beta * s3 / norm;
            mode = UpdateMode::Marg;
        } else {
            mode = UpdateMode::Marg;
        }
    }

    let next = UnitQuaternion::new(qw + dw * dt, qx + dx * dt, qy + dy * dt, qz + dz * dt);
    (
        FilterState {
            q: next,
            beta: state.beta,
        },
        mode,
    )
}

/// Per-stream filtering byproducts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamDiagnostics {
    pub gyro_only_steps: usize,
}

/// Folds the filter over a stream. The first sample integrates over one
/// nominal period; later samples use their timestamp deltas.
pub fn estimate_stream_orientation(
    samples: &[ImuSample],
    beta: f64,
    q0: UnitQuaternion,
    nominal_rate_hz: f64,
) -> Result<(Vec<OrientationSample>, StreamDiagnostics), FusionError> {
    if samples.is_empty() {
        return Err(FusionError::EmptyStream);
    }
    assert!(nominal_rate_hz > 0.0, "nominal rate must be positive");

    let mut state = FilterState { q: q0, beta };
    let mut out = Vec::with_capacity(samples.len());
    let mut diagnostics = StreamDiagnostics::default();
    let mut previous_ts: Option<i64> = None;
    for (index, sample) in samples.iter().enumerate() {
        if !(vec3::is_finite(sample.gyro)
            && vec3::is_finite(sample.accel)
            && vec3::is_finite(sample.mag))
        {
            return Err(FusionError::NonFiniteSample { index });
        }
        let dt = match previous_ts {
            None => 1.0 / nominal_rate_hz,
            Some(prev) => {
                if sample.timestamp_us <= prev {
                    return Err(FusionError::NonMonotonicTimestamps { index });
                }
                (sample.timestamp_us - prev) as f64 * 1e-6
            }
        };
        let (next, mode) = madgwick_update(&state, sample, dt);
        if mode == UpdateMode::GyroOnly {
            diagnostics.gyro_only_steps += 1;
        }
        state = next;
        out.push(OrientationSample {
            timestamp_us: sample.timestamp_us,
            q: state.q,
        });
        previous_ts = Some(sample.timestamp_us);
    }
    Ok((out, diagnostics))
}
