//! Inter-sensor fusion, multi-channel synchronization and test-matrix
//! assembly.

use super::{FusionError, OrientationSample, PoseSeries, RecordingBlock, TestMatrix};
use crate::pose::{PoseVector, FEATURES_PER_POSE, JOINT_COUNT};
use crate::rotations::{relative_quat, UnitQuaternion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FuseDiagnostics {
    /// Parent samples with no child sample within the pairing tolerance.
    pub dropped: usize,
}

/// Pairs each parent-IMU orientation with the nearest child-IMU
/// orientation (within `tolerance_us`) and emits the relative orientation
/// of the parent seen from the child, on the parent's timeline. Unpaired
/// samples are dropped and counted.
pub fn fuse_module(
    parent: &[OrientationSample],
    child: &[OrientationSample],
    tolerance_us: i64,
) -> Result<(Vec<OrientationSample>, FuseDiagnostics), FusionError> {
    if parent.is_empty() || child.is_empty() {
        return Err(FusionError::EmptyStream);
    }
    let mut out = Vec::with_capacity(parent.len());
    let mut diagnostics = FuseDiagnostics::default();
    for p in parent {
        let idx = match child.binary_search_by_key(&p.timestamp_us, |s| s.timestamp_us) {
            Ok(i) => i,
            Err(i) => {
                // Nearest of the neighbours around the insertion point.
                let before = i.checked_sub(1);
                let after = if i < child.len() { Some(i) } else { None };
                match (before, after) {
                    (Some(b), Some(a)) => {
                        if p.timestamp_us - child[b].timestamp_us
                            <= child[a].timestamp_us - p.timestamp_us
                        {
                            b
                        } else {
                            a
                        }
                    }
                    (Some(b), None) => b,
                    (None, Some(a)) => a,
                    (None, None) => unreachable!("child is non-empty"),
                }
            }
        };
        if (child[idx].timestamp_us - p.timestamp_us).abs() <= tolerance_us {
            out.push(OrientationSample {
                timestamp_us: p.timestamp_us,
                q: relative_quat(p.q, child[idx].q),
            });
        } else {
            diagnostics.dropped += 1;
        }
    }
    Ok((out, diagnostics))
}

fn interpolate_at(channel: &[OrientationSample], t_us: i64) -> UnitQuaternion {
    match channel.binary_search_by_key(&t_us, |s| s.timestamp_us) {
        Ok(i) => channel[i].q,
        Err(i) => {
            // Callers guarantee t lies inside the channel's span.
            let lo = &channel[i - 1];
            let hi = &channel[i];
            let fraction =
                (t_us - lo.timestamp_us) as f64 / (hi.timestamp_us - lo.timestamp_us) as f64;
            lo.q.nlerp(hi.q, fraction)
        }
    }
}

/// Resamples the four per-joint relative-orientation sequences onto one
/// uniform time vector over their common window, component-wise linear
/// interpolation with renormalization per channel. Never extrapolates.
pub fn synchronize_streams(
    channels: &[Vec<OrientationSample>; JOINT_COUNT],
    rate_hz: f64,
) -> Result<PoseSeries, FusionError> {
    assert!(rate_hz > 0.0, "resample rate must be positive");
    for channel in channels {
        if channel.is_empty() {
            return Err(FusionError::EmptyStream);
        }
    }
    let start = channels
        .iter()
        .map(|c| c.first().unwrap().timestamp_us)
        .max()
        .unwrap();
    let end = channels
        .iter()
        .map(|c| c.last().unwrap().timestamp_us)
        .min()
        .unwrap();
    if start > end {
        return Err(FusionError::EmptyOverlapWindow);
    }

    let step_us = (1e6 / rate_hz).round() as i64;
    let mut timestamps = Vec::new();
    let mut t = start;
    while t <= end {
        timestamps.push(t);
        t += step_us;
    }

    let mut poses = Vec::with_capacity(timestamps.len());
    for &t_us in &timestamps {
        let mut joints = [UnitQuaternion::identity(); JOINT_COUNT];
        for (joint, channel) in joints.iter_mut().zip(channels.iter()) {
            *joint = interpolate_at(channel, t_us);
        }
        poses.push(PoseVector::new(joints));
    }
    Ok(PoseSeries {
        timestamps_us: timestamps,
        poses,
    })
}

/// Stacks labeled recordings into the padded test matrix: `O` equals the
/// longest recording, shorter blocks are padding beyond their own length.
pub fn build_test_matrix(
    recordings: Vec<(usize, Vec<[f64; FEATURES_PER_POSE]>)>,
) -> Result<TestMatrix, FusionError> {
    for (label, rows) in &recordings {
        if rows.is_empty() {
            return Err(FusionError::ZeroLengthRecording { label: *label });
        }
    }
    Ok(TestMatrix::from_blocks(
        recordings
            .into_iter()
            .map(|(label, rows)| RecordingBlock { label, rows })
            .collect(),
    ))
}
