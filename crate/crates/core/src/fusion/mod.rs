//! Wearable-side processing: Madgwick MARG attitude estimation per IMU,
//! inter-sensor fusion into segment-to-segment orientations, stream
//! synchronization, and assembly of the NaN-padded test matrix.

mod io;
mod madgwick;
mod sync;

pub use io::{read_imu_csv, write_imu_csv, write_orientation_csv, CsvError};
pub use madgwick::{estimate_stream_orientation, madgwick_update, StreamDiagnostics, UpdateMode};
pub use sync::{build_test_matrix, fuse_module, synchronize_streams, FuseDiagnostics};

use thiserror::Error;

use crate::pose::{JointId, PoseVector, FEATURES_PER_POSE, JOINT_COUNT};
use crate::rotations::UnitQuaternion;

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("IMU stream is empty")]
    EmptyStream,
    #[error("timestamps not strictly increasing at sample {index}")]
    NonMonotonicTimestamps { index: usize },
    #[error("orientation sequences share no overlapping time window")]
    EmptyOverlapWindow,
    #[error("recording for class {label} has no samples")]
    ZeroLengthRecording { label: usize },
    #[error("non-finite component at sample {index}")]
    NonFiniteSample { index: usize },
}

/// One MARG observation. Gyro in rad/s; accelerometer and magnetometer in
/// any consistent units (both are normalized inside the filter).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub timestamp_us: i64,
    pub gyro: [f64; 3],
    pub accel: [f64; 3],
    pub mag: [f64; 3],
}

/// Madgwick filter state: the current sensor-to-Earth orientation estimate
/// and the gradient-correction gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub q: UnitQuaternion,
    pub beta: f64,
}

impl FilterState {
    /// Unit-quaternion initial estimate with the given gain.
    pub fn new(beta: f64) -> Self {
        assert!(beta > 0.0, "filter gain must be positive");
        Self {
            q: UnitQuaternion::identity(),
            beta,
        }
    }
}

/// The two IMUs of one wearable module, mounted on the parent and child
/// segments of one extremity joint.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModuleStream {
    pub module_id: JointId,
    pub parent: Vec<ImuSample>,
    pub child: Vec<ImuSample>,
}

/// Timestamped orientation, the output unit of per-stream filtering and
/// of inter-sensor fusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationSample {
    pub timestamp_us: i64,
    pub q: UnitQuaternion,
}

/// Uniformly resampled four-joint orientation timeseries.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSeries {
    pub timestamps_us: Vec<i64>,
    pub poses: Vec<PoseVector>,
}

impl PoseSeries {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Assembles a pose vector from the four relative orientations in
/// canonical joint order. Order is semantic: permuting inputs changes the
/// posture.
pub fn characterize_pose_wearable(relative: [UnitQuaternion; JOINT_COUNT]) -> PoseVector {
    PoseVector::new(relative)
}

/// Labeled test recordings padded to a common length. Rows beyond a
/// recording's own length are padding: they materialize as NaN in
/// [`TestMatrix::dense`] and carry `false` in the validity mask, and no
/// arithmetic ever touches them.
#[derive(Debug, Clone, PartialEq)]
pub struct TestMatrix {
    row_count: usize,
    blocks: Vec<RecordingBlock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordingBlock {
    pub label: usize,
    pub rows: Vec<[f64; FEATURES_PER_POSE]>,
}

impl TestMatrix {
    /// `O = max recording length`.
    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn blocks(&self) -> &[RecordingBlock] {
        &self.blocks
    }

    pub fn labels(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.label).collect()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rows.len()).collect()
    }

    /// Number of padded (invalid) cells rows across all blocks.
    pub fn padding_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| self.row_count - b.rows.len())
            .sum()
    }

    /// All valid (non-padding) feature rows with their labels, in block
    /// order. This is the evaluation view of the matrix.
    pub fn valid_entries(&self) -> Vec<([f64; FEATURES_PER_POSE], usize)> {
        let mut out = Vec::new();
        for block in &self.blocks {
            for row in &block.rows {
                out.push((*row, block.label));
            }
        }
        out
    }

    /// Dense `O x (blocks * 16)` value matrix with NaN padding, plus the
    /// per-cell validity mask.
    pub fn dense(&self) -> (Vec<Vec<f64>>, Vec<Vec<bool>>) {
        let width = self.blocks.len() * FEATURES_PER_POSE;
        let mut values = vec![vec![f64::NAN; width]; self.row_count];
        let mut mask = vec![vec![false; width]; self.row_count];
        for (b, block) in self.blocks.iter().enumerate() {
            for (r, row) in block.rows.iter().enumerate() {
                let base = b * FEATURES_PER_POSE;
                values[r][base..base + FEATURES_PER_POSE].copy_from_slice(row);
                for cell in mask[r].iter_mut().skip(base).take(FEATURES_PER_POSE) {
                    *cell = true;
                }
            }
        }
        (values, mask)
    }

    pub(crate) fn from_blocks(blocks: Vec<RecordingBlock>) -> Self {
        let row_count = blocks.iter().map(|b| b.rows.len()).max().unwrap_or(0);
        Self { row_count, blocks }
    }
}
