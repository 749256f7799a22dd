//! Deterministic artifact generation for the in-silico experiments: the
//! sleep motion BVH, the posture manifest, and (optionally) synthetic
//! wearable IMU session logs with train/test splits.

use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError};
use crate::bvh::write_bvh;
use crate::fusion::write_imu_csv;
use crate::seeds;
use crate::synth::{
    canonical_postures, generate_motion_sequence, synthesize_posture_recording,
    systematic_axis_perturbation, CanonicalPostureSet, RecordingOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub file: String,
    pub label: usize,
    pub split: Split,
}

/// Index of the generated IMU session files, consumed by the wearable
/// pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionsManifest {
    pub rate_hz: f64,
    pub sessions: Vec<SessionEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedArtifacts {
    pub bvh_text: String,
    pub posture_manifest_json: String,
    /// `(file name, CSV text)` session logs plus their manifest, present
    /// when IMU synthesis was requested.
    pub sessions: Option<(SessionsManifest, Vec<(String, String)>)>,
}

/// Generates the canonical posture set, the keyframed BVH motion sequence
/// and, when `with_imu` is set, one wearable session log per posture and
/// split. Test-session poses carry the configured systematic axis offsets.
pub fn simulate(config: &PipelineConfig, with_imu: bool) -> Result<SimulatedArtifacts, PipelineError> {
    config.validate()?;
    let set = canonical_postures(config.seed);
    let anim = generate_motion_sequence(
        &set,
        config.simulate.hold_frames,
        config.simulate.transition_frames,
    );

    let sessions = if with_imu {
        Some(synthesize_sessions(config, &set))
    } else {
        None
    };

    Ok(SimulatedArtifacts {
        bvh_text: write_bvh(&anim),
        posture_manifest_json: serde_json::to_string_pretty(&set)
            .expect("posture set serialization cannot fail"),
        sessions,
    })
}

fn synthesize_sessions(
    config: &PipelineConfig,
    set: &CanonicalPostureSet,
) -> (SessionsManifest, Vec<(String, String)>) {
    let options = RecordingOptions {
        seconds: config.simulate.recording_seconds,
        rate_hz: config.rate_hz,
        wobble_deg: config.simulate.wobble_deg,
        independent_wobble_deg: config.simulate.independent_wobble_deg,
        noise: config.simulate.imu_noise,
    };
    let mut entries = Vec::new();
    let mut files = Vec::new();
    for posture in &set.postures {
        for split in [Split::Train, Split::Test] {
            let (tag, index_base) = match split {
                Split::Train => ("train", 0u64),
                Split::Test => ("test", 1000u64),
            };
            // Test recordings replicate the posture imperfectly: a fixed
            // per-recording axis offset models the subject's inexact pose
            // recreation.
            let pose = match split {
                Split::Train => posture.pose,
                Split::Test => {
                    let mut rng = seeds::rng(
                        config.seed,
                        "test-pose-offset",
                        index_base + posture.label as u64,
                    );
                    systematic_axis_perturbation(
                        &posture.pose,
                        config.simulate.test_axis_sigma_sq,
                        &mut rng,
                    )
                }
            };
            let session_seed =
                seeds::derive(config.seed, "session", index_base + posture.label as u64);
            let streams = synthesize_posture_recording(&pose, &options, session_seed);
            let file = format!("imu_{tag}_{:02}.csv", posture.label);
            files.push((file.clone(), write_imu_csv(&streams)));
            entries.push(SessionEntry {
                file,
                label: posture.label,
                split,
            });
        }
    }
    (
        SessionsManifest {
            rate_hz: config.rate_hz,
            sessions: entries,
        },
        files,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvh::parse_bvh;
    use crate::fusion::read_imu_csv;
    use crate::pipeline::sha256_hex;

    #[test]
    fn default_simulation_has_230_frames() {
        let artifacts = simulate(&PipelineConfig::default(), false).unwrap();
        let anim = parse_bvh(&artifacts.bvh_text).unwrap();
        assert_eq!(anim.frame_count(), 230);
        assert!(artifacts.sessions.is_none());
        let set: CanonicalPostureSet =
            serde_json::from_str(&artifacts.posture_manifest_json).unwrap();
        assert_eq!(set.postures.len(), 12);
    }

    #[test]
    fn imu_flag_emits_readable_sessions() {
        let mut config = PipelineConfig::default();
        config.simulate.recording_seconds = 2.0;
        let artifacts = simulate(&config, true).unwrap();
        let (manifest, files) = artifacts.sessions.unwrap();
        assert_eq!(manifest.sessions.len(), 24);
        assert_eq!(files.len(), 24);
        let streams = read_imu_csv(&files[0].1).unwrap();
        assert_eq!(streams.len(), 4);
        let expected = (config.simulate.recording_seconds * config.rate_hz) as usize;
        assert_eq!(streams[0].parent.len(), expected);
    }

    #[test]
    fn rerun_reproduces_identical_digests() {
        let mut config = PipelineConfig::default();
        config.simulate.recording_seconds = 1.0;
        let a = simulate(&config, true).unwrap();
        let b = simulate(&config, true).unwrap();
        assert_eq!(sha256_hex(a.bvh_text.as_bytes()), sha256_hex(b.bvh_text.as_bytes()));
        assert_eq!(
            sha256_hex(a.posture_manifest_json.as_bytes()),
            sha256_hex(b.posture_manifest_json.as_bytes())
        );
        let (_, files_a) = a.sessions.unwrap();
        let (_, files_b) = b.sessions.unwrap();
        for ((name_a, text_a), (name_b, text_b)) in files_a.iter().zip(files_b.iter()) {
            assert_eq!(name_a, name_b);
            assert_eq!(sha256_hex(text_a.as_bytes()), sha256_hex(text_b.as_bytes()));
        }
    }
}
