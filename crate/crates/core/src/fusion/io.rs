//! IMU session log ingestion and orientation output.
//!
//! Log format: a header row then
//! `timestamp_us,module_id,imu_role,gx,gy,gz,ax,ay,az,mx,my,mz` with
//! `module_id` in {RW, LW, RA, LA} and `imu_role` in {p, c}. Gyro columns
//! are logged in deg/s (the sensor's native convention) and converted to
//! rad/s on ingestion. Accelerometer is m/s^2, magnetometer arbitrary
//! units.

use std::fmt::Write as _;

use thiserror::Error;

use super::{ImuSample, OrientationSample, SensorModuleStream};
use crate::pose::JointId;

pub const IMU_CSV_HEADER: &str = "timestamp_us,module_id,imu_role,gx,gy,gz,ax,ay,az,mx,my,mz";

#[derive(Debug, Error, PartialEq)]
pub enum CsvError {
    #[error("line 1: expected header `{expected}`")]
    BadHeader { expected: &'static str },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: `{token}` is not a number")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: unknown module id `{id}`")]
    UnknownModule { line: usize, id: String },
    #[error("line {line}: unknown imu role `{role}` (expected p or c)")]
    UnknownRole { line: usize, role: String },
    #[error("line {line}: timestamp not strictly increasing within its stream")]
    NonMonotonic { line: usize },
    #[error("module {module} is missing its {role} stream")]
    MissingStream {
        module: &'static str,
        role: &'static str,
    },
    #[error("no data rows")]
    Empty,
}

fn parse_number(token: &str, line: usize) -> Result<f64, CsvError> {
    token.trim().parse::<f64>().map_err(|_| CsvError::BadNumber {
        line,
        token: token.to_string(),
    })
}

/// Parses one session log into per-module dual-IMU streams, ordered by
/// the canonical joint order. Every present module must carry both roles.
pub fn read_imu_csv(text: &str) -> Result<Vec<SensorModuleStream>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == IMU_CSV_HEADER => {}
        _ => {
            return Err(CsvError::BadHeader {
                expected: IMU_CSV_HEADER,
            })
        }
    }

    let mut parents: [Vec<ImuSample>; 4] = Default::default();
    let mut children: [Vec<ImuSample>; 4] = Default::default();
    let mut any = false;
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 12 {
            return Err(CsvError::Arity {
                line,
                expected: 12,
                found: fields.len(),
            });
        }
        let timestamp_us = fields[0]
            .trim()
            .parse::<i64>()
            .map_err(|_| CsvError::BadNumber {
                line,
                token: fields[0].to_string(),
            })?;
        let module = JointId::from_code(fields[1].trim()).ok_or_else(|| CsvError::UnknownModule {
            line,
            id: fields[1].to_string(),
        })?;
        let role = fields[2].trim();
        let mut values = [0.0f64; 9];
        for (k, token) in fields[3..].iter().enumerate() {
            values[k] = parse_number(token, line)?;
        }
        let sample = ImuSample {
            timestamp_us,
            gyro: [
                values[0].to_radians(),
                values[1].to_radians(),
                values[2].to_radians(),
            ],
            accel: [values[3], values[4], values[5]],
            mag: [values[6], values[7], values[8]],
        };
        let stream = match role {
            "p" => &mut parents[module.index()],
            "c" => &mut children[module.index()],
            other => {
                return Err(CsvError::UnknownRole {
                    line,
                    role: other.to_string(),
                })
            }
        };
        if let Some(last) = stream.last() {
            if sample.timestamp_us <= last.timestamp_us {
                return Err(CsvError::NonMonotonic { line });
            }
        }
        stream.push(sample);
        any = true;
    }
    if !any {
        return Err(CsvError::Empty);
    }

    let mut out = Vec::new();
    for joint in JointId::ALL {
        let parent = std::mem::take(&mut parents[joint.index()]);
        let child = std::mem::take(&mut children[joint.index()]);
        match (parent.is_empty(), child.is_empty()) {
            (true, true) => continue,
            (false, true) => {
                return Err(CsvError::MissingStream {
                    module: joint.code(),
                    role: "child",
                })
            }
            (true, false) => {
                return Err(CsvError::MissingStream {
                    module: joint.code(),
                    role: "parent",
                })
            }
            (false, false) => out.push(SensorModuleStream {
                module_id: joint,
                parent,
                child,
            }),
        }
    }
    Ok(out)
}

/// Serializes one session log row-by-row, interleaved by timestamp order
/// as produced. Gyro values are written back in deg/s.
pub fn write_imu_csv(streams: &[SensorModuleStream]) -> String {
    let mut rows: Vec<(i64, String)> = Vec::new();
    for stream in streams {
        for (role, samples) in [("p", &stream.parent), ("c", &stream.child)] {
            for s in samples {
                let mut line = String::new();
                let _ = write!(
                    line,
                    "{},{},{}",
                    s.timestamp_us,
                    stream.module_id.code(),
                    role
                );
                for v in [
                    s.gyro[0].to_degrees(),
                    s.gyro[1].to_degrees(),
                    s.gyro[2].to_degrees(),
                    s.accel[0],
                    s.accel[1],
                    s.accel[2],
                    s.mag[0],
                    s.mag[1],
                    s.mag[2],
                ] {
                    let _ = write!(line, ",{v}");
                }
                rows.push((s.timestamp_us, line));
            }
        }
    }
    rows.sort_by_key(|(t, _)| *t);
    let mut out = String::from(IMU_CSV_HEADER);
    out.push('\n');
    for (_, line) in rows {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Orientation output format: `t,joint,qw,qx,qy,qz` with `t` in seconds.
pub fn write_orientation_csv(per_joint: &[(JointId, Vec<OrientationSample>)]) -> String {
    let mut out = String::from("t,joint,qw,qx,qy,qz\n");
    for (joint, samples) in per_joint {
        for s in samples {
            let t = s.timestamp_us as f64 * 1e-6;
            let _ = writeln!(
                out,
                "{t},{},{},{},{},{}",
                joint.code(),
                s.q.w(),
                s.q.x(),
                s.q.y(),
                s.q.z()
            );
        }
    }
    out
}
