use std::path::Path;

use hydroshear_core::Pose;

use super::{data_lines, fmt_f64, header, header_value, parse_f64, read_text, write_atomic};
use crate::error::{Result, SimError};

const MAGIC: &str = "hydroshear-trajectory";

/// Timed indenter poses in the elastomer frame.
///
/// Records are kept exactly as read so that rewriting a file reproduces it
/// byte for byte; [`TrajectoryFile::poses`] gives the validated poses.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    /// `(time_s, [qw, qx, qy, qz, tx, ty, tz])`
    pub records: Vec<(f64, [f64; 7])>,
}

impl TrajectoryFile {
    pub fn from_poses(timed: &[(f64, Pose)]) -> Self {
        Self {
            records: timed.iter().map(|(t, p)| (*t, p.to_array())).collect(),
        }
    }

    pub fn poses(&self) -> Vec<Pose> {
        // records were validated on construction from text
        self.records
            .iter()
            .map(|(_, r)| Pose::from_array(*r).expect("validated pose"))
            .collect()
    }

    pub fn timed_poses(&self) -> Vec<(f64, Pose)> {
        self.records.iter().map(|(t, _)| *t).zip(self.poses()).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|(t, _)| *t).collect()
    }
}

pub fn format_trajectory(traj: &TrajectoryFile) -> String {
    let mut s = format!("# {MAGIC} v1 frame=elastomer\n# time_s qw qx qy qz tx_m ty_m tz_m\n");
    for (t, r) in &traj.records {
        s.push_str(&fmt_f64(*t));
        for v in r {
            s.push(' ');
            s.push_str(&fmt_f64(*v));
        }
        s.push('\n');
    }
    s
}

pub fn parse_trajectory(path: &Path, text: &str) -> Result<TrajectoryFile> {
    let fields = header(path, text, MAGIC, 1)?;
    let frame = header_value(path, &fields, "frame")?;
    if frame != "elastomer" {
        return Err(SimError::parse(path, 1, format!("unsupported frame `{frame}`, expected elastomer")));
    }
    let mut records: Vec<(f64, [f64; 7])> = Vec::new();
    for (line, l) in data_lines(text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != 8 {
            return Err(SimError::parse(path, line, format!("expected 8 columns, found {}", tokens.len())));
        }
        let t = parse_f64(path, line, tokens[0], "time")?;
        let mut r = [0.0; 7];
        for (k, tok) in tokens[1..].iter().enumerate() {
            r[k] = parse_f64(path, line, tok, "pose")?;
        }
        if let Some((prev, _)) = records.last() {
            if t <= *prev {
                return Err(SimError::parse(path, line, format!("time {t} does not increase")));
            }
        }
        Pose::from_array(r).map_err(|e| SimError::parse(path, line, e.to_string()))?;
        records.push((t, r));
    }
    if records.is_empty() {
        return Err(SimError::parse(path, 0, "trajectory has no records"));
    }
    Ok(TrajectoryFile { records })
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryFile> {
    parse_trajectory(path, &read_text(path)?)
}

pub fn write_trajectory(path: &Path, traj: &TrajectoryFile) -> Result<()> {
    write_atomic(path, format_trajectory(traj).as_bytes())
}
