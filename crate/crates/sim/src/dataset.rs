//! Calibration datasets on disk: a `dataset.toml` manifest naming the
//! indenters, and one `<kind>_<id>.traj` / `<kind>_<id>.field` pair per sample.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hydroshear_core::calibration::{CalibrationSample, SampleKind};
use hydroshear_core::geometry::Sdf;
use hydroshear_core::{PixelScale, TactileGrid};
use serde::{Deserialize, Serialize};

use crate::config::{parse_toml, write_toml, IndenterSpec};
use crate::error::{Result, SimError};
use crate::io::{read_field, read_text, read_trajectory, write_field, write_trajectory, FieldEncoding, FieldFile, TrajectoryFile};

pub const MANIFEST: &str = "dataset.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Indenter for every kind without an override.
    pub indenter: IndenterSpec,
    /// Per-kind indenters, keyed by kind tag.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kinds: BTreeMap<String, IndenterSpec>,
    /// Surface sampling the observations were generated with, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<CalibrationSample>,
    /// `<kind>_<id>` per sample.
    pub names: Vec<String>,
    pub grid: TactileGrid,
    pub pixel_scale: PixelScale,
    pub sampling: Option<Sampling>,
}

/// Kind of a `<kind>_<id>` file stem, e.g. `shear_004`.
fn split_name(stem: &str) -> Option<SampleKind> {
    let (kind, id) = stem.rsplit_once('_')?;
    if id.is_empty() || !id.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    SampleKind::from_tag(kind)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.is_file() {
        return Err(SimError::Data(format!("{}: no {MANIFEST} found", dir.display())));
    }
    let manifest: Manifest = parse_toml(&manifest_path, &read_text(&manifest_path)?)?;
    let default = manifest.indenter.build(&manifest_path)?;
    let mut overrides: BTreeMap<String, Sdf> = BTreeMap::new();
    for (tag, spec) in &manifest.kinds {
        if SampleKind::from_tag(tag).is_none() {
            return Err(SimError::parse(&manifest_path, 0, format!("unknown sample kind `{tag}`")));
        }
        overrides.insert(tag.clone(), spec.build(&manifest_path)?);
    }

    let mut stems: Vec<String> = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| SimError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| SimError::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("traj") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();

    let mut samples = Vec::with_capacity(stems.len());
    let mut shared: Option<(TactileGrid, PixelScale)> = None;
    for stem in &stems {
        let kind = split_name(stem).ok_or_else(|| {
            SimError::Data(format!(
                "{}: `{stem}.traj` is not named <kind>_<id> with a known kind",
                dir.display()
            ))
        })?;
        let traj = read_trajectory(&dir.join(format!("{stem}.traj")))?;
        let field_path = dir.join(format!("{stem}.field"));
        if !field_path.is_file() {
            return Err(SimError::Data(format!("{}: `{stem}.traj` has no matching `{stem}.field`", dir.display())));
        }
        let f = read_field(&field_path)?;
        match shared {
            None => shared = Some((f.field.grid, f.pixel_scale)),
            Some((g, s)) if g != f.field.grid || s != f.pixel_scale => {
                return Err(SimError::Data(format!(
                    "{}: grid or pixel scale differs from the other samples",
                    field_path.display()
                )))
            }
            _ => {}
        }
        let indenter = overrides.get(kind.tag()).unwrap_or(&default).clone();
        samples.push(CalibrationSample::new(kind, traj.timed_poses(), f.field, indenter)?);
    }
    let (grid, pixel_scale) = shared.ok_or_else(|| SimError::Data(format!("{}: dataset has no samples", dir.display())))?;
    Ok(Dataset {
        samples,
        names: stems,
        grid,
        pixel_scale,
        sampling: manifest.sampling,
    })
}

/// Writes the manifest and one file pair per sample, numbered per kind.
/// Only analytic indenters can be named in a manifest.
pub fn write_dataset(
    dir: &Path,
    samples: &[CalibrationSample],
    pixel_scale: PixelScale,
    sampling: Option<Sampling>,
    encoding: FieldEncoding,
) -> Result<Vec<PathBuf>> {
    let first = samples.first().ok_or_else(|| SimError::Data("no samples to write".into()))?;
    let spec = |s: &Sdf| IndenterSpec::from_sdf(s).ok_or_else(|| SimError::Data("only analytic indenters can be written to a manifest".into()));
    let mut manifest = Manifest {
        indenter: spec(&first.indenter)?,
        kinds: BTreeMap::new(),
        sampling,
    };
    for s in samples {
        if s.indenter != first.indenter {
            manifest.kinds.insert(s.kind.tag().to_string(), spec(&s.indenter)?);
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    write_toml(&dir.join(MANIFEST), &manifest)?;
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    let mut written = Vec::new();
    for s in samples {
        let n = counters.entry(s.kind.tag()).or_default();
        let stem = format!("{}_{:03}", s.kind.tag(), *n);
        *n += 1;
        let traj = dir.join(format!("{stem}.traj"));
        write_trajectory(&traj, &TrajectoryFile::from_poses(&s.trajectory))?;
        let field = dir.join(format!("{stem}.field"));
        write_field(
            &field,
            &FieldFile {
                field: s.observed.clone(),
                pixel_scale,
            },
            encoding,
        )?;
        written.push(traj);
        written.push(field);
    }
    Ok(written)
}
