use std::path::Path;

use hydroshear_core::geometry::SurfaceSamples;
use hydroshear_core::Vector3;

use super::{data_lines, fmt_f64, header, header_value, parse_f64, read_text, write_atomic};
use crate::error::{Result, SimError};

const MAGIC: &str = "hydroshear-samples";

pub fn format_samples(s: &SurfaceSamples) -> String {
    let mut out = format!("# {MAGIC} v1 count={}\n# px py pz nx ny nz area\n", s.len());
    for k in 0..s.len() {
        let (p, n) = (s.points[k], s.normals[k]);
        let cols = [p.x, p.y, p.z, n.x, n.y, n.z, s.areas[k]];
        out.push_str(&cols.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_samples(path: &Path, text: &str) -> Result<SurfaceSamples> {
    let fields = header(path, text, MAGIC, 1)?;
    let count: usize = header_value(path, &fields, "count")?
        .parse()
        .map_err(|_| SimError::parse(path, 1, "`count` is not a count"))?;
    let (mut points, mut normals, mut areas) = (Vec::new(), Vec::new(), Vec::new());
    for (line, l) in data_lines(text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != 7 {
            return Err(SimError::parse(path, line, format!("expected 7 columns, found {}", tokens.len())));
        }
        let mut v = [0.0; 7];
        for (k, t) in tokens.iter().enumerate() {
            v[k] = parse_f64(path, line, t, "sample")?;
        }
        let n = Vector3::new(v[3], v[4], v[5]);
        if (n.norm() - 1.0).abs() > 1e-6 {
            return Err(SimError::parse(path, line, "normal is not unit length"));
        }
        if v[6].is_nan() || v[6] <= 0.0 {
            return Err(SimError::parse(path, line, "area must be positive"));
        }
        points.push(Vector3::new(v[0], v[1], v[2]));
        normals.push(n);
        areas.push(v[6]);
    }
    if points.len() != count {
        return Err(SimError::parse(path, 0, format!("found {} samples, header declares {count}", points.len())));
    }
    SurfaceSamples::new(points, normals, areas).map_err(|e| SimError::parse(path, 0, e.to_string()))
}

pub fn read_samples(path: &Path) -> Result<SurfaceSamples> {
    parse_samples(path, &read_text(path)?)
}

pub fn write_samples(path: &Path, s: &SurfaceSamples) -> Result<()> {
    write_atomic(path, format_samples(s).as_bytes())
}
