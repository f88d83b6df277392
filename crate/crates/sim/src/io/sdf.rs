use std::path::Path;

use hydroshear_core::geometry::GridSdf;
use hydroshear_core::Vector3;

use super::{read_bytes, write_atomic};
use crate::error::{Result, SimError};

const MAGIC: &[u8; 4] = b"HSDF";

/// Little-endian lattice SDF: magic, version, dims (3 x u64), min and max
/// (6 x f64), extrapolation flag, area flag and area, then the samples.
pub fn encode_sdf(g: &GridSdf) -> Vec<u8> {
    let mut out = Vec::with_capacity(90 + 8 * g.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&1u32.to_le_bytes());
    for d in g.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in g.min().iter().chain(g.max().iter()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(u8::from(g.extrapolate));
    out.push(u8::from(g.stored_surface_area().is_some()));
    out.extend_from_slice(&g.stored_surface_area().unwrap_or(0.0).to_le_bytes());
    for v in g.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'b> {
    bytes: &'b [u8],
    at: usize,
}

impl<'b> Reader<'b> {
    fn take(&mut self, n: usize) -> Option<&'b [u8]> {
        let s = self.bytes.get(self.at..self.at + n)?;
        self.at += n;
        Some(s)
    }
    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

pub fn decode_sdf(path: &Path, bytes: &[u8]) -> Result<GridSdf> {
    let bad = |m: &str| SimError::parse(path, 0, m.to_string());
    if !bytes.starts_with(MAGIC) {
        return Err(bad("not a lattice SDF file (bad magic)"));
    }
    let mut r = Reader { bytes, at: 4 };
    let version = u32::from_le_bytes(r.take(4).ok_or_else(|| bad("truncated"))?.try_into().unwrap());
    if version != 1 {
        return Err(bad(&format!("unsupported lattice SDF version {version}")));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = r.u64().ok_or_else(|| bad("truncated dims"))? as usize;
    }
    let mut b = [0.0; 6];
    for v in &mut b {
        *v = r.f64().ok_or_else(|| bad("truncated bounds"))?;
    }
    let flags = r.take(2).ok_or_else(|| bad("truncated flags"))?;
    let (extrapolate, has_area) = (flags[0] != 0, flags[1] != 0);
    let area = r.f64().ok_or_else(|| bad("truncated area"))?;
    let n = dims.iter().try_fold(1usize, |a, d| a.checked_mul(*d)).ok_or_else(|| bad("dims overflow"))?;
    if bytes.len() - r.at != n.saturating_mul(8) {
        return Err(bad(&format!(
            "payload holds {} bytes, dims declare {n} samples",
            bytes.len() - r.at
        )));
    }
    let values = (0..n).map(|_| r.f64().unwrap()).collect();
    let g = GridSdf::new(dims, Vector3::new(b[0], b[1], b[2]), Vector3::new(b[3], b[4], b[5]), values)
        .map_err(|e| bad(&e.to_string()))?;
    Ok(g.with_extrapolation(extrapolate).with_surface_area(has_area.then_some(area)))
}

pub fn read_sdf(path: &Path) -> Result<GridSdf> {
    decode_sdf(path, &read_bytes(path)?)
}

pub fn write_sdf(path: &Path, g: &GridSdf) -> Result<()> {
    write_atomic(path, &encode_sdf(g))
}
