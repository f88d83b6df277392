use std::path::Path;

use hydroshear_core::{FieldUnit, MarkerField, PixelScale, TactileGrid};

use super::{data_lines, fmt_f64, header, header_value, parse_f64, read_bytes, write_atomic};
use crate::error::{Result, SimError};

const MAGIC: &str = "hydroshear-field";
const BINARY_MAGIC: &[u8; 4] = b"HSFB";

/// A marker field together with the pixel scale of the camera it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub field: MarkerField,
    pub pixel_scale: PixelScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldEncoding {
    #[default]
    Text,
    /// Same header, then `dx, dy` as little-endian f32 per taxel.
    Binary,
}

fn header_fields(f: &FieldFile) -> String {
    let g = &f.field.grid;
    format!(
        "rows={} cols={} unit={} pixel_scale={} origin={},{} spacing={},{} plane_height={}",
        g.rows,
        g.cols,
        f.field.unit.tag(),
        fmt_f64(f.pixel_scale.value()),
        fmt_f64(g.origin[0]),
        fmt_f64(g.origin[1]),
        fmt_f64(g.spacing[0]),
        fmt_f64(g.spacing[1]),
        fmt_f64(g.plane_height),
    )
}

pub fn format_field_text(f: &FieldFile) -> String {
    let mut s = format!("# {MAGIC} v1 {}\n# x_m y_m dx dy\n", header_fields(f));
    for (q, v) in f.field.vectors.iter().enumerate() {
        let [x, y] = f.field.grid.point_xy(q);
        s.push_str(&format!("{} {} {} {}\n", fmt_f64(x), fmt_f64(y), fmt_f64(v[0]), fmt_f64(v[1])));
    }
    s
}

fn format_field_binary(f: &FieldFile) -> Vec<u8> {
    let head = format!("# {MAGIC} v1 {}", header_fields(f));
    let mut out = Vec::with_capacity(12 + head.len() + 8 * f.field.vectors.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&(head.len() as u32).to_le_bytes());
    out.extend_from_slice(head.as_bytes());
    for v in &f.field.vectors {
        out.extend_from_slice(&(v[0] as f32).to_le_bytes());
        out.extend_from_slice(&(v[1] as f32).to_le_bytes());
    }
    out
}

fn pair(path: &Path, v: &str, key: &str) -> Result<[f64; 2]> {
    let (a, b) = v
        .split_once(',')
        .ok_or_else(|| SimError::parse(path, 1, format!("`{key}` needs two comma-separated values")))?;
    Ok([parse_f64(path, 1, a, key)?, parse_f64(path, 1, b, key)?])
}

fn parse_header(path: &Path, first_line: &str) -> Result<(TactileGrid, FieldUnit, PixelScale)> {
    let fields = header(path, first_line, MAGIC, 1)?;
    let get = |k: &str| header_value(path, &fields, k);
    let count = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| SimError::parse(path, 1, format!("`{k}` is not a count")))
    };
    let unit_tag = get("unit")?;
    let unit = FieldUnit::from_tag(unit_tag)
        .ok_or_else(|| SimError::parse(path, 1, format!("unknown unit `{unit_tag}`, expected m or px")))?;
    let scale = PixelScale::new(parse_f64(path, 1, get("pixel_scale")?, "pixel_scale")?)
        .map_err(|e| SimError::parse(path, 1, e.to_string()))?;
    let grid = TactileGrid {
        rows: count("rows")?,
        cols: count("cols")?,
        origin: pair(path, get("origin")?, "origin")?,
        spacing: pair(path, get("spacing")?, "spacing")?,
        plane_height: parse_f64(path, 1, get("plane_height")?, "plane_height")?,
    };
    grid.validate().map_err(|e| SimError::parse(path, 1, e.to_string()))?;
    Ok((grid, unit, scale))
}

pub fn parse_field_text(path: &Path, text: &str) -> Result<FieldFile> {
    let (grid, unit, pixel_scale) = parse_header(path, text)?;
    let mut vectors = Vec::with_capacity(grid.len());
    for (line, l) in data_lines(text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != 4 {
            return Err(SimError::parse(path, line, format!("expected 4 columns, found {}", tokens.len())));
        }
        let q = vectors.len();
        if q >= grid.len() {
            return Err(SimError::parse(path, line, format!("more than rows*cols = {} records", grid.len())));
        }
        let [gx, gy] = grid.point_xy(q);
        let x = parse_f64(path, line, tokens[0], "x")?;
        let y = parse_f64(path, line, tokens[1], "y")?;
        let tol = 1e-12 + 1e-9 * gx.abs().max(gy.abs());
        if (x - gx).abs() > tol || (y - gy).abs() > tol {
            return Err(SimError::parse(path, line, format!("position ({x}, {y}) is not grid point {q} ({gx}, {gy})")));
        }
        vectors.push([parse_f64(path, line, tokens[2], "dx")?, parse_f64(path, line, tokens[3], "dy")?]);
    }
    if vectors.len() != grid.len() {
        return Err(SimError::parse(
            path,
            0,
            format!("found {} records, header declares rows*cols = {}", vectors.len(), grid.len()),
        ));
    }
    Ok(FieldFile {
        field: MarkerField { grid, vectors, unit },
        pixel_scale,
    })
}

fn parse_field_binary(path: &Path, bytes: &[u8]) -> Result<FieldFile> {
    let bad = |m: &str| SimError::parse(path, 0, m.to_string());
    if bytes.len() < 12 {
        return Err(bad("truncated binary field header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != 1 {
        return Err(bad(&format!("unsupported binary field version {version}")));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let head = bytes.get(12..12 + n).ok_or_else(|| bad("truncated binary field header"))?;
    let head = std::str::from_utf8(head).map_err(|_| bad("header is not UTF-8"))?;
    let (grid, unit, pixel_scale) = parse_header(path, head)?;
    let payload = &bytes[12 + n..];
    if payload.len() != grid.len() * 8 {
        return Err(bad(&format!(
            "payload holds {} bytes, header declares {} taxels",
            payload.len(),
            grid.len()
        )));
    }
    let vectors = payload
        .chunks_exact(8)
        .map(|c| {
            let x = f32::from_le_bytes(c[0..4].try_into().unwrap());
            let y = f32::from_le_bytes(c[4..8].try_into().unwrap());
            [x as f64, y as f64]
        })
        .collect();
    Ok(FieldFile {
        field: MarkerField { grid, vectors, unit },
        pixel_scale,
    })
}

/// Reads either encoding, told apart by the leading bytes.
pub fn read_field(path: &Path) -> Result<FieldFile> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        return parse_field_binary(path, &bytes);
    }
    let text = String::from_utf8(bytes).map_err(|_| SimError::parse(path, 0, "field file is neither text nor binary"))?;
    parse_field_text(path, &text)
}

pub fn write_field(path: &Path, f: &FieldFile, encoding: FieldEncoding) -> Result<()> {
    match encoding {
        FieldEncoding::Text => write_atomic(path, format_field_text(f).as_bytes()),
        FieldEncoding::Binary => write_atomic(path, &format_field_binary(f)),
    }
}
