use std::path::Path;

use hydroshear_core::geometry::TriangleMesh;
use hydroshear_core::Vector3;

use super::{parse_f64, read_bytes};
use crate::error::{Result, SimError};

/// Parses ASCII or binary STL. Facet normals are ignored; the winding
/// defines the outside.
pub fn parse_stl(path: &Path, bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if bytes.len() == 84 + 50 * n {
            return Ok(parse_binary(bytes, n));
        }
    }
    let text = std::str::from_utf8(bytes).map_err(|_| SimError::parse(path, 0, "not an ASCII or binary STL file"))?;
    parse_ascii(path, text)
}

fn parse_binary(bytes: &[u8], n: usize) -> TriangleMesh {
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let triangles = (0..n)
        .map(|t| {
            let base = 84 + 50 * t + 12;
            let v = |k: usize| {
                let o = base + 12 * k;
                Vector3::new(f(o), f(o + 4), f(o + 8))
            };
            [v(0), v(1), v(2)]
        })
        .collect();
    TriangleMesh::new(triangles)
}

fn parse_ascii(path: &Path, text: &str) -> Result<TriangleMesh> {
    let mut triangles = Vec::new();
    let mut current: Vec<Vector3<f64>> = Vec::new();
    let mut in_facet = false;
    let mut seen_solid = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let Some(&kw) = tokens.first() else { continue };
        match kw {
            "solid" if !seen_solid => seen_solid = true,
            "facet" => {
                if in_facet {
                    return Err(SimError::parse(path, line, "nested facet"));
                }
                in_facet = true;
                current.clear();
            }
            "outer" | "endloop" => {}
            "vertex" => {
                if !in_facet {
                    return Err(SimError::parse(path, line, "vertex outside a facet"));
                }
                if tokens.len() != 4 {
                    return Err(SimError::parse(path, line, "vertex needs three coordinates"));
                }
                let c = |k: usize| parse_f64(path, line, tokens[k], "vertex");
                current.push(Vector3::new(c(1)?, c(2)?, c(3)?));
            }
            "endfacet" => {
                if current.len() != 3 {
                    return Err(SimError::parse(path, line, format!("facet has {} vertices, expected 3", current.len())));
                }
                triangles.push([current[0], current[1], current[2]]);
                in_facet = false;
            }
            "endsolid" => break,
            other => return Err(SimError::parse(path, line, format!("unexpected keyword `{other}`"))),
        }
    }
    if !seen_solid {
        return Err(SimError::parse(path, 1, "missing `solid`"));
    }
    if in_facet {
        return Err(SimError::parse(path, 0, "unterminated facet"));
    }
    if triangles.is_empty() {
        return Err(SimError::parse(path, 0, "mesh has no facets"));
    }
    Ok(TriangleMesh::new(triangles))
}

pub fn read_stl(path: &Path) -> Result<TriangleMesh> {
    parse_stl(path, &read_bytes(path)?)
}
