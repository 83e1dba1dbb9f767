//! Wavefront OBJ ingest and export.
//!
//! Supports `v`, `vn`, `vt` and `f` records with 1-based indices. Polygons are
//! fan-triangulated from their first corner. Vertices are deduplicated on the
//! exact bit pattern of their attribute vector.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::math;
use crate::mesh::{AttributeLayout, Semantic, TriangleMesh};

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_obj(BufReader::new(file), path)
}

#[derive(Clone, Copy)]
struct Corner {
    v: usize,
    vt: Option<usize>,
    vn: Option<usize>,
}

/// Parses OBJ text; `origin` is only used for diagnostics.
pub fn parse_obj(reader: impl BufRead, origin: &Path) -> Result<TriangleMesh> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut positions: Vec<[f32; 3]> = Vec::new();
    let mut normals: Vec<[f32; 3]> = Vec::new();
    let mut texcoords: Vec<[f32; 2]> = Vec::new();
    // (line number, corners) per face, resolved once all records are known.
    let mut faces: Vec<(usize, Vec<Corner>)> = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match tag {
            "v" => {
                let xyz = parse_floats::<3>(&mut tokens, 3).map_err(|m| err(lineno, m))?;
                positions.push(xyz);
            }
            "vn" => {
                let xyz = parse_floats::<3>(&mut tokens, 3).map_err(|m| err(lineno, m))?;
                normals.push(xyz);
            }
            "vt" => {
                // A third (w) component is allowed and ignored.
                let uv = parse_floats::<2>(&mut tokens, 2).map_err(|m| err(lineno, m))?;
                texcoords.push(uv);
            }
            "f" => {
                let corners = tokens
                    .map(|tok| parse_corner(tok).map_err(|m| err(lineno, m)))
                    .collect::<Result<Vec<_>>>()?;
                if corners.len() < 3 {
                    return Err(err(lineno, format!("face has {} corners", corners.len())));
                }
                faces.push((lineno, corners));
            }
            // Grouping, materials and smoothing carry no geometry.
            "o" | "g" | "s" | "usemtl" | "mtllib" | "l" | "p" => {}
            other => return Err(err(lineno, format!("unknown record {other:?}"))),
        }
    }

    let has_vn = faces.iter().any(|(_, c)| c.iter().any(|c| c.vn.is_some()));
    let has_vt = faces.iter().any(|(_, c)| c.iter().any(|c| c.vt.is_some()));
    for (lineno, corners) in &faces {
        for c in corners {
            if c.v >= positions.len() {
                return Err(err(
                    *lineno,
                    format!("position index {} out of range", c.v + 1),
                ));
            }
            match c.vn {
                Some(n) if n >= normals.len() => {
                    return Err(err(*lineno, format!("normal index {} out of range", n + 1)))
                }
                None if has_vn => {
                    return Err(err(
                        *lineno,
                        "corner without normal in a file with normals".into(),
                    ))
                }
                _ => {}
            }
            match c.vt {
                Some(t) if t >= texcoords.len() => {
                    return Err(err(
                        *lineno,
                        format!("texcoord index {} out of range", t + 1),
                    ))
                }
                None if has_vt => {
                    return Err(err(
                        *lineno,
                        "corner without texcoord in a file with texcoords".into(),
                    ))
                }
                _ => {}
            }
        }
    }

    // Fan-triangulate at corner-tuple level.
    let mut corner_tris: Vec<[Corner; 3]> = Vec::new();
    for (_, corners) in &faces {
        for k in 1..corners.len() - 1 {
            let tri = [corners[0], corners[k], corners[k + 1]];
            // Index-degenerate triangles (repeated position) carry no surface.
            if tri[0].v == tri[1].v || tri[1].v == tri[2].v || tri[2].v == tri[0].v {
                log::warn!("dropping index-degenerate triangle in {}", origin.display());
                continue;
            }
            corner_tris.push(tri);
        }
    }

    let computed_normals = if has_vn {
        Vec::new()
    } else {
        area_weighted_normals(&positions, &corner_tris)
    };

    let layout = if has_vt {
        AttributeLayout::position_normal_texcoord()
    } else {
        AttributeLayout::position_normal()
    };
    let n = layout.channel_count();

    let mut attributes: Vec<f32> = Vec::new();
    let mut lookup: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut triangles = Vec::with_capacity(corner_tris.len());
    let mut scratch = Vec::with_capacity(n);
    for tri in &corner_tris {
        let mut out = [0u32; 3];
        for (k, c) in tri.iter().enumerate() {
            scratch.clear();
            scratch.extend_from_slice(&positions[c.v]);
            match c.vn {
                Some(i) => scratch.extend_from_slice(&normals[i]),
                None => scratch.extend_from_slice(&computed_normals[c.v]),
            }
            if let Some(i) = c.vt {
                scratch.extend_from_slice(&texcoords[i]);
            }
            let key: Vec<u32> = scratch.iter().map(|v| v.to_bits()).collect();
            let next = (attributes.len() / n) as u32;
            let id = *lookup.entry(key).or_insert_with(|| {
                attributes.extend_from_slice(&scratch);
                next
            });
            out[k] = id;
        }
        // Distinct positions can still collapse to one vertex if their values match.
        if out[0] == out[1] || out[1] == out[2] || out[2] == out[0] {
            continue;
        }
        triangles.push(out);
    }

    TriangleMesh::new(layout, attributes, triangles)
}

fn parse_floats<const N: usize>(
    tokens: &mut std::str::SplitWhitespace<'_>,
    required: usize,
) -> std::result::Result<[f32; N], String> {
    let mut out = [0.0f32; N];
    for (i, slot) in out.iter_mut().enumerate() {
        match tokens.next() {
            Some(tok) => {
                *slot = tok
                    .parse::<f32>()
                    .map_err(|_| format!("invalid number {tok:?}"))?;
                if !slot.is_finite() {
                    return Err(format!("non-finite number {tok:?}"));
                }
            }
            None if i < required => return Err(format!("expected {required} numbers")),
            None => break,
        }
    }
    Ok(out)
}

fn parse_index(tok: &str, what: &str) -> std::result::Result<usize, String> {
    let value: i64 = tok
        .parse()
        .map_err(|_| format!("invalid {what} index {tok:?}"))?;
    if value < 0 {
        return Err(format!("negative {what} index {value} is not supported"));
    }
    if value == 0 {
        return Err(format!(
            "{what} index 0 is invalid (OBJ indices are 1-based)"
        ));
    }
    Ok(value as usize - 1)
}

fn parse_corner(tok: &str) -> std::result::Result<Corner, String> {
    let mut parts = tok.split('/');
    let v = parse_index(parts.next().unwrap_or(""), "position")?;
    let vt = match parts.next() {
        Some("") | None => None,
        Some(s) => Some(parse_index(s, "texcoord")?),
    };
    let vn = match parts.next() {
        Some("") | None => None,
        Some(s) => Some(parse_index(s, "normal")?),
    };
    if parts.next().is_some() {
        return Err(format!("malformed face corner {tok:?}"));
    }
    Ok(Corner { v, vt, vn })
}

fn area_weighted_normals(positions: &[[f32; 3]], tris: &[[Corner; 3]]) -> Vec<[f32; 3]> {
    let mut acc = vec![[0.0f64; 3]; positions.len()];
    let p = |i: usize| positions[i].map(|x| x as f64);
    for tri in tris {
        let (a, b, c) = (p(tri[0].v), p(tri[1].v), p(tri[2].v));
        // Cross product magnitude is twice the area: area weighting for free.
        let area = math::cross(math::sub(b, a), math::sub(c, a));
        for corner in tri {
            acc[corner.v] = math::add(acc[corner.v], area);
        }
    }
    acc.into_iter()
        .map(|n| math::normalize(n).map_or([0.0; 3], |n| n.map(|x| x as f32)))
        .collect()
}

/// Writes `mesh` as OBJ with one `v`/`vn`/`vt` record per mesh vertex.
///
/// Values use the shortest decimal that parses back to the same `f32`, so
/// [`load_obj`] reproduces the buffers exactly.
pub fn write_obj(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_obj_to(mesh, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_obj_to(mesh: &TriangleMesh, out: &mut impl Write) -> Result<()> {
    let layout = mesh.layout();
    let pos = layout.offset_of(Semantic::Position).unwrap_or(0);
    let nrm = layout.offset_of(Semantic::Normal);
    let tex = layout.offset_of(Semantic::Texcoord);
    for v in 0..mesh.vertex_count() as u32 {
        let a = mesh.vertex(v);
        writeln!(out, "v {} {} {}", a[pos], a[pos + 1], a[pos + 2])?;
        if let Some(o) = nrm {
            writeln!(out, "vn {} {} {}", a[o], a[o + 1], a[o + 2])?;
        }
        if let Some(o) = tex {
            writeln!(out, "vt {} {}", a[o], a[o + 1])?;
        }
    }
    for tri in mesh.triangles() {
        let corner = |i: u32| {
            let i = i + 1;
            match (tex.is_some(), nrm.is_some()) {
                (true, true) => format!("{i}/{i}/{i}"),
                (true, false) => format!("{i}/{i}"),
                (false, true) => format!("{i}//{i}"),
                (false, false) => format!("{i}"),
            }
        };
        writeln!(
            out,
            "f {} {} {}",
            corner(tri[0]),
            corner(tri[1]),
            corner(tri[2])
        )?;
    }
    Ok(())
}
