//! Checks a container against its source mesh.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::codec::{canonical, decode_sequential, DecodedTriangleList};
use crate::container::{EncodedMeshlet, MeshletContainer, MeshletStream};
use crate::error::Result;
use crate::mesh::TriangleMesh;
use crate::wave::{decode_parallel_gts, decode_parallel_reuse, WaveConfig};

/// Failures are listed individually; at most this many are kept.
pub const MAX_REPORTED_FAILURES: usize = 64;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub meshlets: usize,
    pub decoded_triangles: usize,
    pub degenerate_triangles: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
    pub max_lookback: u32,
    pub fallback_iterations: u64,
    /// Meshlets whose decode needed at least one fallback word.
    pub fallback_meshlets: usize,
    pub shared_vertex_checks: usize,
    pub crack_mismatches: usize,
    /// Largest reconstruction error per channel, in grid steps.
    pub max_error_steps: Vec<f64>,
}

impl VerifyReport {
    fn fail(&mut self, message: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_REPORTED_FAILURES {
            self.failures.push(message);
        }
    }
}

/// Decodes one meshlet's stream sequentially; basic streams are returned as is.
pub fn decode_meshlet(m: &EncodedMeshlet) -> Result<DecodedTriangleList> {
    let v = m.vertex_count();
    Ok(match &m.stream {
        MeshletStream::Basic(t) => t
            .iter()
            .map(|&t| crate::codec::DecodedTriangle::new(t))
            .collect(),
        MeshletStream::Gts(s) => decode_sequential(s, v)?,
        MeshletStream::GtsReuse(s) => decode_sequential(s, v)?,
    })
}

pub fn verify(container: &MeshletContainer, mesh: &TriangleMesh) -> VerifyReport {
    let mut report = VerifyReport {
        meshlets: container.meshlets.len(),
        max_error_steps: vec![0.0; container.grid.channels.len()],
        ..VerifyReport::default()
    };
    if container.source_triangle_count as usize != mesh.triangle_count()
        || container.source_vertex_count as usize != mesh.vertex_count()
    {
        report.fail(format!(
            "container describes {} vertices / {} triangles, mesh has {} / {}",
            container.source_vertex_count,
            container.source_triangle_count,
            mesh.vertex_count(),
            mesh.triangle_count()
        ));
        return report;
    }
    if container.layout != *mesh.layout() {
        report.fail("attribute layout differs from the mesh".into());
        return report;
    }

    let mut remaining: HashMap<[u32; 3], usize> = HashMap::new();
    for &t in mesh.triangles() {
        *remaining.entry(canonical(t)).or_default() += 1;
    }
    let channels = container.grid.channels.len();
    let mut reconstructed: Vec<Option<Vec<u64>>> = vec![None; mesh.vertex_count()];

    for (i, m) in container.meshlets.iter().enumerate() {
        if let Some(&v) = m
            .vertex_map
            .iter()
            .find(|&&v| v as usize >= mesh.vertex_count())
        {
            report.fail(format!("meshlet {i}: vertex map entry {v} out of range"));
            continue;
        }
        let decoded = match decode_meshlet(m) {
            Ok(d) => d,
            Err(e) => {
                report.fail(format!("meshlet {i}: {e}"));
                continue;
            }
        };
        for cfg in [WaveConfig::wave32(), WaveConfig::wave64()] {
            let parallel = match &m.stream {
                MeshletStream::Basic(_) => continue,
                MeshletStream::Gts(s) => decode_parallel_gts(s, m.vertex_count(), cfg),
                MeshletStream::GtsReuse(s) => decode_parallel_reuse(s, m.vertex_count(), cfg),
            };
            match parallel {
                Ok((list, trace)) => {
                    if list != decoded {
                        let t = list
                            .iter()
                            .zip(&decoded)
                            .position(|(a, b)| a != b)
                            .unwrap_or(0);
                        report.fail(format!(
                            "meshlet {i}: wave{} decode differs at triangle {t}",
                            cfg.wave_size
                        ));
                    }
                    if cfg.wave_size == 32 {
                        report.max_lookback = report.max_lookback.max(trace.max_lookback);
                        report.fallback_iterations += trace.fallback_iterations as u64;
                        report.fallback_meshlets += (trace.fallback_iterations > 0) as usize;
                    }
                }
                Err(e) => report.fail(format!(
                    "meshlet {i}: wave{} decode failed: {e}",
                    cfg.wave_size
                )),
            }
        }

        for (t, tri) in decoded.iter().enumerate() {
            report.decoded_triangles += 1;
            if tri.degenerate {
                report.degenerate_triangles += 1;
                if matches!(m.stream, MeshletStream::Basic(_)) {
                    report.fail(format!("meshlet {i}: triangle {t} is degenerate"));
                }
                continue;
            }
            let global = canonical(tri.indices.map(|l| m.vertex_map[l as usize]));
            match remaining.get_mut(&global) {
                Some(n) if *n > 0 => *n -= 1,
                _ => report.fail(format!(
                    "meshlet {i}: triangle {t} {global:?} is not a source triangle"
                )),
            }
        }

        let back = container.grid.dequantize(&m.quantized);
        for (local, &v) in m.vertex_map.iter().enumerate() {
            let row = &back[local * channels..(local + 1) * channels];
            let source = mesh.vertex(v);
            for c in 0..channels {
                let err = (row[c] - source[c] as f64).abs();
                let grid = &container.grid.channels[c];
                report.max_error_steps[c] = report.max_error_steps[c].max(err / grid.delta);
                if err > container.grid.error_bound(c) {
                    report.fail(format!(
                        "meshlet {i}: vertex {v} channel {c} error {err:e} exceeds half a grid step"
                    ));
                }
            }
            let bits: Vec<u64> = row.iter().map(|x| x.to_bits()).collect();
            match &reconstructed[v as usize] {
                Some(prev) => {
                    report.shared_vertex_checks += 1;
                    if *prev != bits {
                        report.crack_mismatches += 1;
                        report.fail(format!(
                            "meshlet {i}: vertex {v} reconstructs differently than before"
                        ));
                    }
                }
                None => reconstructed[v as usize] = Some(bits),
            }
        }
    }

    let missing: usize = remaining.values().sum();
    if missing > 0 {
        report.fail(format!(
            "{missing} source triangles are missing from the container"
        ));
    }
    report.passed = report.failure_count == 0;
    report
}
