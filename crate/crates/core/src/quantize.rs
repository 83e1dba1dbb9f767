//! Fixed-point attribute quantization on one global grid per channel.
//!
//! Each meshlet stores the lowest grid value `L` of every channel and
//! per-vertex codes relative to it. Because every meshlet snaps to the same
//! grid, a vertex shared by two meshlets reconstructs to the same value in
//! both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::meshlet::Meshlet;

pub const DEFAULT_BITS: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    /// Global minimum `g`.
    pub min: f64,
    /// Grid spacing.
    pub delta: f64,
    /// Largest extent of the channel inside one meshlet.
    pub max_meshlet_extent: f64,
    /// Extent of the channel over the whole mesh.
    pub global_extent: f64,
    /// How many times the spacing was widened to keep rounded extents in range.
    pub guard_steps: u32,
}

impl ChannelGrid {
    pub fn is_constant(&self) -> bool {
        self.global_extent == 0.0
    }

    /// Grid index of `value`, rounded half away from zero.
    #[inline]
    pub fn code(&self, value: f32) -> u64 {
        ((value as f64 - self.min) / self.delta).round() as u64
    }

    /// One integer add already happened in `q`; this is the final multiply-add.
    #[inline]
    pub fn reconstruct(&self, q: u64) -> f64 {
        self.min + q as f64 * self.delta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationGrid {
    pub bits: u8,
    pub channels: Vec<ChannelGrid>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedMeshlet {
    /// Lowest grid index per channel.
    pub offsets: Vec<u64>,
    /// Vertex-major local codes, `channels` per vertex.
    pub codes: Vec<u32>,
}

impl QuantizedMeshlet {
    pub fn vertex_count(&self) -> usize {
        if self.offsets.is_empty() {
            0
        } else {
            self.codes.len() / self.offsets.len()
        }
    }
}

/// Bytes used to store one code of `bits` bits.
pub fn code_bytes(bits: u8) -> usize {
    match bits {
        0..=8 => 1,
        9..=16 => 2,
        _ => 4,
    }
}

fn check_bits(bits: u8) -> Result<()> {
    if !(1..=32).contains(&bits) {
        return Err(Error::Quantize(format!("bit depth {bits} outside [1, 32]")));
    }
    Ok(())
}

impl QuantizationGrid {
    /// Largest representable local code, `2^b - 1`.
    pub fn max_code(&self) -> u64 {
        (1u64 << self.bits) - 1
    }

    pub fn build(mesh: &TriangleMesh, meshlets: &[Meshlet], bits: u8) -> Result<Self> {
        check_bits(bits)?;
        if meshlets.is_empty() {
            return Err(Error::Quantize("no meshlets to quantize".into()));
        }
        let steps = ((1u64 << bits) - 1) as f64;
        let channels = (0..mesh.channel_count())
            .map(|c| {
                let value = |v: u32| mesh.vertex(v)[c] as f64;
                let mut global = (f64::INFINITY, f64::NEG_INFINITY);
                let mut widest = 0.0f64;
                for m in meshlets {
                    let (lo, hi) = m
                        .vertices
                        .iter()
                        .map(|&v| value(v))
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                            (lo.min(x), hi.max(x))
                        });
                    widest = widest.max(hi - lo);
                    global = (global.0.min(lo), global.1.max(hi));
                }
                let global_extent = global.1 - global.0;
                let delta = if widest > 0.0 {
                    widest / steps
                } else if global_extent > 0.0 {
                    global_extent / steps
                } else {
                    1.0
                };
                let mut grid = ChannelGrid {
                    min: global.0,
                    delta,
                    max_meshlet_extent: widest,
                    global_extent,
                    guard_steps: 0,
                };
                let factor = if bits == 1 {
                    2.0
                } else {
                    steps / (steps - 1.0)
                };
                while !fits(mesh, meshlets, c, &grid, bits) {
                    grid.delta *= factor;
                    grid.guard_steps += 1;
                }
                grid
            })
            .collect();
        Ok(Self { bits, channels })
    }

    /// `log2(W / delta)` per channel; `None` for constant channels.
    pub fn info_content(&self) -> Vec<Option<f64>> {
        self.channels
            .iter()
            .map(|c| (!c.is_constant()).then(|| (c.global_extent / c.delta).log2()))
            .collect()
    }

    /// Bits of precision given up by the overflow guard, per channel.
    pub fn guard_slack(&self) -> Vec<f64> {
        self.channels
            .iter()
            .map(|c| {
                if c.is_constant() {
                    0.0
                } else if c.max_meshlet_extent > 0.0 {
                    (c.delta / (c.max_meshlet_extent / (self.max_code() as f64))).log2()
                } else {
                    (c.delta / (c.global_extent / (self.max_code() as f64))).log2()
                }
            })
            .collect()
    }

    pub fn quantize_meshlet(
        &self,
        mesh: &TriangleMesh,
        meshlet: &Meshlet,
    ) -> Result<QuantizedMeshlet> {
        let n = self.channels.len();
        let mut offsets = vec![u64::MAX; n];
        let mut global = Vec::with_capacity(meshlet.vertex_count() * n);
        for &v in &meshlet.vertices {
            let attrs = mesh.vertex(v);
            for (c, grid) in self.channels.iter().enumerate() {
                let q = grid.code(attrs[c]);
                offsets[c] = offsets[c].min(q);
                global.push(q);
            }
        }
        let codes = global
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                let local = q - offsets[i % n];
                if local > self.max_code() {
                    Err(Error::Quantize(format!(
                        "local code {local} exceeds {} bits in channel {}",
                        self.bits,
                        i % n
                    )))
                } else {
                    Ok(local as u32)
                }
            })
            .collect::<Result<_>>()?;
        Ok(QuantizedMeshlet { offsets, codes })
    }

    /// Vertex-major reconstructed attributes.
    pub fn dequantize(&self, q: &QuantizedMeshlet) -> Vec<f64> {
        let n = self.channels.len();
        q.codes
            .iter()
            .enumerate()
            .map(|(i, &code)| self.channels[i % n].reconstruct(q.offsets[i % n] + code as u64))
            .collect()
    }

    /// Largest allowed reconstruction error of channel `c`: half a grid step
    /// plus floating-point slack proportional to the magnitudes involved.
    pub fn error_bound(&self, c: usize) -> f64 {
        let g = &self.channels[c];
        g.delta / 2.0 + 1e-12 * (g.min.abs() + g.global_extent + g.delta)
    }
}

fn fits(mesh: &TriangleMesh, meshlets: &[Meshlet], c: usize, grid: &ChannelGrid, bits: u8) -> bool {
    let limit = (1u64 << bits) - 1;
    meshlets.iter().all(|m| {
        let (lo, hi) = m
            .vertices
            .iter()
            .map(|&v| grid.code(mesh.vertex(v)[c]))
            .fold((u64::MAX, 0), |(lo, hi), q| (lo.min(q), hi.max(q)));
        hi - lo <= limit
    })
}
