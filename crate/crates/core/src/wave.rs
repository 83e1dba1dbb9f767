//! Data-parallel strip decoding, simulated one lane at a time.
//!
//! Every lane decodes one triangle without reading any other lane's output.
//! With `N[0..3] = (0, 1, 2)` and `N[t + 2]` the step index of triangle `t`,
//! triangle `t` is
//!
//! * right: `(N[t + 1], P, N[t + 2])` with `P = N[j + 1]`, or `N[1]` if no `j`
//! * left:  `(P, N[t + 1], N[t + 2])` with `P = N[j + 1]`, or `N[0]` if no `j`
//!
//! where `j` is the last earlier triangle whose flag differs from flag `t`.

use serde::{Deserialize, Serialize};

use crate::bits::{countbits, firstbithigh, FlagBits};
use crate::codec::{DecodedTriangle, DecodedTriangleList, GtsReuseStream, GtsStream, StripStream};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveConfig {
    pub wave_size: usize,
    pub group_size: usize,
}

impl WaveConfig {
    pub const WORD_BITS: usize = 32;

    pub fn new(wave_size: usize, group_size: usize) -> Result<Self> {
        if !matches!(wave_size, 32 | 64) || group_size == 0 || !group_size.is_multiple_of(wave_size)
        {
            return Err(Error::Stream(format!(
                "wave size {wave_size} must be 32 or 64 and divide group size {group_size}"
            )));
        }
        Ok(Self {
            wave_size,
            group_size,
        })
    }

    pub fn wave32() -> Self {
        Self {
            wave_size: 32,
            group_size: 128,
        }
    }

    pub fn wave64() -> Self {
        Self {
            wave_size: 64,
            group_size: 128,
        }
    }
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self::wave32()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeTrace {
    /// `t - j` per triangle, or `t` when no earlier flag differs; 0 for triangle 0.
    pub lookback: Vec<u32>,
    /// Extra flag words scanned after the first 31-flag window came up empty.
    pub fallback_iterations: u32,
    pub max_lookback: u32,
}

impl DecodeTrace {
    fn record(&mut self, t: usize, lookback: Lookback) {
        let distance = match lookback.source {
            Some(j) => t - j,
            None => t,
        } as u32;
        self.lookback[t] = distance;
        self.max_lookback = self.max_lookback.max(distance);
        self.fallback_iterations += lookback.fallback_iterations;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lookback {
    /// Last triangle `j < t` with a flag different from triangle `t`'s.
    pub source: Option<usize>,
    pub fallback_iterations: u32,
}

/// Flags at positions `end, end - 1, ..., end - 31` as one word with `end`
/// at the MSB. Positions below zero read as zero.
fn window(words: &[u32], end: usize) -> u32 {
    let hi = words[end / 32] as u64;
    let lo = if end >= 32 {
        words[end / 32 - 1] as u64
    } else {
        0
    };
    let combined = hi << 32 | lo;
    (combined << (31 - end % 32) >> 32) as u32
}

/// Finds the last triangle before `t` whose flag differs from flag `t`.
///
/// Flag `t` lives at position `t - 1`. The first window puts it at the MSB
/// with the 31 preceding flags below; when those all match, earlier 32-flag
/// words are scanned one at a time.
pub fn parallel_index_lookback(flags: &FlagBits, t: usize) -> Lookback {
    assert!(t >= 1 && t <= flags.len(), "triangle {t} has no flag");
    let words = flags.words();
    let pos = t - 1;
    let current = flags.get(pos);
    let invert = if current { u32::MAX } else { 0 };

    // Positions available below `pos`, capped to the 31 window slots.
    let valid = pos.min(31);
    let mask = if valid == 0 {
        0
    } else {
        (u32::MAX >> (32 - valid)) << (31 - valid)
    };
    if let Some(k) = firstbithigh((window(words, pos) ^ invert) & mask) {
        // Bit k sits 31 - k positions below the current flag.
        return Lookback {
            source: Some(t - (31 - k as usize)),
            fallback_iterations: 0,
        };
    }

    let mut iterations = 0;
    let mut end = pos as isize - 32;
    while end >= 0 {
        iterations += 1;
        let e = end as usize;
        let valid = (e + 1).min(32);
        let mask = if valid == 32 {
            u32::MAX
        } else {
            (u32::MAX >> (32 - valid)) << (32 - valid)
        };
        if let Some(k) = firstbithigh((window(words, e) ^ invert) & mask) {
            return Lookback {
                source: Some(e - (31 - k as usize) + 1),
                fallback_iterations: iterations,
            };
        }
        end -= 32;
    }
    Lookback {
        source: None,
        fallback_iterations: iterations,
    }
}

/// Linear backward scan; the oracle for [`parallel_index_lookback`].
pub fn lookback_linear(flags: &FlagBits, t: usize) -> Option<usize> {
    let current = flags.get(t - 1);
    (1..t).rev().find(|&j| flags.get(j - 1) != current)
}

/// Number of set increment flags over triangles `1..=t`, read with one
/// `countbits` per word.
pub fn increments_through(increments: &FlagBits, t: usize) -> usize {
    let words = increments.words();
    let full = t / 32;
    let mut s: usize = words[..full].iter().map(|&w| countbits(w) as usize).sum();
    let rest = t % 32;
    if rest > 0 {
        s += countbits(words[full] & (u32::MAX >> (32 - rest))) as usize;
    }
    s
}

fn decode_lanes(
    flags: &FlagBits,
    triangle_count: usize,
    cfg: WaveConfig,
    index: impl Fn(usize) -> Result<u8>,
) -> Result<(DecodedTriangleList, DecodeTrace)> {
    // N[k] for k >= 3 is the step index of triangle k - 2.
    let n = |k: usize| -> Result<u8> {
        if k < 3 {
            Ok(k as u8)
        } else {
            index(k - 2)
        }
    };
    let mut out = vec![DecodedTriangle::new([0, 1, 2]); triangle_count];
    let mut trace = DecodeTrace {
        lookback: vec![0; triangle_count],
        ..DecodeTrace::default()
    };
    for wave_start in (1..triangle_count).step_by(cfg.wave_size) {
        let wave_end = (wave_start + cfg.wave_size).min(triangle_count);
        for t in wave_start..wave_end {
            let lb = parallel_index_lookback(flags, t);
            let right = flags.get(t - 1);
            let propagated = match lb.source {
                Some(j) => n(j + 1)?,
                None if right => 1,
                None => 0,
            };
            let (prev, new) = (n(t + 1)?, n(t + 2)?);
            out[t] = DecodedTriangle::new(if right {
                [prev, propagated, new]
            } else {
                [propagated, prev, new]
            });
            trace.record(t, lb);
        }
    }
    Ok((out, trace))
}

pub fn decode_parallel_gts(
    stream: &GtsStream,
    vertex_count: usize,
    cfg: WaveConfig,
) -> Result<(DecodedTriangleList, DecodeTrace)> {
    stream.check_shape(vertex_count)?;
    decode_lanes(&stream.flags, stream.triangle_count, cfg, |t| {
        Ok(stream.indices[t - 1])
    })
}

pub fn decode_parallel_reuse(
    stream: &GtsReuseStream,
    vertex_count: usize,
    cfg: WaveConfig,
) -> Result<(DecodedTriangleList, DecodeTrace)> {
    stream.check_shape(vertex_count)?;
    decode_lanes(&stream.flags, stream.triangle_count, cfg, |t| {
        let s = increments_through(&stream.increments, t);
        if stream.increments.get(t - 1) {
            u8::try_from(2 + s)
                .map_err(|_| Error::Stream(format!("increment index {} exceeds 8 bits", 2 + s)))
        } else {
            let pos = t - s - 1;
            stream
                .reuse
                .get(pos)
                .copied()
                .ok_or_else(|| Error::Stream(format!("reuse position {pos} out of range")))
        }
    })
}
