//! Generalized triangle strip encoding of meshlets.
//!
//! Decoding convention: triangle 0 is `(0, 1, 2)`. For `t >= 1` with the
//! previous triangle `(a, b, c)` and step index `w`, a right step emits
//! `(c, b, w)` and a left step emits `(a, c, w)`. Both reverse the shared
//! edge of the previous triangle, so winding is preserved without a parity
//! flip.
//!
//! Strips inside one meshlet are joined by four degenerate triangles. Local
//! vertices are relabeled so that they first appear in ascending order, which
//! is what lets the reuse variant replace most indices by a single bit.

use serde::{Deserialize, Serialize};

use crate::bits::{words_for, FlagBits};
use crate::error::{Error, Result};
use crate::meshlet::Meshlet;
use crate::stripify::DualGraph;

/// Which edge of the previous triangle the strip continues across.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Edge `(c, a)`: flag bit 0.
    Left,
    /// Edge `(b, c)`: flag bit 1.
    Right,
}

impl Side {
    pub fn bit(self) -> bool {
        matches!(self, Side::Right)
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Side::Right
        } else {
            Side::Left
        }
    }
}

/// One strip step: the side taken and the newly referenced local index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub side: Side,
    pub index: u8,
}

impl Step {
    pub fn new(side: Side, index: u8) -> Self {
        Self { side, index }
    }
}

/// Applies one decode step to the previous triangle.
#[inline]
pub fn apply_step(prev: [u8; 3], step: Step) -> [u8; 3] {
    let [a, b, c] = prev;
    match step.side {
        Side::Right => [c, b, step.index],
        Side::Left => [a, c, step.index],
    }
}

/// The four degenerate steps joining two strips, followed by the step that
/// lands on the next strip's first triangle `(p, q, r)`.
///
/// From `(a, b, c)` this decodes to `(c, b, c)`, `(c, c, q)`, `(c, q, q)`,
/// `(q, q, p)` and then `(p, q, r)`.
pub fn emit_restart(current: [u8; 3], next: [u8; 3]) -> [Step; 5] {
    let c = current[2];
    let [p, q, r] = next;
    [
        Step::new(Side::Right, c),
        Step::new(Side::Left, q),
        Step::new(Side::Left, q),
        Step::new(Side::Right, p),
        Step::new(Side::Right, r),
    ]
}

/// Triangles needed to emit `triangles` original triangles in `strips` strips.
pub fn strip_length(triangles: usize, strips: usize) -> usize {
    triangles + 4 * strips.saturating_sub(1)
}

/// A meshlet's strips as a step sequence after the implicit `(0, 1, 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripWalk {
    pub steps: Vec<Step>,
    pub strips: usize,
}

impl StripWalk {
    /// `T'`, including degenerate triangles.
    pub fn triangle_count(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn restart_count(&self) -> usize {
        self.strips.saturating_sub(1)
    }

    pub fn degenerate_count(&self) -> usize {
        4 * self.restart_count()
    }
}

/// A meshlet relabeled for ascending first appearance, with its walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reordered {
    pub meshlet: Meshlet,
    pub walk: StripWalk,
    /// New local id of each old local id.
    pub permutation: Vec<u8>,
}

fn rotate(tri: [u8; 3], r: u8) -> [u8; 3] {
    let r = r as usize;
    [tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]]
}

/// Walks the strip paths in the meshlet's current labels.
fn raw_walk(meshlet: &Meshlet, g: &DualGraph, paths: &[Vec<u32>]) -> Result<([u8; 3], Vec<Step>)> {
    let t = meshlet.triangle_count();
    let mut covered = vec![false; t];
    for &node in paths.iter().flatten() {
        if node as usize >= t || std::mem::replace(&mut covered[node as usize], true) {
            return Err(Error::Stream(format!(
                "paths do not cover node {node} exactly once"
            )));
        }
    }
    if covered.iter().any(|&c| !c) || paths.iter().any(|p| p.is_empty()) {
        return Err(Error::Stream("paths do not cover every triangle".into()));
    }

    // Parallel dual edges are possible; never leave through the entry edge.
    let link = |from: u32, to: u32, entry: Option<u8>| -> Result<u32> {
        g.incident(from)
            .iter()
            .copied()
            .find(|&e| g.edge(e).other(from) == to && Some(g.edge(e).slot_at(from).0) != entry)
            .ok_or_else(|| Error::Stream(format!("path nodes {from} and {to} are not adjacent")))
    };

    let mut first = None;
    let mut steps = Vec::with_capacity(t + 4 * paths.len());
    let mut prev = [0u8; 3];
    for path in paths {
        let head = path[0];
        let rotation = match path.get(1) {
            // Keep the stored rotation unless the exit edge is (a, b).
            Some(&next) => match g.edge(link(head, next, None)?).slot_at(head).0 {
                0 => 2,
                _ => 0,
            },
            None => 0,
        };
        let start = rotate(meshlet.triangles[head as usize], rotation);
        match first {
            None => first = Some(start),
            Some(_) => steps.extend(emit_restart(prev, start)),
        }
        prev = start;
        let mut prev_rotation = rotation;
        let mut entry_slot = None;
        for w in path.windows(2) {
            let e = *g.edge(link(w[0], w[1], entry_slot)?);
            let exit = e.slot_at(w[0]).0;
            let side = if exit == (prev_rotation + 1) % 3 {
                Side::Right
            } else if exit == (prev_rotation + 2) % 3 {
                Side::Left
            } else {
                return Err(Error::Stream(format!(
                    "strip re-enters triangle {} on its entry edge",
                    w[0]
                )));
            };
            let entry = e.slot_at(w[1]).0;
            let decoded = rotate(meshlet.triangles[w[1] as usize], entry);
            let step = Step::new(side, decoded[2]);
            if apply_step(prev, step) != decoded {
                return Err(Error::Stream(format!(
                    "triangles {} and {} are not consistently oriented",
                    w[0], w[1]
                )));
            }
            steps.push(step);
            prev = decoded;
            prev_rotation = entry;
            entry_slot = Some(entry);
        }
    }
    Ok((first.expect("meshlet has at least one triangle"), steps))
}

/// Relabels local vertices so that walking the encoded strip (restarts
/// included) introduces ids `0, 1, 2, ...` in order.
pub fn reorder_ascending(
    meshlet: &Meshlet,
    g: &DualGraph,
    paths: &[Vec<u32>],
) -> Result<Reordered> {
    let (first, steps) = raw_walk(meshlet, g, paths)?;
    let v = meshlet.vertex_count();
    let mut permutation = vec![u8::MAX; v];
    let mut next = 0usize;
    for i in first.iter().copied().chain(steps.iter().map(|s| s.index)) {
        if permutation[i as usize] == u8::MAX {
            permutation[i as usize] = next as u8;
            next += 1;
        }
    }
    if next != v {
        return Err(Error::Stream(format!(
            "meshlet has {} unreferenced vertices",
            v - next
        )));
    }
    let steps = steps
        .into_iter()
        .map(|s| Step::new(s.side, permutation[s.index as usize]))
        .collect();
    Ok(Reordered {
        meshlet: meshlet.permuted(&permutation),
        walk: StripWalk {
            steps,
            strips: paths.len(),
        },
        permutation,
    })
}

/// Strip with one explicit 8-bit index per triangle after the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtsStream {
    pub triangle_count: usize,
    /// Flag of triangle `t` at bit `t - 1`.
    pub flags: FlagBits,
    pub indices: Vec<u8>,
}

/// Strip with increment flags and a buffer of reused indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtsReuseStream {
    pub triangle_count: usize,
    pub flags: FlagBits,
    /// 1: the step index is the next new vertex; 0: read the reuse buffer.
    pub increments: FlagBits,
    pub reuse: Vec<u8>,
}

fn check_length(walk: &StripWalk, max_triangles: usize) -> Result<()> {
    if walk.triangle_count() > max_triangles {
        return Err(Error::StripOverflow {
            needed: walk.triangle_count(),
            limit: max_triangles,
        });
    }
    Ok(())
}

pub fn encode_gts(walk: &StripWalk, max_triangles: usize) -> Result<GtsStream> {
    check_length(walk, max_triangles)?;
    Ok(GtsStream {
        triangle_count: walk.triangle_count(),
        flags: walk.steps.iter().map(|s| s.side.bit()).collect(),
        indices: walk.steps.iter().map(|s| s.index).collect(),
    })
}

/// Requires the walk of a [`reorder_ascending`] result.
pub fn encode_gts_reuse(walk: &StripWalk, max_triangles: usize) -> Result<GtsReuseStream> {
    check_length(walk, max_triangles)?;
    let mut next = 3usize;
    let mut increments = FlagBits::new();
    let mut reuse = Vec::new();
    for step in &walk.steps {
        let i = step.index as usize;
        if i == next {
            increments.push(true);
            next += 1;
        } else if i < next {
            increments.push(false);
            reuse.push(step.index);
        } else {
            return Err(Error::Stream(format!(
                "index {i} skips ahead of next new vertex {next}; walk is not ascending"
            )));
        }
    }
    Ok(GtsReuseStream {
        triangle_count: walk.triangle_count(),
        flags: walk.steps.iter().map(|s| s.side.bit()).collect(),
        increments,
        reuse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodedTriangle {
    pub indices: [u8; 3],
    pub degenerate: bool,
}

impl DecodedTriangle {
    pub fn new(indices: [u8; 3]) -> Self {
        let [a, b, c] = indices;
        Self {
            indices,
            degenerate: a == b || b == c || c == a,
        }
    }
}

pub type DecodedTriangleList = Vec<DecodedTriangle>;

/// Rotation of an oriented triangle that starts at its smallest index, so
/// cyclically equal triples compare equal.
pub fn canonical(tri: [u32; 3]) -> [u32; 3] {
    let k = (0..3).min_by_key(|&k| tri[k]).unwrap();
    [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]]
}

/// Common read access for both strip streams.
pub trait StripStream {
    fn triangle_count(&self) -> usize;
    fn flags(&self) -> &FlagBits;
    /// Checks buffer lengths against `T'` and indices against `V`.
    fn check_shape(&self, vertex_count: usize) -> Result<()>;
    /// Step indices of triangles `1..T'`, reconstructed sequentially.
    fn step_indices(&self) -> Result<Vec<u8>>;
}

fn check_common(triangle_count: usize, flags: &FlagBits, vertex_count: usize) -> Result<()> {
    if triangle_count == 0 {
        return Err(Error::Stream("stream has no triangles".into()));
    }
    if !(3..=256).contains(&vertex_count) {
        return Err(Error::Stream(format!(
            "vertex count {vertex_count} outside [3, 256]"
        )));
    }
    if flags.len() != triangle_count - 1 {
        return Err(Error::Stream(format!(
            "{} L/R flags for {} triangles",
            flags.len(),
            triangle_count
        )));
    }
    Ok(())
}

impl StripStream for GtsStream {
    fn triangle_count(&self) -> usize {
        self.triangle_count
    }

    fn flags(&self) -> &FlagBits {
        &self.flags
    }

    fn check_shape(&self, vertex_count: usize) -> Result<()> {
        check_common(self.triangle_count, &self.flags, vertex_count)?;
        if self.indices.len() != self.triangle_count - 1 {
            return Err(Error::Stream(format!(
                "{} explicit indices for {} triangles",
                self.indices.len(),
                self.triangle_count
            )));
        }
        if let Some(&i) = self.indices.iter().find(|&&i| i as usize >= vertex_count) {
            return Err(Error::Stream(format!(
                "index {i} out of range for {vertex_count} vertices"
            )));
        }
        Ok(())
    }

    fn step_indices(&self) -> Result<Vec<u8>> {
        Ok(self.indices.clone())
    }
}

impl StripStream for GtsReuseStream {
    fn triangle_count(&self) -> usize {
        self.triangle_count
    }

    fn flags(&self) -> &FlagBits {
        &self.flags
    }

    fn check_shape(&self, vertex_count: usize) -> Result<()> {
        check_common(self.triangle_count, &self.flags, vertex_count)?;
        if self.increments.len() != self.triangle_count - 1 {
            return Err(Error::Stream(format!(
                "{} increment flags for {} triangles",
                self.increments.len(),
                self.triangle_count
            )));
        }
        let ones = self.increments.count_ones();
        if ones + 3 != vertex_count {
            return Err(Error::Stream(format!(
                "{ones} increment flags introduce {} vertices, meshlet has {vertex_count}",
                ones + 3
            )));
        }
        if self.reuse.len() != self.triangle_count - 1 - ones {
            return Err(Error::Stream(format!(
                "reuse buffer has {} entries, flags need {}",
                self.reuse.len(),
                self.triangle_count - 1 - ones
            )));
        }
        if let Some(&i) = self.reuse.iter().find(|&&i| i as usize >= vertex_count) {
            return Err(Error::Stream(format!(
                "reuse index {i} out of range for {vertex_count} vertices"
            )));
        }
        Ok(())
    }

    fn step_indices(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.triangle_count.saturating_sub(1));
        let mut ones = 0usize;
        for t in 1..self.triangle_count {
            if self.increments.get(t - 1) {
                ones += 1;
                let w = 2 + ones;
                if w > u8::MAX as usize {
                    return Err(Error::Stream(format!("increment index {w} exceeds 8 bits")));
                }
                out.push(w as u8);
            } else {
                let pos = t - ones - 1;
                let &w = self
                    .reuse
                    .get(pos)
                    .ok_or_else(|| Error::Stream(format!("reuse position {pos} out of range")))?;
                out.push(w);
            }
        }
        Ok(out)
    }
}

/// Reference decoder: one triangle after another.
pub fn decode_sequential<S: StripStream + ?Sized>(
    stream: &S,
    vertex_count: usize,
) -> Result<DecodedTriangleList> {
    stream.check_shape(vertex_count)?;
    let indices = stream.step_indices()?;
    let mut out = Vec::with_capacity(stream.triangle_count());
    let mut prev = [0u8, 1, 2];
    out.push(DecodedTriangle::new(prev));
    for (t, &w) in indices.iter().enumerate() {
        if w as usize >= vertex_count {
            return Err(Error::Stream(format!(
                "index {w} out of range for {vertex_count} vertices"
            )));
        }
        let step = Step::new(Side::from_bit(stream.flags().get(t)), w);
        prev = apply_step(prev, step);
        out.push(DecodedTriangle::new(prev));
    }
    Ok(out)
}

/// Encoded bits of a GTS stream: 8 bits per explicit index plus padded flag words.
pub fn gts_size_bits(stream: &GtsStream) -> usize {
    let steps = stream.triangle_count - 1;
    8 * steps + 32 * words_for(steps)
}

/// Two padded flag-word arrays plus 8 bits per reused index.
pub fn gts_reuse_size_bits(stream: &GtsReuseStream) -> usize {
    let steps = stream.triangle_count - 1;
    2 * 32 * words_for(steps) + 8 * stream.reuse.len()
}

/// Bits per original (non-degenerate) triangle.
pub fn bits_per_triangle(bits: usize, triangles: usize) -> f64 {
    bits as f64 / triangles as f64
}
