//! Indexed triangle meshes, attribute layouts and edge adjacency.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantic {
    Position,
    Normal,
    Texcoord,
    Other,
}

impl Semantic {
    pub fn code(self) -> u8 {
        match self {
            Semantic::Position => 0,
            Semantic::Normal => 1,
            Semantic::Texcoord => 2,
            Semantic::Other => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Semantic::Position,
            1 => Semantic::Normal,
            2 => Semantic::Texcoord,
            3 => Semantic::Other,
            _ => return None,
        })
    }
}

/// One named group of scalar channels, e.g. a 3-component position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelGroup {
    pub name: String,
    pub components: u8,
    pub semantic: Semantic,
}

/// Describes how the per-vertex attribute vector is split into channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeLayout {
    groups: Vec<ChannelGroup>,
}

impl AttributeLayout {
    pub fn new(groups: Vec<ChannelGroup>) -> Result<Self> {
        let positions: Vec<_> = groups
            .iter()
            .filter(|g| g.semantic == Semantic::Position)
            .collect();
        match positions.as_slice() {
            [p] if p.components == 3 => {}
            [_] => {
                return Err(Error::InvalidLayout(
                    "position must have exactly 3 components".into(),
                ))
            }
            [] => return Err(Error::InvalidLayout("missing position channel".into())),
            _ => {
                return Err(Error::InvalidLayout(
                    "more than one position channel".into(),
                ))
            }
        }
        let mut names = HashSet::new();
        for g in &groups {
            if g.components == 0 {
                return Err(Error::InvalidLayout(format!(
                    "channel {:?} is empty",
                    g.name
                )));
            }
            if !names.insert(g.name.as_str()) {
                return Err(Error::InvalidLayout(format!(
                    "duplicate channel {:?}",
                    g.name
                )));
            }
        }
        Ok(Self { groups })
    }

    /// Position only.
    pub fn positions() -> Self {
        Self::new(vec![ChannelGroup {
            name: "position".into(),
            components: 3,
            semantic: Semantic::Position,
        }])
        .unwrap()
    }

    /// Position and normal, the layout produced for OBJ files without texcoords.
    pub fn position_normal() -> Self {
        Self::new(vec![
            ChannelGroup {
                name: "position".into(),
                components: 3,
                semantic: Semantic::Position,
            },
            ChannelGroup {
                name: "normal".into(),
                components: 3,
                semantic: Semantic::Normal,
            },
        ])
        .unwrap()
    }

    pub fn position_normal_texcoord() -> Self {
        let mut layout = Self::position_normal();
        layout.groups.push(ChannelGroup {
            name: "texcoord".into(),
            components: 2,
            semantic: Semantic::Texcoord,
        });
        layout
    }

    pub fn groups(&self) -> &[ChannelGroup] {
        &self.groups
    }

    /// Total number of scalar channels `n`.
    pub fn channel_count(&self) -> usize {
        self.groups.iter().map(|g| g.components as usize).sum()
    }

    /// First scalar channel of the group with the given semantic.
    pub fn offset_of(&self, semantic: Semantic) -> Option<usize> {
        let mut offset = 0;
        for g in &self.groups {
            if g.semantic == semantic {
                return Some(offset);
            }
            offset += g.components as usize;
        }
        None
    }

    /// Human-readable label per scalar channel, e.g. `position.x`.
    pub fn channel_labels(&self) -> Vec<String> {
        const AXES: [&str; 4] = ["x", "y", "z", "w"];
        let mut labels = Vec::with_capacity(self.channel_count());
        for g in &self.groups {
            for c in 0..g.components as usize {
                match (g.semantic, c) {
                    (Semantic::Texcoord, 0) => labels.push(format!("{}.u", g.name)),
                    (Semantic::Texcoord, 1) => labels.push(format!("{}.v", g.name)),
                    (_, c) if c < 4 => labels.push(format!("{}.{}", g.name, AXES[c])),
                    (_, c) => labels.push(format!("{}.{}", g.name, c)),
                }
            }
        }
        labels
    }
}

/// Indexed triangle mesh with vertex-major attribute storage.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    layout: AttributeLayout,
    attributes: Vec<f32>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh from vertex-major attributes and an index triple list.
    ///
    /// Triangles that repeat a vertex index are rejected: they carry no
    /// connectivity and collide with the degenerate-triangle restart encoding.
    pub fn new(
        layout: AttributeLayout,
        attributes: Vec<f32>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self> {
        let n = layout.channel_count();
        if !attributes.len().is_multiple_of(n) {
            return Err(Error::InvalidMesh(format!(
                "attribute buffer length {} is not a multiple of {n} channels",
                attributes.len()
            )));
        }
        if let Some(i) = attributes.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh(format!(
                "non-finite attribute value at vertex {}",
                i / n
            )));
        }
        let vertex_count = attributes.len() / n;
        if vertex_count > u32::MAX as usize {
            return Err(Error::InvalidMesh("too many vertices".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&i) = tri.iter().find(|&&i| i as usize >= vertex_count) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {i}, vertex count is {vertex_count}"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} repeats a vertex index: {tri:?}"
                )));
            }
        }
        Ok(Self {
            layout,
            attributes,
            triangles,
        })
    }

    /// Builds a position-only mesh.
    pub fn from_positions(positions: &[[f32; 3]], triangles: Vec<[u32; 3]>) -> Result<Self> {
        let attributes = positions.iter().flatten().copied().collect();
        Self::new(AttributeLayout::positions(), attributes, triangles)
    }

    pub fn layout(&self) -> &AttributeLayout {
        &self.layout
    }

    pub fn channel_count(&self) -> usize {
        self.layout.channel_count()
    }

    pub fn vertex_count(&self) -> usize {
        self.attributes.len() / self.channel_count()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn attributes(&self) -> &[f32] {
        &self.attributes
    }

    /// Attribute vector of vertex `v`.
    pub fn vertex(&self, v: u32) -> &[f32] {
        let n = self.channel_count();
        &self.attributes[v as usize * n..(v as usize + 1) * n]
    }

    pub fn position(&self, v: u32) -> Vec3 {
        let off = self.layout.offset_of(Semantic::Position).unwrap_or(0);
        let a = self.vertex(v);
        [a[off] as f64, a[off + 1] as f64, a[off + 2] as f64]
    }

    /// Unnormalized face normal (twice the area vector).
    pub fn area_vector(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.position(a), self.position(b), self.position(c));
        math::cross(math::sub(pb, pa), math::sub(pc, pa))
    }

    /// Unit normal of triangle `t`, right-handed with the authored winding.
    pub fn triangle_normal(&self, t: usize) -> Result<Vec3> {
        let area = self.area_vector(t);
        let len = math::length(area);
        // Relative threshold: scale-independent collinearity test.
        let [a, b, c] = self.triangles[t];
        let e0 = math::length(math::sub(self.position(b), self.position(a)));
        let e1 = math::length(math::sub(self.position(c), self.position(a)));
        if len <= 1e-12 * e0 * e1 || len == 0.0 {
            return Err(Error::DegenerateTriangle(t));
        }
        Ok(math::scale(area, 1.0 / len))
    }

    /// Adjacency across manifold, consistently oriented edges.
    pub fn build_adjacency(&self) -> AdjacencyMap {
        AdjacencyMap::build(&self.triangles)
    }
}

/// Slot `k` of a triangle is the edge from corner `k` to corner `(k + 1) % 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSlot(pub u8);

impl EdgeSlot {
    pub const EDGE01: EdgeSlot = EdgeSlot(0);
    pub const EDGE12: EdgeSlot = EdgeSlot(1);
    pub const EDGE20: EdgeSlot = EdgeSlot(2);

    pub fn vertices(self, tri: [u32; 3]) -> (u32, u32) {
        let k = self.0 as usize;
        (tri[k], tri[(k + 1) % 3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub triangle: u32,
    /// The slot on the neighbor's side of the shared edge.
    pub slot: EdgeSlot,
}

/// Per-triangle neighbor across each edge slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMap {
    neighbors: Vec<[Option<Neighbor>; 3]>,
}

impl AdjacencyMap {
    pub fn build(triangles: &[[u32; 3]]) -> Self {
        let mut edges: HashMap<(u32, u32), Vec<(u32, EdgeSlot)>> = HashMap::new();
        for (t, &tri) in triangles.iter().enumerate() {
            for k in 0..3u8 {
                let (u, v) = EdgeSlot(k).vertices(tri);
                edges
                    .entry((u.min(v), u.max(v)))
                    .or_default()
                    .push((t as u32, EdgeSlot(k)));
            }
        }
        let mut neighbors = vec![[None; 3]; triangles.len()];
        for sides in edges.values() {
            let &[(ta, sa), (tb, sb)] = sides.as_slice() else {
                continue;
            };
            let (ua, va) = sa.vertices(triangles[ta as usize]);
            let (ub, vb) = sb.vertices(triangles[tb as usize]);
            // Only opposite orientation continues the winding.
            if ua != vb || va != ub {
                continue;
            }
            neighbors[ta as usize][sa.0 as usize] = Some(Neighbor {
                triangle: tb,
                slot: sb,
            });
            neighbors[tb as usize][sb.0 as usize] = Some(Neighbor {
                triangle: ta,
                slot: sa,
            });
        }
        Self { neighbors }
    }

    pub fn triangle_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, t: usize) -> &[Option<Neighbor>; 3] {
        &self.neighbors[t]
    }

    pub fn neighbor(&self, t: usize, slot: EdgeSlot) -> Option<Neighbor> {
        self.neighbors[t][slot.0 as usize]
    }

    /// Total number of (directed) adjacency records.
    pub fn record_count(&self) -> usize {
        self.neighbors.iter().flatten().flatten().count()
    }
}
