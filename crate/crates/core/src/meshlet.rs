//! Meshlet partitioning, local vertex tables and cull cones.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, Vec3};
use crate::mesh::{AdjacencyMap, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshletLimits {
    pub max_vertices: usize,
    pub max_triangles: usize,
}

impl Default for MeshletLimits {
    fn default() -> Self {
        Self {
            max_vertices: 128,
            max_triangles: 256,
        }
    }
}

impl MeshletLimits {
    pub fn new(max_vertices: usize, max_triangles: usize) -> Result<Self> {
        let limits = Self {
            max_vertices,
            max_triangles,
        };
        limits.validate()?;
        Ok(limits)
    }

    pub fn validate(&self) -> Result<()> {
        // A triangle needs three distinct vertices.
        if !(3..=256).contains(&self.max_vertices) {
            return Err(Error::InvalidLimits(format!(
                "max vertices {} outside [3, 256]",
                self.max_vertices
            )));
        }
        if !(1..=256).contains(&self.max_triangles) {
            return Err(Error::InvalidLimits(format!(
                "max triangles {} outside [1, 256]",
                self.max_triangles
            )));
        }
        Ok(())
    }
}

/// A self-contained meshlet: a local vertex table plus 8-bit local triangles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meshlet {
    /// Local vertex id -> global vertex id.
    pub vertices: Vec<u32>,
    pub triangles: Vec<[u8; 3]>,
    /// Global triangle id of each local triangle.
    pub source_triangles: Vec<u32>,
}

impl Meshlet {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Triangles expressed with global vertex ids.
    pub fn global_triangles(&self) -> impl Iterator<Item = [u32; 3]> + '_ {
        self.triangles
            .iter()
            .map(|t| t.map(|i| self.vertices[i as usize]))
    }

    /// Relabels local vertices: new id of old local `i` is `perm[i]`.
    pub fn permuted(&self, perm: &[u8]) -> Meshlet {
        let mut vertices = vec![0u32; self.vertices.len()];
        for (old, &new) in perm.iter().enumerate() {
            vertices[new as usize] = self.vertices[old];
        }
        Meshlet {
            vertices,
            triangles: self
                .triangles
                .iter()
                .map(|t| t.map(|i| perm[i as usize]))
                .collect(),
            source_triangles: self.source_triangles.clone(),
        }
    }
}

/// Builds the local vertex table for the given source triangles.
///
/// Vertices are numbered by first reference, so the table is tight.
pub fn localize(
    mesh: &TriangleMesh,
    source_triangles: &[u32],
    limits: &MeshletLimits,
) -> Result<Meshlet> {
    if source_triangles.len() > limits.max_triangles {
        return Err(Error::InvalidLimits(format!(
            "meshlet has {} triangles, limit is {}",
            source_triangles.len(),
            limits.max_triangles
        )));
    }
    let mut vertices: Vec<u32> = Vec::new();
    let mut triangles = Vec::with_capacity(source_triangles.len());
    for &t in source_triangles {
        let tri = mesh.triangles()[t as usize];
        let mut local = [0u8; 3];
        for (k, &g) in tri.iter().enumerate() {
            let id = match vertices.iter().position(|&v| v == g) {
                Some(i) => i,
                None => {
                    vertices.push(g);
                    vertices.len() - 1
                }
            };
            if vertices.len() > limits.max_vertices {
                return Err(Error::VertexLimit {
                    count: vertices.len(),
                    limit: limits.max_vertices,
                });
            }
            local[k] = id as u8;
        }
        triangles.push(local);
    }
    Ok(Meshlet {
        vertices,
        triangles,
        source_triangles: source_triangles.to_vec(),
    })
}

/// Greedy adjacency-driven partition into localized meshlets.
///
/// Seeds with the lowest unassigned triangle and keeps adding the adjacent
/// unassigned triangle that introduces the fewest new vertices (ties: lowest
/// id). When the connected region runs dry the lowest unassigned triangle is
/// pulled in, so meshlets stay full on fragmented input.
pub fn partition(
    mesh: &TriangleMesh,
    adjacency: &AdjacencyMap,
    limits: &MeshletLimits,
) -> Result<Vec<Meshlet>> {
    limits.validate()?;
    let tri_count = mesh.triangle_count();
    let mut assigned = vec![false; tri_count];
    // Generation stamp per global vertex: membership in the current meshlet.
    let mut stamp = vec![u32::MAX; mesh.vertex_count()];
    let mut generation = 0u32;
    let mut next_seed = 0usize;
    let mut meshlets = Vec::new();

    let new_vertices = |t: usize, stamp: &[u32], generation: u32| {
        mesh.triangles()[t]
            .iter()
            .filter(|&&v| stamp[v as usize] != generation)
            .count()
    };

    while next_seed < tri_count {
        if assigned[next_seed] {
            next_seed += 1;
            continue;
        }
        let mut members: Vec<u32> = Vec::new();
        let mut vertex_count = 0usize;
        let mut frontier: BTreeSet<u32> = BTreeSet::new();

        let add = |t: usize,
                   members: &mut Vec<u32>,
                   frontier: &mut BTreeSet<u32>,
                   assigned: &mut [bool],
                   stamp: &mut [u32],
                   vertex_count: &mut usize| {
            assigned[t] = true;
            members.push(t as u32);
            frontier.remove(&(t as u32));
            for &v in &mesh.triangles()[t] {
                if stamp[v as usize] != generation {
                    stamp[v as usize] = generation;
                    *vertex_count += 1;
                }
            }
            for n in adjacency.neighbors(t).iter().flatten() {
                if !assigned[n.triangle as usize] {
                    frontier.insert(n.triangle);
                }
            }
        };

        add(
            next_seed,
            &mut members,
            &mut frontier,
            &mut assigned,
            &mut stamp,
            &mut vertex_count,
        );

        while members.len() < limits.max_triangles {
            let mut best: Option<(usize, usize)> = None;
            for &c in &frontier {
                let fresh = new_vertices(c as usize, &stamp, generation);
                if vertex_count + fresh > limits.max_vertices {
                    continue;
                }
                if best.is_none_or(|(_, b)| fresh < b) {
                    best = Some((c as usize, fresh));
                }
            }
            let pick = match best {
                Some((c, _)) => c,
                None if frontier.is_empty() => {
                    // Region exhausted: continue with the next unassigned triangle.
                    match (next_seed..tri_count).find(|&t| !assigned[t]) {
                        Some(t)
                            if vertex_count + new_vertices(t, &stamp, generation)
                                <= limits.max_vertices =>
                        {
                            t
                        }
                        _ => break,
                    }
                }
                None => break,
            };
            add(
                pick,
                &mut members,
                &mut frontier,
                &mut assigned,
                &mut stamp,
                &mut vertex_count,
            );
        }

        meshlets.push(localize(mesh, &members, limits)?);
        generation += 1;
    }
    Ok(meshlets)
}

/// Bounding cone of a meshlet's triangle normals, stored at 32-bit precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CullCone {
    pub axis: [f32; 3],
    /// Radians in `[0, pi]`; `pi` means the meshlet is never culled.
    pub half_angle: f32,
}

impl CullCone {
    pub const NEVER_CULL: CullCone = CullCone {
        axis: [0.0, 0.0, 1.0],
        half_angle: std::f32::consts::PI,
    };

    pub fn axis_f64(&self) -> Vec3 {
        let a = self.axis.map(|x| x as f64);
        math::normalize(a).unwrap_or([0.0, 0.0, 1.0])
    }

    pub fn never_culls(&self) -> bool {
        self.half_angle as f64 >= std::f64::consts::FRAC_PI_2
    }
}

/// Normal cone of the meshlet; zero-area triangles are skipped.
///
/// The half-angle is measured against the stored `f32` axis and rounded up,
/// so containment holds for the stored representation.
pub fn compute_cull_cone(mesh: &TriangleMesh, meshlet: &Meshlet) -> CullCone {
    let normals: Vec<Vec3> = meshlet
        .source_triangles
        .iter()
        .filter_map(|&t| mesh.triangle_normal(t as usize).ok())
        .collect();
    if normals.is_empty() {
        return CullCone::NEVER_CULL;
    }
    let sum = normals.iter().fold([0.0; 3], |acc, &n| math::add(acc, n));
    if math::length(sum) <= 1e-9 * normals.len() as f64 {
        return CullCone::NEVER_CULL;
    }
    let axis32 = math::normalize(sum).unwrap().map(|x| x as f32);
    let cone = CullCone {
        axis: axis32,
        half_angle: 0.0,
    };
    let axis = cone.axis_f64();
    let max_angle = normals
        .iter()
        .map(|&n| math::angle_between(axis, n))
        .fold(0.0f64, f64::max);
    let mut half_angle = max_angle as f32;
    if (half_angle as f64) < max_angle {
        half_angle = half_angle.next_up();
    }
    CullCone {
        axis: axis32,
        half_angle: half_angle.min(std::f32::consts::PI),
    }
}

/// Conservative whole-meshlet back-face test.
///
/// `view_dir` points from the camera towards the meshlet. Returns true only
/// if every normal inside the cone faces away from the camera.
pub fn cull_test(cone: &CullCone, view_dir: Vec3) -> bool {
    const MARGIN: f64 = 1e-6;
    if cone.never_culls() {
        return false;
    }
    let Some(view) = math::normalize(view_dir) else {
        return false;
    };
    let axis = cone.axis_f64();
    math::dot(axis, view) > (cone.half_angle as f64).sin() + MARGIN
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn small_patch_fits_one_meshlet() {
        let mesh = synth::grid(10, 5, 0.0);
        assert_eq!(mesh.triangle_count(), 100);
        let adj = mesh.build_adjacency();
        let meshlets = partition(&mesh, &adj, &MeshletLimits::default()).unwrap();
        assert_eq!(meshlets.len(), 1);
        assert_eq!(meshlets[0].vertex_count(), 66);
    }

    #[test]
    fn partition_is_exact_cover_within_limits() {
        let mesh = synth::grid(25, 20, 0.3);
        assert_eq!(mesh.triangle_count(), 1000);
        let adj = mesh.build_adjacency();
        let limits = MeshletLimits::default();
        let meshlets = partition(&mesh, &adj, &limits).unwrap();
        assert!(meshlets.len() >= 4);
        let mut seen = vec![0u32; mesh.triangle_count()];
        for m in &meshlets {
            assert!(m.vertex_count() <= 128 && m.triangle_count() <= 256);
            for &t in &m.source_triangles {
                seen[t as usize] += 1;
            }
            let max_local = m.triangles.iter().flatten().copied().max().unwrap();
            assert_eq!(max_local as usize, m.vertex_count() - 1);
        }
        assert!(seen.iter().all(|&c| c == 1));
        let total: usize = meshlets.iter().map(|m| m.vertex_count()).sum();
        assert!(total > mesh.vertex_count());
    }

    #[test]
    fn single_triangle_localizes_to_012() {
        let mesh = synth::grid(1, 1, 0.0);
        let m = localize(&mesh, &[1], &MeshletLimits::default()).unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn localize_enforces_vertex_limit() {
        let mesh = synth::grid(4, 4, 0.0);
        let all: Vec<u32> = (0..mesh.triangle_count() as u32).collect();
        let limits = MeshletLimits::new(8, 256).unwrap();
        assert!(matches!(
            localize(&mesh, &all, &limits),
            Err(Error::VertexLimit { .. })
        ));
    }

    #[test]
    fn shared_border_vertices_are_duplicated() {
        let mesh = synth::grid(2, 1, 0.0);
        // Left quad and right quad share the column of 2 vertices at x=1.
        let left = localize(&mesh, &[0, 1], &MeshletLimits::default()).unwrap();
        let right = localize(&mesh, &[2, 3], &MeshletLimits::default()).unwrap();
        let shared: Vec<u32> = left
            .vertices
            .iter()
            .filter(|v| right.vertices.contains(v))
            .copied()
            .collect();
        assert_eq!(shared.len(), 2);
    }

    #[test]
    fn limits_are_validated() {
        assert!(MeshletLimits::new(0, 10).is_err());
        assert!(MeshletLimits::new(257, 10).is_err());
        assert!(MeshletLimits::new(128, 0).is_err());
        assert!(MeshletLimits::new(256, 256).is_ok());
    }

    #[test]
    fn coplanar_cone_is_tight() {
        let mesh = synth::grid(3, 3, 0.0);
        let m = localize(&mesh, &[0, 1, 2, 3], &MeshletLimits::default()).unwrap();
        let cone = compute_cull_cone(&mesh, &m);
        assert_eq!(cone.axis, [0.0, 0.0, 1.0]);
        assert_eq!(cone.half_angle, 0.0);
        assert!(cull_test(&cone, [0.0, 0.0, 1.0]));
        assert!(!cull_test(&cone, [0.0, 0.0, -1.0]));
    }

    #[test]
    fn opposite_normals_never_cull() {
        let p = [[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let mesh = TriangleMesh::from_positions(&p, vec![[0, 1, 2], [0, 2, 1]]).unwrap();
        let m = localize(&mesh, &[0, 1], &MeshletLimits::default()).unwrap();
        let cone = compute_cull_cone(&mesh, &m);
        assert_eq!(cone.half_angle, std::f32::consts::PI);
        for v in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]] {
            assert!(!cull_test(&cone, v));
        }
    }
}
