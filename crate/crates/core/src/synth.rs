//! Procedural test meshes: grids, spheres, tori, fans, random patches and
//! non-manifold fuzz. All generators are deterministic for a given seed.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{AttributeLayout, TriangleMesh};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `nx * ny` quads in the xy-plane, two counter-clockwise triangles each.
///
/// `wave` displaces z by a smooth bump; 0 keeps the grid planar.
pub fn grid(nx: usize, ny: usize, wave: f32) -> TriangleMesh {
    let mut positions = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let z = wave * ((i as f32 * 0.7).sin() + (j as f32 * 0.4).cos());
            positions.push([i as f32, j as f32, z]);
        }
    }
    let id = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    TriangleMesh::from_positions(&positions, tris).unwrap()
}

/// Grid with randomly chosen quad diagonals and jittered heights.
pub fn grid_random(nx: usize, ny: usize, seed: u64) -> TriangleMesh {
    let mut r = rng(seed);
    let mut positions = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            positions.push([
                i as f32 + r.gen_range(-0.2..0.2),
                j as f32 + r.gen_range(-0.2..0.2),
                r.gen_range(-0.5..0.5),
            ]);
        }
    }
    let id = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if r.gen_bool(0.5) {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
        }
    }
    let mut mesh_tris = tris;
    // Shuffle triangle order so partitioning does not see scanline order.
    mesh_tris.shuffle(&mut r);
    TriangleMesh::from_positions(&positions, mesh_tris).unwrap()
}

/// UV sphere with position, normal and texcoord channels.
///
/// The poles are triangle fans of `slices` triangles, which gives long
/// same-direction strip runs. The texture seam duplicates one meridian.
pub fn uv_sphere(slices: usize, stacks: usize, radius: f32) -> TriangleMesh {
    assert!(slices >= 3 && stacks >= 2);
    let mut attributes = Vec::new();
    let mut push = |p: [f64; 3], uv: [f64; 2]| {
        let len = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let n = p.map(|x| x / len);
        attributes.extend(p.map(|x| (x * radius as f64) as f32));
        attributes.extend(n.map(|x| x as f32));
        attributes.extend(uv.map(|x| x as f32));
    };
    push([0.0, 0.0, 1.0], [0.5, 0.0]);
    for s in 1..stacks {
        let theta = PI * s as f64 / stacks as f64;
        for k in 0..=slices {
            let phi = 2.0 * PI * k as f64 / slices as f64;
            push(
                [
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ],
                [k as f64 / slices as f64, s as f64 / stacks as f64],
            );
        }
    }
    push([0.0, 0.0, -1.0], [0.5, 1.0]);
    let north = 0u32;
    let south = (1 + (stacks - 1) * (slices + 1)) as u32;
    let ring = |s: usize, k: usize| (1 + (s - 1) * (slices + 1) + k) as u32;
    let mut tris = Vec::new();
    for k in 0..slices {
        tris.push([north, ring(1, k), ring(1, k + 1)]);
    }
    for s in 1..stacks - 1 {
        for k in 0..slices {
            let (a, b, c, d) = (
                ring(s, k),
                ring(s + 1, k),
                ring(s + 1, k + 1),
                ring(s, k + 1),
            );
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    for k in 0..slices {
        tris.push([south, ring(stacks - 1, k + 1), ring(stacks - 1, k)]);
    }
    TriangleMesh::new(
        AttributeLayout::position_normal_texcoord(),
        attributes,
        tris,
    )
    .unwrap()
}

/// Closed torus, position and normal channels.
pub fn torus(major: usize, minor: usize, r_major: f32, r_minor: f32) -> TriangleMesh {
    let mut attributes = Vec::new();
    for i in 0..major {
        let u = 2.0 * PI * i as f64 / major as f64;
        for j in 0..minor {
            let v = 2.0 * PI * j as f64 / minor as f64;
            let n = [v.cos() * u.cos(), v.cos() * u.sin(), v.sin()];
            let c = [r_major as f64 * u.cos(), r_major as f64 * u.sin(), 0.0];
            let p = [
                c[0] + r_minor as f64 * n[0],
                c[1] + r_minor as f64 * n[1],
                c[2] + r_minor as f64 * n[2],
            ];
            attributes.extend(p.map(|x| x as f32));
            attributes.extend(n.map(|x| x as f32));
        }
    }
    let id = |i: usize, j: usize| ((i % major) * minor + (j % minor)) as u32;
    let mut tris = Vec::new();
    for i in 0..major {
        for j in 0..minor {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    TriangleMesh::new(AttributeLayout::position_normal(), attributes, tris).unwrap()
}

/// Disc of `k` triangles around a center vertex; `closed` joins the last
/// triangle back to the first.
pub fn fan(k: usize, closed: bool) -> TriangleMesh {
    let rim = if closed { k } else { k + 1 };
    let mut positions = vec![[0.0f32, 0.0, 0.0]];
    let span = if closed { 2.0 * PI } else { 1.9 * PI };
    for i in 0..rim {
        let a = span * i as f64 / k as f64;
        positions.push([a.cos() as f32, a.sin() as f32, 0.0]);
    }
    let tris = (0..k)
        .map(|i| [0, 1 + i as u32, 1 + ((i + 1) % rim) as u32])
        .collect();
    TriangleMesh::from_positions(&positions, tris).unwrap()
}

/// Connected manifold patch grown from a random triangle of a random grid,
/// stopping before its interior edge count would exceed `max_dual_edges`.
pub fn random_patch(seed: u64, max_dual_edges: usize) -> TriangleMesh {
    let mut r = rng(seed);
    let base = grid_random(8, 8, r.gen());
    let adj = base.build_adjacency();
    let t_count = base.triangle_count();
    let mut inside = vec![false; t_count];
    let start = r.gen_range(0..t_count);
    inside[start] = true;
    let mut members = vec![start];
    let mut edges = 0usize;
    loop {
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for &t in &members {
            for n in adj.neighbors(t).iter().flatten() {
                let c = n.triangle as usize;
                if inside[c] {
                    continue;
                }
                let links = adj
                    .neighbors(c)
                    .iter()
                    .flatten()
                    .filter(|m| inside[m.triangle as usize])
                    .count();
                candidates.push((c, links));
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        candidates.retain(|&(_, links)| edges + links <= max_dual_edges);
        if candidates.is_empty() {
            break;
        }
        let &(c, links) = candidates.choose(&mut r).unwrap();
        inside[c] = true;
        members.push(c);
        edges += links;
    }
    submesh(&base, &members)
}

/// Mesh with only the given triangles; unreferenced vertices are dropped.
pub fn submesh(mesh: &TriangleMesh, triangles: &[usize]) -> TriangleMesh {
    let n = mesh.channel_count();
    let mut remap = vec![u32::MAX; mesh.vertex_count()];
    let mut attributes = Vec::new();
    let mut tris = Vec::with_capacity(triangles.len());
    for &t in triangles {
        let tri = mesh.triangles()[t].map(|v| {
            if remap[v as usize] == u32::MAX {
                remap[v as usize] = (attributes.len() / n) as u32;
                attributes.extend_from_slice(mesh.vertex(v));
            }
            remap[v as usize]
        });
        tris.push(tri);
    }
    TriangleMesh::new(mesh.layout().clone(), attributes, tris).unwrap()
}

/// Grid with non-manifold fins, duplicated and flipped triangles, and
/// isolated slivers mixed in.
pub fn nonmanifold_fuzz(seed: u64) -> TriangleMesh {
    let mut r = rng(seed);
    let nx = r.gen_range(4..12);
    let ny = r.gen_range(4..12);
    let base = grid_random(nx, ny, r.gen());
    let mut positions: Vec<[f32; 3]> = (0..base.vertex_count() as u32)
        .map(|v| base.position(v).map(|x| x as f32))
        .collect();
    let mut tris: Vec<[u32; 3]> = base.triangles().to_vec();
    let originals = tris.len();
    for _ in 0..r.gen_range(1..8) {
        let [a, b, _] = tris[r.gen_range(0..originals)];
        // Fin on an existing edge: three triangles on one edge.
        positions.push([
            r.gen_range(0.0..nx as f32),
            r.gen_range(0.0..ny as f32),
            2.0,
        ]);
        tris.push([a, b, positions.len() as u32 - 1]);
    }
    for _ in 0..r.gen_range(0..4) {
        let t = tris[r.gen_range(0..originals)];
        tris.push(t);
    }
    for _ in 0..r.gen_range(0..4) {
        let [a, b, c] = tris[r.gen_range(0..originals)];
        tris.push([a, c, b]);
    }
    for _ in 0..r.gen_range(1..6) {
        let base_id = positions.len() as u32;
        let o = [
            r.gen_range(-5.0..5.0),
            r.gen_range(-5.0..5.0),
            r.gen_range(-5.0..5.0),
        ];
        positions.push(o);
        positions.push([o[0] + 1.0, o[1], o[2]]);
        positions.push([o[0], o[1] + 0.5, o[2] + 0.25]);
        tris.push([base_id, base_id + 1, base_id + 2]);
    }
    tris.shuffle(&mut r);
    TriangleMesh::from_positions(&positions, tris).unwrap()
}
