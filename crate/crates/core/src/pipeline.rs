//! End-to-end compression: partition, stripify, encode, quantize, pack.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{encode_gts, encode_gts_reuse, reorder_ascending, strip_length};
use crate::container::{Codec, EncodedMeshlet, MeshletContainer, MeshletStream, SizeReport};
use crate::error::{Error, Result};
use crate::mesh::{AdjacencyMap, TriangleMesh};
use crate::meshlet::{compute_cull_cone, localize, partition, Meshlet, MeshletLimits};
use crate::quantize::{QuantizationGrid, DEFAULT_BITS};
use crate::stripify::{
    build_dual, build_milp, export_lp, import_solution, solve_eta, solve_exact, DualGraph,
    Optimality, StripSolution, DEFAULT_TIME_BUDGET,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Eta,
    Exact,
    /// Solutions read from external solver files.
    Imported,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressOptions {
    pub codec: Codec,
    pub solver: SolverKind,
    pub limits: MeshletLimits,
    pub bits: u8,
    /// Per-meshlet branch-and-bound budget.
    pub time_budget: Duration,
}

impl Default for CompressOptions {
    fn default() -> Self {
        Self {
            codec: Codec::Gts,
            solver: SolverKind::Eta,
            limits: MeshletLimits::default(),
            bits: DEFAULT_BITS,
            time_budget: DEFAULT_TIME_BUDGET,
        }
    }
}

/// Per output meshlet statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshletStats {
    pub id: usize,
    /// Index of the partition meshlet this one was split from.
    pub source_meshlet: usize,
    pub triangles: usize,
    pub vertices: usize,
    /// Triangles in the encoded stream, degenerates included.
    pub stream_triangles: usize,
    pub restarts: usize,
    pub degenerates: usize,
    pub optimality: Option<Optimality>,
    pub index_bits: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalityCounts {
    pub proven_optimal: usize,
    pub heuristic: usize,
    pub timeout_best: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelInfo {
    pub label: String,
    pub global_min: f64,
    pub delta: f64,
    pub max_meshlet_extent: f64,
    pub global_extent: f64,
    /// `log2(W / delta)`; absent for constant channels.
    pub info_bits: Option<f64>,
    pub guard_steps: u32,
    pub guard_slack_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: Option<PathBuf>,
    pub codec: Codec,
    pub solver: SolverKind,
    pub max_vertices: usize,
    pub max_triangles: usize,
    pub bits: u8,
    pub time_budget_seconds: f64,
    pub source_vertices: usize,
    pub source_triangles: usize,
    pub partition_meshlets: usize,
    pub meshlet_count: usize,
    pub extra_meshlets: usize,
    pub restart_count: usize,
    pub degenerate_count: usize,
    pub stream_triangles: usize,
    pub optimality: OptimalityCounts,
    pub solve_seconds: f64,
    pub total_seconds: f64,
    pub sizes: SizeReport,
    pub channels: Vec<ChannelInfo>,
    pub meshlets: Vec<MeshletStats>,
}

impl RunReport {
    /// Aligned text rendering with one row per table entry.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let mut row = |k: &str, v: String| {
            let _ = writeln!(s, "{k:<28} {v:>16}");
        };
        row("codec", self.codec.to_string());
        row("solver", format!("{:?}", self.solver).to_lowercase());
        row("triangles", self.source_triangles.to_string());
        row("vertices", self.source_vertices.to_string());
        row("meshlets", self.meshlet_count.to_string());
        row("restarts", self.restart_count.to_string());
        row("degenerate triangles", self.degenerate_count.to_string());
        row("additional meshlets", self.extra_meshlets.to_string());
        row("proven optimal", self.optimality.proven_optimal.to_string());
        row("heuristic", self.optimality.heuristic.to_string());
        row("timeout best", self.optimality.timeout_best.to_string());
        row("solve time [s]", format!("{:.3}", self.solve_seconds));
        row(
            "index buffer [bytes]",
            (self.sizes.flag_bytes + self.sizes.index_bytes).to_string(),
        );
        row("index buffer [bpt]", format!("{:.3}", self.sizes.index_bpt));
        row("meshlet buffer [bytes]", self.sizes.meta_bytes.to_string());
        row(
            "vertex buffer [bytes]",
            (self.sizes.attribute_bytes + self.sizes.constant_bytes).to_string(),
        );
        row(
            "vertex buffer [bpv]",
            format!("{:.3}", self.sizes.vertex_bpv),
        );
        row(
            "basic meshlet [bpt]",
            format!("{:.1}", self.sizes.basic_meshlet_bpt),
        );
        row(
            "vertex pipeline [bpt]",
            format!("{:.1}", self.sizes.vertex_pipeline_bpt),
        );
        for c in &self.channels {
            let bits = c
                .info_bits
                .map_or_else(|| "constant".to_string(), |b| format!("{b:.2}"));
            row(&format!("info {}", c.label), bits);
        }
        s
    }
}

/// A finished compression run.
#[derive(Debug, Clone)]
pub struct Compressed {
    pub container: MeshletContainer,
    pub report: RunReport,
    /// Final meshlets with locals in stream order.
    pub meshlets: Vec<Meshlet>,
}

struct Piece {
    meshlet: Meshlet,
    stream: MeshletStream,
    restarts: usize,
    optimality: Option<Optimality>,
    source: usize,
}

/// Splits paths into groups whose restart-joined strip fits `max_triangles`,
/// cutting a path where it has to.
pub fn pack_paths(paths: &[Vec<u32>], max_triangles: usize) -> Vec<Vec<Vec<u32>>> {
    let mut groups: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    let mut used = 0usize;
    for path in paths {
        let mut rest = &path[..];
        while !rest.is_empty() {
            let group = groups.last_mut().unwrap();
            let restart = if group.is_empty() { 0 } else { 4 };
            let space = max_triangles.saturating_sub(used + restart);
            if space == 0 {
                groups.push(Vec::new());
                used = 0;
                continue;
            }
            let take = space.min(rest.len());
            group.push(rest[..take].to_vec());
            used += restart + take;
            rest = &rest[take..];
        }
    }
    groups
}

fn encode_piece(
    meshlet: &Meshlet,
    g: &DualGraph,
    paths: &[Vec<u32>],
    codec: Codec,
    tmax: usize,
) -> Result<(Meshlet, MeshletStream)> {
    let r = reorder_ascending(meshlet, g, paths)?;
    let stream = match codec {
        Codec::Basic => unreachable!("basic meshlets are not stripified"),
        Codec::Gts => MeshletStream::Gts(encode_gts(&r.walk, tmax)?),
        Codec::GtsReuse => MeshletStream::GtsReuse(encode_gts_reuse(&r.walk, tmax)?),
    };
    Ok((r.meshlet, stream))
}

fn process_meshlet(
    mesh: &TriangleMesh,
    adjacency: &AdjacencyMap,
    index: usize,
    meshlet: &Meshlet,
    options: &CompressOptions,
    solve: &(dyn Fn(usize, &Meshlet, &DualGraph) -> StripSolution + Sync),
) -> Result<Vec<Piece>> {
    if options.codec == Codec::Basic {
        return Ok(vec![Piece {
            meshlet: meshlet.clone(),
            stream: MeshletStream::Basic(meshlet.triangles.clone()),
            restarts: 0,
            optimality: None,
            source: index,
        }]);
    }
    let tmax = options.limits.max_triangles;
    let g = build_dual(meshlet, adjacency);
    let solution = solve(index, meshlet, &g);
    if strip_length(meshlet.triangle_count(), solution.paths.len()) <= tmax {
        let (m, stream) = encode_piece(meshlet, &g, &solution.paths, options.codec, tmax)?;
        return Ok(vec![Piece {
            meshlet: m,
            stream,
            restarts: solution.restart_count(),
            optimality: Some(solution.optimality),
            source: index,
        }]);
    }
    log::debug!(
        "meshlet {index}: {} strips exceed {tmax} triangles, splitting",
        solution.paths.len()
    );
    pack_paths(&solution.paths, tmax)
        .into_iter()
        .map(|group| {
            let sources: Vec<u32> = group
                .iter()
                .flatten()
                .map(|&n| meshlet.source_triangles[n as usize])
                .collect();
            let sub = localize(mesh, &sources, &options.limits)?;
            let sub_g = build_dual(&sub, adjacency);
            let mut next = 0u32;
            let paths: Vec<Vec<u32>> = group
                .iter()
                .map(|p| {
                    let range = next..next + p.len() as u32;
                    next += p.len() as u32;
                    range.collect()
                })
                .collect();
            let (m, stream) = encode_piece(&sub, &sub_g, &paths, options.codec, tmax)?;
            Ok(Piece {
                meshlet: m,
                stream,
                restarts: paths.len() - 1,
                optimality: Some(solution.optimality),
                source: index,
            })
        })
        .collect()
}

fn solver_for(
    options: &CompressOptions,
) -> Box<dyn Fn(usize, &Meshlet, &DualGraph) -> StripSolution + Sync> {
    let budget = options.time_budget;
    match options.solver {
        SolverKind::Exact => Box::new(move |_, _, g| solve_exact(g, budget)),
        _ => Box::new(|_, _, g| solve_eta(g)),
    }
}

pub fn compress(mesh: &TriangleMesh, options: &CompressOptions) -> Result<Compressed> {
    compress_with(mesh, options, &*solver_for(options))
}

/// Runs the pipeline with a caller-supplied strip solver.
pub fn compress_with(
    mesh: &TriangleMesh,
    options: &CompressOptions,
    solve: &(dyn Fn(usize, &Meshlet, &DualGraph) -> StripSolution + Sync),
) -> Result<Compressed> {
    let start = Instant::now();
    options.limits.validate()?;
    if mesh.triangle_count() == 0 {
        return Err(Error::InvalidMesh("mesh has no triangles".into()));
    }
    let adjacency = mesh.build_adjacency();
    let parts = partition(mesh, &adjacency, &options.limits)?;

    let solve_start = Instant::now();
    let pieces: Vec<Vec<Piece>> = parts
        .par_iter()
        .enumerate()
        .map(|(i, m)| process_meshlet(mesh, &adjacency, i, m, options, solve))
        .collect::<Result<_>>()?;
    let solve_seconds = solve_start.elapsed().as_secs_f64();
    let pieces: Vec<Piece> = pieces.into_iter().flatten().collect();

    let meshlets: Vec<Meshlet> = pieces.iter().map(|p| p.meshlet.clone()).collect();
    let grid = QuantizationGrid::build(mesh, &meshlets, options.bits)?;
    let encoded: Vec<EncodedMeshlet> = pieces
        .par_iter()
        .map(|p| {
            Ok(EncodedMeshlet {
                stream: p.stream.clone(),
                cone: compute_cull_cone(mesh, &p.meshlet),
                quantized: grid.quantize_meshlet(mesh, &p.meshlet)?,
                vertex_map: p.meshlet.vertices.clone(),
            })
        })
        .collect::<Result<_>>()?;

    let container = MeshletContainer {
        codec: options.codec,
        source_vertex_count: mesh.vertex_count() as u32,
        source_triangle_count: mesh.triangle_count() as u32,
        layout: mesh.layout().clone(),
        grid: grid.clone(),
        meshlets: encoded,
    };
    let sizes = container.size_report()?;

    let mut optimality = OptimalityCounts::default();
    for p in &pieces {
        match p.optimality {
            Some(Optimality::ProvenOptimal) => optimality.proven_optimal += 1,
            Some(Optimality::Heuristic) => optimality.heuristic += 1,
            Some(Optimality::TimeoutBest) => optimality.timeout_best += 1,
            None => {}
        }
    }
    let stats: Vec<MeshletStats> = pieces
        .iter()
        .enumerate()
        .map(|(id, p)| MeshletStats {
            id,
            source_meshlet: p.source,
            triangles: p.meshlet.triangle_count(),
            vertices: p.meshlet.vertex_count(),
            stream_triangles: p.stream.triangle_count(),
            restarts: p.restarts,
            degenerates: p.stream.triangle_count() - p.meshlet.triangle_count(),
            optimality: p.optimality,
            index_bits: p.stream.size_bits(),
        })
        .collect();
    let labels = mesh.layout().channel_labels();
    let channels = grid
        .channels
        .iter()
        .zip(grid.info_content())
        .zip(grid.guard_slack())
        .zip(labels)
        .map(|(((c, info), slack), label)| ChannelInfo {
            label,
            global_min: c.min,
            delta: c.delta,
            max_meshlet_extent: c.max_meshlet_extent,
            global_extent: c.global_extent,
            info_bits: info,
            guard_steps: c.guard_steps,
            guard_slack_bits: slack,
        })
        .collect();
    let restart_count = stats.iter().map(|s| s.restarts).sum();
    let report = RunReport {
        input: None,
        codec: options.codec,
        solver: options.solver,
        max_vertices: options.limits.max_vertices,
        max_triangles: options.limits.max_triangles,
        bits: options.bits,
        time_budget_seconds: options.time_budget.as_secs_f64(),
        source_vertices: mesh.vertex_count(),
        source_triangles: mesh.triangle_count(),
        partition_meshlets: parts.len(),
        meshlet_count: stats.len(),
        extra_meshlets: stats.len() - parts.len(),
        restart_count,
        degenerate_count: stats.iter().map(|s| s.degenerates).sum(),
        stream_triangles: stats.iter().map(|s| s.stream_triangles).sum(),
        optimality,
        solve_seconds,
        total_seconds: start.elapsed().as_secs_f64(),
        sizes,
        channels,
        meshlets: stats,
    };
    Ok(Compressed {
        container,
        report,
        meshlets,
    })
}

/// Describes an exported set of per-meshlet models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpManifest {
    pub input: Option<PathBuf>,
    pub max_vertices: usize,
    pub max_triangles: usize,
    pub meshlets: Vec<LpManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpManifestEntry {
    pub id: usize,
    pub lp: String,
    pub solution: String,
    pub triangles: usize,
    pub dual_edges: usize,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes one `.lp` model per partition meshlet plus `manifest.json`.
pub fn export_lp_models(
    mesh: &TriangleMesh,
    limits: &MeshletLimits,
    input: Option<&Path>,
    dir: impl AsRef<Path>,
) -> Result<LpManifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let adjacency = mesh.build_adjacency();
    let parts = partition(mesh, &adjacency, limits)?;
    let meshlets = parts
        .par_iter()
        .enumerate()
        .map(|(id, m)| {
            let g = build_dual(m, &adjacency);
            let entry = LpManifestEntry {
                id,
                lp: format!("meshlet_{id:05}.lp"),
                solution: format!("meshlet_{id:05}.sol"),
                triangles: m.triangle_count(),
                dual_edges: g.edge_count(),
            };
            export_lp(&build_milp(&g), dir.join(&entry.lp))?;
            Ok(entry)
        })
        .collect::<Result<_>>()?;
    let manifest = LpManifest {
        input: input.map(Path::to_path_buf),
        max_vertices: limits.max_vertices,
        max_triangles: limits.max_triangles,
        meshlets,
    };
    std::fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Outcome of importing one solution file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportIssue {
    pub meshlet: usize,
    pub message: String,
}

/// Compresses with solutions read from `solutions`, falling back to the
/// tunneling heuristic for meshlets whose file is missing or invalid.
pub fn compress_with_solutions(
    mesh: &TriangleMesh,
    manifest: &LpManifest,
    solutions: impl AsRef<Path>,
    options: &CompressOptions,
) -> Result<(Compressed, Vec<ImportIssue>)> {
    let dir = solutions.as_ref();
    let issues = std::sync::Mutex::new(Vec::new());
    let mut options = *options;
    options.solver = SolverKind::Imported;
    options.limits = MeshletLimits::new(manifest.max_vertices, manifest.max_triangles)?;
    let solve = |i: usize, _: &Meshlet, g: &DualGraph| {
        let attempt = manifest
            .meshlets
            .iter()
            .find(|e| e.id == i)
            .ok_or_else(|| "meshlet is not in the manifest".to_string())
            .and_then(|e| {
                if e.dual_edges != g.edge_count() {
                    return Err(format!(
                        "manifest lists {} dual edges, mesh has {}",
                        e.dual_edges,
                        g.edge_count()
                    ));
                }
                import_solution(&build_milp(g), g, dir.join(&e.solution))
                    .map_err(|err| err.to_string())
            });
        attempt.unwrap_or_else(|message| {
            log::warn!("meshlet {i}: {message}; using the tunneling heuristic");
            issues.lock().unwrap().push(ImportIssue {
                meshlet: i,
                message,
            });
            solve_eta(g)
        })
    };
    let compressed = compress_with(mesh, &options, &solve)?;
    let mut issues = issues.into_inner().unwrap();
    issues.sort_by_key(|i| i.meshlet);
    Ok((compressed, issues))
}
