//! Acceptance suite. Prints one PASS/FAIL line per criterion, then the
//! reported-only items, and exits non-zero if any criterion failed.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use meshlet_codec::bits::FlagBits;
use meshlet_codec::codec::{canonical, decode_sequential};
use meshlet_codec::container::{
    MeshletStream, BASIC_MESHLET_BPT, META_RECORD_BYTES, VERTEX_PIPELINE_BPT,
};
use meshlet_codec::meshlet::{localize, partition};
use meshlet_codec::stripify::{
    brute_force_min_restarts, build_dual, build_milp_with, solve_eta, solve_exact, DualGraph,
    FlowCertificate, Optimality, StripSolution,
};
use meshlet_codec::wave::{
    decode_parallel_gts, decode_parallel_reuse, lookback_linear, parallel_index_lookback,
    WaveConfig,
};
use meshlet_codec::{
    compress, synth, verify, AttributeLayout, Codec, CompressOptions, Compressed, MeshletContainer,
    MeshletLimits, TriangleMesh,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PATCHES: u64 = 500;
const PATCH_MAX_DUAL_EDGES: usize = 20;
const OPTIMALITY_BUDGET: Duration = Duration::from_secs(60);
const ROUNDTRIP_MIN_MESHLETS: usize = 10_000;
const FALLBACK_MIN_MESHLETS: usize = 50;
const GTS_FORMULA_TOLERANCE: f64 = 1e-9;
const INFO_TOLERANCE: f64 = 0.01;
const FLOW: f64 = 1.0;
const EPSILON: f64 = 1.0 / 1024.0;
/// Relative slack on the half-step error bound, for f64 rounding in
/// `min + q * delta`.
const ERROR_SLACK: f64 = 1e-12;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Proven-optimal solutions collected for the certificate check.
type Proven = Vec<(DualGraph, StripSolution)>;

fn patch_graph(mesh: &TriangleMesh) -> DualGraph {
    let tris: Vec<u32> = (0..mesh.triangle_count() as u32).collect();
    let m = localize(mesh, &tris, &MeshletLimits::new(256, 256).unwrap()).unwrap();
    build_dual(&m, &mesh.build_adjacency())
}

fn criterion_1(proven: &mut Proven) -> Verdict {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut oversized = 0;
    let mut edges_total = 0;
    for seed in 0..PATCHES {
        let g = patch_graph(&synth::random_patch(seed, PATCH_MAX_DUAL_EDGES));
        edges_total += g.edge_count();
        if g.edge_count() > PATCH_MAX_DUAL_EDGES {
            oversized += 1;
            continue;
        }
        let exact = solve_exact(&g, Duration::from_secs(10));
        let brute = brute_force_min_restarts(&g).unwrap();
        if exact.optimality != Optimality::ProvenOptimal || exact.restart_count() != brute {
            mismatches.push((seed, exact.restart_count(), brute));
        }
        if exact.optimality == Optimality::ProvenOptimal {
            proven.push((g, exact));
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        mismatches.is_empty() && oversized == 0 && elapsed < OPTIMALITY_BUDGET,
        format!(
            "{PATCHES} patches, mean {:.1} dual edges, {} mismatches {:?}, {oversized} oversized, {:.2} s (limit {} s)",
            edges_total as f64 / PATCHES as f64,
            mismatches.len(),
            &mismatches[..mismatches.len().min(5)],
            elapsed.as_secs_f64(),
            OPTIMALITY_BUDGET.as_secs()
        ),
    )
}

struct GapStats {
    eta: usize,
    exact: usize,
    ratios: Vec<f64>,
}

fn criterion_2(proven: &mut Proven, gap: &mut GapStats) -> Verdict {
    let mut graphs: Vec<DualGraph> = (0..PATCHES)
        .map(|s| patch_graph(&synth::random_patch(s, PATCH_MAX_DUAL_EDGES)))
        .collect();
    let limits = MeshletLimits::default();
    for mesh in [
        synth::uv_sphere(32, 16, 1.0),
        synth::torus(32, 16, 2.0, 0.6),
        synth::grid_random(24, 24, 7),
        synth::grid(20, 20, 0.3),
    ] {
        let adj = mesh.build_adjacency();
        for m in partition(&mesh, &adj, &limits).unwrap() {
            graphs.push(build_dual(&m, &adj));
        }
    }
    let mut violations = 0;
    let mut timeouts = 0;
    let large = graphs.len() - PATCHES as usize;
    for g in graphs {
        let eta = solve_eta(&g).restart_count();
        let exact = solve_exact(&g, Duration::from_secs(2));
        let e = exact.restart_count();
        violations += (eta < e) as usize;
        gap.eta += eta;
        gap.exact += e;
        if e > 0 {
            gap.ratios.push(eta as f64 / e as f64);
        }
        match exact.optimality {
            Optimality::ProvenOptimal => {
                if g.node_count() > 32 {
                    proven.push((g, exact));
                }
            }
            _ => timeouts += 1,
        }
    }
    Verdict::new(
        violations == 0,
        format!(
            "{} patches + {large} full meshlets, {violations} with ETA < exact, {timeouts} exact timeouts; \
             total restarts ETA {} / exact {}",
            PATCHES, gap.eta, gap.exact
        ),
    )
}

/// Mixed corpus: each entry is a mesh and the limits to cut it with.
fn corpus() -> Vec<(String, TriangleMesh, MeshletLimits)> {
    let mut r = ChaCha8Rng::seed_from_u64(0x6d6c74);
    let limits = |r: &mut ChaCha8Rng| {
        let v = r.gen_range(6..=64);
        let t = r.gen_range(4..=96);
        MeshletLimits::new(v, t).unwrap()
    };
    let mut out = Vec::new();
    for i in 0..14 {
        let n = 20 + 4 * i;
        out.push((
            format!("grid{n}"),
            synth::grid(n, n, 0.25 * i as f32),
            limits(&mut r),
        ));
        out.push((
            format!("grid_random{n}"),
            synth::grid_random(n, n + 3, i as u64),
            limits(&mut r),
        ));
        out.push((
            format!("sphere{n}"),
            synth::uv_sphere(n + 4, n / 2 + 3, 1.5),
            limits(&mut r),
        ));
        out.push((
            format!("torus{n}"),
            synth::torus(n + 8, n / 2 + 4, 3.0, 1.0),
            limits(&mut r),
        ));
    }
    for seed in 0..40 {
        out.push((
            format!("fuzz{seed}"),
            synth::nonmanifold_fuzz(seed),
            limits(&mut r),
        ));
        out.push((
            format!("patch{seed}"),
            synth::random_patch(1000 + seed, 60),
            limits(&mut r),
        ));
    }
    out.push((
        "sphere_normals".into(),
        sphere_with_normals(40, 20),
        limits(&mut r),
    ));
    out
}

fn sphere_with_normals(slices: usize, stacks: usize) -> TriangleMesh {
    let s = synth::uv_sphere(slices, stacks, 2.0);
    let mut attrs = Vec::new();
    for v in 0..s.vertex_count() as u32 {
        let p = s.position(v);
        let len = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        attrs.extend(p.map(|x| x as f32));
        attrs.extend(p.map(|x| (x / len) as f32));
    }
    TriangleMesh::new(
        AttributeLayout::position_normal(),
        attrs,
        s.triangles().to_vec(),
    )
    .unwrap()
}

/// Meshes whose strips run more than 31 equal flags.
fn fallback_corpus() -> Vec<(String, TriangleMesh, MeshletLimits)> {
    let full = MeshletLimits::new(256, 256).unwrap();
    let mut out = Vec::new();
    for k in (34..=250).step_by(4) {
        out.push((format!("fan{k}"), synth::fan(k, k % 8 == 2), full));
    }
    for slices in [48, 64, 96] {
        out.push((
            format!("sphere{slices}"),
            synth::uv_sphere(slices, 12, 1.0),
            full,
        ));
    }
    out
}

fn compressed(
    meshes: &[(String, TriangleMesh, MeshletLimits)],
    codec: Codec,
    bits: u8,
) -> Vec<(usize, Compressed)> {
    meshes
        .iter()
        .enumerate()
        .map(|(i, (name, mesh, limits))| {
            let opts = CompressOptions {
                codec,
                limits: *limits,
                bits,
                ..CompressOptions::default()
            };
            let c = compress(mesh, &opts).unwrap_or_else(|e| panic!("{name}: {e}"));
            (i, c)
        })
        .collect()
}

fn stream_vertex_count(c: &Compressed, m: usize) -> usize {
    c.container.meshlets[m].vertex_count()
}

fn criterion_3(runs: &[&[(usize, Compressed)]]) -> Verdict {
    let mut meshlets = 0;
    let mut bad = 0;
    let (mut restarts, mut degenerates) = (0usize, 0usize);
    for run in runs {
        for (_, c) in run.iter() {
            for (m, stats) in c.report.meshlets.iter().enumerate() {
                meshlets += 1;
                let decoded = match &c.container.meshlets[m].stream {
                    MeshletStream::Gts(s) => {
                        decode_sequential(s, stream_vertex_count(c, m)).unwrap()
                    }
                    MeshletStream::GtsReuse(s) => {
                        decode_sequential(s, stream_vertex_count(c, m)).unwrap()
                    }
                    MeshletStream::Basic(_) => continue,
                };
                let repeated = decoded
                    .iter()
                    .filter(|t| {
                        let [a, b, c] = t.indices;
                        a == b || b == c || a == c
                    })
                    .count();
                restarts += stats.restarts;
                degenerates += repeated;
                bad += (repeated != 4 * stats.restarts || stats.degenerates != 4 * stats.restarts)
                    as usize;
            }
        }
    }
    Verdict::new(
        bad == 0 && meshlets > 0,
        format!("{meshlets} meshlets, {restarts} restarts, {degenerates} degenerate triangles, {bad} mismatches"),
    )
}

fn criterion_4(
    corpus: &[(String, TriangleMesh, MeshletLimits)],
    runs: &[&[(usize, Compressed)]],
) -> Verdict {
    let mut meshlets_per_codec = Vec::new();
    let mut failures = Vec::new();
    for run in runs {
        let mut count = 0;
        for (i, c) in run.iter() {
            let mesh = &corpus[*i].1;
            let mut remaining: HashMap<[u32; 3], isize> = HashMap::new();
            for &t in mesh.triangles() {
                *remaining.entry(canonical(t)).or_default() += 1;
            }
            for (m, source) in c.meshlets.iter().enumerate() {
                count += 1;
                let enc = &c.container.meshlets[m];
                let decoded = match &enc.stream {
                    MeshletStream::Gts(s) => decode_sequential(s, enc.vertex_count()),
                    MeshletStream::GtsReuse(s) => decode_sequential(s, enc.vertex_count()),
                    MeshletStream::Basic(_) => unreachable!(),
                };
                let Ok(decoded) = decoded else {
                    failures.push(format!("{} meshlet {m}: decode error", corpus[*i].0));
                    continue;
                };
                let mut got: Vec<[u32; 3]> = decoded
                    .iter()
                    .filter(|t| !t.degenerate)
                    .map(|t| canonical(t.indices.map(|l| enc.vertex_map[l as usize])))
                    .collect();
                let mut want: Vec<[u32; 3]> = source.global_triangles().map(canonical).collect();
                got.sort_unstable();
                want.sort_unstable();
                if got != want {
                    failures.push(format!(
                        "{} meshlet {m}: triangle list differs",
                        corpus[*i].0
                    ));
                }
                for t in got {
                    *remaining.entry(t).or_default() -= 1;
                }
            }
            if remaining.values().any(|&n| n != 0) {
                failures.push(format!(
                    "{}: triangle multiset differs from the source",
                    corpus[*i].0
                ));
            }
        }
        meshlets_per_codec.push(count);
    }
    let enough = meshlets_per_codec
        .iter()
        .all(|&n| n >= ROUNDTRIP_MIN_MESHLETS);
    Verdict::new(
        failures.is_empty() && enough,
        format!(
            "meshlets per codec (gts, gts-reuse) {meshlets_per_codec:?}, need >= {ROUNDTRIP_MIN_MESHLETS}; {} failures {:?}",
            failures.len(),
            &failures[..failures.len().min(3)]
        ),
    )
}

fn exhaustive_lookback() -> usize {
    let mut mismatches = 0;
    // Each 16-flag pattern alone, and behind 40 equal flags so that the
    // backward scan has to cross words.
    for prefix in [0usize, 40] {
        for fill in [false, true] {
            if prefix == 0 && fill {
                continue;
            }
            for pattern in 0u32..1 << 16 {
                let mut flags = FlagBits::new();
                for _ in 0..prefix {
                    flags.push(fill);
                }
                for b in 0..16 {
                    flags.push(pattern >> b & 1 == 1);
                }
                for t in 1..=flags.len() {
                    if parallel_index_lookback(&flags, t).source != lookback_linear(&flags, t) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    mismatches
}

fn criterion_5(runs: &[&[(usize, Compressed)]]) -> Verdict {
    let mut meshlets = 0;
    let mut unequal = 0;
    let mut fallback = 0;
    for run in runs {
        for (_, c) in run.iter() {
            for enc in &c.container.meshlets {
                meshlets += 1;
                let v = enc.vertex_count();
                let sequential = match &enc.stream {
                    MeshletStream::Gts(s) => decode_sequential(s, v).unwrap(),
                    MeshletStream::GtsReuse(s) => decode_sequential(s, v).unwrap(),
                    MeshletStream::Basic(_) => unreachable!(),
                };
                let mut used_fallback = false;
                for cfg in [WaveConfig::wave32(), WaveConfig::wave64()] {
                    let parallel = match &enc.stream {
                        MeshletStream::Gts(s) => decode_parallel_gts(s, v, cfg),
                        MeshletStream::GtsReuse(s) => decode_parallel_reuse(s, v, cfg),
                        MeshletStream::Basic(_) => unreachable!(),
                    };
                    match parallel {
                        Ok((list, trace)) => {
                            unequal += (list != sequential) as usize;
                            used_fallback |= trace.fallback_iterations > 0;
                        }
                        Err(_) => unequal += 1,
                    }
                }
                fallback += used_fallback as usize;
            }
        }
    }
    let lookback_mismatches = exhaustive_lookback();
    Verdict::new(
        unequal == 0 && fallback >= FALLBACK_MIN_MESHLETS && lookback_mismatches == 0,
        format!(
            "{meshlets} meshlet streams x wave32/64, {unequal} unequal, {fallback} needed multi-word fallback \
             (need >= {FALLBACK_MIN_MESHLETS}); exhaustive 2^16 lookback: {lookback_mismatches} mismatches"
        ),
    )
}

/// Closed band of 128 quads: 256 vertices, 256 triangles, one strip.
fn band() -> TriangleMesh {
    let n = 128;
    let mut positions = Vec::new();
    for i in 0..n {
        let a = i as f32 / n as f32 * std::f32::consts::TAU;
        positions.push([a.cos(), a.sin(), 0.0]);
        positions.push([a.cos(), a.sin(), 1.0]);
    }
    let mut tris = Vec::new();
    for i in 0..n {
        let (b0, t0) = (2 * i as u32, 2 * i as u32 + 1);
        let (b1, t1) = (2 * ((i + 1) % n) as u32, 2 * ((i + 1) % n) as u32 + 1);
        tris.push([b0, b1, t1]);
        tris.push([b0, t1, t0]);
    }
    TriangleMesh::from_positions(&positions, tris).unwrap()
}

struct BptStats {
    gts: (usize, usize),
    reuse: (usize, usize),
}

fn criterion_6(basic: &[(usize, Compressed)], bpt: &BptStats) -> Verdict {
    let mut problems = Vec::new();
    for (i, c) in basic {
        let s = &c.report.sizes;
        if s.index_bpt != 24.0 || s.index_bytes * 8 != 24 * s.source_triangles {
            problems.push(format!("corpus {i}: basic index {} bpt", s.index_bpt));
        }
        if s.vertex_pipeline_bpt != 96.0 || s.basic_meshlet_bpt != 24.0 {
            problems.push(format!(
                "corpus {i}: baselines {} / {}",
                s.vertex_pipeline_bpt, s.basic_meshlet_bpt
            ));
        }
    }
    if VERTEX_PIPELINE_BPT != 3.0 * 32.0 || BASIC_MESHLET_BPT != 3.0 * 8.0 {
        problems.push("baseline constants".into());
    }

    let opts = CompressOptions {
        codec: Codec::Gts,
        solver: meshlet_codec::SolverKind::Exact,
        limits: MeshletLimits::new(256, 256).unwrap(),
        ..CompressOptions::default()
    };
    let c = compress(&band(), &opts).unwrap();
    let formula = (8.0 * 255.0 + 256.0) / 256.0;
    let band_bpt = c.report.sizes.index_bpt;
    let one_strip = c.report.meshlet_count == 1
        && c.report.restart_count == 0
        && c.report.stream_triangles == 256;
    if !one_strip {
        problems.push(format!(
            "band: {} meshlets, {} restarts",
            c.report.meshlet_count, c.report.restart_count
        ));
    }
    if (band_bpt - formula).abs() > GTS_FORMULA_TOLERANCE
        || (band_bpt * 100.0).round() / 100.0 != 8.97
    {
        problems.push(format!("band: {band_bpt} bpt"));
    }
    Verdict::new(
        problems.is_empty(),
        format!(
            "basic 24.0 on {} meshes, pipeline 96.0, 0-restart 256-triangle GTS {band_bpt} bpt \
             (formula {formula}, |diff| <= {GTS_FORMULA_TOLERANCE:e}, rounds to 8.97); corpus GTS {:.2} / \
             GTS-Reuse {:.2} bpt (reference 9.5 / 5.9); {:?}",
            basic.len(),
            bpt.gts.0 as f64 / bpt.gts.1 as f64,
            bpt.reuse.0 as f64 / bpt.reuse.1 as f64,
            problems
        ),
    )
}

fn criterion_7(
    corpus: &[(String, TriangleMesh, MeshletLimits)],
    containers: &mut Vec<MeshletContainer>,
) -> Verdict {
    let mut shared = 0usize;
    let mut mismatches = 0usize;
    let mut over_bound = 0usize;
    let mut low_info = Vec::new();
    let mut min_info = f64::INFINITY;
    let mut verify_failures = 0;
    for bits in [8u8, 12, 16] {
        for (i, c) in compressed(corpus, Codec::GtsReuse, bits) {
            let mesh = &corpus[i].1;
            let grid = &c.container.grid;
            let channels = grid.channels.len();
            let mut seen: HashMap<u32, Vec<u64>> = HashMap::new();
            for enc in &c.container.meshlets {
                let back = grid.dequantize(&enc.quantized);
                for (local, &v) in enc.vertex_map.iter().enumerate() {
                    let row = &back[local * channels..(local + 1) * channels];
                    for (ch, g) in grid.channels.iter().enumerate() {
                        let src = mesh.vertex(v)[ch] as f64;
                        let err = (row[ch] - src).abs();
                        let scale = src.abs() + g.global_extent + g.delta;
                        over_bound += (err > g.delta / 2.0 + ERROR_SLACK * scale) as usize;
                    }
                    let bitwise: Vec<u64> = row.iter().map(|x| x.to_bits()).collect();
                    match seen.get(&v) {
                        Some(prev) => {
                            shared += 1;
                            mismatches += (*prev != bitwise) as usize;
                        }
                        None => {
                            seen.insert(v, bitwise);
                        }
                    }
                }
            }
            for (ch, info) in grid.info_content().into_iter().enumerate() {
                if let Some(info) = info {
                    min_info = min_info.min(info - bits as f64);
                    if info < bits as f64 - INFO_TOLERANCE {
                        low_info.push(format!("{} b={bits} ch{ch}: {info:.4}", corpus[i].0));
                    }
                }
            }
            verify_failures += !verify(&c.container, mesh).passed as usize;
            containers.push(c.container);
        }
    }
    Verdict::new(
        shared > 0 && mismatches == 0 && over_bound == 0 && low_info.is_empty() && verify_failures == 0,
        format!(
            "b in {{8,12,16}}: {shared} duplicated vertex copies, {mismatches} bitwise mismatches, \
             {over_bound} errors above half a step, min info - b = {min_info:.4} ({} below -{INFO_TOLERANCE}) {:?}, \
             {verify_failures} verify failures",
            low_info.len(),
            &low_info[..low_info.len().min(3)]
        ),
    )
}

fn criterion_8(proven: &Proven) -> Verdict {
    let mut failures = Vec::new();
    for (k, (g, s)) in proven.iter().enumerate() {
        let model = build_milp_with(g, FLOW, EPSILON);
        let x: Vec<f64> = s.selected.iter().map(|&b| b as u8 as f64).collect();
        let result = FlowCertificate::construct(g, &s.paths, FLOW, EPSILON)
            .map_err(|e| e.to_string())
            .and_then(|cert| model.check_assignment(&x, &cert.flat()));
        let objective = x.iter().sum::<f64>() as usize;
        if let Err(e) = result {
            failures.push(format!("solution {k}: {e}"));
        } else if g.node_count() - objective != s.paths.len() {
            failures.push(format!(
                "solution {k}: objective does not match strip count"
            ));
        }
    }
    Verdict::new(
        failures.is_empty() && !proven.is_empty(),
        format!(
            "{} proven-optimal solutions certified with F = {FLOW}, eps = 1/1024; {} failures {:?}",
            proven.len(),
            failures.len(),
            &failures[..failures.len().min(3)]
        ),
    )
}

fn criterion_9(containers: &[MeshletContainer]) -> Verdict {
    let mut bad = 0;
    let mut meta_bad = 0;
    let mut meshlets = 0;
    let dir = tempfile::tempdir().unwrap();
    for (k, c) in containers.iter().enumerate() {
        let bytes = c.to_bytes().unwrap();
        let back = MeshletContainer::from_bytes(&bytes).unwrap();
        let mut ok = back == *c && back.to_bytes().unwrap() == bytes;
        if k % 16 == 0 {
            let path = dir.path().join(format!("{k}.mlt1"));
            c.write(&path).unwrap();
            ok &= std::fs::read(&path).unwrap() == bytes
                && MeshletContainer::read(&path).unwrap() == *c;
        }
        bad += !ok as usize;
        let sizes = c.size_report().unwrap();
        meshlets += c.meshlets.len();
        meta_bad += (sizes.meta_bytes != 28 * c.meshlets.len()) as usize;
    }
    Verdict::new(
        bad == 0 && meta_bad == 0 && META_RECORD_BYTES == 12 + 16,
        format!(
            "{} containers ({meshlets} meshlets) byte-exact: {} failures; meta {META_RECORD_BYTES} B/meshlet, \
             {meta_bad} containers off",
            containers.len(),
            bad
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut proven = Proven::new();
    let mut gap = GapStats {
        eta: 0,
        exact: 0,
        ratios: Vec::new(),
    };
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();

    results.push((1, "optimality oracle", criterion_1(&mut proven)));
    results.push((2, "heuristic gap", criterion_2(&mut proven, &mut gap)));

    let corpus = corpus();
    let fallback = fallback_corpus();
    let gts = compressed(&corpus, Codec::Gts, 16);
    let reuse = compressed(&corpus, Codec::GtsReuse, 16);
    let basic = compressed(&corpus, Codec::Basic, 16);
    let fb_gts = compressed(&fallback, Codec::Gts, 16);
    let fb_reuse = compressed(&fallback, Codec::GtsReuse, 16);

    results.push((
        3,
        "degenerate accounting",
        criterion_3(&[&gts, &reuse, &fb_gts, &fb_reuse]),
    ));
    results.push((4, "roundtrip", criterion_4(&corpus, &[&gts, &reuse])));
    results.push((
        5,
        "parallel decode",
        criterion_5(&[&gts, &reuse, &fb_gts, &fb_reuse]),
    ));

    let sum = |run: &[(usize, Compressed)]| {
        run.iter().fold((0, 0), |(b, t), (_, c)| {
            let s = &c.report.sizes;
            (
                b + 8 * (s.flag_bytes + s.index_bytes),
                t + s.source_triangles,
            )
        })
    };
    let default_limits: Vec<_> = corpus
        .iter()
        .map(|(n, m, _)| (n.clone(), m.clone(), MeshletLimits::default()))
        .collect();
    let bpt = BptStats {
        gts: sum(&compressed(&default_limits, Codec::Gts, 16)),
        reuse: sum(&compressed(&default_limits, Codec::GtsReuse, 16)),
    };
    results.push((6, "compression arithmetic", criterion_6(&basic, &bpt)));

    let mut containers: Vec<MeshletContainer> = Vec::new();
    results.push((
        7,
        "crack-free quantization",
        criterion_7(&corpus, &mut containers),
    ));
    results.push((8, "MILP certificate", criterion_8(&proven)));
    for run in [&gts, &reuse, &basic, &fb_gts, &fb_reuse] {
        containers.extend(run.iter().map(|(_, c)| c.container.clone()));
    }
    results.push((9, "container", criterion_9(&containers)));

    let mut failed = 0;
    for (id, name, v) in &results {
        println!(
            "criterion {id}: {} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += !v.pass as usize;
    }

    let mean_ratio = gap.ratios.iter().sum::<f64>() / gap.ratios.len().max(1) as f64;
    println!(
        "criterion 10: REPORTED not reproducible at desk scale (GPU timings, large-scan absolute counts, \
         corpus MiB, exact information contents)"
    );
    println!(
        "  restarts: ETA {} / exact {} (total ratio {:.3}, mean per-meshlet ratio {mean_ratio:.3}, reference ~1.5, \
         expected <= 2.0); degenerates {} / {}",
        gap.eta,
        gap.exact,
        gap.eta as f64 / gap.exact.max(1) as f64,
        4 * gap.eta,
        4 * gap.exact
    );
    println!(
        "  index bpt at 128/256: vertex pipeline 96, basic 24, GTS {:.2}, GTS-Reuse {:.2} (reference 96 / 24 / 9.5 / 5.9)",
        bpt.gts.0 as f64 / bpt.gts.1 as f64,
        bpt.reuse.0 as f64 / bpt.reuse.1 as f64
    );
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
