//! Mixed-integer formulation of the optimal strip cover, LP-file export,
//! external solution import and flow certificates.
//!
//! Variables: one binary `x_e` per dual edge, and two continuous flow
//! variables `y_e_ab`, `y_e_ba` sitting on the `a` and `b` side of the edge.
//! Constraints per node: at most two selected incident edges (no fork), and
//! the node-side flows sum to at most `F - eps`. Per edge: the two flows sum
//! to `F * x_e`. Along a strip the node-side flow must strictly decrease,
//! which rules out cycles.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{DualGraph, Optimality, StripSolution, Violation};
use crate::error::{Error, Result};

pub const DEFAULT_FLOW: f64 = 1.0;
/// Paths are at most 256 triangles long, so 1/1024 leaves a 4x margin.
pub const DEFAULT_EPSILON: f64 = 1.0 / 1024.0;

/// Integrality tolerance for imported `x` values.
const INTEGRALITY_TOL: f64 = 1e-6;
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X(u32),
    /// Flow on the `a` side of edge `e`.
    YAb(u32),
    /// Flow on the `b` side of edge `e`.
    YBa(u32),
}

impl Var {
    pub fn name(&self) -> String {
        match self {
            Var::X(e) => format!("x{e}"),
            Var::YAb(e) => format!("y{e}_ab"),
            Var::YBa(e) => format!("y{e}_ba"),
        }
    }

    pub fn parse(name: &str) -> Option<Var> {
        if let Some(rest) = name.strip_prefix('x') {
            return rest.parse().ok().map(Var::X);
        }
        let rest = name.strip_prefix('y')?;
        let (e, side) = rest.split_once('_')?;
        let e: u32 = e.parse().ok()?;
        match side {
            "ab" => Some(Var::YAb(e)),
            "ba" => Some(Var::YBa(e)),
            _ => None,
        }
    }

    /// Position in the flat `[x..., (y_ab, y_ba)...]` vector.
    fn column(&self, edge_count: usize) -> usize {
        match *self {
            Var::X(e) => e as usize,
            Var::YAb(e) => edge_count + 2 * e as usize,
            Var::YBa(e) => edge_count + 2 * e as usize + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(f64, Var)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub node_count: usize,
    pub edge_count: usize,
    pub flow: f64,
    pub epsilon: f64,
    /// Maximize the sum of these (all `x_e`, coefficient 1).
    pub objective: Vec<(f64, Var)>,
    pub constraints: Vec<Constraint>,
}

pub fn build_milp(g: &DualGraph) -> MilpModel {
    build_milp_with(g, DEFAULT_FLOW, DEFAULT_EPSILON)
}

pub fn build_milp_with(g: &DualGraph, flow: f64, epsilon: f64) -> MilpModel {
    assert!(flow > 0.0 && epsilon > 0.0 && epsilon < flow);
    let m = g.edge_count();
    let objective = (0..m as u32).map(|e| (1.0, Var::X(e))).collect();
    let side_var = |e: u32, node: u32| {
        if g.edge(e).a == node {
            Var::YAb(e)
        } else {
            Var::YBa(e)
        }
    };

    let mut constraints = Vec::with_capacity(2 * g.node_count() + m);
    for v in 0..g.node_count() as u32 {
        constraints.push(Constraint {
            name: format!("nofork_{v}"),
            terms: g.incident(v).iter().map(|&e| (1.0, Var::X(e))).collect(),
            sense: Sense::Le,
            rhs: 2.0,
        });
    }
    for e in 0..m as u32 {
        constraints.push(Constraint {
            name: format!("flow_{e}"),
            terms: vec![(1.0, Var::YAb(e)), (1.0, Var::YBa(e)), (-flow, Var::X(e))],
            sense: Sense::Eq,
            rhs: 0.0,
        });
    }
    for v in 0..g.node_count() as u32 {
        constraints.push(Constraint {
            name: format!("node_{v}"),
            terms: g
                .incident(v)
                .iter()
                .map(|&e| (1.0, side_var(e, v)))
                .collect(),
            sense: Sense::Le,
            rhs: flow - epsilon,
        });
    }
    MilpModel {
        node_count: g.node_count(),
        edge_count: m,
        flow,
        epsilon,
        objective,
        constraints,
    }
}

impl MilpModel {
    pub fn binary_count(&self) -> usize {
        self.edge_count
    }

    pub fn continuous_count(&self) -> usize {
        2 * self.edge_count
    }

    /// Checks bounds, integrality and every constraint for an assignment.
    ///
    /// `y` is laid out as `[y0_ab, y0_ba, y1_ab, ...]`.
    pub fn check_assignment(&self, x: &[f64], y: &[f64]) -> std::result::Result<(), String> {
        if x.len() != self.edge_count || y.len() != 2 * self.edge_count {
            return Err("assignment has the wrong number of variables".into());
        }
        if let Some(i) = x.iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(format!("x{i} = {} is not binary", x[i]));
        }
        if let Some(i) = y.iter().position(|&v| v < -FEASIBILITY_TOL) {
            return Err(format!("flow variable {i} is negative"));
        }
        let value = |var: &Var| {
            let c = var.column(self.edge_count);
            if c < self.edge_count {
                x[c]
            } else {
                y[c - self.edge_count]
            }
        };
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(k, v)| k * value(v)).sum();
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs + FEASIBILITY_TOL,
                Sense::Eq => (lhs - c.rhs).abs() <= FEASIBILITY_TOL,
            };
            if !ok {
                return Err(format!("{}: lhs {lhs} violates rhs {}", c.name, c.rhs));
            }
        }
        Ok(())
    }
}

fn format_coef(k: f64) -> String {
    format!("{k}")
}

fn write_expr(out: &mut String, terms: &[(f64, Var)]) {
    for (i, (k, var)) in terms.iter().enumerate() {
        // Keep lines well below the 510-character LP line limit.
        if i > 0 && i % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if *k < 0.0 { "-" } else { "+" };
        let mag = k.abs();
        if i == 0 && sign == "+" {
            out.push(' ');
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag != 1.0 {
            let _ = write!(out, "{} ", format_coef(mag));
        }
        out.push_str(&var.name());
    }
}

/// Renders the model in CPLEX LP format.
pub fn write_lp(model: &MilpModel, out: &mut impl Write) -> std::io::Result<()> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "\\ generalized triangle strip cover: {} triangles, {} dual edges, F = {}, eps = {}",
        model.node_count, model.edge_count, model.flow, model.epsilon
    );
    s.push_str("Maximize\n obj:");
    write_expr(&mut s, &model.objective);
    s.push_str("\nSubject To\n");
    for c in &model.constraints {
        // Isolated nodes give empty rows; LP files cannot express those.
        if c.terms.is_empty() {
            continue;
        }
        let _ = write!(s, " {}:", c.name);
        write_expr(&mut s, &c.terms);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(s, " {op} {}", format_coef(c.rhs));
    }
    s.push_str("Bounds\n");
    for e in 0..model.edge_count as u32 {
        let _ = writeln!(s, " {} >= 0", Var::YAb(e).name());
        let _ = writeln!(s, " {} >= 0", Var::YBa(e).name());
    }
    s.push_str("Binary\n");
    for e in 0..model.edge_count as u32 {
        let _ = writeln!(s, " {}", Var::X(e).name());
    }
    s.push_str("End\n");
    out.write_all(s.as_bytes())
}

pub fn export_lp(model: &MilpModel, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_lp(model, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Reads an external solver's `name value` solution file.
pub fn import_solution(
    model: &MilpModel,
    g: &DualGraph,
    path: impl AsRef<Path>,
) -> Result<StripSolution> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_solution(model, g, BufReader::new(file), path)
}

pub fn parse_solution(
    model: &MilpModel,
    g: &DualGraph,
    reader: impl BufRead,
    origin: &Path,
) -> Result<StripSolution> {
    let err = |line: usize, message: String| Error::Solution {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut selected = vec![false; model.edge_count];
    let mut optimality = Optimality::Heuristic;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if comment.trim().eq_ignore_ascii_case("optimal") {
                optimality = Optimality::ProvenOptimal;
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(name), Some(value), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(err(lineno, format!("expected `name value`, got {line:?}")));
        };
        let var = Var::parse(name)
            .filter(|v| match *v {
                Var::X(e) | Var::YAb(e) | Var::YBa(e) => (e as usize) < model.edge_count,
            })
            .ok_or_else(|| err(lineno, format!("unknown variable {name:?}")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| err(lineno, format!("invalid value {value:?}")))?;
        if let Var::X(e) = var {
            let rounded = value.round();
            if (value - rounded).abs() > INTEGRALITY_TOL || !(rounded == 0.0 || rounded == 1.0) {
                return Err(err(lineno, format!("{name} = {value} is not binary")));
            }
            selected[e as usize] = rounded == 1.0;
        }
    }
    Ok(StripSolution::new(g, selected, optimality)?)
}

/// Explicit flow values proving a selection satisfies the anti-cycle rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCertificate {
    /// `(y_ab, y_ba)` per edge.
    pub flows: Vec<[f64; 2]>,
}

impl FlowCertificate {
    /// Along each path `n0 .. nk`, the edge between `n_i` and `n_(i+1)` gets
    /// `F - (i+1) eps` on the `n_i` side and `(i+1) eps` on the other, so each
    /// node's side sum is exactly `F - eps`. Unselected edges carry zero.
    pub fn construct(
        g: &DualGraph,
        paths: &[Vec<u32>],
        flow: f64,
        epsilon: f64,
    ) -> std::result::Result<Self, Violation> {
        let mut flows = vec![[0.0; 2]; g.edge_count()];
        let mut used = vec![false; g.edge_count()];
        for path in paths {
            let edges = path.len().saturating_sub(1);
            if (edges as f64 + 1.0) * epsilon > flow {
                return Err(Violation::FlowInfeasible { edges });
            }
            for (i, w) in path.windows(2).enumerate() {
                let (from, to) = (w[0], w[1]);
                let e = g
                    .incident(from)
                    .iter()
                    .copied()
                    .find(|&e| !used[e as usize] && g.edge(e).other(from) == to)
                    .ok_or(Violation::NotAdjacent { a: from, b: to })?;
                used[e as usize] = true;
                let near = flow - (i as f64 + 1.0) * epsilon;
                let far = flow - near;
                flows[e as usize] = if g.edge(e).a == from {
                    [near, far]
                } else {
                    [far, near]
                };
            }
        }
        Ok(Self { flows })
    }

    pub fn flat(&self) -> Vec<f64> {
        self.flows.iter().flatten().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::k4;
    use super::*;
    use std::io::Cursor;

    fn lp_text(g: &DualGraph) -> String {
        let mut buf = Vec::new();
        write_lp(&build_milp(g), &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn k4_model_counts() {
        let m = build_milp(&k4());
        assert_eq!(m.binary_count(), 6);
        assert_eq!(m.continuous_count(), 12);
        assert_eq!(m.constraints.len(), 14);
        assert_eq!(m.flow, 1.0);
        assert_eq!(m.epsilon, 1.0 / 1024.0);
    }

    #[test]
    fn empty_graph_model() {
        let g = DualGraph::from_pairs(1, &[]);
        let m = build_milp(&g);
        assert!(m.objective.is_empty());
        assert!(m.check_assignment(&[], &[]).is_ok());
    }

    #[test]
    fn lp_file_layout() {
        let text = lp_text(&k4());
        assert!(
            text.contains("Maximize\n obj: x0 + x1 + x2 + x3 + x4 + x5\n"),
            "{text}"
        );
        assert!(text.contains(" flow_0: y0_ab + y0_ba - x0 = 0\n"), "{text}");
        assert!(text.contains(" nofork_0: x0 + x1 + x2 <= 2\n"));
        assert!(text.contains(" node_0: y0_ab + y1_ab + y2_ab <= 0.9990234375\n"));
        assert!(text.contains(" node_3: y2_ba + y4_ba + y5_ba <= 0.9990234375\n"));
        let binary = text.split("Binary\n").nth(1).unwrap();
        let names: Vec<&str> = binary
            .lines()
            .take_while(|l| *l != "End")
            .map(str::trim)
            .collect();
        assert_eq!(names, ["x0", "x1", "x2", "x3", "x4", "x5"]);
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn flow_coefficient_is_written_when_not_one() {
        let m = build_milp_with(&k4(), 2.0, 0.25);
        let mut buf = Vec::new();
        write_lp(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.contains(" flow_0: y0_ab + y0_ba - 2 x0 = 0\n"),
            "{text}"
        );
    }

    fn parse(g: &DualGraph, text: &str) -> Result<StripSolution> {
        parse_solution(&build_milp(g), g, Cursor::new(text), Path::new("t.sol"))
    }

    #[test]
    fn hamiltonian_path_import() {
        // 0-1, 1-2, 2-3 are edges 0, 3, 5.
        let s = parse(
            &k4(),
            "# optimal\nx0 1\nx1 0\nx2 0\nx3 1\nx4 0\nx5 0.9999999\ny0_ab 0.5\n",
        )
        .unwrap();
        assert_eq!(s.restart_count(), 0);
        assert_eq!(s.optimality, Optimality::ProvenOptimal);
        assert_eq!(s.paths, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn import_rejects_invalid_selection_and_input() {
        let all = (0..6).map(|e| format!("x{e} 1\n")).collect::<String>();
        assert!(matches!(parse(&k4(), &all), Err(Error::Strip(_))));
        assert!(matches!(
            parse(&k4(), "x9 1\n"),
            Err(Error::Solution { line: 1, .. })
        ));
        assert!(matches!(
            parse(&k4(), "z0 1\n"),
            Err(Error::Solution { .. })
        ));
        assert!(matches!(
            parse(&k4(), "x0 0.5\n"),
            Err(Error::Solution { .. })
        ));
        assert!(matches!(
            parse(&k4(), "x0 2\n"),
            Err(Error::Solution { .. })
        ));
        assert!(matches!(parse(&k4(), "x0\n"), Err(Error::Solution { .. })));
    }

    #[test]
    fn empty_import_is_all_restarts() {
        let s = parse(&k4(), "").unwrap();
        assert_eq!(s.restart_count(), 3);
        assert_eq!(s.optimality, Optimality::Heuristic);
    }

    #[test]
    fn certificate_for_long_path() {
        let n = 257u32;
        let pairs: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let g = DualGraph::from_pairs(n as usize, &pairs);
        let cert = super::super::validate_solution(&g, &vec![true; pairs.len()]).unwrap();
        // First edge: F - eps on the start side.
        assert_eq!(cert.flows[0], [1.0 - 1.0 / 1024.0, 1.0 / 1024.0]);
        assert_eq!(cert.flows[255][1], 256.0 / 1024.0);
    }

    #[test]
    fn certificate_rejects_paths_beyond_flow_budget() {
        let n = 1100u32;
        let pairs: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let g = DualGraph::from_pairs(n as usize, &pairs);
        assert!(matches!(
            super::super::validate_solution(&g, &vec![true; pairs.len()]),
            Err(Violation::FlowInfeasible { .. })
        ));
    }

    #[test]
    fn check_assignment_catches_cycles() {
        // A selected triangle cycle has no feasible flow: any attempt fails a row.
        let g = DualGraph::from_pairs(3, &[(0, 1), (1, 2), (2, 0)]);
        let m = build_milp(&g);
        let y = vec![0.5; 6];
        assert!(m.check_assignment(&[1.0, 1.0, 1.0], &y).is_err());
    }

    #[test]
    fn var_names_roundtrip() {
        for v in [Var::X(0), Var::X(17), Var::YAb(3), Var::YBa(250)] {
            assert_eq!(Var::parse(&v.name()), Some(v));
        }
        assert_eq!(Var::parse("y3_xx"), None);
    }
}
