//! Frequency-response tracing by exhaustive per-frequency amplitude solving.
//!
//! Disconnected response components are found by solving for every amplitude
//! root on a frequency grid and linking roots of adjacent grid columns into
//! curves; sweep continuation would overlook detached branches. The grid
//! always contains the resonant frequency (every isolated branch of this
//! family straddles it) and is refined wherever the root count changes
//! between neighboring columns, so arbitrarily narrow isolas are resolved.

use super::{DescribingResidual, HbSystem};
use crate::error::{Error, Result};
use crate::model::{DampingLaw, Params};
use std::collections::HashMap;

/// Controls for [`trace_frequency_response`].
#[derive(Debug, Clone)]
pub struct TraceConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    /// base frequency grid size
    pub base_points: usize,
    /// amplitude ceiling (peak displacement) for laws without a polynomial
    /// manifold, where roots are found by scanning
    pub x_peak_max: f64,
    /// scan cells for the non-polynomial amplitude solver
    pub scan_cells: usize,
    /// bisection depth bound for local grid refinement
    pub max_refine_levels: u32,
    /// near-duplicate amplitude roots are merged within this relative tolerance
    pub tol_root: f64,
    /// minimum number of grid columns across any closed branch
    pub min_island_columns: usize,
    /// hard cap on grid columns
    pub max_columns: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            omega_min: 0.2,
            omega_max: 2.0,
            base_points: 2000,
            x_peak_max: 40.0,
            scan_cells: 4000,
            max_refine_levels: 26,
            tol_root: 1e-9,
            min_island_columns: 16,
            max_columns: 60_000,
        }
    }
}

impl TraceConfig {
    pub fn with_window(mut self, omega_min: f64, omega_max: f64) -> Self {
        self.omega_min = omega_min;
        self.omega_max = omega_max;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0) || !(self.omega_max > self.omega_min) {
            return Err(Error::InvalidInput(format!(
                "frequency window must satisfy 0 < omega_min < omega_max, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if self.base_points < 2 {
            return Err(Error::InvalidInput("base grid needs at least two points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Main,
    Isolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityHint {
    Unknown,
    Stable,
    Unstable,
}

impl std::fmt::Display for StabilityHint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Unknown => "unknown",
            Self::Stable => "stable",
            Self::Unstable => "unstable",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BranchSample {
    pub omega: f64,
    pub x_peak: f64,
    pub amp_sq: f64,
    pub stability: StabilityHint,
}

/// One connected response component, samples ordered along the curve.
#[derive(Debug, Clone)]
pub struct ResponseBranch {
    pub samples: Vec<BranchSample>,
    pub kind: BranchKind,
    /// true when the component is a loop; such branches repeat their first
    /// sample at the end
    pub closed: bool,
}

impl ResponseBranch {
    pub fn x_peak_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            lo = lo.min(s.x_peak);
            hi = hi.max(s.x_peak);
        }
        (lo, hi)
    }

    pub fn omega_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            lo = lo.min(s.omega);
            hi = hi.max(s.omega);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
pub struct TraceResult {
    pub branches: Vec<ResponseBranch>,
    pub warnings: Vec<String>,
}

impl TraceResult {
    /// Closed isolated branches: the isolated resonance curves proper.
    pub fn irc_count(&self) -> usize {
        self.branches
            .iter()
            .filter(|b| b.kind == BranchKind::Isolated && b.closed)
            .count()
    }

    pub fn isolated_count(&self) -> usize {
        self.branches.iter().filter(|b| b.kind == BranchKind::Isolated).count()
    }

    pub fn main_branch(&self) -> Option<&ResponseBranch> {
        self.branches.iter().find(|b| b.kind == BranchKind::Main)
    }
}

/// Traces the frequency response of the quintic-law oscillator.
pub fn trace_frequency_response_quintic(
    params: Params,
    forcing: f64,
    cfg: &TraceConfig,
) -> Result<TraceResult> {
    trace_frequency_response(&DampingLaw::quintic(params), forcing, cfg)
}

/// Traces the frequency response of an arbitrary odd damping law, splitting
/// the solution set into the main branch and isolated components.
pub fn trace_frequency_response(
    law: &DampingLaw,
    forcing: f64,
    cfg: &TraceConfig,
) -> Result<TraceResult> {
    cfg.validate()?;
    if !(forcing >= 0.0) {
        return Err(Error::InvalidInput(format!("forcing must be >= 0, got {forcing}")));
    }
    let force_sq = forcing * forcing;
    // for positive forcing the root count of any column is odd; even counts
    // are artifacts of sampling within machine reach of a fold
    let parity_filter = forcing > 0.0;
    match law {
        DampingLaw::QuinticPoly { c1, c3 } => {
            let sys = HbSystem { c1: *c1, c3: *c3 };
            let solver = |omega: f64| sys.solve_amplitudes(omega * omega, force_sq, cfg.tol_root);
            run_trace(&solver, cfg, parity_filter)
        }
        _ => {
            let a_max = cfg.x_peak_max / 2.0;
            let v_max = 2.0 * a_max * cfg.omega_max * 1.05;
            let res = DescribingResidual::with_cache(law, v_max, 2 * cfg.scan_cells);
            let solver = |omega: f64| {
                res.solve_amplitudes(omega * omega, force_sq, a_max, cfg.scan_cells, cfg.tol_root)
            };
            run_trace(&solver, cfg, parity_filter)
        }
    }
}

struct Column {
    omega: f64,
    roots: Vec<f64>,
}

struct Grid<'a> {
    solver: &'a dyn Fn(f64) -> Result<Vec<f64>>,
    cache: HashMap<u64, Vec<f64>>,
    columns: Vec<Column>,
}

impl<'a> Grid<'a> {
    fn solve(&mut self, omega: f64) -> Result<Vec<f64>> {
        if let Some(r) = self.cache.get(&omega.to_bits()) {
            return Ok(r.clone());
        }
        let roots = (self.solver)(omega)?;
        self.cache.insert(omega.to_bits(), roots.clone());
        Ok(roots)
    }

    fn insert_column(&mut self, idx: usize, omega: f64) -> Result<()> {
        let roots = self.solve(omega)?;
        self.columns.insert(idx, Column { omega, roots });
        Ok(())
    }
}

fn run_trace(
    solver: &dyn Fn(f64) -> Result<Vec<f64>>,
    cfg: &TraceConfig,
    parity_filter: bool,
) -> Result<TraceResult> {
    let mut warnings = Vec::new();
    let mut grid = Grid { solver, cache: HashMap::new(), columns: Vec::new() };

    // base grid; the resonant frequency is always a column
    let n = cfg.base_points;
    let mut omegas: Vec<f64> = (0..n)
        .map(|i| cfg.omega_min + (cfg.omega_max - cfg.omega_min) * i as f64 / (n - 1) as f64)
        .collect();
    if cfg.omega_min < 1.0 && cfg.omega_max > 1.0 {
        omegas.push(1.0);
    }
    omegas.sort_by(|a, b| a.partial_cmp(b).expect("finite frequency"));
    omegas.dedup();
    for w in omegas {
        let roots = grid.solve(w)?;
        grid.columns.push(Column { omega: w, roots });
    }

    let base_step = (cfg.omega_max - cfg.omega_min) / (n - 1) as f64;
    let min_gap = base_step / (1u64 << cfg.max_refine_levels.min(52)) as f64;

    let settle = |grid: &mut Grid| -> Result<()> {
        for _ in 0..3 {
            refine_on_count_changes(grid, min_gap, cfg.max_columns)?;
            if !parity_filter {
                break;
            }
            let before = grid.columns.len();
            grid.columns.retain(|c| c.roots.len() % 2 == 1);
            if grid.columns.len() == before {
                break;
            }
        }
        Ok(())
    };

    settle(&mut grid)?;
    let (mut edges, ambiguous) = link_columns(&grid.columns, &mut warnings);

    // local refinement where the matching stayed ambiguous, at most 3 rounds
    let mut rounds = 0;
    let mut pending = ambiguous;
    while !pending.is_empty() && rounds < 3 && grid.columns.len() < cfg.max_columns {
        let mut gaps: Vec<(f64, f64)> = pending
            .iter()
            .filter_map(|&i| {
                let lo = grid.columns[i].omega;
                let hi = grid.columns.get(i + 1)?.omega;
                Some((lo, hi))
            })
            .collect();
        gaps.dedup();
        for (lo, hi) in gaps {
            if hi - lo <= min_gap {
                continue;
            }
            for k in 1..4 {
                let w = lo + (hi - lo) * k as f64 / 4.0;
                let idx = grid
                    .columns
                    .partition_point(|c| c.omega < w);
                if grid.columns[idx.saturating_sub(1)].omega != w {
                    grid.insert_column(idx, w)?;
                }
            }
        }
        settle(&mut grid)?;
        let (e, amb) = link_columns(&grid.columns, &mut warnings);
        edges = e;
        pending = amb;
        rounds += 1;
    }
    if !pending.is_empty() {
        warnings.push(format!(
            "branch linking remained ambiguous near {} grid gap(s) after refinement",
            pending.len()
        ));
    }

    // make sure closed components carry enough columns to describe their shape
    let comps = components(&grid.columns, &edges);
    let mut extra = Vec::new();
    for comp in &comps {
        if !comp.closed {
            continue;
        }
        let cols: std::collections::BTreeSet<usize> = comp.nodes.iter().map(|n| n.0).collect();
        if cols.len() >= cfg.min_island_columns {
            continue;
        }
        let lo = grid.columns[*cols.iter().next().expect("nonempty component")].omega;
        let hi = grid.columns[*cols.iter().last().expect("nonempty component")].omega;
        let span = (hi - lo).max(min_gap * 4.0);
        for k in 0..cfg.min_island_columns {
            extra.push(lo + span * (k as f64 + 0.5) / cfg.min_island_columns as f64);
        }
    }
    if !extra.is_empty() && grid.columns.len() + extra.len() < cfg.max_columns {
        for w in extra {
            let idx = grid.columns.partition_point(|c| c.omega < w);
            if idx == 0 || grid.columns[idx - 1].omega != w {
                grid.insert_column(idx, w)?;
            }
        }
        settle(&mut grid)?;
        let (e, _) = link_columns(&grid.columns, &mut warnings);
        edges = e;
    }

    let comps = components(&grid.columns, &edges);
    let branches = assemble_branches(&grid.columns, comps, &mut warnings);
    Ok(TraceResult { branches, warnings })
}

/// Bisects every gap whose neighboring columns disagree on the root count.
fn refine_on_count_changes(grid: &mut Grid, min_gap: f64, max_columns: usize) -> Result<()> {
    let mut i = 0;
    while i + 1 < grid.columns.len() {
        let (left, right) = (&grid.columns[i], &grid.columns[i + 1]);
        let gap = right.omega - left.omega;
        if left.roots.len() != right.roots.len() && gap > min_gap && grid.columns.len() < max_columns
        {
            let mid = 0.5 * (left.omega + right.omega);
            grid.insert_column(i + 1, mid)?;
            // stay to re-examine the left half
        } else {
            i += 1;
        }
    }
    Ok(())
}

type NodeId = (usize, usize); // (column index, root index)

/// Links roots of adjacent columns by a monotone minimal-cost alignment.
/// Roots left unmatched at a column pair up as folds. Returns the edge list
/// and the indices of column gaps with ambiguous matches.
fn link_columns(
    columns: &[Column],
    warnings: &mut Vec<String>,
) -> (Vec<(NodeId, NodeId)>, Vec<usize>) {
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut ambiguous = Vec::new();
    let last_col = columns.len().saturating_sub(1);

    // fold partners for roots that vanish to the right / appear from the left
    let mut unmatched_left: Vec<Vec<usize>> = vec![Vec::new(); columns.len()];
    let mut unmatched_right: Vec<Vec<usize>> = vec![Vec::new(); columns.len()];

    for k in 0..last_col {
        let l = &columns[k].roots;
        let r = &columns[k + 1].roots;
        let (matches, skip_l, skip_r) = align(l, r);
        // sheets cannot cross between columns of equal count, but a matched
        // movement comparable to the local sheet spacing means the gap is too
        // coarse to trust the identification
        let sheet_gap = min_spacing(l).min(min_spacing(r));
        let mut amb = false;
        for &(i, j) in &matches {
            edges.push(((k, i), (k + 1, j)));
            if sheet_gap.is_finite() && (l[i] - r[j]).abs() > 0.45 * sheet_gap {
                amb = true;
            }
        }
        if amb {
            ambiguous.push(k);
        }
        unmatched_left[k].extend(skip_l);
        unmatched_right[k + 1].extend(skip_r);
    }

    for (k, idxs) in unmatched_left.iter().enumerate() {
        if k == last_col {
            continue; // window edge: leave endpoints open
        }
        pair_folds(k, columns, idxs, &mut edges, warnings);
    }
    for (k, idxs) in unmatched_right.iter().enumerate() {
        if k == 0 {
            continue;
        }
        pair_folds(k, columns, idxs, &mut edges, warnings);
    }

    (edges, ambiguous)
}

fn min_spacing(col: &[f64]) -> f64 {
    col.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Monotone alignment of two ascending root lists. Distinct solution sheets
/// cannot cross between adjacent columns, so equal-length lists match by
/// index; otherwise a minimal-cost alignment decides which roots of the
/// longer side vanished into folds. Returns (matches, unmatched left,
/// unmatched right).
fn align(l: &[f64], r: &[f64]) -> (Vec<(usize, usize)>, Vec<usize>, Vec<usize>) {
    let (n, m) = (l.len(), r.len());
    if n == m {
        return ((0..n).map(|i| (i, i)).collect(), Vec::new(), Vec::new());
    }
    // skip penalty dominates every match cost so exactly |n - m| roots are
    // dropped, wherever that costs least
    let span = l
        .iter()
        .chain(r)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let penalty = 1e6 * (span.1 - span.0).max(1e-12);
    let mut cost = vec![vec![0.0f64; m + 1]; n + 1];
    for i in 1..=n {
        cost[i][0] = i as f64 * penalty;
    }
    for j in 1..=m {
        cost[0][j] = j as f64 * penalty;
    }
    for i in 1..=n {
        for j in 1..=m {
            let d = (l[i - 1] - r[j - 1]).abs();
            cost[i][j] = (cost[i - 1][j - 1] + d)
                .min(cost[i - 1][j] + penalty)
                .min(cost[i][j - 1] + penalty);
        }
    }
    let mut matches = Vec::new();
    let mut skip_l = Vec::new();
    let mut skip_r = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let d = (l[i - 1] - r[j - 1]).abs();
            if (cost[i][j] - (cost[i - 1][j - 1] + d)).abs() <= 1e-9 * cost[i][j].max(1.0) {
                matches.push((i - 1, j - 1));
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && (cost[i][j] - (cost[i - 1][j] + penalty)).abs() <= 1e-9 * cost[i][j].max(1.0) {
            skip_l.push(i - 1);
            i -= 1;
        } else {
            skip_r.push(j - 1);
            j -= 1;
        }
    }
    matches.reverse();
    skip_l.reverse();
    skip_r.reverse();
    (matches, skip_l, skip_r)
}

/// Connects vanishing root pairs inside one column. Fold partners split from
/// a tangency, so they must be adjacent in the sorted root list.
fn pair_folds(
    col: usize,
    columns: &[Column],
    idxs: &[usize],
    edges: &mut Vec<(NodeId, NodeId)>,
    warnings: &mut Vec<String>,
) {
    let roots = &columns[col].roots;
    let mut it = idxs.chunks_exact(2);
    for pair in &mut it {
        let (a, b) = (pair[0], pair[1]);
        if b != a + 1 {
            warnings.push(format!(
                "non-adjacent fold partners (roots {:.6e} and {:.6e}) at omega = {:.9}",
                roots[a], roots[b], columns[col].omega
            ));
        }
        edges.push(((col, a), (col, b)));
    }
    if !it.remainder().is_empty() {
        let near: Vec<usize> = columns
            [col.saturating_sub(1)..(col + 2).min(columns.len())]
            .iter()
            .map(|c| c.roots.len())
            .collect();
        warnings.push(format!(
            "odd number of vanishing roots at omega = {:.9} (root {:.6e}; neighborhood counts {near:?}); branch parity is suspect",
            columns[col].omega,
            roots[it.remainder()[0]],
        ));
    }
}

struct Component {
    nodes: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    closed: bool,
    has_quasilinear: bool,
}

fn components(columns: &[Column], edges: &[(NodeId, NodeId)]) -> Vec<Component> {
    // flatten node ids
    let mut offset = Vec::with_capacity(columns.len());
    let mut total = 0usize;
    for c in columns {
        offset.push(total);
        total += c.roots.len();
    }
    let flat = |n: NodeId| offset[n.0] + n.1;

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (eid, &(a, b)) in edges.iter().enumerate() {
        adj[flat(a)].push(eid);
        adj[flat(b)].push(eid);
    }

    let mut comp_of = vec![usize::MAX; total];
    let mut comps: Vec<Component> = Vec::new();
    for start in 0..total {
        if comp_of[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![start];
        comp_of[start] = id;
        let mut nodes = Vec::new();
        let mut comp_edges = Vec::new();
        let mut seen_edges = std::collections::HashSet::new();
        while let Some(u) = stack.pop() {
            nodes.push(u);
            for &eid in &adj[u] {
                if seen_edges.insert(eid) {
                    comp_edges.push(edges[eid]);
                }
                let (a, b) = edges[eid];
                for v in [flat(a), flat(b)] {
                    if comp_of[v] == usize::MAX {
                        comp_of[v] = id;
                        stack.push(v);
                    }
                }
            }
        }
        // map flat ids back
        let unflat = |u: usize| -> NodeId {
            let col = offset.partition_point(|&o| o <= u) - 1;
            (col, u - offset[col])
        };
        let node_ids: Vec<NodeId> = nodes.iter().map(|&u| unflat(u)).collect();
        let closed = !node_ids.is_empty() && comp_edges.len() == node_ids.len();
        let has_quasilinear = node_ids.iter().any(|&(c, r)| c == 0 && r == 0);
        comps.push(Component { nodes: node_ids, edges: comp_edges, closed, has_quasilinear });
    }
    comps
}

fn assemble_branches(
    columns: &[Column],
    comps: Vec<Component>,
    warnings: &mut Vec<String>,
) -> Vec<ResponseBranch> {
    let mut branches = Vec::new();
    for comp in comps {
        if comp.nodes.is_empty() {
            continue;
        }
        let ordered = walk_component(&comp, warnings);
        let samples: Vec<BranchSample> = ordered
            .iter()
            .map(|&(c, r)| {
                let amp_sq = columns[c].roots[r];
                BranchSample {
                    omega: columns[c].omega,
                    x_peak: 2.0 * amp_sq.sqrt(),
                    amp_sq,
                    stability: StabilityHint::Unknown,
                }
            })
            .collect();
        let mut samples = samples;
        if comp.closed {
            if let Some(first) = samples.first().copied() {
                samples.push(first);
            }
        }
        branches.push(ResponseBranch {
            samples,
            kind: if comp.has_quasilinear { BranchKind::Main } else { BranchKind::Isolated },
            closed: comp.closed,
        });
    }
    // main first, then isolated by descending size
    branches.sort_by_key(|b| (b.kind != BranchKind::Main, usize::MAX - b.samples.len()));
    branches
}

/// Orders a degree-<=2 component along its curve (path or cycle).
fn walk_component(comp: &Component, warnings: &mut Vec<String>) -> Vec<NodeId> {
    if comp.nodes.len() == 1 {
        return comp.nodes.clone();
    }
    let mut adj: HashMap<NodeId, Vec<(NodeId, usize)>> = HashMap::new();
    for (eid, &(a, b)) in comp.edges.iter().enumerate() {
        adj.entry(a).or_default().push((b, eid));
        adj.entry(b).or_default().push((a, eid));
    }
    if adj.values().any(|v| v.len() > 2) {
        warnings.push("component with a degree > 2 node; curve ordering is heuristic".into());
    }
    let start = comp
        .nodes
        .iter()
        .copied()
        .find(|n| adj.get(n).map(|v| v.len() == 1).unwrap_or(true))
        .unwrap_or(comp.nodes[0]);
    let mut used = vec![false; comp.edges.len()];
    let mut order = vec![start];
    let mut current = start;
    loop {
        let Some(next) = adj
            .get(&current)
            .and_then(|v| v.iter().find(|(_, eid)| !used[*eid]).copied())
        else {
            break;
        };
        used[next.1] = true;
        current = next.0;
        if current == start {
            break;
        }
        order.push(current);
    }
    if order.len() < comp.nodes.len() {
        // disconnected remainder (should not happen); append by column order
        let missing: Vec<NodeId> = comp
            .nodes
            .iter()
            .copied()
            .filter(|n| !order.contains(n))
            .collect();
        order.extend(missing);
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_small() -> TraceConfig {
        TraceConfig { base_points: 800, ..TraceConfig::default() }
    }

    #[test]
    fn zone2_counts_across_isola_window() {
        let p = Params::new(0.1, -0.6).unwrap();
        // below birth: single bell-shaped branch
        let t = trace_frequency_response_quintic(p, 0.005, &cfg_small()).unwrap();
        assert_eq!(t.irc_count(), 0, "warnings: {:?}", t.warnings);
        assert_eq!(t.branches.len(), 1);
        assert!(t.main_branch().is_some());
        // inside the window: exactly one isolated loop
        let t = trace_frequency_response_quintic(p, 0.008, &cfg_small()).unwrap();
        assert_eq!(t.irc_count(), 1, "warnings: {:?}", t.warnings);
        // merged: multivalued but connected
        let t = trace_frequency_response_quintic(p, 0.012, &cfg_small()).unwrap();
        assert_eq!(t.irc_count(), 0, "warnings: {:?}", t.warnings);
        assert_eq!(t.branches.len(), 1);
    }

    #[test]
    fn zone3_island_chain_at_small_forcing() {
        let p = Params::new(0.1, -0.8).unwrap();
        let t = trace_frequency_response_quintic(p, 1e-4, &cfg_small()).unwrap();
        assert_eq!(t.irc_count(), 2, "warnings: {:?}", t.warnings);
        assert!(t.main_branch().is_some());
    }

    #[test]
    fn closed_branches_return_to_start() {
        let p = Params::new(0.1, -0.6).unwrap();
        let t = trace_frequency_response_quintic(p, 0.008, &cfg_small()).unwrap();
        let irc = t
            .branches
            .iter()
            .find(|b| b.kind == BranchKind::Isolated && b.closed)
            .expect("one IRC");
        let first = irc.samples.first().unwrap();
        let last = irc.samples.last().unwrap();
        assert_eq!(first.omega, last.omega);
        assert_eq!(first.amp_sq, last.amp_sq);
        assert!(irc.samples.len() > 16);
    }

    #[test]
    fn main_branch_contains_quasilinear_solution() {
        let p = Params::new(0.1, -0.6).unwrap();
        let t = trace_frequency_response_quintic(p, 0.008, &cfg_small()).unwrap();
        let main = t.main_branch().unwrap();
        let s0 = &main.samples[0];
        // at the low-frequency end the response is close to the static one
        assert!(s0.omega <= 0.2 + 1e-12);
        assert!(s0.x_peak < 0.1);
    }

    #[test]
    fn rejects_bad_window() {
        let p = Params::new(0.1, -0.6).unwrap();
        let cfg = TraceConfig { omega_min: 2.0, omega_max: 1.0, ..Default::default() };
        assert!(trace_frequency_response_quintic(p, 0.01, &cfg).is_err());
    }
}
