//! Synthetic temporal networks for the three growth mechanisms: degree
//! preferential attachment, eigenvector preferential attachment, triangle
//! closing and kernel-driven growth.
//!
//! Every generator numbers vertices `0..n` and stamps edges `1, 2, 3, …`
//! in creation order. Runs are deterministic for a fixed seed.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphSnapshot, TemporalEdge, TemporalEdgeList};
use crate::ingest::make_timepoints;
use crate::spectral::{spectral_norm, SpectralOptions};
use crate::trend::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    BarabasiAlbert,
    EigenvectorPa,
    TriangleClosing,
    KernelGrowth,
}

impl std::str::FromStr for GrowthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ba" | "barabasi_albert" => Ok(GrowthModel::BarabasiAlbert),
            "eigenvector_pa" | "evpa" => Ok(GrowthModel::EigenvectorPa),
            "triangle_closing" | "triangles" => Ok(GrowthModel::TriangleClosing),
            "kernel" | "kernel_growth" => Ok(GrowthModel::KernelGrowth),
            _ => Err(Error::Config(format!("unknown growth model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Exponential,
    Neumann,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" | "exponential" => Ok(KernelKind::Exponential),
            "neumann" => Ok(KernelKind::Neumann),
            _ => Err(Error::Config(format!("unknown kernel {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub model: GrowthModel,
    pub n_target: usize,
    /// m₀: edges added per arriving vertex (per vertex of the seed tree for
    /// triangle closing).
    pub edges_per_step: usize,
    pub kernel: KernelKind,
    pub kernel_alpha: f64,
    /// Additive weight giving every non-adjacent pair a chance under
    /// triangle closing.
    pub triangle_epsilon: f64,
    pub seed: u64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            model: GrowthModel::BarabasiAlbert,
            n_target: 1000,
            edges_per_step: 2,
            kernel: KernelKind::Exponential,
            kernel_alpha: 0.5,
            triangle_epsilon: 0.01,
            seed: 1,
        }
    }
}

/// Largest vertex count accepted by kernel growth (dense kernels).
pub const KERNEL_MAX_N: usize = 512;

impl GrowthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_target < 10 {
            return Err(Error::Parameter(format!(
                "n_target must be at least 10, got {}",
                self.n_target
            )));
        }
        if self.edges_per_step == 0 {
            return Err(Error::Parameter("edges_per_step must be at least 1".into()));
        }
        if self.n_target <= self.edges_per_step + 1 {
            return Err(Error::Parameter(format!(
                "n_target ({}) must exceed edges_per_step + 1",
                self.n_target
            )));
        }
        if !(self.triangle_epsilon >= 0.0 && self.triangle_epsilon.is_finite()) {
            return Err(Error::Parameter(
                "triangle_epsilon must be a finite value >= 0".into(),
            ));
        }
        if self.model == GrowthModel::KernelGrowth {
            if self.n_target > KERNEL_MAX_N {
                return Err(Error::Parameter(format!(
                    "kernel growth is limited to {KERNEL_MAX_N} vertices, got {}",
                    self.n_target
                )));
            }
            if !(self.kernel_alpha > 0.0 && self.kernel_alpha.is_finite()) {
                return Err(Error::Parameter("kernel_alpha must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Output of a generator run.
#[derive(Debug, Clone)]
pub struct Generated {
    pub list: TemporalEdgeList,
    /// Generation stopped early because no non-adjacent pair was left.
    pub complete: bool,
}

fn finish(pairs: Vec<(u64, u64)>) -> Result<TemporalEdgeList> {
    let edges = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (u, v))| TemporalEdge::new(u, v, i as i64 + 1))
        .collect();
    TemporalEdgeList::new(edges, None)
}

fn clique(k: usize) -> Vec<(u64, u64)> {
    let mut e = Vec::new();
    for i in 0..k as u64 {
        for j in i + 1..k as u64 {
            e.push((i, j));
        }
    }
    e
}

pub fn generate(config: &GrowthConfig) -> Result<Generated> {
    match config.model {
        GrowthModel::BarabasiAlbert => generate_ba(config).map(|list| Generated {
            list,
            complete: false,
        }),
        GrowthModel::EigenvectorPa => generate_eigenvector_pa(config).map(|(list, _)| Generated {
            list,
            complete: false,
        }),
        GrowthModel::TriangleClosing => generate_triangle_closing(config),
        GrowthModel::KernelGrowth => generate_kernel_growth(config),
    }
}

/// Barabási–Albert growth from a clique on `m₀ + 1` vertices.
pub fn generate_ba(config: &GrowthConfig) -> Result<TemporalEdgeList> {
    config.validate()?;
    let m0 = config.edges_per_step;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pairs = clique(m0 + 1);
    // Each edge contributes both endpoints, so a uniform draw from this
    // list is a degree-proportional vertex draw.
    let mut ends: Vec<u64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut chosen: Vec<u64> = Vec::with_capacity(m0);
    for v in (m0 + 1) as u64..config.n_target as u64 {
        chosen.clear();
        while chosen.len() < m0 {
            let t = ends[rng.gen_range(0..ends.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            pairs.push((t, v));
            ends.push(t);
            ends.push(v);
        }
    }
    finish(pairs)
}

/// Drift between the incrementally tracked λ₁ and an exact solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub edges: usize,
    pub incremental: f64,
    pub exact: f64,
}

impl Checkpoint {
    pub fn relative_drift(&self) -> f64 {
        (self.incremental - self.exact).abs() / self.exact
    }
}

/// Weighted draw of `k` distinct indices, proportional to `w`.
fn weighted_distinct(w: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut taken = vec![false; w.len()];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k.min(w.len()) {
        let total: f64 = w
            .iter()
            .zip(&taken)
            .filter(|(_, &t)| !t)
            .map(|(x, _)| x)
            .sum();
        let mut pick = None;
        if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            for (i, (&x, &t)) in w.iter().zip(&taken).enumerate() {
                if t {
                    continue;
                }
                pick = Some(i);
                if u < x {
                    break;
                }
                u -= x;
            }
        } else {
            let free: Vec<usize> = (0..w.len()).filter(|&i| !taken[i]).collect();
            pick = Some(free[rng.gen_range(0..free.len())]);
        }
        let i = pick.expect("a free index remains");
        taken[i] = true;
        out.push(i);
    }
    out
}

const RESOLVE_EVERY: usize = 100;
/// Running Rayleigh quotient `λ = xᵀAx / xᵀx` of a non-negative centrality
/// vector, with `y = Ax` kept in sync under single-entry changes.
struct Centrality {
    adj: Vec<Vec<usize>>,
    x: Vec<f64>,
    y: Vec<f64>,
    q: f64,
    nn: f64,
}

impl Centrality {
    fn lambda(&self) -> f64 {
        self.q / self.nn
    }

    fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.x.push(0.0);
        self.y.push(0.0);
        self.x.len() - 1
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
        self.y[a] += self.x[b];
        self.y[b] += self.x[a];
        self.q += 2.0 * self.x[a] * self.x[b];
    }

    fn set(&mut self, i: usize, value: f64) {
        let d = value - self.x[i];
        self.q += 2.0 * d * self.y[i];
        self.nn += d * (2.0 * self.x[i] + d);
        self.x[i] = value;
        for &w in &self.adj[i] {
            self.y[w] += d;
        }
    }

    /// One local power step: `x_i ← (Ax)_i / λ`.
    fn relax(&mut self, i: usize) {
        let v = self.y[i] / self.lambda();
        self.set(i, v);
    }

    fn reset(&mut self, x: Vec<f64>) {
        self.x = x;
        self.y = vec![0.0; self.x.len()];
        for (i, nb) in self.adj.iter().enumerate() {
            for &j in nb {
                self.y[i] += self.x[j];
            }
        }
        self.q = self.x.iter().zip(&self.y).map(|(a, b)| a * b).sum();
        self.nn = self.x.iter().map(|a| a * a).sum();
    }
}

/// Preferential attachment on the dominant eigenvector.
///
/// Each arriving vertex links to one existing vertex chosen with probability
/// proportional to its current eigenvector entry. The other `m₀ − 1` edges
/// of the step join two distinct existing vertices, both drawn the same
/// way; parallel edges are allowed. Endpoints take one local power step
/// after every edge, and λ₁ is tracked as the Rayleigh quotient of the
/// updated vector. An exact
/// re-solve replaces the estimate every 100 edges. Returns the list with
/// the drift observed at each re-solve.
pub fn generate_eigenvector_pa(
    config: &GrowthConfig,
) -> Result<(TemporalEdgeList, Vec<Checkpoint>)> {
    config.validate()?;
    let m0 = config.edges_per_step;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let opts = SpectralOptions::default();
    let mut pairs = clique(m0 + 1);
    let mut c = Centrality {
        adj: vec![Vec::new(); m0 + 1],
        x: Vec::new(),
        y: Vec::new(),
        q: 0.0,
        nn: 0.0,
    };
    for &(u, v) in &pairs {
        c.adj[u as usize].push(v as usize);
        c.adj[v as usize].push(u as usize);
    }
    c.reset(vec![1.0; m0 + 1]);
    let mut checkpoints = Vec::new();
    let mut next_resolve = RESOLVE_EVERY;

    for _ in (m0 + 1)..config.n_target {
        let target = weighted_distinct(&c.x, 1, &mut rng)[0];
        let v = c.add_vertex();
        c.add_edge(target, v);
        pairs.push((target as u64, v as u64));
        c.relax(v);
        c.relax(target);
        for _ in 1..m0 {
            let ends = weighted_distinct(&c.x, 2, &mut rng);
            let (a, b) = (ends[0].min(ends[1]), ends[0].max(ends[1]));
            c.add_edge(a, b);
            pairs.push((a as u64, b as u64));
            c.relax(a);
            c.relax(b);
        }
        if pairs.len() >= next_resolve {
            let g = GraphSnapshot::from_edges(pairs.iter().copied(), &[], false)?;
            let (exact, u1) = spectral_norm(&g, &opts)?;
            checkpoints.push(Checkpoint {
                edges: pairs.len(),
                incremental: c.lambda(),
                exact,
            });
            // Vertex ids are 0..n, so dense indices coincide with ids.
            c.reset(u1.iter().map(|e| e.max(0.0)).collect());
            while next_resolve <= pairs.len() {
                next_resolve += RESOLVE_EVERY;
            }
        }
    }
    Ok((finish(pairs)?, checkpoints))
}

/// Fenwick tree over non-negative integer weights.
struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    fn add(&mut self, i: usize, delta: u64) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum exceeds `target`.
    fn find(&self, mut target: u64) -> usize {
        let mut pos = 0;
        let mut step = (self.tree.len()).next_power_of_two() / 2;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step /= 2;
        }
        pos
    }
}

/// Simple graph with running wedge and triangle counts; wedge centres are
/// indexed by C(d, 2) for weighted sampling.
struct SimpleGraph {
    adj: Vec<Vec<u32>>,
    edges: HashSet<(u32, u32)>,
    centres: Fenwick,
    wedges: u64,
    triangles: u64,
}

impl SimpleGraph {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            edges: HashSet::new(),
            centres: Fenwick::new(n),
            wedges: 0,
            triangles: 0,
        }
    }

    fn key(a: usize, b: usize) -> (u32, u32) {
        (a.min(b) as u32, a.max(b) as u32)
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&Self::key(a, b))
    }

    fn add(&mut self, a: usize, b: usize) {
        self.triangles += self.common_neighbors(a, b);
        for v in [a, b] {
            // C(d+1, 2) − C(d, 2) = d new wedges centred at v.
            let d = self.adj[v].len() as u64;
            self.centres.add(v, d);
            self.wedges += d;
        }
        self.edges.insert(Self::key(a, b));
        self.adj[a].push(b as u32);
        self.adj[b].push(a as u32);
    }

    fn common_neighbors(&self, a: usize, b: usize) -> u64 {
        let (s, t) = if self.adj[a].len() <= self.adj[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.adj[s]
            .iter()
            .filter(|&&w| self.has(w as usize, t))
            .count() as u64
    }
}

/// Triangle-closing growth on a fixed vertex set.
///
/// A random recursive tree on `n_target` vertices seeds the graph. Then
/// `m₀·n_target` edges are added one at a time between non-adjacent pairs,
/// each chosen with probability proportional to its common-neighbour count
/// plus `triangle_epsilon`. Stops early when the graph becomes complete.
pub fn generate_triangle_closing(config: &GrowthConfig) -> Result<Generated> {
    config.validate()?;
    let n = config.n_target;
    let eps = config.triangle_epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = SimpleGraph::new(n);
    let mut pairs = Vec::new();
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        g.add(parent, v);
        pairs.push((parent as u64, v as u64));
    }

    let total_pairs = (n as u64) * (n as u64 - 1) / 2;
    let mut complete = false;
    for _ in 0..config.edges_per_step * n {
        let non_adjacent = total_pairs - g.edges.len() as u64;
        if non_adjacent == 0 {
            complete = true;
            break;
        }
        let open = g.wedges - 3 * g.triangles;
        let mass = open as f64 + eps * non_adjacent as f64;
        let use_wedge = mass > 0.0 && rng.gen::<f64>() * mass < open as f64;
        let (a, b) = if use_wedge {
            sample_open_wedge(&g, &mut rng)
        } else {
            sample_non_adjacent(&g, non_adjacent, total_pairs, &mut rng)
        };
        g.add(a, b);
        pairs.push((a as u64, b as u64));
    }
    if g.edges.len() as u64 == total_pairs {
        complete = true;
    }
    Ok(Generated {
        list: finish(pairs)?,
        complete,
    })
}

/// Uniform open wedge: centre ∝ C(d, 2), two distinct neighbours, reject
/// closed wedges.
fn sample_open_wedge(g: &SimpleGraph, rng: &mut ChaCha8Rng) -> (usize, usize) {
    loop {
        let w = g.centres.find(rng.gen_range(0..g.wedges));
        let nb = &g.adj[w];
        let i = rng.gen_range(0..nb.len());
        let mut j = rng.gen_range(0..nb.len() - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (nb[i] as usize, nb[j] as usize);
        if !g.has(a, b) {
            return (a.min(b), a.max(b));
        }
    }
}

fn sample_non_adjacent(
    g: &SimpleGraph,
    non_adjacent: u64,
    total_pairs: u64,
    rng: &mut ChaCha8Rng,
) -> (usize, usize) {
    let n = g.adj.len();
    // Rejection is cheap while the graph is sparse; enumerate otherwise.
    if non_adjacent * 8 >= total_pairs {
        loop {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b && !g.has(a, b) {
                return (a.min(b), a.max(b));
            }
        }
    }
    let mut k = rng.gen_range(0..non_adjacent);
    for a in 0..n {
        for b in a + 1..n {
            if !g.has(a, b) {
                if k == 0 {
                    return (a, b);
                }
                k -= 1;
            }
        }
    }
    unreachable!("non-adjacent pair count is consistent")
}

/// `e^{αA}` (scaling and squaring of a truncated Taylor series) or
/// `(I − αA)^{-1}`.
pub fn kernel_matrix(a: &DMatrix<f64>, kind: KernelKind, alpha: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let scaled = a * alpha;
    match kind {
        KernelKind::Exponential => {
            let norm = scaled
                .row_iter()
                .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            let mut squarings = 0;
            while norm / 2f64.powi(squarings) > 0.5 {
                squarings += 1;
            }
            let b = scaled / 2f64.powi(squarings);
            let mut term = DMatrix::<f64>::identity(n, n);
            let mut sum = term.clone();
            for k in 1..=12 {
                term = &term * &b / k as f64;
                sum += &term;
            }
            for _ in 0..squarings {
                sum = &sum * &sum;
            }
            Ok(sum)
        }
        KernelKind::Neumann => {
            let m = DMatrix::<f64>::identity(n, n) - scaled;
            // I − αA is positive definite exactly when α·λ₁ < 1.
            let chol = m.cholesky().ok_or_else(|| {
                Error::Parameter(format!(
                    "Neumann kernel diverges: kernel_alpha {alpha} is not below 1/λ₁"
                ))
            })?;
            Ok(chol.inverse())
        }
    }
}

/// Kernel-driven growth on a fixed vertex set.
///
/// A random recursive tree on `n_target` vertices seeds the graph. Then
/// `m₀·n_target` edges are added one at a time; before each, the kernel of
/// the current graph is evaluated and a non-adjacent pair is drawn with
/// probability proportional to its score (uniformly when every score is
/// zero). Stops early when the graph becomes complete.
pub fn generate_kernel_growth(config: &GrowthConfig) -> Result<Generated> {
    config.validate()?;
    let n = config.n_target;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adj = DMatrix::<f64>::zeros(n, n);
    let mut pairs = Vec::new();
    for v in 1..n {
        let t = rng.gen_range(0..v);
        adj[(t, v)] = 1.0;
        adj[(v, t)] = 1.0;
        pairs.push((t as u64, v as u64));
    }
    let mut complete = false;
    for _ in 0..config.edges_per_step * n {
        let k = kernel_matrix(&adj, config.kernel, config.kernel_alpha)?;
        let mut cand = Vec::new();
        let mut weights = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if adj[(i, j)] == 0.0 {
                    cand.push((i, j));
                    weights.push(k[(i, j)].max(0.0));
                }
            }
        }
        if cand.is_empty() {
            complete = true;
            break;
        }
        let (i, j) = cand[weighted_distinct(&weights, 1, &mut rng)[0]];
        adj[(i, j)] = 1.0;
        adj[(j, i)] = 1.0;
        pairs.push((i as u64, j as u64));
    }
    Ok(Generated {
        list: finish(pairs)?,
        complete,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthDiagnostic {
    /// Fitted exponent of |E| ∼ |V|^c.
    pub c_hat: f64,
    /// Down when c < 3/2; no prediction otherwise.
    pub predicted_rank_direction: Option<Direction>,
    /// ĉ falls outside the commonly observed range [1.1, 1.7].
    pub outside_observed_range: bool,
}

/// Least-squares slope of `ln m` against `ln n`. `None` when `n` is
/// constant.
pub fn fit_growth_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, m)| *n > 0.0 && *m > 0.0)
        .map(|(n, m)| (n.ln(), m.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 1e-12 * k {
        return None;
    }
    Some(sxy / sxx)
}

pub fn diagnostic_from_exponent(c_hat: f64) -> GrowthDiagnostic {
    GrowthDiagnostic {
        c_hat,
        predicted_rank_direction: (c_hat < 1.5).then_some(Direction::Down),
        outside_observed_range: !(1.1..=1.7).contains(&c_hat),
    }
}

/// Fits the densification exponent over the `timepoints` prefix snapshots.
pub fn superlinear_growth_diagnostic(
    elist: &TemporalEdgeList,
    timepoints: usize,
) -> Result<Option<GrowthDiagnostic>> {
    let cuts = make_timepoints(elist.len(), timepoints)?;
    let mut seen = HashSet::new();
    let mut points = Vec::with_capacity(cuts.len());
    let mut done = 0;
    for &cut in &cuts {
        for e in &elist.edges()[done..cut] {
            seen.insert(e.u);
            seen.insert(e.v);
        }
        done = cut;
        points.push((seen.len() as f64, cut as f64));
    }
    Ok(fit_growth_exponent(&points).map(diagnostic_from_exponent))
}
