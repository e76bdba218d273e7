//! Connectivity measures: effective diameter, random-walk return
//! probability, relative controllability and algebraic connectivity.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{largest_connected_component, GraphSnapshot};
use crate::spectral::{algebraic_connectivity, normalized_adjacency_top_eigs, SpectralOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterOptions {
    pub percentile: f64,
    pub sample_size: usize,
    pub seed: u64,
    pub interpolate: bool,
}

impl Default for DiameterOptions {
    fn default() -> Self {
        Self {
            percentile: 0.9,
            sample_size: 500,
            seed: 0x5eed,
            interpolate: true,
        }
    }
}

impl DiameterOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.percentile > 0.0 && self.percentile < 1.0) {
            return Err(Error::Config(format!(
                "percentile must lie in (0, 1), got {}",
                self.percentile
            )));
        }
        if self.sample_size == 0 {
            return Err(Error::Config(
                "diameter sample size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Hop-count histogram from `source`: `hist[h]` pairs at distance `h`.
/// Returns the number of vertices reached alongside.
fn bfs_histogram(
    g: &GraphSnapshot,
    source: usize,
    dist: &mut [u32],
    queue: &mut VecDeque<usize>,
) -> (Vec<u64>, usize) {
    dist.iter_mut().for_each(|d| *d = u32::MAX);
    dist[source] = 0;
    queue.clear();
    queue.push_back(source);
    let mut hist = vec![0u64];
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        let dx = dist[x] + 1;
        for &y in g.neighbors(x) {
            if dist[y] == u32::MAX {
                dist[y] = dx;
                if hist.len() <= dx as usize {
                    hist.push(0);
                }
                hist[dx as usize] += 1;
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    (hist, reached)
}

/// Percentile of a pooled hop-count histogram (`hist[0]` is ignored).
pub fn percentile_from_histogram(hist: &[u64], percentile: f64, interpolate: bool) -> Result<f64> {
    let total: u64 = hist.iter().skip(1).sum();
    if total == 0 {
        return Err(Error::Domain("no vertex pairs to measure".into()));
    }
    let mut prev = 0.0;
    let mut cum = 0u64;
    for (h, &c) in hist.iter().enumerate().skip(1) {
        cum += c;
        let f = cum as f64 / total as f64;
        if f >= percentile {
            if !interpolate {
                return Ok(h as f64);
            }
            return Ok((h - 1) as f64 + (percentile - prev) / (f - prev));
        }
        prev = f;
    }
    Ok((hist.len() - 1) as f64)
}

/// Sampled effective diameter of a connected graph.
pub fn effective_diameter(g: &GraphSnapshot, opts: &DiameterOptions) -> Result<f64> {
    opts.validate()?;
    let n = g.n();
    if n < 2 {
        return Err(Error::Domain(
            "effective diameter needs at least two vertices".into(),
        ));
    }
    let sources: Vec<usize> = if opts.sample_size >= n {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut s = sample(&mut rng, n, opts.sample_size).into_vec();
        s.sort_unstable();
        s
    };
    let hists: Vec<(Vec<u64>, usize)> = sources
        .par_iter()
        .map_init(
            || (vec![u32::MAX; n], VecDeque::new()),
            |(dist, queue), &s| bfs_histogram(g, s, dist, queue),
        )
        .collect();
    let mut pooled: Vec<u64> = Vec::new();
    for (h, reached) in hists {
        if reached != n {
            return Err(Error::Domain(
                "effective diameter needs a connected graph".into(),
            ));
        }
        if pooled.len() < h.len() {
            pooled.resize(h.len(), 0);
        }
        for (p, c) in pooled.iter_mut().zip(h) {
            *p += c;
        }
    }
    percentile_from_histogram(&pooled, opts.percentile, opts.interpolate)
}

/// `Σ μ^steps` over the `r` eigenvalues of D^{-1/2} A D^{-1/2} of largest
/// magnitude.
pub fn rw_return_probability(
    g: &GraphSnapshot,
    n_steps: u32,
    r: usize,
    opts: &SpectralOptions,
) -> Result<f64> {
    if n_steps < 2 || !n_steps.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "walk length must be even and at least 2, got {n_steps}"
        )));
    }
    let eig = normalized_adjacency_top_eigs(g, r.min(g.n()), opts)?;
    Ok(eig.values.iter().map(|mu| mu.powi(n_steps as i32)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityResult {
    pub driver_count: usize,
    pub matching_size: usize,
    pub relative: f64,
}

/// Maximum matching in the bipartite double cover: left copy `u⁺`, right
/// copy `v⁻`, arc `u⁺ → v⁻` for every neighbour pair.
pub fn double_cover_matching(g: &GraphSnapshot) -> usize {
    const FREE: usize = usize::MAX;
    let n = g.n();
    let mut match_left = vec![FREE; n];
    let mut match_right = vec![FREE; n];
    let mut layer = vec![0u32; n];
    let mut queue = VecDeque::new();
    let mut size = 0;

    // Greedy start.
    for u in 0..n {
        if let Some(&v) = g.neighbors(u).iter().find(|&&v| match_right[v] == FREE) {
            match_left[u] = v;
            match_right[v] = u;
            size += 1;
        }
    }

    let mut cursor = vec![0usize; n];
    let mut stack: Vec<usize> = Vec::new();
    loop {
        // BFS layers from free left vertices over alternating paths.
        queue.clear();
        for u in 0..n {
            if match_left[u] == FREE {
                layer[u] = 0;
                queue.push_back(u);
            } else {
                layer[u] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                let w = match_right[v];
                if w == FREE {
                    found = true;
                } else if layer[w] == u32::MAX {
                    layer[w] = layer[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }

        // Layered DFS, iterative.
        cursor.iter_mut().for_each(|c| *c = 0);
        for root in 0..n {
            if match_left[root] != FREE {
                continue;
            }
            stack.clear();
            stack.push(root);
            while let Some(&u) = stack.last() {
                let nbrs = g.neighbors(u);
                let mut advanced = false;
                while cursor[u] < nbrs.len() {
                    let v = nbrs[cursor[u]];
                    cursor[u] += 1;
                    let w = match_right[v];
                    if w == FREE {
                        // Augment along the stack.
                        let mut v = v;
                        for &x in stack.iter().rev() {
                            let prev = match_left[x];
                            match_left[x] = v;
                            match_right[v] = x;
                            v = prev;
                        }
                        size += 1;
                        stack.clear();
                        advanced = true;
                        break;
                    }
                    if layer[w] == layer[u] + 1 {
                        stack.push(w);
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    layer[u] = u32::MAX;
                    stack.pop();
                }
            }
        }
    }
    size
}

pub fn relative_controllability(g: &GraphSnapshot) -> Result<ControllabilityResult> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyInput("graph has no vertices".into()));
    }
    let matching_size = double_cover_matching(g);
    let driver_count = n.saturating_sub(matching_size).max(1);
    Ok(ControllabilityResult {
        driver_count,
        matching_size,
        relative: driver_count as f64 / n as f64,
    })
}

/// Algebraic connectivity of the largest connected component.
pub fn algebraic_connectivity_measure(g: &GraphSnapshot, opts: &SpectralOptions) -> Result<f64> {
    let (lcc, _) = largest_connected_component(g)?;
    algebraic_connectivity(&lcc, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, cycle, graph, path, star};
    use proptest::prelude::*;

    fn exhaustive() -> DiameterOptions {
        DiameterOptions {
            sample_size: usize::MAX,
            ..Default::default()
        }
    }

    fn floyd(g: &GraphSnapshot) -> Vec<Vec<u32>> {
        let n = g.n();
        let inf = u32::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for i in 0..n {
            d[i][i] = 0;
            for &j in g.neighbors(i) {
                d[i][j] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    // Smallest δ whose linearly interpolated coverage reaches p, found by
    // scanning a fine grid over the piecewise-linear CDF.
    fn oracle_diameter(g: &GraphSnapshot, p: f64) -> f64 {
        let d = floyd(g);
        let n = g.n();
        let mut pairs: Vec<u32> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pairs.push(d[i][j]);
                }
            }
        }
        let total = pairs.len() as f64;
        let frac = |h: u32| pairs.iter().filter(|&&x| x <= h).count() as f64 / total;
        let mut h = 1;
        while frac(h) < p {
            h += 1;
        }
        let (lo, hi) = (frac(h - 1), frac(h));
        (h - 1) as f64 + (p - lo) / (hi - lo)
    }

    #[test]
    fn complete_graph_diameter() {
        let mut o = exhaustive();
        o.interpolate = false;
        assert_eq!(effective_diameter(&complete(5), &o).unwrap(), 1.0);
        assert!((effective_diameter(&complete(5), &exhaustive()).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn star_diameter_is_two() {
        let mut o = exhaustive();
        o.interpolate = false;
        assert_eq!(effective_diameter(&star(99), &o).unwrap(), 2.0);
    }

    #[test]
    fn path_diameter_matches_all_pairs_oracle() {
        let g = path(10);
        let got = effective_diameter(&g, &exhaustive()).unwrap();
        assert!((got - oracle_diameter(&g, 0.9)).abs() < 1e-12);
    }

    #[test]
    fn disconnected_diameter_is_an_error() {
        let g = graph(&[(1, 2), (3, 4)]);
        assert!(matches!(
            effective_diameter(&g, &exhaustive()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sampled_diameter_is_deterministic() {
        let g = cycle(200);
        let o = DiameterOptions {
            sample_size: 20,
            seed: 9,
            ..Default::default()
        };
        let a = effective_diameter(&g, &o).unwrap();
        let b = effective_diameter(&g, &o).unwrap();
        assert_eq!(a, b);
        // Every vertex of a cycle sees the same distance profile.
        assert!((a - effective_diameter(&g, &exhaustive()).unwrap()).abs() < 1e-12);
    }

    // Σ over closed walks u₁…u_k u₁ of Π A(u_i,u_{i+1}) / d(u_i).
    fn closed_walk_sum(g: &GraphSnapshot, steps: u32) -> f64 {
        fn walk(g: &GraphSnapshot, start: usize, at: usize, left: u32, weight: f64) -> f64 {
            let d = g.degree(at) as f64;
            if left == 1 {
                return weight * g.multiplicity(at, start) as f64 / d;
            }
            g.neighbors_with_multiplicity(at)
                .map(|(j, k)| walk(g, start, j, left - 1, weight * k as f64 / d))
                .sum()
        }
        (0..g.n()).map(|s| walk(g, s, s, steps, 1.0)).sum()
    }

    #[test]
    fn return_probability_examples() {
        let o = SpectralOptions::default();
        assert!((rw_return_probability(&complete(2), 4, 2, &o).unwrap() - 2.0).abs() < 1e-12);
        let k4 = rw_return_probability(&complete(4), 4, 4, &o).unwrap();
        assert!((k4 - (1.0 + 3.0 / 81.0)).abs() < 1e-12);
        assert!((k4 - closed_walk_sum(&complete(4), 4)).abs() < 1e-12);
        assert!((rw_return_probability(&cycle(4), 4, 4, &o).unwrap() - 2.0).abs() < 1e-12);
        assert!((closed_walk_sum(&cycle(4), 4) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn return_probability_rejects_bad_input() {
        let o = SpectralOptions::default();
        assert!(matches!(
            rw_return_probability(&cycle(4), 3, 4, &o),
            Err(Error::Parameter(_))
        ));
        let g = GraphSnapshot::from_edges([(1, 2)], &[7], false).unwrap();
        assert!(matches!(
            rw_return_probability(&g, 4, 2, &o),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn return_probability_with_multi_edges_matches_walks() {
        let g = graph(&[(1, 2), (1, 2), (2, 3), (3, 4), (4, 1), (1, 3), (3, 5)]);
        let o = SpectralOptions::default();
        for steps in [2, 4, 6] {
            let got = rw_return_probability(&g, steps, g.n(), &o).unwrap();
            assert!((got - closed_walk_sum(&g, steps)).abs() < 1e-9);
        }
    }

    #[test]
    fn controllability_examples() {
        let p3 = relative_controllability(&path(3)).unwrap();
        assert_eq!((p3.matching_size, p3.driver_count), (2, 1));
        assert!((p3.relative - 1.0 / 3.0).abs() < 1e-15);
        let s = relative_controllability(&star(4)).unwrap();
        assert_eq!((s.matching_size, s.driver_count), (2, 3));
        assert!((s.relative - 0.6).abs() < 1e-15);
        let c = relative_controllability(&cycle(4)).unwrap();
        assert_eq!((c.matching_size, c.driver_count), (4, 1));
        assert!((c.relative - 0.25).abs() < 1e-15);
    }

    fn brute_force_matching(g: &GraphSnapshot) -> usize {
        fn go(g: &GraphSnapshot, u: usize, used: &mut Vec<bool>) -> usize {
            if u == g.n() {
                return 0;
            }
            let mut best = go(g, u + 1, used);
            for &v in g.neighbors(u) {
                if !used[v] {
                    used[v] = true;
                    best = best.max(1 + go(g, u + 1, used));
                    used[v] = false;
                }
            }
            best
        }
        go(g, 0, &mut vec![false; g.n()])
    }

    // Edmonds–Karp on source → u⁺ → v⁻ → sink with unit capacities.
    fn max_flow_matching(g: &GraphSnapshot) -> usize {
        let n = g.n();
        let (src, sink) = (2 * n, 2 * n + 1);
        let size = 2 * n + 2;
        let mut cap = vec![vec![0i32; size]; size];
        for u in 0..n {
            cap[src][u] = 1;
            cap[n + u][sink] = 1;
            for &v in g.neighbors(u) {
                cap[u][n + v] = 1;
            }
        }
        let mut flow = 0;
        loop {
            let mut parent = vec![usize::MAX; size];
            parent[src] = src;
            let mut q = VecDeque::from([src]);
            while let Some(x) = q.pop_front() {
                for y in 0..size {
                    if parent[y] == usize::MAX && cap[x][y] > 0 {
                        parent[y] = x;
                        q.push_back(y);
                    }
                }
            }
            if parent[sink] == usize::MAX {
                return flow;
            }
            let mut y = sink;
            while y != src {
                let x = parent[y];
                cap[x][y] -= 1;
                cap[y][x] += 1;
                y = x;
            }
            flow += 1;
        }
    }

    fn random_graph(n: u64, pairs: &[(u64, u64)]) -> Option<GraphSnapshot> {
        let edges: Vec<(u64, u64)> = pairs
            .iter()
            .map(|&(a, b)| (a % n, b % n))
            .filter(|(a, b)| a != b)
            .collect();
        if edges.is_empty() {
            return None;
        }
        Some(GraphSnapshot::from_edges(edges, &[], false).unwrap())
    }

    #[test]
    fn algebraic_connectivity_uses_the_lcc() {
        let o = SpectralOptions::default();
        let g = graph(&[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4), (10, 11)]);
        assert!((algebraic_connectivity_measure(&g, &o).unwrap() - 4.0).abs() < 1e-9);
        assert!((algebraic_connectivity_measure(&complete(2), &o).unwrap() - 2.0).abs() < 1e-12);
        let p4 = algebraic_connectivity_measure(&path(4), &o).unwrap();
        assert!((p4 - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn matching_agrees_with_brute_force(n in 2u64..8, pairs in prop::collection::vec((0u64..8, 0u64..8), 1..14)) {
            if let Some(g) = random_graph(n, &pairs) {
                prop_assert_eq!(double_cover_matching(&g), brute_force_matching(&g));
            }
        }

        #[test]
        fn matching_agrees_with_max_flow(n in 2u64..200, pairs in prop::collection::vec((0u64..200, 0u64..200), 1..400)) {
            if let Some(g) = random_graph(n, &pairs) {
                prop_assert_eq!(double_cover_matching(&g), max_flow_matching(&g));
            }
        }

        #[test]
        fn adding_an_edge_never_raises_controllability(n in 3u64..40, pairs in prop::collection::vec((0u64..40, 0u64..40), 1..60), extra in (0u64..40, 0u64..40)) {
            let g = match random_graph(n, &pairs) { Some(g) => g, None => return Ok(()) };
            let (a, b) = (extra.0 as usize % g.n(), extra.1 as usize % g.n());
            prop_assume!(a != b);
            let h = g.with_edge(a, b).unwrap();
            let before = relative_controllability(&g).unwrap();
            let after = relative_controllability(&h).unwrap();
            prop_assert!(after.matching_size >= before.matching_size);
            prop_assert!(after.relative <= before.relative);
        }

        #[test]
        fn adding_an_edge_never_raises_diameter(n in 3u64..30, pairs in prop::collection::vec((0u64..30, 0u64..30), 0..40), extra in (0u64..30, 0u64..30)) {
            // Spanning path keeps the graph connected.
            let mut all: Vec<(u64, u64)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            all.extend(pairs.iter().map(|&(a, b)| (a % n, b % n)).filter(|(a, b)| a != b));
            let g = GraphSnapshot::from_edges(all, &[], false).unwrap();
            let (a, b) = (extra.0 as usize % g.n(), extra.1 as usize % g.n());
            prop_assume!(a != b);
            let h = g.with_edge(a, b).unwrap();
            for interpolate in [false, true] {
                let o = DiameterOptions { interpolate, ..exhaustive() };
                prop_assert!(effective_diameter(&h, &o).unwrap() <= effective_diameter(&g, &o).unwrap() + 1e-12);
            }
        }

        #[test]
        fn return_probability_is_exact_for_full_rank(n in 3u64..12, pairs in prop::collection::vec((0u64..12, 0u64..12), 1..30)) {
            let g = match random_graph(n, &pairs) { Some(g) => g, None => return Ok(()) };
            let o = SpectralOptions::default();
            let got = rw_return_probability(&g, 4, g.n(), &o).unwrap();
            prop_assert!((got - closed_walk_sum(&g, 4)).abs() < 1e-9);
            if g.is_connected() {
                prop_assert!(rw_return_probability(&g, 4, 1, &o).unwrap() >= 1.0 - 1e-9);
            }
        }
    }
}
