//! Measures motivated by link prediction: clustering, fractional rank and
//! the eigenvalue power-law exponent, plus the first-order λ₁ update used
//! to predict how an added edge moves the fractional rank.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::spectral::{adjacency_top_eigs, spectral_norm, SpectralOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TriangleCensus {
    pub triangles: u64,
    pub wedges: u64,
}

/// Triangles and wedges of the simple projection of `g`.
pub fn triangle_census(g: &GraphSnapshot) -> TriangleCensus {
    let n = g.n();
    let rank = |i: usize| (g.simple_degree(i), i);
    // Orient each edge toward the higher (degree, index) endpoint.
    let out: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            g.neighbors(i)
                .iter()
                .copied()
                .filter(|&j| rank(j) > rank(i))
                .collect()
        })
        .collect();
    let mut mark = vec![usize::MAX; n];
    let mut triangles = 0u64;
    for u in 0..n {
        for &v in &out[u] {
            mark[v] = u;
        }
        for &v in &out[u] {
            triangles += out[v].iter().filter(|&&w| mark[w] == u).count() as u64;
        }
    }
    let wedges = (0..n)
        .map(|i| {
            let d = g.simple_degree(i) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    TriangleCensus { triangles, wedges }
}

/// Global clustering coefficient `3·triangles / wedges`. `None` for
/// bipartite graphs, where it is identically zero and carries no signal.
pub fn clustering_coefficient(g: &GraphSnapshot) -> Option<f64> {
    if g.is_bipartite() {
        return None;
    }
    let c = triangle_census(g);
    if c.wedges == 0 {
        return Some(0.0);
    }
    Some(3.0 * c.triangles as f64 / c.wedges as f64)
}

/// ‖A‖_F² with multiplicities: `Σ_{u<v} 2·mult²`.
pub fn frobenius_norm_sq(g: &GraphSnapshot) -> f64 {
    g.edges()
        .map(|(_, _, k)| 2.0 * (k as f64) * (k as f64))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub lambda1: f64,
    /// Adjacency eigenvalues by descending magnitude.
    pub top_abs_eigs: Vec<f64>,
    pub m: u64,
}

impl SpectrumSummary {
    pub fn compute(g: &GraphSnapshot, r: usize, opts: &SpectralOptions) -> Result<Self> {
        let eig = adjacency_top_eigs(g, r.min(g.n()), opts)?;
        Ok(SpectrumSummary {
            lambda1: eig.values[0],
            top_abs_eigs: eig.values,
            m: g.m(),
        })
    }

    pub fn fractional_rank(&self, g: &GraphSnapshot) -> f64 {
        fractional_rank_with(g, self.lambda1)
    }

    pub fn eigenvalue_exponent(&self) -> Option<f64> {
        eigenvalue_exponent_from_values(&self.top_abs_eigs)
    }
}

pub fn fractional_rank_with(g: &GraphSnapshot, lambda1: f64) -> f64 {
    frobenius_norm_sq(g) / (lambda1 * lambda1)
}

/// `‖A‖_F² / λ₁²`.
pub fn fractional_rank(g: &GraphSnapshot, opts: &SpectralOptions) -> Result<f64> {
    let (lambda1, _) = spectral_norm(g, opts)?;
    Ok(fractional_rank_with(g, lambda1))
}

/// Power-law exponent of a list of eigenvalue magnitudes, using the
/// smallest magnitude above `1e-9·max` as the cutoff.
///
/// `None` with fewer than two usable values; `Some(+∞)` when all usable
/// values coincide.
pub fn eigenvalue_exponent_from_values(values: &[f64]) -> Option<f64> {
    let top = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let kept: Vec<f64> = values
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v > 1e-9 * top)
        .collect();
    if kept.len() < 2 {
        return None;
    }
    let lmin = kept.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = kept.iter().map(|v| (v / lmin).ln()).sum();
    // Relative spread below rounding noise counts as all-equal.
    if s <= 1e-12 * kept.len() as f64 {
        return Some(f64::INFINITY);
    }
    Some(1.0 + kept.len() as f64 / s)
}

pub fn eigenvalue_power_law_exponent(
    g: &GraphSnapshot,
    r: usize,
    opts: &SpectralOptions,
) -> Result<Option<f64>> {
    if r < 2 {
        return Err(Error::Parameter(format!(
            "need r >= 2 eigenvalues, got {r}"
        )));
    }
    Ok(SpectrumSummary::compute(g, r, opts)?.eigenvalue_exponent())
}

/// First-order estimate of λ₁ after adding edge `{a, b}` (dense indices).
pub fn estimate_lambda1_after_edge(lambda1: f64, u1: &[f64], a: usize, b: usize) -> f64 {
    lambda1 + 2.0 * u1[a] * u1[b]
}

/// Whether adding the new edge `{a, b}` to a simple graph is predicted to
/// lower the fractional rank: `u₁[a]·u₁[b] > λ₁ / (4m)`.
///
/// From `2(m+1)/(λ₁ + 2u₁[a]u₁[b])² < 2m/λ₁²` to first order in `1/m`. The
/// estimate is a Rayleigh quotient, hence a lower bound on the new λ₁, so a
/// positive prediction is never wrong; misses sit near the threshold.
pub fn rank_shrink_predicted(lambda1: f64, u1: &[f64], a: usize, b: usize, m: u64) -> bool {
    u1[a] * u1[b] > lambda1 / (4.0 * m as f64)
}
