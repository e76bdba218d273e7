//! Symmetric eigen-computations on graph matrices: the adjacency matrix A,
//! the degree-normalised adjacency Z = D^{-1/2} A D^{-1/2} and the Laplacian
//! L = D − A.
//!
//! Graphs up to `dense_fallback_threshold` vertices are solved densely;
//! larger ones go through a thick-restart Lanczos iteration with a seeded,
//! deterministic start vector. The normalised Laplacian is I − Z, so the
//! eigenvalues of Z with the largest magnitude are the normalised-Laplacian
//! eigenvalues farthest from 1.

mod dense;
mod krylov;
mod lobpcg;

use serde::{Deserialize, Serialize};

pub use dense::{symmetric_eigen, SymmetricEigen};
use krylov::{krylov_schur, KrylovParams, Which};
use lobpcg::{lobpcg_smallest, LobpcgParams};

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub rel_tolerance: f64,
    /// Budget of operator applications for the iterative path.
    pub max_iterations: usize,
    /// Number of extremal eigenvalues for top-r computations.
    pub r: usize,
    pub seed: u64,
    pub dense_fallback_threshold: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-9,
            max_iterations: 10_000,
            r: 50,
            seed: 0x5eed,
            dense_fallback_threshold: 512,
        }
    }
}

impl SpectralOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(Error::Config(format!(
                "rel_tolerance must lie in (0, 1), got {}",
                self.rel_tolerance
            )));
        }
        if self.r == 0 {
            return Err(Error::Config("r must be at least 1".into()));
        }
        Ok(())
    }
}

/// Eigenpairs ordered by descending absolute value (positive first on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
    /// ‖Mx − λx‖ / ‖M‖ per returned pair.
    pub residuals: Vec<f64>,
}

fn krylov_dimension(nev: usize) -> usize {
    (2 * nev + 10).max(20)
}

fn use_dense(n: usize, nev: usize, opts: &SpectralOptions) -> bool {
    n <= opts.dense_fallback_threshold || krylov_dimension(nev) + 2 >= n
}

/// Row-major dense adjacency matrix with multiplicities.
pub fn adjacency_dense(g: &GraphSnapshot) -> Vec<f64> {
    let n = g.n();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for (j, k) in g.neighbors_with_multiplicity(i) {
            a[i * n + j] = k as f64;
        }
    }
    a
}

fn inv_sqrt_degrees(g: &GraphSnapshot) -> Result<Vec<f64>> {
    if g.isolated_count() > 0 {
        return Err(Error::Domain(format!(
            "{} isolated vertices: D^-1/2 is undefined",
            g.isolated_count()
        )));
    }
    Ok(g.degrees()
        .iter()
        .map(|&d| 1.0 / (d as f64).sqrt())
        .collect())
}

/// Row-major dense Z = D^{-1/2} A D^{-1/2}.
pub fn normalized_adjacency_dense(g: &GraphSnapshot) -> Result<Vec<f64>> {
    let s = inv_sqrt_degrees(g)?;
    let n = g.n();
    let mut z = adjacency_dense(g);
    for i in 0..n {
        for j in 0..n {
            z[i * n + j] *= s[i] * s[j];
        }
    }
    Ok(z)
}

/// Row-major dense L = D − A.
pub fn laplacian_dense(g: &GraphSnapshot) -> Vec<f64> {
    let n = g.n();
    let mut l = adjacency_dense(g);
    l.iter_mut().for_each(|x| *x = -*x);
    for i in 0..n {
        l[i * n + i] = g.degree(i) as f64;
    }
    l
}

fn dense_residual(m: &[f64], n: usize, value: f64, x: &[f64], op_norm: f64) -> f64 {
    let r: f64 = (0..n)
        .map(|i| {
            let mx: f64 = m[i * n..(i + 1) * n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
            (mx - value * x[i]).powi(2)
        })
        .sum();
    r.sqrt() / op_norm.max(f64::MIN_POSITIVE)
}

/// Top-`r` by magnitude from a dense decomposition, ties at the cut included.
fn dense_top(m: &[f64], n: usize, r: usize, with_vectors: bool) -> EigenResult {
    let eig = symmetric_eigen(m, n, true);
    let op_norm = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let idx = krylov::magnitude_order(&eig.values, 1e-10 * op_norm.max(1.0));
    let mut take = r.min(n);
    if take > 0 {
        let edge = eig.values[idx[take - 1]].abs();
        while take < n && (eig.values[idx[take]].abs() - edge).abs() <= 1e-9 * op_norm.max(1.0) {
            take += 1;
        }
    }
    let values: Vec<f64> = idx[..take].iter().map(|&k| eig.values[k]).collect();
    let vectors: Vec<Vec<f64>> = idx[..take].iter().map(|&k| eig.vector(k)).collect();
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(&v, x)| dense_residual(m, n, v, x, op_norm))
        .collect();
    EigenResult {
        values,
        vectors: with_vectors.then_some(vectors),
        residuals,
    }
}

fn params(
    nev: usize,
    opts: &SpectralOptions,
    norm: Option<f64>,
    want_vectors: bool,
) -> KrylovParams {
    KrylovParams {
        want_vectors,
        nev,
        ncv: krylov_dimension(nev),
        rel_tolerance: opts.rel_tolerance,
        max_matvecs: opts.max_iterations,
        seed: opts.seed,
        norm,
    }
}

fn require_edges(g: &GraphSnapshot) -> Result<()> {
    if g.m() == 0 {
        return Err(Error::EmptyInput("graph has no edges".into()));
    }
    Ok(())
}

fn orient_nonnegative(x: &mut [f64]) {
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

/// The `r` adjacency eigenvalues of largest magnitude, with vectors.
pub fn adjacency_top_eigs(
    g: &GraphSnapshot,
    r: usize,
    opts: &SpectralOptions,
) -> Result<EigenResult> {
    require_edges(g)?;
    let n = g.n();
    let mut res = if use_dense(n, r, opts) {
        dense_top(&adjacency_dense(g), n, r, true)
    } else {
        let pairs = krylov_schur(
            n,
            |x, y| g.adjacency_mul(x, y),
            &[],
            Which::LargestMagnitude,
            &params(r, opts, None, true),
        )?;
        EigenResult {
            values: pairs.values,
            vectors: Some(pairs.vectors),
            residuals: pairs.residuals,
        }
    };
    if let Some(v) = res.vectors.as_mut().and_then(|v| v.first_mut()) {
        orient_nonnegative(v);
    }
    Ok(res)
}

/// Spectral norm λ₁ of A and its unit Perron vector.
pub fn spectral_norm(g: &GraphSnapshot, opts: &SpectralOptions) -> Result<(f64, Vec<f64>)> {
    require_edges(g)?;
    let n = g.n();
    let (value, mut vector) = if use_dense(n, 1, opts) {
        let eig = symmetric_eigen(&adjacency_dense(g), n, true);
        (eig.values[n - 1], eig.vector(n - 1))
    } else {
        let mut pairs = krylov_schur(
            n,
            |x, y| g.adjacency_mul(x, y),
            &[],
            Which::LargestAlgebraic,
            &params(1, opts, None, true),
        )?;
        (pairs.values[0], pairs.vectors.swap_remove(0))
    };
    orient_nonnegative(&mut vector);
    Ok((value, vector))
}

/// The `r` eigenvalues of D^{-1/2} A D^{-1/2} of largest magnitude.
pub fn normalized_adjacency_top_eigs(
    g: &GraphSnapshot,
    r: usize,
    opts: &SpectralOptions,
) -> Result<EigenResult> {
    let s = inv_sqrt_degrees(g)?;
    let n = g.n();
    if use_dense(n, r, opts) {
        return Ok(dense_top(&normalized_adjacency_dense(g)?, n, r, false));
    }
    let mut t = vec![0.0; n];
    let pairs = krylov_schur(
        n,
        |x, y| {
            for i in 0..n {
                t[i] = x[i] * s[i];
            }
            g.adjacency_mul(&t, y);
            for i in 0..n {
                y[i] *= s[i];
            }
        },
        &[],
        Which::LargestMagnitude,
        &params(r, opts, Some(1.0), false),
    )?;
    Ok(EigenResult {
        values: pairs.values,
        vectors: None,
        residuals: pairs.residuals,
    })
}

/// Second-smallest Laplacian eigenvalue λ₂[L] of a connected graph.
///
/// Disconnected input yields 0 with a warning.
pub fn algebraic_connectivity(g: &GraphSnapshot, opts: &SpectralOptions) -> Result<f64> {
    require_edges(g)?;
    let n = g.n();
    let shift = 2.0 * g.max_degree() as f64 + 1.0;
    let lambda2 = if use_dense(n, 1, opts) {
        symmetric_eigen(&laplacian_dense(g), n, false).values[1]
    } else {
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let deg: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
        let precond: Vec<f64> = deg
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        lobpcg_smallest(
            n,
            |x, y| {
                g.adjacency_mul(x, y);
                for i in 0..n {
                    y[i] = deg[i] * x[i] - y[i];
                }
            },
            &ones,
            &LobpcgParams {
                block: 1,
                precond: &precond,
                rel_tolerance: opts.rel_tolerance,
                norm: shift,
                max_matvecs: opts.max_iterations,
                seed: opts.seed,
            },
        )?
    };
    if lambda2 < opts.rel_tolerance * shift {
        log::warn!("algebraic connectivity on a disconnected graph ({lambda2:e}); reporting 0");
        return Ok(0.0);
    }
    Ok(lambda2)
}
