//! Thick-restart (Krylov–Schur) Lanczos for symmetric operators.
//!
//! The basis is kept fully reorthogonalised (classical Gram–Schmidt with a
//! conditional second pass) and the projected matrix `H = Vᵀ M V` is stored densely, so after a
//! restart the arrowhead coupling between the kept Ritz vectors and the new
//! residual direction is picked up by the ordinary projection step.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::symmetric_eigen;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Which {
    LargestMagnitude,
    LargestAlgebraic,
}

#[derive(Debug, Clone)]
pub(crate) struct KrylovParams {
    pub nev: usize,
    pub ncv: usize,
    pub rel_tolerance: f64,
    pub max_matvecs: usize,
    pub seed: u64,
    /// Known bound on ‖M‖; the largest Ritz magnitude is used otherwise.
    pub norm: Option<f64>,
    pub want_vectors: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct RitzPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

type Basis = DMatrix<f64>;

/// Projects `w` off `fixed` and the first `k` columns of `basis`, with a
/// second classical Gram–Schmidt pass only when the first one cancelled
/// most of `w`. Returns the accumulated coefficients.
fn orthogonalize(
    w: &mut DVector<f64>,
    basis: &Basis,
    k: usize,
    fixed: &[DVector<f64>],
) -> DVector<f64> {
    let mut coeff = DVector::zeros(k);
    let mut before = w.norm();
    for pass in 0..2 {
        for q in fixed {
            let h = q.dot(w);
            w.axpy(-h, q, 1.0);
        }
        if k > 0 {
            let v = basis.columns(0, k);
            let h = v.tr_mul(w);
            w.gemv(-1.0, &v, &h, 1.0);
            coeff += h;
        }
        let after = w.norm();
        if pass == 0 && after > std::f64::consts::FRAC_1_SQRT_2 * before {
            break;
        }
        before = after;
    }
    coeff
}

fn random_unit(
    n: usize,
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    k: usize,
    fixed: &[DVector<f64>],
) -> Option<DVector<f64>> {
    for _ in 0..8 {
        let mut v = DVector::from_iterator(n, (0..n).map(|_| rng.gen::<f64>() - 0.5));
        // Always two passes: a random vector can be nearly inside the span.
        orthogonalize(&mut v, basis, k, fixed);
        orthogonalize(&mut v, basis, k, fixed);
        let nv = v.norm();
        if nv > 1e-8 {
            return Some(v / nv);
        }
    }
    None
}

/// Indices by decreasing magnitude. Values whose magnitudes agree to within
/// `tol` count as tied and are listed positive first, so a `±λ` pair never
/// comes out in rounding-noise order.
pub(crate) fn magnitude_order(values: &[f64], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    let mut lo = 0;
    while lo < idx.len() {
        let head = values[idx[lo]].abs();
        let mut hi = lo + 1;
        while hi < idx.len() && head - values[idx[hi]].abs() <= tol {
            hi += 1;
        }
        idx[lo..hi].sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        lo = hi;
    }
    idx
}

fn ordering(theta: &[f64], which: Which) -> Vec<usize> {
    match which {
        Which::LargestMagnitude => {
            let scale = theta.iter().fold(1.0f64, |a, t| a.max(t.abs()));
            magnitude_order(theta, 1e-10 * scale)
        }
        Which::LargestAlgebraic => {
            let mut idx: Vec<usize> = (0..theta.len()).collect();
            idx.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));
            idx
        }
    }
}

/// Computes the `nev` extremal eigenpairs of the symmetric operator `op`
/// restricted to the orthogonal complement of `fixed` (orthonormal).
///
/// Returned pairs are ordered per `which`. Extra converged pairs whose
/// magnitude ties the last requested one are appended.
pub(crate) fn krylov_schur<F>(
    n: usize,
    mut op: F,
    fixed: &[Vec<f64>],
    which: Which,
    params: &KrylovParams,
) -> Result<RitzPairs>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let ncv = params.ncv.min(n - fixed.len());
    let nev = params.nev.min(ncv);
    assert!(nev >= 1 && ncv > nev, "krylov_schur needs 1 <= nev < ncv");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let fixed: Vec<DVector<f64>> = fixed
        .iter()
        .map(|f| DVector::from_column_slice(f))
        .collect();

    // Columns 0..ncv hold the Krylov basis, column ncv the residual direction.
    let mut basis = Basis::zeros(n, ncv + 1);
    let first = random_unit(n, &mut rng, &basis, 0, &fixed)
        .ok_or_else(|| Error::Domain("operator complement is empty".into()))?;
    basis.set_column(0, &first);
    let mut h = vec![0.0; ncv * ncv];
    let mut start = 0usize;
    let mut matvecs = 0usize;
    let mut w = DVector::zeros(n);

    loop {
        let mut beta = 0.0;
        let mut exhausted = false;
        for j in start..ncv {
            op(basis.column(j).as_slice(), w.as_mut_slice());
            matvecs += 1;
            let before = w.norm();
            let coeff = orthogonalize(&mut w, &basis, j + 1, &fixed);
            for (i, &c) in coeff.iter().enumerate() {
                h[i * ncv + j] = c;
                h[j * ncv + i] = c;
            }
            beta = w.norm();
            if beta <= 1e-12 * before.max(f64::MIN_POSITIVE) {
                // Invariant subspace: continue from a fresh direction.
                beta = 0.0;
                match random_unit(n, &mut rng, &basis, j + 1, &fixed) {
                    Some(v) => basis.set_column(j + 1, &v),
                    None => {
                        exhausted = true;
                        break;
                    }
                }
            } else {
                basis.column_mut(j + 1).copy_from(&(&w / beta));
            }
        }
        let eig = symmetric_eigen(&h, ncv, true);
        let theta = &eig.values;
        let order = ordering(theta, which);
        let op_norm = params
            .norm
            .unwrap_or_else(|| theta.iter().fold(0.0f64, |a, t| a.max(t.abs())))
            .max(f64::MIN_POSITIVE);
        let resid: Vec<f64> = (0..ncv)
            .map(|k| (beta * eig.vectors[(ncv - 1) * ncv + k]).abs() / op_norm)
            .collect();
        let worst = order[..nev].iter().fold(0.0f64, |a, &k| a.max(resid[k]));
        // Ritz coefficients, column k for Ritz pair order[k].
        let ritz = |cols: &[usize]| {
            DMatrix::from_fn(ncv, cols.len(), |i, c| eig.vectors[i * ncv + cols[c]])
        };

        let converged = worst <= params.rel_tolerance || exhausted;
        if converged || matvecs >= params.max_matvecs {
            if !converged {
                return Err(Error::NotConverged {
                    iterations: matvecs,
                    best: order[..nev].iter().map(|&k| theta[k]).collect(),
                    residual: worst,
                });
            }
            log::debug!(
                "krylov-schur: n={n} nev={nev} ncv={ncv} converged after {matvecs} products"
            );
            let mut take = nev;
            let key = |k: usize| match which {
                Which::LargestMagnitude => theta[k].abs(),
                Which::LargestAlgebraic => theta[k],
            };
            let edge = key(order[nev - 1]);
            while take < ncv
                && resid[order[take]] <= params.rel_tolerance
                && (key(order[take]) - edge).abs() <= 1e-9 * op_norm
            {
                take += 1;
            }
            let picked = &order[..take];
            let vectors = if params.want_vectors {
                let y = basis.columns(0, ncv) * ritz(picked);
                y.column_iter()
                    .map(|c| {
                        let nc = c.norm();
                        c.iter().map(|x| x / nc).collect()
                    })
                    .collect()
            } else {
                Vec::new()
            };
            return Ok(RitzPairs {
                values: picked.iter().map(|&k| theta[k]).collect(),
                vectors,
                residuals: picked.iter().map(|&k| resid[k]).collect(),
            });
        }

        // Thick restart: keep the best Ritz vectors plus the residual direction.
        let keep = (nev + (ncv - nev) / 2).min(ncv - 1);
        let kept = basis.columns(0, ncv) * ritz(&order[..keep]);
        let residual_dir = basis.column(ncv).clone_owned();
        basis.columns_mut(0, keep).copy_from(&kept);
        basis.set_column(keep, &residual_dir);
        h.iter_mut().for_each(|x| *x = 0.0);
        for (i, &k) in order[..keep].iter().enumerate() {
            h[i * ncv + i] = theta[k];
        }
        start = keep;
    }
}
