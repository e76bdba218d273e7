//! Block LOBPCG for the smallest eigenvalues of a symmetric positive
//! semidefinite operator on the complement of fixed directions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::symmetric_eigen;
use crate::error::{Error, Result};

pub(crate) struct LobpcgParams<'a> {
    pub block: usize,
    /// Applied to residuals; a diagonal inverse in practice.
    pub precond: &'a [f64],
    pub rel_tolerance: f64,
    /// Residuals are measured relative to this bound on ‖M‖.
    pub norm: f64,
    pub max_matvecs: usize,
    pub seed: u64,
}

fn project_off(v: &mut DMatrix<f64>, fixed: &DVector<f64>) {
    for mut c in v.column_iter_mut() {
        let h = fixed.dot(&c);
        c.axpy(-h, fixed, 1.0);
    }
}

/// Orthonormalizes the columns of `s` after the first `locked` (already
/// orthonormal), dropping columns that vanish.
fn orthonormalize(s: DMatrix<f64>, locked: usize) -> DMatrix<f64> {
    let n = s.nrows();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(s.ncols());
    for (k, c) in s.column_iter().enumerate() {
        let mut v = c.clone_owned();
        if k < locked {
            cols.push(v);
            continue;
        }
        let start = v.norm();
        if start == 0.0 {
            continue;
        }
        v /= start;
        for _ in 0..2 {
            for q in &cols {
                let h = q.dot(&v);
                v.axpy(-h, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-10 {
            cols.push(v / nv);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols)
}

/// Smallest eigenvalue of `op` orthogonal to the unit vector `fixed`.
pub(crate) fn lobpcg_smallest<F>(
    n: usize,
    mut op: F,
    fixed: &[f64],
    params: &LobpcgParams,
) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let b = params.block.min(n.saturating_sub(1)).max(1);
    let fixed = DVector::from_column_slice(fixed);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut matvecs = 0usize;
    let mut apply = |q: &DMatrix<f64>, matvecs: &mut usize| {
        let mut out = DMatrix::zeros(n, q.ncols());
        for (c, mut o) in q.column_iter().zip(out.column_iter_mut()) {
            op(c.as_slice(), o.as_mut_slice());
            *matvecs += 1;
        }
        out
    };

    let mut x = DMatrix::from_fn(n, b, |_, _| rng.gen::<f64>() - 0.5);
    project_off(&mut x, &fixed);
    let mut x = orthonormalize(x, 0);
    if x.ncols() == 0 {
        return Err(Error::Domain("operator complement is empty".into()));
    }
    let mut ax = apply(&x, &mut matvecs);
    let mut theta: Vec<f64> = x
        .column_iter()
        .zip(ax.column_iter())
        .map(|(a, b)| a.dot(&b))
        .collect();
    let mut p: Option<DMatrix<f64>> = None;
    let mut best = (f64::NAN, f64::INFINITY);
    let precond = DVector::from_column_slice(params.precond);
    let mut fresh = true;

    loop {
        let mut w = ax.clone();
        for (k, mut c) in w.column_iter_mut().enumerate() {
            c.axpy(-theta[k], &x.column(k), 1.0);
        }
        let r0 = w.column(0).norm() / params.norm;
        if r0 < best.1 {
            best = (theta[0], r0);
        }
        if r0 <= params.rel_tolerance && !fresh {
            // The tracked products drift; confirm against a direct one.
            ax = apply(&x, &mut matvecs);
            fresh = true;
            continue;
        }
        if r0 <= params.rel_tolerance {
            log::debug!("lobpcg: n={n} block={b} converged after {matvecs} products");
            return Ok(theta[0]);
        }
        if matvecs >= params.max_matvecs {
            return Err(Error::NotConverged {
                iterations: matvecs,
                best: vec![best.0],
                residual: best.1,
            });
        }
        for mut c in w.column_iter_mut() {
            c.component_mul_assign(&precond);
        }
        project_off(&mut w, &fixed);

        // Rayleigh-Ritz on span{X, W, P}; X stays in front unchanged.
        let lx = x.ncols();
        let extra = w.ncols() + p.as_ref().map_or(0, |p| p.ncols());
        let mut s = x.clone().resize_horizontally(lx + extra, 0.0);
        s.columns_mut(lx, w.ncols()).copy_from(&w);
        if let Some(p) = &p {
            s.columns_mut(lx + w.ncols(), p.ncols()).copy_from(p);
        }
        let q = orthonormalize(s, lx);
        let k = q.ncols();
        let tail = apply(&q.columns(lx, k - lx).clone_owned(), &mut matvecs);
        let mut aq = ax.clone().resize_horizontally(k, 0.0);
        aq.columns_mut(lx, k - lx).copy_from(&tail);
        let g = q.tr_mul(&aq);
        let sym: Vec<f64> = (0..k * k)
            .map(|idx| 0.5 * (g[(idx / k, idx % k)] + g[(idx % k, idx / k)]))
            .collect();
        let eig = symmetric_eigen(&sym, k, true);
        let bx = b.min(k);
        let y = DMatrix::from_fn(k, bx, |i, c| eig.vectors[i * k + c]);
        p = (k > lx).then(|| q.columns(lx, k - lx) * y.rows(lx, k - lx));
        x = &q * &y;
        ax = &aq * &y;
        theta = eig.values[..bx].to_vec();
        fresh = false;
    }
}
