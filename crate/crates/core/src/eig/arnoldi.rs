//! Restarted Arnoldi (Krylov-Schur style) for eigenvalues at either end of
//! the real axis of a non-symmetric operator.
//!
//! After each cycle the wanted Ritz vectors of the projected matrix are
//! turned into a real orthonormal basis `Z` of their (conjugation-closed)
//! span, which keeps the Krylov relation `A W = W K + f bᵀ` exact with
//! `W = VZ` and `K = ZᵀGZ`.

use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lanczos::basis_size;
use super::{
    combine, dot, fresh_direction, general_eigenvalues, norm, orthogonalize, random_unit, SolverMeta,
};
use crate::error::{Error, Result};
use crate::operators::GeneralOperator;
use crate::sparse::LinearOperator;

type C64 = Complex<f64>;

const BREAKDOWN: f64 = 1e-12;
/// `|Im λ| ≤ REAL_PROJECTION·max(1, |λ|)` is treated as solver noise.
pub const REAL_PROJECTION: f64 = 1e-6;
/// `|Im λ| > COMPLEX_DOMINANCE·|λ|` on a requested eigenvalue is an error.
pub const COMPLEX_DOMINANCE: f64 = 0.1;

/// End of the real axis to target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    LargestReal,
    SmallestReal,
}

impl Side {
    fn cmp(self, a: &C64, b: &C64) -> Ordering {
        let by_real = match self {
            Side::LargestReal => b.re.total_cmp(&a.re),
            Side::SmallestReal => a.re.total_cmp(&b.re),
        };
        by_real
            .then(a.im.abs().total_cmp(&b.im.abs()))
            .then(b.im.total_cmp(&a.im))
    }
}

/// Complex eigenpairs with unit eigenvectors stored as real and imaginary parts.
#[derive(Clone, Debug)]
pub struct ComplexPairs {
    pub values: Vec<C64>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub meta: SolverMeta,
}

/// Eigenpairs `(λ, [x; y])` of the reduced non-backtracking matrix with
/// `‖y‖ = 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NbEigenbundle {
    pub side: Side,
    pub lambdas: Vec<C64>,
    #[serde(skip)]
    pub x_parts: Vec<Vec<f64>>,
    #[serde(skip)]
    pub y_parts: Vec<Vec<f64>>,
    pub imag_norms: Vec<f64>,
    /// Residual of the unit-norm eigenvector before rescaling.
    pub residuals: Vec<f64>,
    pub meta: SolverMeta,
}

impl NbEigenbundle {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.imag_norms.iter().copied().fold(0.0, f64::max)
    }
}

/// `k` eigenpairs of the reduced non-backtracking matrix at the requested end
/// of the real axis, split into `(x, y)` halves with `‖y‖ = 1`.
///
/// Eigenvalues with negligible imaginary part are projected to the real axis
/// together with their eigenvectors. A requested eigenvalue whose imaginary
/// part exceeds a tenth of its modulus yields [`Error::ComplexDominance`].
pub fn leading_eigs_nonsym(
    op: &GeneralOperator,
    k: usize,
    side: Side,
    tol: f64,
    seed: u64,
) -> Result<NbEigenbundle> {
    let dim = op.dim();
    if !dim.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("odd operator dimension {dim}")));
    }
    let half = dim / 2;
    let pairs = extremal_eigs(op, k, side, tol, seed)?;
    if let Some(bad) = pairs
        .values
        .iter()
        .find(|l| l.im.abs() > COMPLEX_DOMINANCE * l.norm())
    {
        return Err(Error::ComplexDominance { re: bad.re, im: bad.im });
    }
    let mut bundle = NbEigenbundle {
        side,
        lambdas: Vec::with_capacity(k),
        x_parts: Vec::with_capacity(k),
        y_parts: Vec::with_capacity(k),
        imag_norms: Vec::with_capacity(k),
        residuals: pairs.residuals.clone(),
        meta: pairs.meta.clone(),
    };
    for ((lambda, re), im) in pairs.values.iter().zip(&pairs.re).zip(&pairs.im) {
        let (re, _) = phase_normalized(re, im);
        let lambda = if lambda.im.abs() <= REAL_PROJECTION * lambda.norm().max(1.0) {
            C64::new(lambda.re, 0.0)
        } else {
            *lambda
        };
        let (mut x, mut y) = (re[..half].to_vec(), re[half..].to_vec());
        let ny = norm(&y);
        if ny > 0.0 {
            let s = if y[super::argmax_abs(&y)] < 0.0 { -1.0 / ny } else { 1.0 / ny };
            x.iter_mut().chain(y.iter_mut()).for_each(|v| *v *= s);
        }
        bundle.imag_norms.push(lambda.im.abs());
        bundle.lambdas.push(lambda);
        bundle.x_parts.push(x);
        bundle.y_parts.push(y);
    }
    Ok(bundle)
}

/// Rotates `re + i·im` so its largest entry is real and positive; returns the
/// rotated real and imaginary parts, the real part renormalized to unit norm.
fn phase_normalized(re: &[f64], im: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, (a, b)) in re.iter().zip(im).enumerate() {
        let mag = a * a + b * b;
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    let phase = C64::new(re[best], im[best]);
    let rot = if phase.norm() > 0.0 { phase.conj() / phase.norm() } else { C64::new(1.0, 0.0) };
    let mut out_re: Vec<f64> = Vec::with_capacity(re.len());
    let mut out_im: Vec<f64> = Vec::with_capacity(re.len());
    for (a, b) in re.iter().zip(im) {
        let z = C64::new(*a, *b) * rot;
        out_re.push(z.re);
        out_im.push(z.im);
    }
    let nrm = norm(&out_re);
    if nrm > 0.0 {
        out_re.iter_mut().for_each(|v| *v /= nrm);
    }
    (out_re, out_im)
}

/// Eigenvector of the small dense matrix `g` for the eigenvalue `theta`, by
/// shifted inverse iteration; unit norm.
fn ritz_vector(g: &DMatrix<C64>, theta: C64) -> DVector<C64> {
    let m = g.nrows();
    let mut delta = 1e-10 * theta.norm().max(1.0);
    let mut v = DVector::from_fn(m, |i, _| C64::new(1.0 + (i as f64 * 0.618).fract(), 0.0));
    for _ in 0..8 {
        let mut shifted = g.clone();
        for i in 0..m {
            shifted[(i, i)] -= theta + C64::new(delta, 0.0);
        }
        let lu = shifted.lu();
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&v) {
                Some(s) if s.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                    let nrm = s.norm();
                    v = s / C64::new(nrm, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return v;
        }
        delta *= 100.0;
    }
    v
}

/// Generic restarted Arnoldi returning unit eigenvectors.
pub fn extremal_eigs<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    side: Side,
    tol: f64,
    seed: u64,
) -> Result<ComplexPairs> {
    let n = op.dim();
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds dimension {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol}")));
    }
    let mut meta = SolverMeta::new(tol, seed);
    if k == 0 {
        meta.converged = true;
        return Ok(ComplexPairs { values: vec![], re: vec![], im: vec![], residuals: vec![], meta });
    }
    let m = basis_size(n, k);
    let max_matvecs = 5 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(random_unit(n, &mut rng));
    let mut g = DMatrix::<f64>::zeros(m, m);
    let mut kept = 0;
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;

    loop {
        meta.iterations += 1;
        let mut beta = 0.0;
        let mut tail: Option<Vec<f64>> = None;
        for j in kept..m {
            op.apply(&basis[j], &mut w);
            meta.matvecs += 1;
            let before = norm(&w);
            let h = orthogonalize(&basis[..=j], &mut w);
            for (i, &hi) in h.iter().enumerate() {
                g[(i, j)] = hi;
            }
            let b = norm(&w);
            let broke = b <= BREAKDOWN * before || b == 0.0;
            if j + 1 < m {
                if broke {
                    g[(j + 1, j)] = 0.0;
                    basis.push(fresh_direction(&basis, &mut rng));
                } else {
                    g[(j + 1, j)] = b;
                    basis.push(w.iter().map(|x| x / b).collect());
                }
            } else if !broke && basis.len() < n {
                beta = b;
                tail = Some(w.iter().map(|x| x / b).collect());
            }
        }

        let gc = g.map(|v| C64::new(v, 0.0));
        let mut ritz = general_eigenvalues(&g)?;
        ritz.sort_by(|a, b| side.cmp(a, b));
        let wanted: Vec<DVector<C64>> = ritz[..k].iter().map(|&t| ritz_vector(&gc, t)).collect();
        let worst = wanted
            .iter()
            .map(|s| beta * s[m - 1].norm())
            .fold(0.0, f64::max);
        best_residual = best_residual.min(worst);

        let exhausted = meta.matvecs + (m - kept) > max_matvecs;
        if worst <= 0.5 * tol || exhausted {
            let result = assemble(op, &basis[..m], &ritz[..k], &wanted, meta.clone());
            let true_worst = result.residuals.iter().copied().fold(0.0, f64::max);
            if true_worst <= tol {
                let mut result = result;
                result.meta.converged = true;
                return Ok(result);
            }
            best_residual = best_residual.min(true_worst);
            if exhausted {
                return Err(Error::NoConvergence { iterations: meta.iterations, best_residual });
            }
        }
        let Some(f) = tail else {
            return Err(Error::NoConvergence { iterations: meta.iterations, best_residual });
        };

        // Real orthonormal basis of the kept Ritz vectors' span.
        let target = (k + (m - k) / 2).min(m - 2).max(k);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut i = 0;
        while i < ritz.len() && z.len() < target {
            let s = if i < k { wanted[i].clone() } else { ritz_vector(&gc, ritz[i]) };
            let re: Vec<f64> = s.iter().map(|c| c.re).collect();
            let im: Vec<f64> = s.iter().map(|c| c.im).collect();
            let (re, im) = phase_normalized(&re, &im);
            let mut candidates = vec![re];
            if norm(&im) > 1e-6 {
                candidates.push(im);
            }
            let before = z.len();
            for mut c in candidates {
                orthogonalize(&z, &mut c);
                let nc = norm(&c);
                if nc > 1e-8 {
                    z.push(c.into_iter().map(|x| x / nc).collect());
                }
            }
            if z.len() > m - 2 {
                z.truncate(before);
                break;
            }
            i += 1;
        }
        let q = z.len();
        let zm = DMatrix::from_fn(m, q, |r, c| z[c][r]);
        let kmat = zm.transpose() * &g * &zm;
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for col in &z {
            next.push(combine(&basis[..m], col));
        }
        next.push(f);
        let mut h = DMatrix::<f64>::zeros(m, m);
        h.view_mut((0, 0), (q, q)).copy_from(&kmat);
        for c in 0..q {
            h[(q, c)] = beta * z[c][m - 1];
        }
        basis = next;
        g = h;
        kept = q;
    }
}

fn assemble<A: LinearOperator + ?Sized>(
    op: &A,
    basis: &[Vec<f64>],
    values: &[C64],
    vectors: &[DVector<C64>],
    meta: SolverMeta,
) -> ComplexPairs {
    let n = op.dim();
    let mut out = ComplexPairs {
        values: values.to_vec(),
        re: Vec::new(),
        im: Vec::new(),
        residuals: Vec::new(),
        meta,
    };
    let (mut ar, mut ai) = (vec![0.0; n], vec![0.0; n]);
    for (theta, s) in values.iter().zip(vectors) {
        let sr: Vec<f64> = s.iter().map(|c| c.re).collect();
        let si: Vec<f64> = s.iter().map(|c| c.im).collect();
        let mut re = combine(basis, &sr);
        let mut im = combine(basis, &si);
        let nrm = (dot(&re, &re) + dot(&im, &im)).sqrt();
        re.iter_mut().chain(im.iter_mut()).for_each(|v| *v /= nrm);
        op.apply(&re, &mut ar);
        op.apply(&im, &mut ai);
        let mut res = 0.0;
        for i in 0..n {
            let r1 = ar[i] - theta.re * re[i] + theta.im * im[i];
            let r2 = ai[i] - theta.re * im[i] - theta.im * re[i];
            res += r1 * r1 + r2 * r2;
        }
        out.re.push(re);
        out.im.push(im);
        out.residuals.push(res.sqrt());
    }
    out
}
