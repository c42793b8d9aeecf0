//! Thick-restart Lanczos for the smallest eigenpairs of a sparse symmetric
//! positive semidefinite matrix, with full (twice-iterated classical
//! Gram-Schmidt) reorthogonalization and exact deflation of a known invariant
//! subspace.
//!
//! Clustered low spectra make plain Lanczos restart many times, so the
//! solver works in two phases. One plain cycle yields Ritz values, and the
//! `k`-th of them bounds `lambda_k` from above. Lanczos is then run on
//! `-T_d(tau(L))`, a Chebyshev polynomial that is bounded by one on
//! `[cut, upper]` and grows quickly below `cut`, so the wanted eigenvalues
//! become well separated. A final Rayleigh-Ritz step in `L` recovers the
//! eigenvalues, and a plain run is the fallback if residuals are not met.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::sparse::CsrMatrix;

/// Symmetric linear map applied to vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y);
    }
}

/// `-T_d(tau(L))` with `tau(x) = (cut + upper - 2x) / (upper - cut)`.
struct ChebyshevFilter<'a> {
    l: &'a CsrMatrix,
    degree: usize,
    cut: f64,
    upper: f64,
}

impl LinearOperator for ChebyshevFilter<'_> {
    fn dim(&self) -> usize {
        self.l.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = x.len();
        let (a, b) = ((self.cut + self.upper) / (self.upper - self.cut), 2.0 / (self.upper - self.cut));
        let mut prev = x.to_vec();
        let mut cur = vec![0.0; n];
        let mut lx = vec![0.0; n];
        self.l.mul_vec(x, &mut lx);
        for i in 0..n {
            cur[i] = a * x[i] - b * lx[i];
        }
        for _ in 1..self.degree {
            self.l.mul_vec(&cur, &mut lx);
            for i in 0..n {
                let next = 2.0 * (a * cur[i] - b * lx[i]) - prev[i];
                prev[i] = cur[i];
                cur[i] = next;
            }
        }
        for i in 0..n {
            y[i] = -cur[i];
        }
    }
}

/// Target ratio between the filter value at zero and at the cut.
const FILTER_RANGE: f64 = 1e8;
/// Residual tolerance of the filtered run relative to `FILTER_RANGE`.
const FILTER_TOL: f64 = 1e-12;
const MAX_DEGREE: usize = 80;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Absolute tolerance on the 2-norm of each Ritz residual.
    pub tol: f64,
    pub max_restarts: usize,
    /// Basis size; `None` picks `max(2 * nev + 20, nev + 40)` capped at `n`.
    pub basis_size: Option<usize>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-9, max_restarts: 2000, basis_size: None }
    }
}

/// Smallest `nev` eigenpairs of `l` restricted to the orthogonal complement
/// of the orthonormal columns of `deflate`.
pub fn smallest_eigenpairs(
    l: &CsrMatrix,
    nev: usize,
    deflate: &DMatrix<f64>,
    opts: &LanczosOptions,
    rng: &mut Rng,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let room = l.n() - deflate.ncols();
    if nev == 0 || nev > room {
        return run(l, nev, deflate, opts, rng).map(|r| (r.values, r.vectors));
    }
    let probe_nev = (nev + (nev / 5).max(10)).min(room);
    let probe = run(l, probe_nev, deflate, &LanczosOptions { max_restarts: 1, ..*opts }, rng)?;
    if probe.converged {
        let vectors = probe.vectors.columns(0, nev).clone_owned();
        return Ok((probe.values[..nev].to_vec(), vectors));
    }
    let cut = probe.values[probe_nev - 1];
    let upper = l.gershgorin_bound() * 1.01;
    if cut > 0.0 && cut < 0.5 * upper {
        let tau0: f64 = (cut + upper) / (upper - cut);
        let degree = ((FILTER_RANGE.acosh() / tau0.acosh()).ceil() as usize).clamp(2, MAX_DEGREE);
        let filter = ChebyshevFilter { l, degree, cut, upper };
        // the filtered spectrum reaches about FILTER_RANGE; the final check is in L
        let tol_q = opts.tol.max(FILTER_TOL * FILTER_RANGE);
        let filtered = run(&filter, nev, deflate, &LanczosOptions { tol: tol_q, ..*opts }, rng)?;
        if filtered.converged {
            let (values, vectors) = rayleigh_ritz(l, filtered.vectors);
            if max_residual(l, &values, &vectors) <= opts.tol {
                return Ok((values, vectors));
            }
        }
        log::debug!("filtered Lanczos missed the tolerance; running plain Lanczos");
    }
    let r = run(l, nev, deflate, opts, rng)?;
    if !r.converged {
        return Err(Error::NoConvergence { iterations: opts.max_restarts, residual: r.residual });
    }
    Ok((r.values, r.vectors))
}

/// Ritz pairs of `l` on the span of the orthonormal columns of `x`.
fn rayleigh_ritz(l: &CsrMatrix, x: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let mut lx = DMatrix::zeros(x.nrows(), x.ncols());
    for c in 0..x.ncols() {
        l.mul_vec(x.column(c).as_slice(), lx.column_mut(c).as_mut_slice());
    }
    let h = x.tr_mul(&lx);
    let eig = SymmetricEigen::new(0.5 * (&h + h.transpose()));
    let order = ascending(&eig.eigenvalues);
    let mut y = DMatrix::zeros(x.ncols(), x.ncols());
    for (dst, &src) in order.iter().enumerate() {
        y.set_column(dst, &eig.eigenvectors.column(src));
    }
    (order.iter().map(|&c| eig.eigenvalues[c]).collect(), x * y)
}

fn max_residual(l: &CsrMatrix, values: &[f64], vectors: &DMatrix<f64>) -> f64 {
    let mut out = vec![0.0; vectors.nrows()];
    let mut worst: f64 = 0.0;
    for (c, &lambda) in values.iter().enumerate() {
        let col = vectors.column(c);
        l.mul_vec(col.as_slice(), &mut out);
        let r: f64 = out.iter().zip(col.iter()).map(|(a, b)| (a - lambda * b).powi(2)).sum();
        worst = worst.max(r.sqrt());
    }
    worst
}

struct RunResult {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    converged: bool,
    residual: f64,
}

/// Smallest `nev` Ritz pairs of `op`; stops after `opts.max_restarts` cycles
/// with `converged == false` if the tolerance was not met.
fn run(
    op: &dyn LinearOperator,
    nev: usize,
    deflate: &DMatrix<f64>,
    opts: &LanczosOptions,
    rng: &mut Rng,
) -> Result<RunResult> {
    let n = op.dim();
    let n_defl = deflate.ncols();
    if nev == 0 {
        return Ok(RunResult { values: Vec::new(), vectors: DMatrix::zeros(n, 0), converged: true, residual: 0.0 });
    }
    let room = n - n_defl;
    if nev > room {
        return Err(Error::InvalidParameter(format!("requested {nev} eigenpairs but only {room} dimensions remain")));
    }
    let m = opts.basis_size.unwrap_or_else(|| (2 * nev + 20).max(nev + 40)).min(room).max(nev);

    let mut basis = DMatrix::<f64>::zeros(n, m + 1);
    let mut proj = DMatrix::<f64>::zeros(m, m);
    let mut w = DVector::<f64>::zeros(n);

    let v0 = random_orthogonal(n, &basis, 0, deflate, rng)
        .ok_or_else(|| Error::InvalidParameter("could not draw a start vector".into()))?;
    basis.set_column(0, &v0);

    let mut kept = 0;
    let mut last_max_residual = f64::INFINITY;
    for restart in 0..opts.max_restarts {
        let mut beta = 0.0;
        for j in kept..m {
            op.apply(basis.column(j).as_slice(), w.as_mut_slice());
            let mut h = DVector::<f64>::zeros(j + 1);
            for _ in 0..2 {
                orthogonalize_against(&mut w, deflate, deflate.ncols());
                let v = basis.columns(0, j + 1);
                let c = v.tr_mul(&w);
                w.gemv(-1.0, &v, &c, 1.0);
                h += c;
            }
            for i in 0..=j {
                proj[(i, j)] = h[i];
                proj[(j, i)] = h[i];
            }
            beta = w.norm();
            let next = if beta > 1e-12 * (1.0 + h.amax()) {
                w.scale(1.0 / beta)
            } else {
                // Invariant subspace found: continue with a fresh direction.
                beta = 0.0;
                match random_orthogonal(n, &basis, j + 1, deflate, rng) {
                    Some(v) => v,
                    None if j + 1 >= nev => {
                        // whole space exhausted
                        return Ok(finish(&basis, &proj, j + 1, nev));
                    }
                    None => return Err(Error::NoConvergence { iterations: restart, residual: f64::NAN }),
                }
            };
            basis.set_column(j + 1, &next);
        }

        let eig = SymmetricEigen::new(proj.clone());
        let order = ascending(&eig.eigenvalues);
        let residual: Vec<f64> = order.iter().map(|&c| (beta * eig.eigenvectors[(m - 1, c)]).abs()).collect();
        let max_residual = residual[..nev].iter().copied().fold(0.0, f64::max);
        last_max_residual = max_residual;
        let done = max_residual <= opts.tol || m == room;

        if done || restart + 1 == opts.max_restarts {
            let (values, vectors) = ritz(&basis, &eig, &order[..nev], m);
            return Ok(RunResult { values, vectors, converged: done, residual: max_residual });
        }

        // Thick restart: keep the smallest Ritz vectors plus the residual direction.
        let keep = (nev + (m - nev) / 2).min(m - 1).max(nev);
        let mut y = DMatrix::<f64>::zeros(m, keep);
        for (k, &c) in order[..keep].iter().enumerate() {
            y.set_column(k, &eig.eigenvectors.column(c));
        }
        let new_basis = basis.columns(0, m) * &y;
        let residual_dir = basis.column(m).clone_owned();
        basis.columns_mut(0, keep).copy_from(&new_basis);
        basis.set_column(keep, &residual_dir);
        proj.fill(0.0);
        for (k, &c) in order[..keep].iter().enumerate() {
            proj[(k, k)] = eig.eigenvalues[c];
        }
        kept = keep;
    }
    Err(Error::NoConvergence { iterations: opts.max_restarts, residual: last_max_residual })
}

fn finish(basis: &DMatrix<f64>, proj: &DMatrix<f64>, size: usize, nev: usize) -> RunResult {
    let sub = proj.view((0, 0), (size, size)).clone_owned();
    let eig = SymmetricEigen::new(sub);
    let order = ascending(&eig.eigenvalues);
    let (values, vectors) = ritz(basis, &eig, &order[..nev], size);
    RunResult { values, vectors, converged: true, residual: 0.0 }
}

fn ritz(
    basis: &DMatrix<f64>,
    eig: &SymmetricEigen<f64, nalgebra::Dyn>,
    cols: &[usize],
    size: usize,
) -> (Vec<f64>, DMatrix<f64>) {
    let mut y = DMatrix::<f64>::zeros(size, cols.len());
    for (k, &c) in cols.iter().enumerate() {
        y.set_column(k, &eig.eigenvectors.column(c).rows(0, size));
    }
    let vectors = basis.columns(0, size) * y;
    let values = cols.iter().map(|&c| eig.eigenvalues[c]).collect();
    (values, vectors)
}

fn ascending(values: &DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

fn orthogonalize_against(w: &mut DVector<f64>, q: &DMatrix<f64>, cols: usize) {
    if cols == 0 {
        return;
    }
    let v = q.columns(0, cols);
    let c = v.tr_mul(w);
    w.gemv(-1.0, &v, &c, 1.0);
}

/// Random unit vector orthogonal to `deflate` and the first `cols` basis
/// columns, or `None` if the complement is numerically empty.
fn random_orthogonal(
    n: usize,
    basis: &DMatrix<f64>,
    cols: usize,
    deflate: &DMatrix<f64>,
    rng: &mut Rng,
) -> Option<DVector<f64>> {
    for _ in 0..5 {
        let mut v = DVector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5);
        for _ in 0..2 {
            orthogonalize_against(&mut v, deflate, deflate.ncols());
            orthogonalize_against(&mut v, basis, cols);
        }
        let norm = v.norm();
        if norm > 1e-8 {
            return Some(v / norm);
        }
    }
    None
}
