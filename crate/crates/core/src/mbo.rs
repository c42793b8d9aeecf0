//! Spectral MBO threshold dynamics for multiclass semi-supervised
//! classification, and the consensus combiner.
//!
//! Every outer iteration runs `N_s` implicit diffusion substeps in the
//! truncated eigenbasis with a fidelity force on the labeled rows, projects
//! each row of `U = Phi A` onto the simplex and then snaps it to the nearest
//! vertex. The snapped matrix seeds the next iteration (`A = Phi^T U`, with the
//! fidelity force recomputed from it).
//!
//! Because an outer iteration depends only on the snapped labels, a repeated
//! label vector (a fixed point or a 2-cycle) determines all later iterations
//! and the remaining ones are skipped without changing the result.

use nalgebra::DMatrix;
use rand::distributions::Open01;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataio::SplitSpec;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, TAG_MBO_INIT};
use crate::spectral::SpectralDecomposition;

/// Consecutive unchanged iterations that end a run when early stopping is on.
pub const EARLY_STOP_PATIENCE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MboParams {
    /// Fidelity strength `C`.
    pub c: f64,
    pub dt: f64,
    /// Outer iterations `N_t`.
    pub n_iters: usize,
    /// Diffusion substeps `N_s` per outer iteration.
    pub n_substeps: usize,
    pub n_classes: usize,
    pub seed: u64,
    /// Stop once hard labels are unchanged for [`EARLY_STOP_PATIENCE`]
    /// iterations.
    #[serde(default)]
    pub early_stop: bool,
}

impl MboParams {
    pub fn new(c: f64, dt: f64, n_iters: usize, n_classes: usize, seed: u64) -> Self {
        MboParams { c, dt, n_iters, n_substeps: 3, n_classes, seed, early_stop: false }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("fidelity strength C must be positive, got {}", self.c));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.n_substeps == 0 {
            return bad("n_substeps must be at least 1".into());
        }
        if self.n_classes < 2 {
            return bad(format!("need at least two classes, got {}", self.n_classes));
        }
        Ok(())
    }
}

/// Row-stochastic `N x m` matrix whose rows lie on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    values: DMatrix<f64>,
}

impl LabelMatrix {
    /// Checks every row is on the simplex (entries in `[0, 1]`, sum 1 within 1e-9).
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        for (i, row) in values.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            let in_range = row.iter().all(|&v| (0.0..=1.0).contains(&v));
            if !in_range || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("row {i} is not on the simplex")));
            }
        }
        Ok(LabelMatrix { values })
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.values.column(k).iter().copied().collect()
    }

    /// Row-wise argmax, lowest class index on ties.
    pub fn argmax(&self) -> Vec<usize> {
        (0..self.n_rows()).map(|i| argmax_row(&self.values, i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MboOutput {
    /// Final simplex-projected values before vertex displacement.
    pub probabilities: LabelMatrix,
    pub hard_labels: Vec<usize>,
    pub iterations_run: usize,
}

/// Euclidean projection onto the unit simplex `{x >= 0, sum x = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn project_rows(u: &mut DMatrix<f64>) {
    let mut buf = vec![0.0; u.ncols()];
    for i in 0..u.nrows() {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = u[(i, k)];
        }
        for (k, x) in project_to_simplex(&buf).into_iter().enumerate() {
            u[(i, k)] = x;
        }
    }
}

fn argmax_row(u: &DMatrix<f64>, i: usize) -> usize {
    let mut best = 0;
    for k in 1..u.ncols() {
        if u[(i, k)] > u[(i, best)] {
            best = k;
        }
    }
    best
}

/// Random `U^0`: entries uniform in (0, 1), labeled rows set to their class
/// vertex, every row projected onto the simplex.
pub fn initial_state(split: &SplitSpec, labels: &[usize], n_classes: usize, seed: u64) -> DMatrix<f64> {
    let n = split.gamma.len();
    let mut rng = rng_from_seed(derive_seed(seed, TAG_MBO_INIT, 0));
    let mut u = DMatrix::zeros(n, n_classes);
    for i in 0..n {
        for k in 0..n_classes {
            u[(i, k)] = rng.sample::<f64, _>(Open01);
        }
    }
    for i in split.labeled_indices() {
        for k in 0..n_classes {
            u[(i, k)] = if k == labels[i] { 1.0 } else { 0.0 };
        }
    }
    project_rows(&mut u);
    u
}

/// Per-run state of the truncated diffusion: coefficients `A`, fidelity
/// forcing `B` and the implicit-Euler denominators `E = 1 + (dt/N_s) Lambda`.
#[derive(Debug, Clone)]
pub struct MboWorkspace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub e: Vec<f64>,
    step: f64,
    c: f64,
    labeled: Vec<usize>,
    /// Rows of `Phi` at the labeled points.
    phi_l: DMatrix<f64>,
    /// Rows of `U^0` at the labeled points.
    u0_l: DMatrix<f64>,
    /// Last vertex labels passed to `set_vertices` and their `Phi^T V`.
    vertices: Option<(Vec<usize>, DMatrix<f64>)>,
}

impl MboWorkspace {
    /// `A = Phi^T U^0`, `B = 0`.
    pub fn new(spec: &SpectralDecomposition, labeled: &[usize], u0: &DMatrix<f64>, p: &MboParams) -> Self {
        let step = p.dt / p.n_substeps as f64;
        let phi = &spec.eigenvectors;
        MboWorkspace {
            a: phi.tr_mul(u0),
            b: DMatrix::zeros(spec.n_eigs(), u0.ncols()),
            e: spec.eigenvalues.iter().map(|&l| 1.0 + step * l).collect(),
            step,
            c: p.c,
            labeled: labeled.to_vec(),
            phi_l: phi.select_rows(labeled),
            u0_l: u0.select_rows(labeled),
            vertices: None,
        }
    }

    /// Resets the state to `U`: `A = Phi^T U`, `B = C Phi^T (Gamma (U - U^0))`.
    pub fn set_state(&mut self, spec: &SpectralDecomposition, u: &DMatrix<f64>) {
        self.a = spec.eigenvectors.tr_mul(u);
        let u_l = u.select_rows(&self.labeled);
        self.b = self.forcing(&u_l);
    }

    /// Same as [`set_state`](Self::set_state) for a vertex-valued `U` given by
    /// its class indices. `Phi^T V` is updated from the previous call when few
    /// labels changed.
    fn set_vertices(&mut self, spec: &SpectralDecomposition, hard: &[usize]) {
        let phi = &spec.eigenvectors;
        let n = hard.len();
        let changed: Option<Vec<usize>> = self.vertices.as_ref().and_then(|(prev, _)| {
            let changed: Vec<usize> = (0..n).filter(|&i| prev[i] != hard[i]).collect();
            (changed.len() <= n / 8).then_some(changed)
        });
        match (changed, self.vertices.as_mut()) {
            (Some(changed), Some((prev, coeffs))) => {
                for i in changed {
                    for c in 0..phi.ncols() {
                        let v = phi[(i, c)];
                        coeffs[(c, hard[i])] += v;
                        coeffs[(c, prev[i])] -= v;
                    }
                }
                prev.copy_from_slice(hard);
            }
            _ => {
                let mut coeffs = DMatrix::zeros(phi.ncols(), self.a.ncols());
                for c in 0..phi.ncols() {
                    let col = phi.column(c);
                    for (i, &k) in hard.iter().enumerate() {
                        coeffs[(c, k)] += col[i];
                    }
                }
                self.vertices = Some((hard.to_vec(), coeffs));
            }
        }
        self.a.copy_from(&self.vertices.as_ref().expect("just set").1);
        let mut u_l = DMatrix::zeros(self.labeled.len(), self.a.ncols());
        for (r, &i) in self.labeled.iter().enumerate() {
            u_l[(r, hard[i])] = 1.0;
        }
        self.b = self.forcing(&u_l);
    }

    fn forcing(&self, u_l: &DMatrix<f64>) -> DMatrix<f64> {
        self.phi_l.tr_mul(&(u_l - &self.u0_l)) * self.c
    }

    /// `A <- (A - (dt/N_s) B) ./ E`, then `B` from the new labeled rows.
    pub fn substep(&mut self) {
        for k in 0..self.a.ncols() {
            for (r, &e) in self.e.iter().enumerate() {
                self.a[(r, k)] = (self.a[(r, k)] - self.step * self.b[(r, k)]) / e;
            }
        }
        let u_l = &self.phi_l * &self.a;
        self.b = self.forcing(&u_l);
    }

    /// `U = Phi A`.
    pub fn state(&self, spec: &SpectralDecomposition) -> DMatrix<f64> {
        &spec.eigenvectors * &self.a
    }

    /// `Phi A` with every row projected onto the simplex. Two classes need
    /// only the difference of the columns: the projection of `(u, v)` is
    /// `p = clamp((1 + u - v) / 2, 0, 1)`, `(p, 1 - p)`.
    fn projected_state(&self, spec: &SpectralDecomposition) -> DMatrix<f64> {
        if self.a.ncols() != 2 {
            let mut u = self.state(spec);
            project_rows(&mut u);
            return u;
        }
        let diff = self.a.column(0) - self.a.column(1);
        let d = &spec.eigenvectors * diff;
        let mut u = DMatrix::zeros(d.len(), 2);
        for (i, &x) in d.iter().enumerate() {
            // non-finite values surface as NaN for the caller's check
            let p = if x.is_finite() { ((1.0 + x) / 2.0).clamp(0.0, 1.0) } else { f64::NAN };
            u[(i, 0)] = p;
            u[(i, 1)] = 1.0 - p;
        }
        u
    }
}

fn validate_inputs(spec: &SpectralDecomposition, split: &SplitSpec, labels: &[usize], p: &MboParams) -> Result<()> {
    p.validate()?;
    let n = spec.n();
    if spec.n_eigs() == 0 {
        return Err(Error::InvalidParameter("need at least one eigenpair".into()));
    }
    if split.gamma.len() != n || labels.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "decomposition has {n} points, split {} and labels {}",
            split.gamma.len(),
            labels.len()
        )));
    }
    if let Some(i) = split.labeled_indices().into_iter().find(|&i| labels[i] >= p.n_classes) {
        return Err(Error::InvalidParameter(format!("label {} of point {i} is outside 0..{}", labels[i], p.n_classes)));
    }
    Ok(())
}

/// Runs the MBO scheme for `p.n_iters` outer iterations.
pub fn mbo_classify(
    spec: &SpectralDecomposition,
    split: &SplitSpec,
    labels: &[usize],
    p: &MboParams,
) -> Result<MboOutput> {
    let mut out = mbo_sweep(spec, split, labels, p, &[p.n_iters])?;
    Ok(out.pop().expect("one checkpoint"))
}

/// Runs once to the largest of `n_iters` and returns the output after each
/// requested iteration count, in the order given. `p.n_iters` is ignored.
pub fn mbo_sweep(
    spec: &SpectralDecomposition,
    split: &SplitSpec,
    labels: &[usize],
    p: &MboParams,
    n_iters: &[usize],
) -> Result<Vec<MboOutput>> {
    validate_inputs(spec, split, labels, p)?;
    let m = p.n_classes;
    let labeled = split.labeled_indices();
    let u0 = initial_state(split, labels, m, p.seed);
    let total = n_iters.iter().copied().max().unwrap_or(0);

    let mut ws = MboWorkspace::new(spec, &labeled, &u0, p);
    let initial = LabelMatrix { values: u0 };
    let initial_hard = initial.argmax();
    // history[t] for t = 0..: output after t iterations (only while running)
    let mut history: Vec<(LabelMatrix, Vec<usize>)> = vec![(initial, initial_hard)];
    let mut unchanged = 0;
    let mut stopped_early: Option<usize> = None;
    // period of the detected cycle and the iteration where it was closed
    let mut cycle: Option<(usize, usize)> = None;

    for iter in 1..=total {
        if iter > 1 {
            let hard = history[iter - 1].1.clone();
            ws.set_vertices(spec, &hard);
        }
        for _ in 0..p.n_substeps {
            ws.substep();
        }
        let u = ws.projected_state(spec);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { iteration: iter });
        }
        let hard: Vec<usize> = (0..u.nrows()).map(|i| argmax_row(&u, i)).collect();

        if iter > 1 && hard == history[iter - 1].1 {
            unchanged += 1;
        } else {
            unchanged = 0;
        }
        history.push((LabelMatrix { values: u }, hard));

        if p.early_stop && unchanged >= EARLY_STOP_PATIENCE {
            stopped_early = Some(iter);
            break;
        }
        // The input of iteration t + 1 is the snapped output of iteration t.
        // Equal inputs at iterations i and j (both > 1) give equal outputs.
        if iter >= 2 && history[iter].1 == history[iter - 1].1 {
            cycle = Some((1, iter));
            break;
        }
        if iter >= 3 && history[iter].1 == history[iter - 2].1 {
            cycle = Some((2, iter));
            break;
        }
    }

    let last = history.len() - 1;
    let output_at = |t: usize| -> MboOutput {
        if let Some(stop) = stopped_early {
            let t = t.min(stop);
            let (probs, hard) = &history[t];
            return MboOutput { probabilities: probs.clone(), hard_labels: hard.clone(), iterations_run: t };
        }
        // output_t = output_{t - period} beyond the closing iteration
        let idx = match cycle {
            Some((period, closed)) if t > closed => t - period * (t - closed).div_ceil(period),
            _ => t.min(last),
        };
        let (probs, hard) = &history[idx];
        MboOutput { probabilities: probs.clone(), hard_labels: hard.clone(), iterations_run: t }
    };
    Ok(n_iters.iter().map(|&t| output_at(t)).collect())
}

/// Averages the probabilities of two runs and re-thresholds.
pub fn consensus(a: &MboOutput, b: &MboOutput) -> Result<MboOutput> {
    consensus_all(&[a, b])
}

/// Averages the probabilities of any number of runs and re-thresholds.
pub fn consensus_all(outputs: &[&MboOutput]) -> Result<MboOutput> {
    let first = outputs.first().ok_or_else(|| Error::InvalidParameter("consensus of zero outputs".into()))?;
    let shape = first.probabilities.values.shape();
    if let Some(o) = outputs.iter().find(|o| o.probabilities.values.shape() != shape) {
        return Err(Error::ShapeMismatch(format!(
            "consensus of {:?} and {:?} probability matrices",
            shape,
            o.probabilities.values.shape()
        )));
    }
    let mut sum = DMatrix::zeros(shape.0, shape.1);
    for o in outputs {
        sum += &o.probabilities.values;
    }
    let values = sum / outputs.len() as f64;
    let probabilities = LabelMatrix { values };
    let hard_labels = probabilities.argmax();
    Ok(MboOutput {
        probabilities,
        hard_labels,
        iterations_run: outputs.iter().map(|o| o.iterations_run).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Method;

    #[test]
    fn simplex_examples() {
        assert_eq!(project_to_simplex(&[0.3, 0.7]), vec![0.3, 0.7]);
        assert_eq!(project_to_simplex(&[0.8, 0.8]), vec![0.5, 0.5]);
        assert_eq!(project_to_simplex(&[1.5, -0.3]), vec![1.0, 0.0]);
        let p = project_to_simplex(&[-5.0, -5.0, -5.0]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn consensus_examples() {
        let out = |rows: &[f64]| MboOutput {
            probabilities: LabelMatrix::new(DMatrix::from_row_slice(1, 2, rows)).unwrap(),
            hard_labels: vec![0],
            iterations_run: 0,
        };
        let c = consensus(&out(&[1.0, 0.0]), &out(&[0.0, 1.0])).unwrap();
        assert_eq!(c.probabilities.row(0), vec![0.5, 0.5]);
        assert_eq!(c.hard_labels, vec![0]);
        let c = consensus(&out(&[0.9, 0.1]), &out(&[0.2, 0.8])).unwrap();
        assert!((c.probabilities.row(0)[0] - 0.55).abs() < 1e-15);
        assert_eq!(c.hard_labels, vec![0]);
        let a = out(&[0.3, 0.7]);
        assert_eq!(consensus(&a, &a).unwrap().probabilities, a.probabilities);
    }

    #[test]
    fn zero_iterations_returns_projected_start() {
        let spec = SpectralDecomposition {
            eigenvalues: vec![0.0],
            eigenvectors: DMatrix::from_element(4, 1, 0.5),
            method: Method::Exact,
        };
        let split = SplitSpec::from_labeled(4, &[1, 2], 0).unwrap();
        let labels = vec![0, 1, 0, 1];
        let p = MboParams::new(1.0, 0.1, 0, 2, 9);
        let out = mbo_classify(&spec, &split, &labels, &p).unwrap();
        assert_eq!(out.probabilities.values(), &initial_state(&split, &labels, 2, 9));
        assert_eq!(out.hard_labels[1], 1);
        assert_eq!(out.hard_labels[2], 0);
        assert_eq!(out.iterations_run, 0);
    }

    #[test]
    fn parameter_checks() {
        assert!(MboParams::new(0.0, 0.1, 1, 2, 0).validate().is_err());
        assert!(MboParams::new(1.0, -0.1, 1, 2, 0).validate().is_err());
        assert!(MboParams::new(1.0, 0.1, 1, 1, 0).validate().is_err());
        let mut p = MboParams::new(1.0, 0.1, 1, 2, 0);
        p.n_substeps = 0;
        assert!(p.validate().is_err());
    }
}
