//! Exact Gaussian-process regression over a finite candidate set.
//!
//! Gaussian kernel k(x,x') = ρ·exp(−‖x−x'‖²/(2l²)) with observation noise of
//! precision λ, so the training covariance is K̃ = K + λ⁻¹I. Posterior means
//! and variances, the joint posterior over all candidates, path sampling, the
//! log marginal likelihood, and simplex-based hyperparameter fitting all live
//! here.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LseError, Result};

/// A point of the finite search domain.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPoint {
    pub coords: Vec<f64>,
}

impl InputPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn sq_dist(&self, other: &InputPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Ordered observation pairs driving the posterior.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    points: Vec<InputPoint>,
    outputs: Vec<f64>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (InputPoint, f64)>) -> Self {
        let mut d = Self::new();
        for (p, y) in pairs {
            d.push(p, y);
        }
        d
    }

    pub fn push(&mut self, point: InputPoint, output: f64) {
        debug_assert!(output.is_finite());
        self.points.push(point);
        self.outputs.push(output);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[InputPoint] {
        &self.points
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }
}

/// Gaussian-kernel hyperparameters: signal variance ρ, length scale l, and
/// noise precision λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelHyperparams {
    pub rho: f64,
    pub ell: f64,
    pub lambda: f64,
}

/// λ is kept inside this range to stop the noise-free limit from blowing up
/// the factorization.
pub const LAMBDA_RANGE: (f64, f64) = (1e-6, 1e6);

impl KernelHyperparams {
    pub fn new(rho: f64, ell: f64, lambda: f64) -> Self {
        Self {
            rho,
            ell,
            lambda: lambda.clamp(LAMBDA_RANGE.0, LAMBDA_RANGE.1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(LseError::InvalidConfig {
                key: "rho".into(),
                reason: format!("must be positive and finite, got {}", self.rho),
            });
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(LseError::InvalidConfig {
                key: "ell".into(),
                reason: format!("must be positive and finite, got {}", self.ell),
            });
        }
        if !(self.lambda >= LAMBDA_RANGE.0 && self.lambda <= LAMBDA_RANGE.1) {
            return Err(LseError::InvalidConfig {
                key: "lambda".into(),
                reason: format!("must lie in [{}, {}], got {}", LAMBDA_RANGE.0, LAMBDA_RANGE.1, self.lambda),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn kernel(&self, a: &InputPoint, b: &InputPoint) -> f64 {
        self.rho * (-0.5 * a.sq_dist(b) / (self.ell * self.ell)).exp()
    }
}

/// Constant prior mean m(x) = θ by default in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFunction {
    pub constant: f64,
}

impl MeanFunction {
    pub fn new(constant: f64) -> Self {
        debug_assert!(constant.is_finite());
        Self { constant }
    }
}

/// Marginal posterior mean and standard deviation per candidate.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Full joint posterior over the candidate set, used for path sampling.
#[derive(Debug, Clone)]
pub struct JointPosterior {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// Training-set factorization shared by all posterior computations.
struct Factored {
    chol: Cholesky<f64, Dyn>,
    /// K̃⁻¹(y − m)
    alpha: DVector<f64>,
}

/// Cholesky with escalating jitter (relative to the mean diagonal) before
/// declaring the matrix singular.
fn cholesky_with_jitter(k_tilde: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let n = k_tilde.nrows();
    let mean_diag = k_tilde.diagonal().sum() / n as f64;
    for jitter in [0.0, 1e-9, 1e-6, 1e-3] {
        let mut m = k_tilde.clone();
        if jitter > 0.0 {
            for i in 0..n {
                m[(i, i)] += jitter * mean_diag;
            }
        }
        if let Some(chol) = Cholesky::new(m) {
            return Ok(chol);
        }
    }
    Err(LseError::SingularCovariance { n })
}

fn factor(dataset: &Dataset, hp: &KernelHyperparams, mean: &MeanFunction) -> Result<Option<Factored>> {
    if dataset.is_empty() {
        return Ok(None);
    }
    let n = dataset.len();
    let pts = dataset.points();
    let inv_lambda = 1.0 / hp.lambda;
    let mut k_tilde = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = hp.kernel(&pts[i], &pts[j]);
            k_tilde[(i, j)] = v;
            k_tilde[(j, i)] = v;
        }
        k_tilde[(i, i)] += inv_lambda;
    }
    let chol = cholesky_with_jitter(&k_tilde)?;
    let resid = DVector::from_iterator(n, dataset.outputs().iter().map(|y| y - mean.constant));
    let alpha = chol.solve(&resid);
    Ok(Some(Factored { chol, alpha }))
}

fn cross_kernel(hp: &KernelHyperparams, rows: &[InputPoint], cols: &[InputPoint]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| hp.kernel(&rows[i], &cols[j]))
}

/// Posterior mean μ_N(x) and standard deviation σ_N(x) at each candidate.
///
/// With no data the prior is returned. Roundoff-negative variances are
/// clamped to zero.
pub fn posterior(
    dataset: &Dataset,
    hp: &KernelHyperparams,
    mean: &MeanFunction,
    candidates: &[InputPoint],
) -> Result<PosteriorSummary> {
    let m = candidates.len();
    match factor(dataset, hp, mean)? {
        None => Ok(PosteriorSummary {
            mu: vec![mean.constant; m],
            sigma: candidates.iter().map(|x| hp.kernel(x, x).max(0.0).sqrt()).collect(),
        }),
        Some(f) => {
            let k_star = cross_kernel(hp, dataset.points(), candidates);
            let v = f.chol.solve(&k_star);
            let mut mu = Vec::with_capacity(m);
            let mut sigma = Vec::with_capacity(m);
            for j in 0..m {
                let kj = k_star.column(j);
                mu.push(mean.constant + kj.dot(&f.alpha));
                let var = hp.kernel(&candidates[j], &candidates[j]) - kj.dot(&v.column(j));
                sigma.push(var.max(0.0).sqrt());
            }
            Ok(PosteriorSummary { mu, sigma })
        }
    }
}

/// Joint posterior mean and covariance over the candidate set.
pub fn joint_posterior(
    dataset: &Dataset,
    hp: &KernelHyperparams,
    mean: &MeanFunction,
    candidates: &[InputPoint],
) -> Result<JointPosterior> {
    let m = candidates.len();
    let mut cov = cross_kernel(hp, candidates, candidates);
    let mu = match factor(dataset, hp, mean)? {
        None => DVector::from_element(m, mean.constant),
        Some(f) => {
            let k_star = cross_kernel(hp, dataset.points(), candidates);
            let v = f.chol.solve(&k_star);
            cov -= k_star.transpose() * &v;
            DVector::from_fn(m, |j, _| mean.constant + k_star.column(j).dot(&f.alpha))
        }
    };
    // symmetrize away roundoff
    for i in 0..m {
        for j in 0..i {
            let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    Ok(JointPosterior { mean: mu, covariance: cov })
}

/// Lower-triangular factor of a PSD matrix that tolerates zero pivots, so
/// fully determined (zero-variance) directions sample exactly at the mean.
fn psd_lower_factor(cov: &DMatrix<f64>, rel_jitter: f64) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    let mean_diag = if n > 0 { cov.diagonal().sum() / n as f64 } else { 0.0 };
    let jitter = rel_jitter * mean_diag.max(0.0);
    let pivot_tol = 1e-12 * mean_diag.abs().max(1e-300);
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = cov[(j, j)] + jitter;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= pivot_tol {
            // treat as exactly determined; a materially negative pivot means
            // the matrix is broken, not just roundoff-degenerate
            if d < -1e-6 * mean_diag.abs().max(1.0) {
                return Err(LseError::SingularCovariance { n });
            }
            continue;
        }
        let sqrt_d = d.sqrt();
        l[(j, j)] = sqrt_d;
        for i in (j + 1)..n {
            let mut s = cov[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / sqrt_d;
        }
    }
    Ok(l)
}

/// Draw `n_paths` i.i.d. sample paths from the joint posterior.
///
/// Returns an `n_paths × candidates` matrix; rows are paths. Deterministic
/// for a given seed.
pub fn sample_paths(jp: &JointPosterior, n_paths: usize, seed: u64) -> Result<DMatrix<f64>> {
    let m = jp.mean.len();
    let l = psd_lower_factor(&jp.covariance, 1e-9)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut paths = DMatrix::zeros(n_paths, m);
    let mut z = DVector::zeros(m);
    for p in 0..n_paths {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let row = &jp.mean + &l * &z;
        paths.row_mut(p).tr_copy_from(&row);
    }
    Ok(paths)
}

/// Weakly informative gamma(shape 2, scale 1) prior, applied to ρ and l in
/// units normalized by the data scale so functions with large output ranges
/// are not shrunk toward ρ ≈ 1.
const GAMMA_SHAPE: f64 = 2.0;

fn log_gamma_prior(x: f64, scale: f64) -> f64 {
    (GAMMA_SHAPE - 1.0) * (x / scale).ln() - x / scale - libm::lgamma(GAMMA_SHAPE) - scale.ln()
}

/// Natural units for the priors: mean squared residual for ρ, a fifth of the
/// observed point-cloud diagonal for l.
pub fn prior_scales(dataset: &Dataset, mean: &MeanFunction) -> (f64, f64) {
    let n = dataset.len();
    let msr = dataset
        .outputs()
        .iter()
        .map(|y| (y - mean.constant) * (y - mean.constant))
        .sum::<f64>()
        / n.max(1) as f64;
    let rho_scale = msr.max(1e-2);
    let dim = dataset.points().first().map_or(0, InputPoint::dim);
    let mut diag_sq = 0.0;
    for axis in 0..dim {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in dataset.points() {
            lo = lo.min(p.coords[axis]);
            hi = hi.max(p.coords[axis]);
        }
        diag_sq += (hi - lo) * (hi - lo);
    }
    let ell_scale = (0.2 * diag_sq.sqrt()).max(1e-2);
    (rho_scale, ell_scale)
}

/// Log marginal likelihood log N(y | m, K + λ⁻¹I), plus the gamma-prior log
/// densities of ρ and l when `priors_enabled`.
pub fn log_marginal_likelihood(
    dataset: &Dataset,
    hp: &KernelHyperparams,
    mean: &MeanFunction,
    priors_enabled: bool,
) -> Result<f64> {
    assert!(!dataset.is_empty(), "marginal likelihood needs data");
    let n = dataset.len() as f64;
    let f = factor(dataset, hp, mean)?.expect("non-empty");
    let resid = DVector::from_iterator(
        dataset.len(),
        dataset.outputs().iter().map(|y| y - mean.constant),
    );
    let log_det = 2.0 * f.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let mut lml = -0.5 * resid.dot(&f.alpha) - 0.5 * log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
    if priors_enabled {
        let (rho_scale, ell_scale) = prior_scales(dataset, mean);
        lml += log_gamma_prior(hp.rho, rho_scale) + log_gamma_prior(hp.ell, ell_scale);
    }
    Ok(lml)
}

/// Search box for the hyperparameter fit, applied in log space.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HyperparamBounds {
    pub rho: (f64, f64),
    pub ell: (f64, f64),
    pub lambda: (f64, f64),
}

impl Default for HyperparamBounds {
    fn default() -> Self {
        Self {
            rho: (1e-8, 1e12),
            ell: (1e-4, 1e4),
            lambda: LAMBDA_RANGE,
        }
    }
}

/// Outcome of a hyperparameter fit.
#[derive(Debug, Clone, Copy)]
pub struct HyperparamFit {
    pub params: KernelHyperparams,
    /// Objective (log marginal likelihood plus priors) at `params`.
    pub objective: f64,
    /// True when every optimizer restart failed and `params` is just `init`.
    pub fallback: bool,
}

/// Maximize the (prior-weighted) marginal likelihood with a derivative-free
/// simplex search in log-parameter space, restarted from five points.
///
/// Never returns parameters worse than `init`; with fewer than two
/// observations `init` is returned untouched.
pub fn fit_hyperparameters(
    dataset: &Dataset,
    init: &KernelHyperparams,
    mean: &MeanFunction,
    bounds: &HyperparamBounds,
    priors_enabled: bool,
) -> HyperparamFit {
    const RESTARTS: usize = 5;
    const MAX_ITER: usize = 200;
    const FTOL: f64 = 1e-6;

    let from_log = |u: &[f64; 3]| -> KernelHyperparams {
        KernelHyperparams {
            rho: u[0].exp().clamp(bounds.rho.0, bounds.rho.1),
            ell: u[1].exp().clamp(bounds.ell.0, bounds.ell.1),
            lambda: u[2].exp().clamp(bounds.lambda.0, bounds.lambda.1),
        }
    };
    let objective = |hp: &KernelHyperparams| -> f64 {
        match log_marginal_likelihood(dataset, hp, mean, priors_enabled) {
            Ok(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    };

    let init_objective = if dataset.is_empty() {
        f64::NEG_INFINITY
    } else {
        objective(init)
    };
    if dataset.len() < 2 {
        return HyperparamFit {
            params: *init,
            objective: init_objective,
            fallback: false,
        };
    }

    let u0 = [
        init.rho.clamp(bounds.rho.0, bounds.rho.1).ln(),
        init.ell.clamp(bounds.ell.0, bounds.ell.1).ln(),
        init.lambda.clamp(bounds.lambda.0, bounds.lambda.1).ln(),
    ];
    // fixed internal seed keeps the fit a pure function of its inputs
    let mut rng = ChaCha12Rng::seed_from_u64(0x6c73_655f_6669_745f);
    let mut best_u = u0;
    let mut best_f = init_objective;
    let mut any_finite = init_objective.is_finite();
    for restart in 0..RESTARTS {
        let start = if restart == 0 {
            u0
        } else {
            let mut s = u0;
            for si in s.iter_mut() {
                let jump: f64 = rand::Rng::gen_range(&mut rng, -1.5..1.5);
                *si += jump;
            }
            s
        };
        let (u, f) = simplex_max(|u| objective(&from_log(u)), start, 0.5, MAX_ITER, FTOL);
        if f.is_finite() {
            any_finite = true;
            if f > best_f {
                best_f = f;
                best_u = u;
            }
        }
    }

    if !any_finite {
        return HyperparamFit {
            params: *init,
            objective: init_objective,
            fallback: true,
        };
    }
    HyperparamFit {
        params: from_log(&best_u),
        objective: best_f,
        fallback: false,
    }
}

/// Nelder-Mead maximization in three dimensions with standard coefficients.
/// Stops when the simplex objective spread drops below `ftol`.
fn simplex_max<F: FnMut(&[f64; 3]) -> f64>(
    mut f: F,
    start: [f64; 3],
    step: f64,
    max_iter: usize,
    ftol: f64,
) -> ([f64; 3], f64) {
    const DIM: usize = 3;
    let mut pts: Vec<[f64; 3]> = vec![start; DIM + 1];
    for i in 0..DIM {
        pts[i + 1][i] += step;
    }
    // minimize -f
    let mut vals: Vec<f64> = pts.iter_mut().map(|p| -f(p)).collect();

    let order = |pts: &mut Vec<[f64; 3]>, vals: &mut Vec<f64>| {
        let mut idx: Vec<usize> = (0..=DIM).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let new_pts: Vec<_> = idx.iter().map(|&i| pts[i]).collect();
        let new_vals: Vec<_> = idx.iter().map(|&i| vals[i]).collect();
        *pts = new_pts;
        *vals = new_vals;
    };
    order(&mut pts, &mut vals);

    for _ in 0..max_iter {
        if vals[DIM].is_finite() && (vals[DIM] - vals[0]).abs() < ftol {
            break;
        }
        let mut centroid = [0.0; 3];
        for p in pts.iter().take(DIM) {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / DIM as f64;
            }
        }
        let at = |t: f64| -> [f64; 3] {
            let mut p = [0.0; 3];
            for i in 0..DIM {
                p[i] = centroid[i] + t * (pts[DIM][i] - centroid[i]);
            }
            p
        };
        let refl = at(-1.0);
        let f_refl = -f(&refl);
        if f_refl < vals[0] {
            let exp = at(-2.0);
            let f_exp = -f(&exp);
            if f_exp < f_refl {
                pts[DIM] = exp;
                vals[DIM] = f_exp;
            } else {
                pts[DIM] = refl;
                vals[DIM] = f_refl;
            }
        } else if f_refl < vals[DIM - 1] {
            pts[DIM] = refl;
            vals[DIM] = f_refl;
        } else {
            let contr = if f_refl < vals[DIM] { at(-0.5) } else { at(0.5) };
            let f_contr = -f(&contr);
            if f_contr < vals[DIM].min(f_refl) {
                pts[DIM] = contr;
                vals[DIM] = f_contr;
            } else {
                // shrink toward the best vertex
                for i in 1..=DIM {
                    for k in 0..DIM {
                        pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
                    }
                    vals[i] = -f(&pts[i]);
                }
            }
        }
        order(&mut pts, &mut vals);
    }
    (pts[0], -vals[0])
}
