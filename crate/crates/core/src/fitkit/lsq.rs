//! Bounded Levenberg-Marquardt with a central finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::validation("bounds have different lengths"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::validation("every lower bound must not exceed its upper bound"));
        }
        Ok(Self { lower, upper })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| x >= l && x <= u)
    }

    fn clamp(&self, p: &mut [f64]) {
        for (x, (l, u)) in p.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.clamp(*l, *u);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsqOptions {
    pub max_iter: usize,
    /// Finite-difference step relative to max(|p|, 1).
    pub fd_rel_step: f64,
    /// Converged when the relative decrease of chi^2 falls below this.
    pub ftol: f64,
    /// Converged when the step norm falls below `xtol * (|p| + xtol)`.
    pub xtol: f64,
    pub initial_damping: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            fd_rel_step: 1e-6,
            ftol: 1e-10,
            xtol: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub chi2_reduced: f64,
    pub dof: usize,
    pub converged: bool,
    /// J^T W J could not be inverted at the solution.
    pub singular: bool,
    pub n_iter: usize,
    /// Parameters sitting on one of their bounds.
    pub at_bound: Vec<bool>,
    /// chi^2 after every accepted step, starting with the initial value.
    pub cost_history: Vec<f64>,
}

impl FitResult {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.params[i])
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.sigmas[i])
    }

    pub fn is_at_bound(&self, name: &str) -> bool {
        self.index(name).is_some_and(|i| self.at_bound[i])
    }
}

fn chi2(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn eval<F>(f: &F, p: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let r = f(p)?;
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!("non-finite residual at {p:?}")));
    }
    Ok(r)
}

/// Central differences, one-sided where a bound is in the way.
pub fn fd_jacobian<F>(f: &F, p: &[f64], bounds: &Bounds, rel_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut columns = Vec::with_capacity(p.len());
    for j in 0..p.len() {
        let h = rel_step * p[j].abs().max(1.0);
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[j] = (p[j] + h).min(bounds.upper[j]);
        minus[j] = (p[j] - h).max(bounds.lower[j]);
        let span = plus[j] - minus[j];
        if span == 0.0 {
            return Err(Error::validation(format!("parameter {j} has a zero-width range")));
        }
        let rp = eval(f, &plus)?;
        let rm = eval(f, &minus)?;
        columns.push(DVector::from_iterator(
            rp.len(),
            rp.iter().zip(&rm).map(|(a, b)| (a - b) / span),
        ));
    }
    Ok(DMatrix::from_columns(&columns))
}

/// Minimises sum(r_i^2) where `residual` returns the already weighted
/// residuals (model - data) / sigma.
///
/// The covariance is chi^2_red (J^T J)^-1 at the solution. Running out of
/// iterations or a singular J^T J is reported through `converged = false`
/// rather than an error; errors are reserved for invalid input and failing
/// residual evaluations.
pub fn least_squares<F>(
    residual: F,
    names: &[&str],
    p0: &[f64],
    bounds: &Bounds,
    opts: &LsqOptions,
) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n_par = p0.len();
    if names.len() != n_par || bounds.len() != n_par {
        return Err(Error::validation("names, start values and bounds must have equal length"));
    }
    if n_par == 0 {
        return Err(Error::validation("nothing to fit"));
    }
    if !bounds.contains(p0) {
        return Err(Error::validation(format!("start values {p0:?} lie outside the bounds")));
    }
    let mut p = p0.to_vec();
    let mut r = eval(&residual, &p)
        .map_err(|e| Error::validation(format!("residual not finite at the start values: {e}")))?;
    let n_res = r.len();
    let mut cost = chi2(&r);
    let mut history = vec![cost];
    let mut lambda = opts.initial_damping;
    let mut converged = false;
    let mut n_iter = 0;
    let mut jac = fd_jacobian(&residual, &p, bounds, opts.fd_rel_step)?;

    'outer: while n_iter < opts.max_iter {
        n_iter += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * DVector::from_vec(r.clone());
        let diag_floor = a.diagonal().amax().max(f64::MIN_POSITIVE) * 1e-12;

        loop {
            let mut damped = a.clone();
            for i in 0..n_par {
                damped[(i, i)] += lambda * a[(i, i)].max(diag_floor);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                if lambda > 1e20 {
                    break 'outer;
                }
                continue;
            };
            let delta = chol.solve(&(-&g));
            let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(x, d)| x + d).collect();
            bounds.clamp(&mut trial);

            let step: f64 = trial.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let p_norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if step < opts.xtol * (p_norm + opts.xtol) {
                converged = true;
                break 'outer;
            }

            let r_trial = match eval(&residual, &trial) {
                Ok(v) => v,
                Err(Error::Numerical(_)) => {
                    lambda *= 10.0;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let cost_trial = chi2(&r_trial);
            if cost_trial < cost {
                let rel = (cost - cost_trial) / cost;
                p = trial;
                r = r_trial;
                cost = cost_trial;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-15);
                jac = fd_jacobian(&residual, &p, bounds, opts.fd_rel_step)?;
                if rel < opts.ftol {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e20 {
                // No descent direction left at working precision.
                converged = true;
                break 'outer;
            }
        }
    }

    let dof = n_res.saturating_sub(n_par);
    let chi2_reduced = if dof > 0 { cost / dof as f64 } else { f64::NAN };
    let a = jac.transpose() * &jac;
    let (covariance, singular) = match invert_spd(&a) {
        Some(inv) => (inv * chi2_reduced, false),
        None => (DMatrix::from_element(n_par, n_par, f64::NAN), true),
    };
    let sigmas = (0..n_par).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();
    let at_bound = p
        .iter()
        .zip(bounds.lower.iter().zip(&bounds.upper))
        .map(|(x, (l, u))| x == l || x == u)
        .collect();

    Ok(FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        params: p,
        sigmas,
        covariance: covariance.row_iter().map(|row| row.iter().copied().collect()).collect(),
        chi2: cost,
        chi2_reduced,
        dof,
        converged: converged && !singular,
        singular,
        n_iter,
        at_bound,
        cost_history: history,
    })
}

/// Inverse of a symmetric positive definite matrix, `None` when it is
/// singular to working precision.
fn invert_spd(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = a.clone().symmetric_eigen();
    let max = eig.eigenvalues.amax();
    if !(max > 0.0) || eig.eigenvalues.iter().any(|&l| l <= max * 1e-14) {
        return None;
    }
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    let inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
    Some((&inv + inv.transpose()) * 0.5)
}

/// Fits `model(p)` to `y` with per-point uncertainties `sigma`.
pub fn fit_curve<M>(
    model: M,
    y: &[f64],
    sigma: &[f64],
    names: &[&str],
    p0: &[f64],
    bounds: &Bounds,
    opts: &LsqOptions,
) -> Result<FitResult>
where
    M: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if y.len() != sigma.len() {
        return Err(Error::validation("data and sigma lengths differ"));
    }
    least_squares(
        |p| {
            let m = model(p)?;
            Ok(m.iter().zip(y).zip(sigma).map(|((m, y), s)| (m - y) / s).collect())
        },
        names,
        p0,
        bounds,
        opts,
    )
}
