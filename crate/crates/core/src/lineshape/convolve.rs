use super::profile::LineshapeSpec;
use crate::error::{Error, Result};

/// Points of the base trapezoid rule; the convergence check uses twice as many.
pub const BASE_POINTS: usize = 2001;
/// The inhomogeneous distribution is truncated at this many FWHM either side.
pub const SPAN_FWHM: f64 = 5.0;
/// Largest accepted relative change when the point count is doubled.
pub const CONVERGENCE_TOL: f64 = 1e-4;

/// Trapezoid quadrature of `f(x) p(x)` against an inhomogeneous profile `p`.
///
/// Nodes are uniform in `t` with `x = c + s sinh(t)`, so spacing is `~s dt`
/// near the centre and grows proportionally to `|x - c|` further out. With
/// `s` set by the narrower of the homogeneous and inhomogeneous widths both
/// features are resolved even when their ratio is in the thousands.
#[derive(Debug, Clone)]
pub struct ConvolutionGrid {
    nodes: Vec<f64>,
    /// Fine-rule weights, including p(x) dx/dt.
    fine: Vec<f64>,
    /// Coarse-rule weights on the even nodes (zero on odd nodes).
    coarse: Vec<f64>,
}

impl ConvolutionGrid {
    /// `gamma` is the homogeneous width of the integrand, `delta` the laser
    /// detuning; the integrand is assumed peaked at `x = -delta`.
    pub fn new(inhom: &LineshapeSpec, gamma: f64, delta: f64) -> Result<Self> {
        let lambda = inhom.fwhm();
        if !(gamma > 0.0) {
            return Err(Error::validation("homogeneous width must be positive"));
        }
        let scale = 0.5 * gamma.min(lambda);
        let centre = if gamma < lambda { -delta } else { 0.0 };
        let half_span = SPAN_FWHM * lambda;
        let t_lo = ((-half_span - centre) / scale).asinh();
        let t_hi = ((half_span - centre) / scale).asinh();

        let n_fine = 2 * (BASE_POINTS - 1) + 1;
        let h = (t_hi - t_lo) / (n_fine - 1) as f64;
        let mut nodes = Vec::with_capacity(n_fine);
        let mut fine = Vec::with_capacity(n_fine);
        let mut coarse = Vec::with_capacity(n_fine);
        for i in 0..n_fine {
            let t = t_lo + i as f64 * h;
            let x = centre + scale * t.sinh();
            let jac = scale * t.cosh() * inhom.density(x);
            let end = i == 0 || i == n_fine - 1;
            nodes.push(x);
            fine.push(jac * h * if end { 0.5 } else { 1.0 });
            coarse.push(if i % 2 == 0 { jac * 2.0 * h * if end { 0.5 } else { 1.0 } } else { 0.0 });
        }
        Ok(Self { nodes, fine, coarse })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f(x) p(x)`; fails if halving the point count moves the
    /// result by more than [`CONVERGENCE_TOL`] (relative).
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut fine = 0.0;
        let mut coarse = 0.0;
        for ((&x, &wf), &wc) in self.nodes.iter().zip(&self.fine).zip(&self.coarse) {
            let v = f(x);
            fine += wf * v;
            coarse += wc * v;
        }
        let scale = fine.abs().max(f64::MIN_POSITIVE);
        if !fine.is_finite() || (fine - coarse).abs() > CONVERGENCE_TOL * scale {
            return Err(Error::Numerical(format!(
                "convolution quadrature did not converge ({coarse} vs {fine})"
            )));
        }
        Ok(fine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineshape::amplitude::single_centre_amplitude;
    use crate::lineshape::LineshapeKind;

    #[test]
    fn integrates_the_profile_to_one() {
        for kind in [LineshapeKind::Gaussian, LineshapeKind::Glp] {
            let p = LineshapeSpec::new(kind, 6000.0).unwrap();
            let g = ConvolutionGrid::new(&p, 16.0, 0.0).unwrap();
            let total = g.integrate(|_| 1.0).unwrap();
            assert!((total - 1.0).abs() < 1e-6, "{kind:?}: {total}");
        }
    }

    #[test]
    fn narrow_lorentzian_against_wide_gaussian() {
        // For Gamma << Lambda: int Gamma^2/(4x^2+Gamma^2) p(x) dx -> (pi Gamma / 2) p(0).
        let p = LineshapeSpec::gaussian(6000.0).unwrap();
        let gamma = 1.0;
        let g = ConvolutionGrid::new(&p, gamma, 0.0).unwrap();
        let v = g.integrate(|x| single_centre_amplitude(gamma, 0.0, x)).unwrap();
        let approx = std::f64::consts::FRAC_PI_2 * gamma * p.density(0.0);
        assert!(((v - approx) / approx).abs() < 1e-3);
    }

    #[test]
    fn narrow_profile_samples_the_integrand() {
        let p = LineshapeSpec::glp(0.01).unwrap();
        let g = ConvolutionGrid::new(&p, 100.0, 0.0).unwrap();
        let v = g.integrate(|x| single_centre_amplitude(100.0, 30.0, x)).unwrap();
        let direct = single_centre_amplitude(100.0, 30.0, 0.0);
        assert!(((v - direct) / direct).abs() < 1e-6);
    }

    #[test]
    fn unresolved_integrand_is_reported() {
        // A line far narrower than the node spacing out at x = 400.
        let p = LineshapeSpec::lorentzian(100.0).unwrap();
        let g = ConvolutionGrid::new(&p, 100.0, 0.0).unwrap();
        let r = g.integrate(|x| crate::lineshape::lorentz_peak(x - 400.0, 0.05));
        assert!(matches!(r, Err(Error::Numerical(_))), "{r:?}");
    }
}
