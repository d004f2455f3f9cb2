//! Limiting eigenvalue measure of the normalized interference Gram matrix.
//!
//! With `H` an `n x m` matrix of i.i.d. unit-variance complex Gaussians and
//! `r = min(n, m)`, the empirical spectrum of `(1/r) H H^dagger` converges
//! to a Marchenko-Pastur-type law controlled by `tau = max(n,m)/min(n,m)`:
//!
//! ```text
//! d mu(lambda) = sqrt((l+ - lambda)(lambda - l-)) / (2 pi lambda) dlambda      (n <= m)
//! d mu(lambda) = (1/tau) [same density] + ((tau-1)/tau) delta_0               (n > m)
//! ```
//!
//! with support edges `l± = (1 ± sqrt(tau))^2`. Integrals against the
//! continuous part are evaluated after the substitution
//! `lambda = l- + (l+ - l-) sin^2(theta)`, which absorbs the square-root
//! endpoint behavior (and the `lambda^(-1/2)` singularity at `tau = 1`), so
//! plain Gauss-Legendre quadrature converges spectrally. The order is
//! doubled until two successive rules agree within the requested tolerance.
//! The point mass at zero is always added exactly, never quadratured.

use std::f64::consts::PI;
use std::sync::OnceLock;
use thiserror::Error;

/// Default absolute quadrature tolerance; downstream solvers request >= 1e-9.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const GL_ORDERS: [usize; 10] = [32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384];

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("tau must be finite and >= 1, got {0}")]
    InvalidTau(f64),
    #[error("quadrature did not converge: best {best:e}, last delta {delta:e}, requested {requested:e}")]
    NonConvergence { best: f64, delta: f64, requested: f64 },
    #[error("integrand returned a non-finite value at lambda = {lambda}")]
    NonFiniteIntegrand { lambda: f64 },
}

/// The asymptotic regime: aspect ratio, rank flag and derived support data.
///
/// `tall` is true when `n > m`, which selects the branch with the point mass
/// of weight `(tau - 1)/tau` at zero. `r_bar = min(n,m)/n` is carried
/// explicitly because the interference limits scale with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumParams {
    pub tau: f64,
    pub tall: bool,
    /// Support lower edge `(1 - sqrt(tau))^2`.
    pub lambda_minus: f64,
    /// Support upper edge `(1 + sqrt(tau))^2`.
    pub lambda_plus: f64,
    /// Effective lower edge: `lambda_minus` if `n <= m`, zero if `n > m`.
    pub lambda_t_minus: f64,
    /// Mean of the measure: `tau` if `n <= m`, `1` if `n > m`.
    pub lambda_bar: f64,
    /// `min(n,m)/n`: 1 if `n <= m`, `1/tau` if `n > m`.
    pub r_bar: f64,
}

impl SpectrumParams {
    pub fn new(tau: f64, tall: bool) -> Result<Self, SpectrumError> {
        if !tau.is_finite() || tau < 1.0 {
            return Err(SpectrumError::InvalidTau(tau));
        }
        let sqrt_tau = tau.sqrt();
        let lambda_minus = (1.0 - sqrt_tau) * (1.0 - sqrt_tau);
        let lambda_plus = (1.0 + sqrt_tau) * (1.0 + sqrt_tau);
        let (lambda_t_minus, lambda_bar, r_bar) = if tall {
            (0.0, 1.0, 1.0 / tau)
        } else {
            (lambda_minus, tau, 1.0)
        };
        // r_bar is determined by (tau, tall); assert the identity instead of
        // trusting the branch above stays consistent under edits.
        debug_assert!(if tall {
            (r_bar * tau - 1.0).abs() < 1e-12
        } else {
            r_bar == 1.0
        });
        Ok(Self {
            tau,
            tall,
            lambda_minus,
            lambda_plus,
            lambda_t_minus,
            lambda_bar,
            r_bar,
        })
    }

    /// Weight of the atom at zero: `(tau - 1)/tau` in the tall regime, else 0.
    pub fn atom_weight(&self) -> f64 {
        if self.tall {
            (self.tau - 1.0) / self.tau
        } else {
            0.0
        }
    }

    /// The ratio `m/n` (`tau` when `n <= m`, `1/tau` when `n > m`).
    ///
    /// Distinct from [`Self::lambda_bar`], which is the mean of the measure;
    /// the two differ in the tall regime and must not be conflated.
    pub fn ratio_m_over_n(&self) -> f64 {
        if self.tall {
            self.r_bar
        } else {
            self.tau
        }
    }

    /// Density of the continuous part at `lambda` (zero outside the support).
    pub fn density(&self, lambda: f64) -> f64 {
        if lambda <= self.lambda_minus || lambda >= self.lambda_plus {
            return 0.0;
        }
        let val = ((self.lambda_plus - lambda) * (lambda - self.lambda_minus)).sqrt()
            / (2.0 * PI * lambda);
        if self.tall {
            val / self.tau
        } else {
            val
        }
    }
}

/// Creates the regime parameters; rejects `tau < 1` and non-finite inputs.
pub fn make_params(tau: f64, tall: bool) -> Result<SpectrumParams, SpectrumError> {
    SpectrumParams::new(tau, tall)
}

/// Integrates `f` against the full measure with absolute error `<= tolerance`.
///
/// The continuous part uses the `sin^2` substitution described in the module
/// docs; the atom contributes `atom_weight * f(0)` exactly in the tall
/// regime. `f` may diverge logarithmically at the support endpoints (it is
/// only ever evaluated at interior quadrature nodes).
pub fn integrate<F>(params: &SpectrumParams, f: F, tolerance: f64) -> Result<f64, SpectrumError>
where
    F: Fn(f64) -> f64,
{
    let atom = match params.atom_weight() {
        w if w > 0.0 => {
            let f0 = f(0.0);
            if f0.is_nan() {
                return Err(SpectrumError::NonFiniteIntegrand { lambda: 0.0 });
            }
            w * f0
        }
        _ => 0.0,
    };
    let cont = continuous_integral(params, &f, 0.0, PI / 2.0, tolerance)?;
    Ok(cont + atom)
}

/// Mass of the continuous part between `a` and `b` (the atom is excluded).
pub fn mass_between(
    params: &SpectrumParams,
    a: f64,
    b: f64,
    tolerance: f64,
) -> Result<f64, SpectrumError> {
    let lo = a.max(params.lambda_minus);
    let hi = b.min(params.lambda_plus);
    if lo >= hi {
        return Ok(0.0);
    }
    let width = params.lambda_plus - params.lambda_minus;
    let theta_of = |lambda: f64| (((lambda - params.lambda_minus) / width).clamp(0.0, 1.0)).sqrt().asin();
    continuous_integral(params, &|_| 1.0, theta_of(lo), theta_of(hi), tolerance)
}

/// Gauss-Legendre with order doubling on the substituted integrand over
/// `theta in [theta_lo, theta_hi]`, already scaled by `1/tau` when tall.
fn continuous_integral<F>(
    params: &SpectrumParams,
    f: &F,
    theta_lo: f64,
    theta_hi: f64,
    tolerance: f64,
) -> Result<f64, SpectrumError>
where
    F: Fn(f64) -> f64,
{
    let width = params.lambda_plus - params.lambda_minus;
    let scale = if params.tall { 1.0 / params.tau } else { 1.0 };
    let mid = 0.5 * (theta_lo + theta_hi);
    let half = 0.5 * (theta_hi - theta_lo);

    let eval_order = |idx: usize| -> Result<f64, SpectrumError> {
        let mut acc = 0.0;
        for &(node, weight) in gl_rule(idx) {
            let theta = mid + half * node;
            let s = theta.sin();
            let s2 = s * s;
            let lambda = params.lambda_minus + width * s2;
            // sin^2(theta)/lambda, with the exact cancellation when the
            // lower edge sits at zero (tau = 1).
            let ratio = if params.lambda_minus == 0.0 {
                1.0 / width
            } else {
                s2 / lambda
            };
            let cosv = theta.cos();
            let w_theta = width * width * ratio * cosv * cosv / PI;
            let fv = f(lambda);
            if fv.is_nan() {
                return Err(SpectrumError::NonFiniteIntegrand { lambda });
            }
            acc += weight * w_theta * fv;
        }
        Ok(acc * half * scale)
    };

    let mut prev = eval_order(0)?;
    for idx in 1..GL_ORDERS.len() {
        let cur = eval_order(idx)?;
        let delta = (cur - prev).abs();
        if delta <= tolerance {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(SpectrumError::NonConvergence {
        best: prev,
        delta: f64::NAN,
        requested: tolerance,
    })
}

/// Gauss-Legendre with order doubling on a plain interval; shared by the
/// sibling modules for smooth one-dimensional integrals.
pub(crate) fn gl_integrate_adaptive<F>(
    f: &F,
    a: f64,
    b: f64,
    tolerance: f64,
) -> Result<f64, SpectrumError>
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return Ok(0.0);
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval_order = |idx: usize| -> Result<f64, SpectrumError> {
        let mut acc = 0.0;
        for &(node, weight) in gl_rule(idx) {
            let x = mid + half * node;
            let fv = f(x);
            if fv.is_nan() {
                return Err(SpectrumError::NonFiniteIntegrand { lambda: x });
            }
            acc += weight * fv;
        }
        Ok(acc * half)
    };
    let mut prev = eval_order(0)?;
    for idx in 1..GL_ORDERS.len() {
        let cur = eval_order(idx)?;
        if (cur - prev).abs() <= tolerance {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(SpectrumError::NonConvergence {
        best: prev,
        delta: f64::NAN,
        requested: tolerance,
    })
}

fn gl_rule(idx: usize) -> &'static [(f64, f64)] {
    const EMPTY: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static CACHE: [OnceLock<Vec<(f64, f64)>>; 10] = [EMPTY; 10];
    CACHE[idx].get_or_init(|| gauss_legendre_nodes(GL_ORDERS[idx]))
}

/// Nodes and weights on [-1, 1] via Newton refinement of Legendre roots.
fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((-x, w));
        if 2 * (i + 1) <= n && x != 0.0 {
            out.push((x, w));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let d = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    /// Independent route: composite midpoint rule straight on the raw
    /// density, no substitution. Slowly convergent at the edges, good
    /// enough to cross-check the substituted quadrature.
    fn raw_midpoint_integral<F: Fn(f64) -> f64>(params: &SpectrumParams, f: F) -> f64 {
        let n = 400_000;
        let h = (params.lambda_plus - params.lambda_minus) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let lambda = params.lambda_minus + (i as f64 + 0.5) * h;
            acc += params.density(lambda) * f(lambda) * h;
        }
        acc + params.atom_weight() * f(0.0)
    }

    #[test]
    fn make_params_tau_two() {
        let p = make_params(2.0, false).unwrap();
        assert!((p.lambda_minus - 0.171_572_875_253_81).abs() < 1e-12);
        assert!((p.lambda_plus - 5.828_427_124_746_19).abs() < 1e-12);
        assert_eq!(p.lambda_t_minus, p.lambda_minus);
        assert_eq!(p.r_bar, 1.0);
        assert_eq!(p.lambda_bar, 2.0);
        assert_eq!(p.atom_weight(), 0.0);
    }

    #[test]
    fn make_params_square() {
        let p = make_params(1.0, false).unwrap();
        assert_eq!(p.lambda_minus, 0.0);
        assert_eq!(p.lambda_plus, 4.0);
    }

    #[test]
    fn make_params_tall() {
        let p = make_params(2.0, true).unwrap();
        assert_eq!(p.lambda_t_minus, 0.0);
        assert!((p.atom_weight() - 0.5).abs() < 1e-15);
        assert!((p.r_bar - 0.5).abs() < 1e-15);
        assert_eq!(p.lambda_bar, 1.0);
        assert!((p.ratio_m_over_n() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn make_params_rejects_bad_tau() {
        assert!(make_params(0.5, false).is_err());
        assert!(make_params(f64::NAN, false).is_err());
        assert!(make_params(f64::INFINITY, true).is_err());
    }

    #[test]
    fn total_mass_is_one() {
        for &tau in &[1.0, 1.5, 2.0, 4.0] {
            for &tall in &[false, true] {
                let p = make_params(tau, tall).unwrap();
                let total = integrate(&p, |_| 1.0, TOL).unwrap();
                let want_tol = if tau == 1.0 { 1e-8 } else { 1e-9 };
                assert!(
                    (total - 1.0).abs() < want_tol,
                    "tau={tau} tall={tall}: total mass {total}"
                );
            }
        }
    }

    #[test]
    fn mean_matches_trace_identity() {
        for &tau in &[1.0, 1.5, 2.0, 4.0] {
            let p = make_params(tau, false).unwrap();
            let mean = integrate(&p, |l| l, TOL).unwrap();
            assert!((mean - tau).abs() < 1e-8, "tau={tau}: mean {mean}");

            let pt = make_params(tau, true).unwrap();
            let mean_t = integrate(&pt, |l| l, TOL).unwrap();
            assert!((mean_t - 1.0).abs() < 1e-8, "tau={tau} tall: mean {mean_t}");
        }
    }

    #[test]
    fn agrees_with_raw_midpoint_oracle() {
        let p = make_params(2.0, false).unwrap();
        let via_subst = integrate(&p, |l| (1.0 + l).ln(), TOL).unwrap();
        let via_raw = raw_midpoint_integral(&p, |l| (1.0 + l).ln());
        assert!(
            (via_subst - via_raw).abs() < 1e-6,
            "substituted {via_subst} vs raw {via_raw}"
        );

        let pt = make_params(3.0, true).unwrap();
        let a = integrate(&pt, |l| l * l, TOL).unwrap();
        let b = raw_midpoint_integral(&pt, |l| l * l);
        assert!((a - b).abs() < 1e-6, "tall: {a} vs {b}");
    }

    #[test]
    fn monotone_in_the_integrand() {
        let p = make_params(1.5, false).unwrap();
        let f = integrate(&p, |l| l.sin().powi(2), TOL).unwrap();
        let g = integrate(&p, |l| l.sin().powi(2) + 0.25, TOL).unwrap();
        assert!(f <= g);
    }

    #[test]
    fn square_case_singular_edge_integrates() {
        let p = make_params(1.0, false).unwrap();
        // density ~ lambda^(-1/2) at zero; the substitution must absorb it
        let total = integrate(&p, |_| 1.0, TOL).unwrap();
        assert!((total - 1.0).abs() < 1e-8);
        let mean = integrate(&p, |l| l, TOL).unwrap();
        assert!((mean - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mass_between_covers_support() {
        let p = make_params(2.0, false).unwrap();
        let all = mass_between(&p, 0.0, 10.0, TOL).unwrap();
        assert!((all - 1.0).abs() < 1e-9);
        let left = mass_between(&p, 0.0, 2.0, TOL).unwrap();
        let right = mass_between(&p, 2.0, 10.0, TOL).unwrap();
        assert!((left + right - 1.0).abs() < 1e-9);
        assert_eq!(mass_between(&p, 6.0, 8.0, TOL).unwrap(), 0.0);

        let pt = make_params(2.0, true).unwrap();
        let cont = mass_between(&pt, 0.0, 10.0, TOL).unwrap();
        assert!((cont + pt.atom_weight() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_support() {
        let p = make_params(2.0, false).unwrap();
        assert_eq!(p.density(0.1), 0.0);
        assert_eq!(p.density(6.0), 0.0);
        assert!(p.density(1.0) > 0.0);
        assert!(p.density(5.0) > 0.0);
    }
}
