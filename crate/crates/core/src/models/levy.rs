//! Lévy measures of the log-price jumps, integrated over grid cells.

use libm::{erfc, tgamma as gamma};

use crate::error::Result;
use crate::quadrature::{integrate, QuadOptions};
#[cfg(test)]
use crate::quadrature::integrate_to_infinity;

const CELL_QUAD: QuadOptions = QuadOptions { rel_tol: 1e-12, abs_tol: 1e-300, max_intervals: 4000 };

/// Jump measure `ν(dy)` of log-price moves `y = ln(X_after / X_before)`.
pub trait LevyMeasure: Send + Sync {
    /// `ν([a, b])` for `a < b`, where either bound may be infinite. Intervals
    /// containing the origin are only meaningful for finite-activity measures.
    fn mass(&self, a: f64, b: f64) -> Result<f64>;

    /// `∫_a^b (e^y − 1)² ν(dy)` for `a <= 0 <= b`: the relative price variance
    /// of jumps too small to leave a grid cell.
    fn small_jump_variance(&self, a: f64, b: f64) -> Result<f64>;

    /// Variance of log-jumps per unit time, `∫ y² ν(dy)`.
    fn log_variance(&self) -> f64;
}

/// Kou double-exponential jumps with intensity `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleExponential {
    pub lambda: f64,
    pub p_up: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl DoubleExponential {
    fn density(&self, y: f64) -> f64 {
        if y >= 0.0 {
            self.lambda * self.p_up * self.eta1 * (-self.eta1 * y).exp()
        } else {
            self.lambda * (1.0 - self.p_up) * self.eta2 * (self.eta2 * y).exp()
        }
    }
}

impl LevyMeasure for DoubleExponential {
    fn mass(&self, a: f64, b: f64) -> Result<f64> {
        let up = |lo: f64, hi: f64| {
            let lo = lo.max(0.0);
            if hi <= lo {
                0.0
            } else {
                self.p_up * ((-self.eta1 * lo).exp() - (-self.eta1 * hi).exp())
            }
        };
        let down = |lo: f64, hi: f64| {
            let hi = hi.min(0.0);
            if hi <= lo {
                0.0
            } else {
                (1.0 - self.p_up) * ((self.eta2 * hi).exp() - (self.eta2 * lo).exp())
            }
        };
        Ok(self.lambda * (up(a, b) + down(a, b)))
    }

    fn small_jump_variance(&self, a: f64, b: f64) -> Result<f64> {
        let f = |y: f64| (y.exp() - 1.0).powi(2) * self.density(y);
        Ok(integrate(f, a.min(0.0), 0.0, CELL_QUAD)? + integrate(f, 0.0, b.max(0.0), CELL_QUAD)?)
    }

    fn log_variance(&self) -> f64 {
        self.lambda * (2.0 * self.p_up / self.eta1.powi(2) + 2.0 * (1.0 - self.p_up) / self.eta2.powi(2))
    }
}

/// Merton lognormal jumps: `y ~ N(mu, sigma²)` at rate `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian {
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// `Φ(b) − Φ(a)` without cancellation in either tail.
pub(crate) fn normal_prob(a: f64, b: f64) -> f64 {
    let q = |x: f64| 0.5 * erfc(x / std::f64::consts::SQRT_2);
    if a >= 0.0 {
        q(a) - q(b)
    } else if b <= 0.0 {
        q(-b) - q(-a)
    } else {
        1.0 - q(-a) - q(b)
    }
}

impl Gaussian {
    fn density(&self, y: f64) -> f64 {
        let z = (y - self.mu) / self.sigma;
        self.lambda * (-0.5 * z * z).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }
}

impl LevyMeasure for Gaussian {
    fn mass(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.lambda * normal_prob((a - self.mu) / self.sigma, (b - self.mu) / self.sigma).max(0.0))
    }

    fn small_jump_variance(&self, a: f64, b: f64) -> Result<f64> {
        integrate(|y| (y.exp() - 1.0).powi(2) * self.density(y), a, b, CELL_QUAD)
    }

    fn log_variance(&self) -> f64 {
        self.lambda * (self.mu * self.mu + self.sigma * self.sigma)
    }
}

/// CGMY tempered-stable measure `C e^{−G|y|}/|y|^{1+Y}` (y < 0), `C e^{−My}/y^{1+Y}` (y > 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cgmy {
    pub c: f64,
    pub g: f64,
    pub m: f64,
    pub y: f64,
}

impl Cgmy {
    /// `C ∫_lo^hi e^{−rate·s} s^{−1−Y} ds` for `0 < lo < hi <= ∞`, integrated
    /// in `w = ln s` where the integrand is smooth on every scale.
    fn one_sided(&self, rate: f64, lo: f64, hi: f64) -> Result<f64> {
        // e^{−rate·s} underflows beyond this point
        let hi = hi.min(lo + 746.0 / rate);
        if hi <= lo {
            return Ok(0.0);
        }
        if lo <= 0.0 {
            // infinite activity near the origin
            return Ok(f64::INFINITY);
        }
        let f = |w: f64| self.c * (-rate * w.exp()).exp() * (-self.y * w).exp();
        integrate(f, lo.ln(), hi.ln(), CELL_QUAD)
    }

    /// `C ∫_0^eps (e^{±s} − 1)² e^{−rate·s} s^{−1−Y} ds`, after substituting
    /// `s = eps·u^{1/(2−Y)}`, which removes the endpoint singularity.
    fn small_side(&self, rate: f64, sign: f64, eps: f64) -> Result<f64> {
        if eps <= 0.0 {
            return Ok(0.0);
        }
        let p = 1.0 / (2.0 - self.y);
        let h = |s: f64| {
            if s == 0.0 {
                1.0
            } else {
                ((sign * s).exp_m1() / s).powi(2)
            }
        };
        let inner = integrate(
            |u| {
                let s = eps * u.powf(p);
                (-rate * s).exp() * h(s)
            },
            0.0,
            1.0,
            CELL_QUAD,
        )?;
        Ok(self.c * eps.powf(2.0 - self.y) * p * inner)
    }
}

impl LevyMeasure for Cgmy {
    fn mass(&self, a: f64, b: f64) -> Result<f64> {
        let mut total = 0.0;
        if b > 0.0 {
            total += self.one_sided(self.m, a.max(0.0), b)?;
        }
        if a < 0.0 {
            total += self.one_sided(self.g, (-b).max(0.0), -a)?;
        }
        Ok(total)
    }

    fn small_jump_variance(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.small_side(self.m, 1.0, b.max(0.0))? + self.small_side(self.g, -1.0, (-a).max(0.0))?)
    }

    fn log_variance(&self) -> f64 {
        self.c * gamma(2.0 - self.y) * (self.m.powf(self.y - 2.0) + self.g.powf(self.y - 2.0))
    }
}
