//! Double transforms: a generating function in the number of monitoring
//! dates (discrete) or a Laplace transform in the horizon (continuous),
//! composed with the strike transform. Inverting the outer transform
//! numerically must reproduce the single transforms.

use crate::chain::{Chain, DiagD};
use crate::error::{Error, Result};
use crate::inversion::{euler_estimate, InversionConfig};
use crate::linalg::{mat_inverse, mat_vec, CMatrix, CVector, C64};
use crate::transforms::ShiftedGenerator;

/// Largest admissible `|z|` for the discrete double transform at `θ`:
/// `min(1, e^{−rΔ}, 1/‖e^{−θD}P(Δ)‖_∞)`.
pub fn z_radius(chain: &Chain, r: f64, theta: C64) -> Result<f64> {
    let delta = chain.delta().ok_or_else(|| Error::arg("chain has no monitoring interval"))?;
    let p = chain.p_delta().expect("delta implies P(Δ)");
    let ed = DiagD::new(chain.grid()).exp_neg(theta);
    let norm = (0..chain.len())
        .map(|i| ed[i].norm() * p.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(1f64.min((-r * delta).exp()).min(1.0 / norm))
}

/// Validated transform variables of the double transforms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DoubleTransformQuery {
    Discrete { theta: C64, z: C64 },
    Continuous { theta: C64, mu: C64 },
}

impl DoubleTransformQuery {
    /// Checks `Re θ > 0` and `|z|` below [`z_radius`].
    pub fn discrete(chain: &Chain, r: f64, theta: C64, z: C64) -> Result<Self> {
        check_theta(theta)?;
        let radius = z_radius(chain, r, theta)?;
        if !(z.norm() < radius) {
            return Err(Error::domain(format!("|z| = {:.6} must be below {radius:.6}", z.norm())));
        }
        Ok(Self::Discrete { theta, z })
    }

    /// Checks `Re θ > 0` and `|μ| > ‖G − θD‖_∞`, the region where the
    /// resolvent has a convergent Neumann expansion in `1/μ`.
    pub fn continuous(chain: &Chain, theta: C64, mu: C64) -> Result<Self> {
        check_theta(theta)?;
        let bound = chain.generator().shifted(theta).norm_inf();
        if !(mu.norm() > bound) {
            return Err(Error::domain(format!("|μ| = {:.6} must exceed ‖G − θD‖ = {bound:.6}", mu.norm())));
        }
        Ok(Self::Continuous { theta, mu })
    }
}

fn check_theta(theta: C64) -> Result<()> {
    if theta.re > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("double transform needs Re(θ) > 0, got {theta}")))
    }
}

/// Strict row diagonal dominance `|a_ii| > Σ_{j≠i} |a_ij|`.
fn dominant_rows(a: &CMatrix) -> Option<usize> {
    (0..a.rows()).find(|&i| {
        let row = a.row(i);
        let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, z)| z.norm()).sum();
        !(row[i].norm() > off)
    })
}

/// Generating function in `n` of the discrete strike transforms:
///
/// ```text
/// L_d(z, θ) = θ⁻² (e^{θD} − zP(Δ))⁻¹ 1 − 1/(θ²(1 − z)) 1 + x / (θ(1 − z)(1 − z e^{rΔ}))
/// ```
///
/// The resolvent is evaluated as `(I − z e^{−θD}P)⁻¹ e^{−θD} 1`, which is the
/// same vector with the large factor `e^{θD}` removed.
pub fn l_discrete(chain: &Chain, r: f64, theta: C64, z: C64) -> Result<CVector> {
    DoubleTransformQuery::discrete(chain, r, theta, z)?;
    let n = chain.len();
    let delta = chain.delta().expect("checked by the query");
    let p = chain.p_delta().expect("checked by the query");
    let ed = DiagD::new(chain.grid()).exp_neg(theta);
    let original = CMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { (theta * chain.states()[i]).exp() } else { C64::new(0.0, 0.0) };
        diag - z * p.row(i)[j]
    })?;
    if let Some(row) = dominant_rows(&original) {
        return Err(Error::domain(format!("e^(θD) − zP is not diagonally dominant in row {row}")));
    }
    let scaled = CMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id, 0.0) - z * ed[i] * p.row(i)[j]
    })?;
    let m = mat_vec(&mat_inverse(&scaled)?, &CVector::new(ed)?)?;
    let inv2 = (theta * theta).inv();
    let geo = (delta * r).exp();
    let out = m
        .iter()
        .zip(chain.states())
        .map(|(&v, &x)| v * inv2 - inv2 / (1.0 - z) + x / (theta * (1.0 - z) * (1.0 - z * geo)))
        .collect();
    CVector::new(out)
}

/// Nodes at which the contour estimate first becomes a candidate.
fn initial_nodes(n: usize) -> usize {
    4 * (n + 1)
}

const Z_TOL: f64 = 1e-11;
const Z_MAX_NODES: usize = 1 << 16;

/// Coefficient of `zⁿ` in `L_d(·, θ)`, by the trapezoidal rule on the circle
/// of half the admissible radius. Node counts start at `4(n+1)` and double
/// until two successive estimates agree to 1e-11.
pub fn z_coefficient(chain: &Chain, r: f64, theta: C64, n: usize) -> Result<CVector> {
    let rho = 0.5 * z_radius(chain, r, theta)?;
    let estimate = |m: usize| -> Result<CVector> {
        let mut acc = vec![C64::new(0.0, 0.0); chain.len()];
        for j in 0..m {
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
            let l = l_discrete(chain, r, theta, w * rho)?;
            let phase = w.powi(-(n as i32));
            for (a, v) in acc.iter_mut().zip(l.iter()) {
                *a += v * phase;
            }
        }
        let scale = 1.0 / (m as f64 * rho.powi(n as i32));
        CVector::new(acc.into_iter().map(|a| a * scale).collect())
    };
    let mut m = initial_nodes(n);
    let mut previous = estimate(m)?;
    loop {
        m *= 2;
        let next = estimate(m)?;
        let change = next.max_abs_diff(&previous);
        if change < Z_TOL * next.norm_max().max(1.0) {
            return Ok(next);
        }
        if m >= Z_MAX_NODES {
            return Err(Error::numeric(format!("contour coefficient did not settle: last change {change:.3e}")));
        }
        previous = next;
    }
}

/// Laplace transform in the horizon of the continuous strike transforms:
///
/// ```text
/// L_c(μ, θ) = θ⁻² (θD + μI − G)⁻¹ 1 − 1/(θ²μ) 1 + x / (θμ(μ − r))
/// ```
pub fn l_continuous(chain: &Chain, r: f64, theta: C64, mu: C64) -> Result<CVector> {
    check_theta(theta)?;
    if mu.norm() == 0.0 || (mu - r).norm() == 0.0 {
        return Err(Error::domain(format!("μ = {mu} is a pole of the transform")));
    }
    let a = chain.generator().shifted(theta).scale(C64::new(-1.0, 0.0)).shift_diag(mu);
    if let Some(row) = dominant_rows(&a) {
        return Err(Error::domain(format!("θD + μI − G is not diagonally dominant in row {row}")));
    }
    let m = mat_vec(&mat_inverse(&a)?, &CVector::ones(chain.len()))?;
    let inv2 = (theta * theta).inv();
    let out = m
        .iter()
        .zip(chain.states())
        .map(|(&v, &x)| v * inv2 - inv2 / mu + x / (theta * mu * (mu - r)))
        .collect();
    CVector::new(out)
}

/// `Σ_{i=0}^{terms} (G − θD)^i 1 / μ^{i+1}`, the Neumann expansion of
/// `(θD + μI − G)⁻¹ 1`; requires `|μ| > ‖G − θD‖_∞`.
pub fn neumann_resolvent(chain: &Chain, theta: C64, mu: C64, terms: usize) -> Result<CVector> {
    DoubleTransformQuery::continuous(chain, theta, mu)?;
    let op = ShiftedGenerator::new(chain.generator(), theta);
    let n = chain.len();
    let mut term: Vec<C64> = vec![mu.inv(); n];
    let mut sum = term.clone();
    let mut next = vec![C64::new(0.0, 0.0); n];
    for _ in 0..terms {
        crate::linalg::LinearOperator::apply(&op, &term, &mut next);
        for (t, v) in term.iter_mut().zip(&next) {
            *t = v / mu;
        }
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
    }
    CVector::new(sum)
}

/// `g_c(t, θ)` recovered by Euler inversion of `μ ↦ L_c(μ, θ)` at `t`.
///
/// The target is complex, so its real and imaginary parts are inverted
/// separately; since `G` and `x` are real, their transforms are
/// `(L_c(μ, θ) ± L_c(μ, θ̄)) / 2` (the minus case divided by `i`).
pub fn mu_invert(chain: &Chain, r: f64, theta: C64, t: f64, cfg: &InversionConfig) -> Result<CVector> {
    check_theta(theta)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::arg(format!("horizon must be non-negative, got {t}")));
    }
    let n = chain.len();
    if t == 0.0 {
        return CVector::new(vec![C64::new(0.0, 0.0); n]);
    }
    if cfg.a_param / (2.0 * t) <= r {
        return Err(Error::domain("inversion contour lies left of the growth rate e^{rt}"));
    }
    let nodes = cfg.nodes(t);
    let mut re_parts = vec![Vec::with_capacity(nodes.len()); n];
    let mut im_parts = vec![Vec::with_capacity(nodes.len()); n];
    for &mu in &nodes {
        let a = l_continuous(chain, r, theta, mu)?;
        let b = l_continuous(chain, r, theta.conj(), mu)?;
        for i in 0..n {
            re_parts[i].push(((a[i] + b[i]) * 0.5).re);
            im_parts[i].push(((a[i] - b[i]) / C64::new(0.0, 2.0)).re);
        }
    }
    let out = (0..n)
        .map(|i| {
            C64::new(euler_estimate(&re_parts[i], t, cfg).value, euler_estimate(&im_parts[i], t, cfg).value)
        })
        .collect();
    CVector::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Generator;
    use crate::transforms::{g_continuous, g_discrete, TransformQuery};

    fn chain() -> Chain {
        let g = Generator::from_rows(
            vec![0.6, 1.0, 1.4],
            &[vec![-1.0, 0.8, 0.2], vec![0.5, -1.0, 0.5], vec![0.3, 0.9, -1.2]],
        )
        .unwrap();
        Chain::with_delta(g, 0.5).unwrap()
    }

    #[test]
    fn z_zero_is_the_n_zero_transform() {
        let c = chain();
        let theta = C64::new(2.0, 1.0);
        let l = l_discrete(&c, 0.03, theta, C64::new(0.0, 0.0)).unwrap();
        let g = g_discrete(&c, 0.03, &TransformQuery::discrete(theta, 0, 0.5).unwrap()).unwrap();
        assert!(l.max_abs_diff(&g.values) < 1e-14);
    }

    #[test]
    fn power_series_sums_to_the_generating_function() {
        let c = chain();
        let (r, theta, z) = (0.04, C64::new(2.0, 1.0), C64::from_polar(0.3, 0.7));
        let mut sum = vec![C64::new(0.0, 0.0); 3];
        for n in 0..=60 {
            let g = g_discrete(&c, r, &TransformQuery::discrete(theta, n, 0.5).unwrap()).unwrap();
            for (s, v) in sum.iter_mut().zip(g.values.iter()) {
                *s += v * z.powi(n as i32);
            }
        }
        let l = l_discrete(&c, r, theta, z).unwrap();
        assert!(l.max_abs_diff(&CVector::new(sum).unwrap()) < 1e-10);
    }

    #[test]
    fn contour_coefficient_matches_single_transform() {
        let c = chain();
        let theta = C64::new(2.0, 1.0);
        for n in [0, 3, 8] {
            let z = z_coefficient(&c, 0.05, theta, n).unwrap();
            let g = g_discrete(&c, 0.05, &TransformQuery::discrete(theta, n, 0.5).unwrap()).unwrap();
            assert!(z.max_abs_diff(&g.values) < 1e-9, "n={n}");
        }
    }

    #[test]
    fn z_outside_radius_is_rejected() {
        let c = chain();
        let err = l_discrete(&c, 0.05, C64::new(1.0, 0.0), C64::new(0.99, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn single_state_continuous_closed_form() {
        let c = Chain::new(Generator::from_rows(vec![1.5], &[vec![0.0]]).unwrap()).unwrap();
        let (theta, mu) = (C64::new(1.0, 2.0), C64::new(3.0, -1.0));
        let l = l_continuous(&c, 0.0, theta, mu).unwrap()[0];
        let m = (theta * 1.5 + mu).inv();
        let expected = m / (theta * theta) - 1.0 / (theta * theta * mu) + 1.5 / (theta * mu * mu);
        assert!((l - expected).norm() < 1e-14);
    }

    #[test]
    fn resolvent_leading_term() {
        let c = chain();
        let theta = C64::new(1.0, 1.0);
        let mu = C64::new(1e7, 0.0);
        let a = c.generator().shifted(theta).scale(C64::new(-1.0, 0.0)).shift_diag(mu);
        let m = mat_vec(&mat_inverse(&a).unwrap(), &CVector::ones(3)).unwrap();
        for v in m.iter() {
            assert!((v * mu - 1.0).norm() < 1e-6);
        }
    }

    #[test]
    fn neumann_partial_sums_converge() {
        let c = chain();
        let theta = C64::new(1.0, 0.5);
        let mu = C64::new(2.0 * c.generator().shifted(theta).norm_inf(), 1.0);
        let a = c.generator().shifted(theta).scale(C64::new(-1.0, 0.0)).shift_diag(mu);
        let exact = mat_vec(&mat_inverse(&a).unwrap(), &CVector::ones(3)).unwrap();
        let mut last = f64::INFINITY;
        for terms in [0, 5, 10, 20, 40] {
            let err = neumann_resolvent(&c, theta, mu, terms).unwrap().max_abs_diff(&exact);
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-11);
    }

    #[test]
    fn mu_inversion_matches_continuous_transform() {
        let c = chain();
        let theta = C64::new(2.0, 1.0);
        let cfg = InversionConfig::default();
        for t in [0.25, 1.0, 4.0] {
            let inv = mu_invert(&c, 0.05, theta, t, &cfg).unwrap();
            let g = g_continuous(&c, 0.05, &TransformQuery::continuous(theta, t).unwrap()).unwrap();
            assert!(inv.max_abs_diff(&g.values) < 1e-6, "t={t}: {}", inv.max_abs_diff(&g.values));
        }
        let tiny = mu_invert(&c, 0.05, theta, 1e-9, &cfg).unwrap();
        assert!(tiny.norm_max() < 1e-8);
    }
}
