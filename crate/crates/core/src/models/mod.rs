//! CTMC generators for the benchmark price models.
//!
//! Diffusions are discretized by local moment matching on a non-uniform
//! grid. Jump models add, for every pair of nodes, the Lévy mass of the
//! log-moves that land in the target's cell; jumps that stay inside the
//! source cell are folded into the diffusion variance, and the diffusion
//! drift is chosen so that the chain is exactly risk-neutral at interior
//! nodes (`G x = r x`).

mod diffusion;
mod grid;
pub mod levy;

use serde::{Deserialize, Serialize};

use crate::chain::{Generator, StateGrid};
use crate::error::{Error, Result};

pub use diffusion::build_diffusion_generator;
pub use grid::{Boundary, GridSpec, Placement, DEFAULT_CONCENTRATION};
use levy::{Cgmy, DoubleExponential, Gaussian, LevyMeasure};

/// Price-process models. `r` is the risk-free rate; all other parameters
/// are in price units for CIR/CEV and in log-return units for the jump models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    /// `dX = κ(θ̄ − X)dt + σ√X dW`.
    Cir {
        kappa: f64,
        theta_bar: f64,
        sigma: f64,
        #[serde(default)]
        r: f64,
    },
    /// `dX = rX dt + σ X^{β+1} dW`.
    Cev {
        sigma: f64,
        beta: f64,
        #[serde(default)]
        r: f64,
    },
    /// Kou double-exponential jump diffusion.
    Dejd {
        sigma: f64,
        lambda: f64,
        p_up: f64,
        eta1: f64,
        eta2: f64,
        #[serde(default)]
        r: f64,
    },
    /// Merton lognormal jump diffusion.
    Mjd {
        sigma: f64,
        lambda: f64,
        mu_j: f64,
        sigma_j: f64,
        #[serde(default)]
        r: f64,
    },
    /// CGMY pure-jump tempered stable process.
    Cgmy {
        c: f64,
        g: f64,
        m: f64,
        y: f64,
        #[serde(default)]
        r: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be non-negative, got {v}")))
    }
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Cir { .. } => "CIR",
            ModelSpec::Cev { .. } => "CEV",
            ModelSpec::Dejd { .. } => "DEJD",
            ModelSpec::Mjd { .. } => "MJD",
            ModelSpec::Cgmy { .. } => "CGMY",
        }
    }

    pub fn rate(&self) -> f64 {
        match *self {
            ModelSpec::Cir { r, .. }
            | ModelSpec::Cev { r, .. }
            | ModelSpec::Dejd { r, .. }
            | ModelSpec::Mjd { r, .. }
            | ModelSpec::Cgmy { r, .. } => r,
        }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        match &mut self {
            ModelSpec::Cir { r, .. }
            | ModelSpec::Cev { r, .. }
            | ModelSpec::Dejd { r, .. }
            | ModelSpec::Mjd { r, .. }
            | ModelSpec::Cgmy { r, .. } => *r = rate,
        }
        self
    }

    pub fn is_jump_model(&self) -> bool {
        matches!(self, ModelSpec::Dejd { .. } | ModelSpec::Mjd { .. } | ModelSpec::Cgmy { .. })
    }

    /// Infinite activity concentrates jumps next to the current state, where
    /// lumping them onto nodes overstates their variance. Folding two cells
    /// on each side into the diffusion part removes most of that bias.
    pub fn default_small_jump_cells(&self) -> usize {
        match self {
            ModelSpec::Cgmy { .. } => 2,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rate().is_finite() {
            return Err(Error::arg("rate must be finite"));
        }
        match *self {
            ModelSpec::Cir { kappa, theta_bar, sigma, .. } => {
                positive("kappa", kappa)?;
                non_negative("theta_bar", theta_bar)?;
                positive("sigma", sigma)
            }
            ModelSpec::Cev { sigma, beta, .. } => {
                positive("sigma", sigma)?;
                if beta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::arg("beta must be finite"))
                }
            }
            ModelSpec::Dejd { sigma, lambda, p_up, eta1, eta2, .. } => {
                non_negative("sigma", sigma)?;
                non_negative("lambda", lambda)?;
                if !(0.0..=1.0).contains(&p_up) {
                    return Err(Error::arg(format!("p_up must lie in [0, 1], got {p_up}")));
                }
                if !(eta1 > 1.0) {
                    return Err(Error::arg(format!("eta1 must exceed 1 for a finite mean up-jump, got {eta1}")));
                }
                positive("eta2", eta2)
            }
            ModelSpec::Mjd { sigma, lambda, mu_j, sigma_j, .. } => {
                non_negative("sigma", sigma)?;
                non_negative("lambda", lambda)?;
                positive("sigma_j", sigma_j)?;
                if mu_j.is_finite() {
                    Ok(())
                } else {
                    Err(Error::arg("mu_j must be finite"))
                }
            }
            ModelSpec::Cgmy { c, g, m, y, .. } => {
                positive("C", c)?;
                positive("G", g)?;
                positive("M", m)?;
                if !(y < 2.0 && y.is_finite()) {
                    return Err(Error::arg(format!("Y must be below 2, got {y}")));
                }
                if m <= 1.0 {
                    return Err(Error::arg(format!("M must exceed 1 for a finite forward, got {m}")));
                }
                Ok(())
            }
        }
    }

    /// The same model for the price process `X / spot`.
    pub fn normalized(&self, spot: f64) -> Self {
        match *self {
            ModelSpec::Cir { kappa, theta_bar, sigma, r } => {
                ModelSpec::Cir { kappa, theta_bar: theta_bar / spot, sigma: sigma / spot.sqrt(), r }
            }
            ModelSpec::Cev { sigma, beta, r } => ModelSpec::Cev { sigma: sigma * spot.powf(beta), beta, r },
            ref jump => jump.clone(),
        }
    }

    fn levy(&self) -> Option<Box<dyn LevyMeasure>> {
        match *self {
            ModelSpec::Dejd { lambda, p_up, eta1, eta2, .. } => {
                Some(Box::new(DoubleExponential { lambda, p_up, eta1, eta2 }))
            }
            ModelSpec::Mjd { lambda, mu_j, sigma_j, .. } => {
                Some(Box::new(Gaussian { lambda, mu: mu_j, sigma: sigma_j }))
            }
            ModelSpec::Cgmy { c, g, m, y, .. } => Some(Box::new(Cgmy { c, g, m, y })),
            _ => None,
        }
    }

    /// Local log-volatility at `x`, including the jump variance: used to size the grid.
    fn proxy_vol(&self, x: f64) -> f64 {
        match *self {
            ModelSpec::Cir { sigma, .. } => sigma / x.sqrt(),
            ModelSpec::Cev { sigma, beta, .. } => sigma * x.powf(beta),
            ModelSpec::Dejd { sigma, .. } | ModelSpec::Mjd { sigma, .. } => {
                (sigma * sigma + self.levy().unwrap().log_variance()).sqrt()
            }
            ModelSpec::Cgmy { .. } => self.levy().unwrap().log_variance().sqrt(),
        }
    }
}

/// Options for [`build_jump_generator`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpOptions {
    /// Largest admissible fraction of the jump intensity at the spot node
    /// that overshoots the top of the grid.
    pub mass_tol: f64,
    /// Node whose overshoot mass is checked.
    pub spot_index: usize,
    /// Neighbouring cells on each side whose jumps are treated as diffusion.
    pub fold: usize,
}

/// Jump rates between cells, for inspection and testing.
#[derive(Clone, Debug)]
pub struct JumpPart {
    /// Row-major `N×N` rates with zero diagonal.
    pub rates: Vec<f64>,
    /// Per-node relative price variance of jumps that stay in their own cell.
    pub small_jump_variance: Vec<f64>,
    /// Per-node jump intensity beyond the last grid state.
    pub overshoot: Vec<f64>,
}

/// Log-space bounds of every cell, seen from node `i`. The first and last
/// cells extend to ∓∞, so off-grid jumps are lumped onto the boundary states.
fn cell_bounds(states: &[f64], i: usize) -> Vec<(f64, f64)> {
    let n = states.len();
    let xi = states[i];
    let edge = |k: usize| ((states[k] + states[k + 1]) / 2.0 / xi).ln();
    (0..n)
        .map(|j| {
            let lo = if j == 0 { f64::NEG_INFINITY } else { edge(j - 1) };
            let hi = if j + 1 == n { f64::INFINITY } else { edge(j) };
            (lo, hi)
        })
        .collect()
}

/// Jump rates on `grid`. Jumps into the own cell and the `fold` nearest
/// cells on either side are left out and returned as a variance instead.
pub fn jump_part(measure: &dyn LevyMeasure, grid: &StateGrid, fold: usize) -> Result<JumpPart> {
    let states = grid.states();
    let n = states.len();
    let mut rates = vec![0.0; n * n];
    let mut small = vec![0.0; n];
    let mut overshoot = vec![0.0; n];
    for i in 0..n {
        // multiplicative jumps cannot leave zero
        if states[i] <= 0.0 {
            continue;
        }
        let cells = cell_bounds(states, i);
        let (first, last) = (i.saturating_sub(fold), (i + fold).min(n - 1));
        for (j, &(lo, hi)) in cells.iter().enumerate() {
            if j < first || j > last {
                rates[i * n + j] = measure.mass(lo, hi)?;
            }
        }
        small[i] = measure.small_jump_variance(cells[first].0.max(-50.0), cells[last].1.min(50.0))?;
        overshoot[i] = measure.mass((states[n - 1] / states[i]).ln(), f64::INFINITY)?;
    }
    Ok(JumpPart { rates, small_jump_variance: small, overshoot })
}

/// Intensity of jumps larger than 1% in log size. Infinite-activity measures
/// have no total intensity, so tail masses are measured against this.
pub fn reference_intensity(measure: &dyn LevyMeasure) -> Result<f64> {
    Ok(measure.mass(f64::NEG_INFINITY, -0.01)? + measure.mass(0.01, f64::INFINITY)?)
}

/// CTMC generator for a jump model on `grid`.
pub fn build_jump_generator(
    spec: &ModelSpec,
    grid: &StateGrid,
    boundary: Boundary,
    opts: JumpOptions,
) -> Result<Generator> {
    spec.validate()?;
    let (sigma, r) = match *spec {
        ModelSpec::Dejd { sigma, r, .. } | ModelSpec::Mjd { sigma, r, .. } => (sigma, r),
        ModelSpec::Cgmy { r, .. } => (0.0, r),
        _ => return Err(Error::arg(format!("{} is not a jump model", spec.name()))),
    };
    let measure = spec.levy().expect("jump model has a Lévy measure");
    let states = grid.states();
    let n = states.len();
    let mut part = jump_part(measure.as_ref(), grid, opts.fold)?;

    if opts.spot_index >= n {
        return Err(Error::arg("spot index outside the grid"));
    }
    let s = opts.spot_index;
    let intensity = reference_intensity(measure.as_ref())?;
    if part.overshoot[s] > opts.mass_tol * intensity {
        return Err(Error::Construction(format!(
            "{:.3e} of the jump intensity at the spot overshoots the grid top {} (tolerance {:.1e})",
            part.overshoot[s] / intensity,
            states[n - 1],
            opts.mass_tol
        )));
    }
    if boundary == Boundary::Absorbing {
        for i in [0, n - 1] {
            part.rates[i * n..(i + 1) * n].iter_mut().for_each(|q| *q = 0.0);
        }
    }

    let mut drift = vec![0.0; n];
    let mut var = vec![0.0; n];
    for i in 0..n {
        let x = states[i];
        let jump_drift: f64 = (0..n).map(|j| part.rates[i * n + j] * (states[j] - x)).sum();
        drift[i] = r * x - jump_drift;
        var[i] = (sigma * sigma + part.small_jump_variance[i]) * x * x;
    }
    let nb = diffusion::neighbour_rates(states, &drift, &var, boundary)?;
    diffusion::assemble(grid.clone(), &nb, Some(&part.rates))
}

/// `max_i |Σ_j q_ij x_j − r x_i|` over interior nodes: how far the chain is
/// from being a martingale after discounting at `r`.
pub fn risk_neutral_drift_check(g: &Generator, r: f64) -> f64 {
    let x = g.grid().states();
    let gx = g.apply_real(x);
    let n = x.len();
    if n <= 2 {
        return (0..n).map(|i| (gx[i] - r * x[i]).abs()).fold(0.0, f64::max);
    }
    (1..n - 1).map(|i| (gx[i] - r * x[i]).abs()).fold(0.0, f64::max)
}

/// A model generator together with the index of the spot state.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub generator: Generator,
    pub spot_index: usize,
}

/// Two-sided standard normal quantile leaving 1e-6 outside.
const SPAN_Z: f64 = 4.8916;
/// Lowest grid state relative to the spot when extending for jump tails.
const MIN_LOW_RATIO: f64 = 1e-3;

/// Pick `[low, high]` so that a lognormal proxy leaves < 1e-6 probability
/// outside by `maturity`, widened so the upward jump overshoot from the
/// spot is below the mass tolerance.
pub fn auto_span(spec: &ModelSpec, spot: f64, maturity: f64, mass_tol: f64) -> Result<[f64; 2]> {
    let vol = spec.proxy_vol(spot);
    let width = SPAN_Z * vol * maturity.sqrt();
    let drift = spec.rate().abs() * maturity;
    let mut low = spot * (-width - drift).exp();
    let mut high = spot * (width + drift).exp();
    if let ModelSpec::Cir { theta_bar, .. } = *spec {
        high = high.max(theta_bar * (width).exp());
        low = low.min(theta_bar * (-width).exp());
    }
    if let Some(measure) = spec.levy() {
        let reference = reference_intensity(measure.as_ref())?;
        // aim below the tolerance so the construction check has headroom
        let target = 0.5 * mass_tol * reference;
        let mut up = (high / spot).ln();
        while measure.mass(up, f64::INFINITY)? > target && up < 20.0 {
            up *= 1.1;
        }
        high = spot * up.exp();
        let mut down = (spot / low).ln();
        while measure.mass(f64::NEG_INFINITY, -down)? > target
            && spot * (-down).exp() > MIN_LOW_RATIO * spot
        {
            down *= 1.1;
        }
        low = (spot * (-down).exp()).max(MIN_LOW_RATIO * spot);
    }
    Ok([low.max(0.0), high])
}

/// Default tolerance on jump mass overshooting the grid top.
pub const DEFAULT_MASS_TOL: f64 = 1e-8;

/// Build the CTMC generator of `spec` on the grid described by `grid_spec`,
/// with `spot` inserted as an exact state.
pub fn build_model(spec: &ModelSpec, grid_spec: &GridSpec, spot: f64, maturity: f64) -> Result<BuiltModel> {
    spec.validate()?;
    positive("spot", spot)?;
    positive("maturity", maturity)?;
    grid_spec.validate(spot)?;
    let [low, high] = match grid_spec.span {
        Some(span) => span,
        None => auto_span(spec, spot, maturity, DEFAULT_MASS_TOL)?,
    };
    let grid = grid_spec.build(spot, low, high)?;
    let spot_index = grid.position(spot).expect("spot is a grid node");
    let generator = match *spec {
        ModelSpec::Cir { kappa, theta_bar, sigma, .. } => build_diffusion_generator(
            |x| kappa * (theta_bar - x),
            |x| sigma * x.max(0.0).sqrt(),
            &grid,
            grid_spec.boundary,
        )?,
        ModelSpec::Cev { sigma, beta, r } => build_diffusion_generator(
            |x| r * x,
            |x| if x > 0.0 { sigma * x.powf(beta + 1.0) } else { 0.0 },
            &grid,
            grid_spec.boundary,
        )?,
        _ => build_jump_generator(
            spec,
            &grid,
            grid_spec.boundary,
            JumpOptions {
                mass_tol: DEFAULT_MASS_TOL,
                spot_index,
                fold: grid_spec.small_jump_cells.unwrap_or(spec.default_small_jump_cells()),
            },
        )?,
    };
    Ok(BuiltModel { generator, spot_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::validate_generator;

    fn fm_dejd() -> ModelSpec {
        ModelSpec::Dejd { sigma: 0.120381, lambda: 0.330966, p_up: 0.2071, eta1: 9.65997, eta2: 3.13868, r: 0.0367 }
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::Cgmy { c: 1.0, g: 1.0, m: 2.0, y: 2.0, r: 0.0 }.validate().is_err());
        assert!(ModelSpec::Dejd { sigma: 0.1, lambda: 1.0, p_up: 0.5, eta1: 0.9, eta2: 2.0, r: 0.0 }
            .validate()
            .is_err());
        assert!(ModelSpec::Dejd { sigma: 0.1, lambda: 1.0, p_up: 1.5, eta1: 2.0, eta2: 2.0, r: 0.0 }
            .validate()
            .is_err());
        assert!(fm_dejd().validate().is_ok());
    }

    #[test]
    fn dejd_without_jumps_is_the_gbm_diffusion() {
        let spec = ModelSpec::Dejd { sigma: 0.2, lambda: 0.0, p_up: 0.3, eta1: 10.0, eta2: 5.0, r: 0.05 };
        let grid = GridSpec::default().build(1.0, 0.3, 3.0).unwrap();
        let spot_index = grid.position(1.0).unwrap();
        let g = build_jump_generator(&spec, &grid, Boundary::Reflecting, JumpOptions { mass_tol: 1e-8, spot_index, fold: 0 })
            .unwrap();
        let d = build_diffusion_generator(|x| 0.05 * x, |x| 0.2 * x, &grid, Boundary::Reflecting).unwrap();
        let diff = g.rates().as_slice().iter().zip(d.rates().as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "max difference {diff}");
    }

    #[test]
    fn jump_models_are_valid_and_risk_neutral() {
        let models = [
            fm_dejd(),
            ModelSpec::Mjd { sigma: 0.126349, lambda: 0.174814, mu_j: -0.390078, sigma_j: 0.338796, r: 0.0367 },
            ModelSpec::Cgmy { c: 0.0244, g: 0.0765, m: 7.5515, y: 1.2945, r: 0.0367 },
        ];
        for spec in models {
            let built = build_model(&spec, &GridSpec::default(), 1.0, 1.0).unwrap_or_else(|e| panic!("{}: {e}", spec.name()));
            assert!(validate_generator(&built.generator).is_empty(), "{}", spec.name());
            let defect = risk_neutral_drift_check(&built.generator, spec.rate());
            assert!(defect < 1e-10, "{}: defect {defect}", spec.name());
        }
    }

    #[test]
    fn overshoot_beyond_tolerance_is_rejected() {
        let grid = GridSpec::default().build(1.0, 0.5, 1.2).unwrap();
        let spot_index = grid.position(1.0).unwrap();
        let err = build_jump_generator(&fm_dejd(), &grid, Boundary::Reflecting, JumpOptions { mass_tol: 1e-8, spot_index, fold: 0 })
            .unwrap_err();
        assert!(matches!(err, Error::Construction(_)));
    }

    #[test]
    fn cir_drift_is_reported_not_rejected() {
        let spec = ModelSpec::Cir { kappa: 2.0, theta_bar: 1.2, sigma: 0.3, r: 0.05 };
        let built = build_model(&spec, &GridSpec::default(), 1.0, 1.0).unwrap();
        let g = &built.generator;
        let x = g.grid().states();
        let gx = g.apply_real(x);
        let expected = (1..x.len() - 1).map(|i| (gx[i] - 0.05 * x[i]).abs()).fold(0.0, f64::max);
        assert_eq!(risk_neutral_drift_check(g, 0.05), expected);
        assert!(expected > 0.1);
    }

    #[test]
    fn single_state_chain_has_no_defect() {
        let g = Generator::from_rows(vec![1.0], &[vec![0.0]]).unwrap();
        assert_eq!(risk_neutral_drift_check(&g, 0.0), 0.0);
    }

    #[test]
    fn normalization_preserves_dynamics() {
        let cev = ModelSpec::Cev { sigma: 2.5, beta: -0.5, r: 0.05 };
        if let ModelSpec::Cev { sigma, .. } = cev.normalized(100.0) {
            assert!((sigma - 0.25).abs() < 1e-15);
        }
        let cir = ModelSpec::Cir { kappa: 1.0, theta_bar: 50.0, sigma: 2.0, r: 0.0 };
        if let ModelSpec::Cir { theta_bar, sigma, .. } = cir.normalized(100.0) {
            assert!((theta_bar - 0.5).abs() < 1e-15 && (sigma - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn cgmy_european_calls_match_the_fourier_price() {
        // Lewis-formula prices of e^{-rT} E[(S_T - K)^+] for S_0 = 1, T = 1
        let reference = [(0.9, 0.166_647_80), (1.0, 0.095_709_36), (1.1, 0.045_125_36), (1.2, 0.017_767_98)];
        let r = 0.0367;
        let spec = ModelSpec::Cgmy { c: 0.0244, g: 0.0765, m: 7.5515, y: 1.2945, r };
        let price = |cells: Option<usize>| {
            let grid = GridSpec { small_jump_cells: cells, ..GridSpec::default() };
            let built = build_model(&spec, &grid, 1.0, 1.0).unwrap();
            let p = crate::chain::transition_matrix(&built.generator, 1.0).unwrap();
            let x = built.generator.grid().states();
            reference.map(|(k, _)| {
                (-r).exp() * (0..x.len()).map(|j| p[(built.spot_index, j)].re * (x[j] - k).max(0.0)).sum::<f64>()
            })
        };
        let folded = price(None);
        for ((k, want), got) in reference.iter().zip(folded) {
            assert!((got - want).abs() < 0.015 * want, "K={k}: {got} vs {want}");
        }
        // lumping every neighbouring cell overstates the variance
        let lumped = price(Some(0));
        assert!(lumped[2] > 1.08 * reference[2].1);
    }
}
