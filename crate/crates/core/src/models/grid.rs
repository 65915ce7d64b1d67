use serde::{Deserialize, Serialize};

use crate::chain::StateGrid;
use crate::error::{Error, Result};

/// Node placement between the grid bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Placement {
    Uniform,
    /// `x(u) = spot + α sinh(u)` on a uniform `u` grid, `α = concentration · spot`.
    /// Smaller concentration packs more nodes near the spot.
    Sinh { concentration: f64 },
}

impl Default for Placement {
    fn default() -> Self {
        Placement::Sinh { concentration: DEFAULT_CONCENTRATION }
    }
}

pub const DEFAULT_CONCENTRATION: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Reflecting,
    Absorbing,
}

/// How to lay out the CTMC state space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_states: usize,
    /// Explicit `[low, high]`; chosen from the model when absent.
    #[serde(default)]
    pub span: Option<[f64; 2]>,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub boundary: Boundary,
    /// Neighbouring cells on each side whose jumps are folded into the
    /// diffusion part. Defaults to 2 for CGMY and 0 otherwise.
    #[serde(default)]
    pub small_jump_cells: Option<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_states: 50,
            span: None,
            placement: Placement::default(),
            boundary: Boundary::default(),
            small_jump_cells: None,
        }
    }
}

impl GridSpec {
    pub fn with_states(n_states: usize) -> Self {
        Self { n_states, ..Self::default() }
    }

    pub fn validate(&self, spot: f64) -> Result<()> {
        if self.n_states < 3 {
            return Err(Error::arg(format!("grid needs at least 3 states, got {}", self.n_states)));
        }
        if let Some([low, high]) = self.span {
            if !(low >= 0.0 && low < spot && spot < high && high.is_finite()) {
                return Err(Error::arg(format!(
                    "grid span [{low}, {high}] must satisfy 0 <= low < spot ({spot}) < high"
                )));
            }
        }
        if self.small_jump_cells.is_some_and(|c| c >= self.n_states) {
            return Err(Error::arg("small_jump_cells must be below n_states"));
        }
        if let Placement::Sinh { concentration } = self.placement {
            if !(concentration > 0.0 && concentration.is_finite()) {
                return Err(Error::arg("sinh concentration must be positive"));
            }
        }
        Ok(())
    }

    /// Lay out `n_states` nodes on `[low, high]` with `spot` as an exact node.
    pub fn build(&self, spot: f64, low: f64, high: f64) -> Result<StateGrid> {
        let n = self.n_states;
        if n < 3 {
            return Err(Error::arg(format!("grid needs at least 3 states, got {n}")));
        }
        if !(low >= 0.0 && low < spot && spot < high) {
            return Err(Error::arg(format!("cannot place spot {spot} inside [{low}, {high}]")));
        }
        let (map, inv): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match self.placement {
            Placement::Uniform => (Box::new(move |u| spot + u), Box::new(move |x| x - spot)),
            Placement::Sinh { concentration } => {
                let alpha = concentration * spot;
                (Box::new(move |u: f64| spot + alpha * u.sinh()), Box::new(move |x: f64| ((x - spot) / alpha).asinh()))
            }
        };
        let (u_lo, u_hi) = (inv(low), inv(high));
        let below = (((n - 1) as f64) * (-u_lo) / (u_hi - u_lo)).round() as usize;
        let below = below.clamp(1, n - 2);
        let above = n - 1 - below;
        let mut states = Vec::with_capacity(n);
        for k in 0..below {
            states.push(map(u_lo * (1.0 - k as f64 / below as f64)).max(low));
        }
        states.push(spot);
        for k in 1..=above {
            states.push(map(u_hi * k as f64 / above as f64));
        }
        states[0] = low;
        states[n - 1] = high;
        StateGrid::new(states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_is_an_exact_node() {
        for placement in [Placement::Uniform, Placement::Sinh { concentration: 0.05 }] {
            let spec = GridSpec { n_states: 50, placement, ..GridSpec::default() };
            let g = spec.build(1.0, 0.2, 3.7).unwrap();
            assert_eq!(g.len(), 50);
            assert!(g.position(1.0).is_some());
            assert_eq!(g.min(), 0.2);
            assert_eq!(g.max(), 3.7);
        }
    }

    #[test]
    fn sinh_grid_is_finer_near_spot() {
        let spec = GridSpec::with_states(41);
        let g = spec.build(100.0, 10.0, 400.0).unwrap();
        let s = g.states();
        let k = g.position(100.0).unwrap();
        assert!(s[k + 1] - s[k] < s[40] - s[39]);
        assert!(s[k] - s[k - 1] < s[1] - s[0]);
    }

    #[test]
    fn invalid_specs() {
        assert!(GridSpec::with_states(2).validate(1.0).is_err());
        let spec = GridSpec { span: Some([1.5, 2.0]), ..GridSpec::default() };
        assert!(spec.validate(1.0).is_err());
        assert!(GridSpec::default().build(1.0, 1.0, 2.0).is_err());
    }
}
