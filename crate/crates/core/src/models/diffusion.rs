use crate::chain::{Generator, StateGrid};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;

use super::grid::Boundary;

/// Nearest-neighbour rates `(down, up)` for one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct NeighbourRates {
    pub down: f64,
    pub up: f64,
    /// Central moment matching produced a negative rate and the node fell back to upwinding.
    pub upwinded: bool,
}

/// Tridiagonal rates matching `drift` and `variance` at every interior node.
///
/// Central matching on a non-uniform grid (spacings `h₋`, `h₊`):
/// `up = (v + μh₋) / (h₊(h₋+h₊))`, `down = (v − μh₊) / (h₋(h₋+h₊))`, which
/// reproduces both the first and second instantaneous moments. When one of
/// them goes negative the node switches to
/// `up = v/(h₊(h₋+h₊)) + μ⁺/h₊`, `down = v/(h₋(h₋+h₊)) + μ⁻/h₋`,
/// which keeps the first moment exact.
pub(crate) fn neighbour_rates(
    states: &[f64],
    drift: &[f64],
    variance: &[f64],
    boundary: Boundary,
) -> Result<Vec<NeighbourRates>> {
    let n = states.len();
    let mut out = vec![NeighbourRates { down: 0.0, up: 0.0, upwinded: false }; n];
    if n == 1 {
        return Ok(out);
    }
    for i in 0..n {
        let (mu, v) = (drift[i], variance[i]);
        if !mu.is_finite() || !v.is_finite() || v < 0.0 {
            return Err(Error::Construction(format!(
                "node {i} (x = {}): drift {mu} / variance {v} not admissible",
                states[i]
            )));
        }
        let interior = i > 0 && i + 1 < n;
        if interior && v <= 0.0 {
            return Err(Error::Construction(format!(
                "node {i} (x = {}): volatility must be positive at interior nodes",
                states[i]
            )));
        }
        out[i] = if interior {
            let hm = states[i] - states[i - 1];
            let hp = states[i + 1] - states[i];
            let up = (v + mu * hm) / (hp * (hm + hp));
            let down = (v - mu * hp) / (hm * (hm + hp));
            if up >= 0.0 && down >= 0.0 {
                NeighbourRates { down, up, upwinded: false }
            } else {
                NeighbourRates {
                    up: v / (hp * (hm + hp)) + mu.max(0.0) / hp,
                    down: v / (hm * (hm + hp)) + (-mu).max(0.0) / hm,
                    upwinded: true,
                }
            }
        } else if boundary == Boundary::Absorbing {
            NeighbourRates { down: 0.0, up: 0.0, upwinded: false }
        } else if i == 0 {
            let h = states[1] - states[0];
            NeighbourRates { down: 0.0, up: v / (h * h) + mu.max(0.0) / h, upwinded: false }
        } else {
            let h = states[i] - states[i - 1];
            NeighbourRates { down: v / (h * h) + (-mu).max(0.0) / h, up: 0.0, upwinded: false }
        };
        let r = out[i];
        if !(r.up.is_finite() && r.down.is_finite()) {
            return Err(Error::Construction(format!("node {i} (x = {}): rates overflow", states[i])));
        }
    }
    Ok(out)
}

/// Assemble a generator from tridiagonal rates plus optional extra
/// off-diagonal rates (row-major, diagonal ignored); the diagonal closes each row.
pub(crate) fn assemble(grid: StateGrid, nb: &[NeighbourRates], extra: Option<&[f64]>) -> Result<Generator> {
    let n = grid.len();
    let mut q = match extra {
        Some(e) => e.to_vec(),
        None => vec![0.0; n * n],
    };
    for i in 0..n {
        q[i * n + i] = 0.0;
        if i > 0 {
            q[i * n + i - 1] += nb[i].down;
        }
        if i + 1 < n {
            q[i * n + i + 1] += nb[i].up;
        }
        // sum small rates first to keep the row sum tight
        let mut off: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| q[i * n + j]).collect();
        off.sort_by(f64::total_cmp);
        q[i * n + i] = -off.iter().sum::<f64>();
    }
    Generator::new(grid, RMatrix::new(n, n, q)?)
}

/// CTMC generator for `dX = drift(X) dt + vol(X) dW` on `grid`.
pub fn build_diffusion_generator(
    drift: impl Fn(f64) -> f64,
    vol: impl Fn(f64) -> f64,
    grid: &StateGrid,
    boundary: Boundary,
) -> Result<Generator> {
    let states = grid.states();
    let mu: Vec<f64> = states.iter().map(|&x| drift(x)).collect();
    let var: Vec<f64> = states.iter().map(|&x| vol(x).powi(2)).collect();
    let nb = neighbour_rates(states, &mu, &var, boundary)?;
    assemble(grid.clone(), &nb, None)
}
