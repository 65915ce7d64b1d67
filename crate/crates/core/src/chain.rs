//! Finite-state CTMC: state grid, generator, transition matrix `P(Δ) = e^{GΔ}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix, RMatrix, C64};

/// Strictly increasing, non-negative price levels `x_1 < … < x_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StateGrid {
    states: Vec<f64>,
}

impl StateGrid {
    pub fn new(states: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::arg("state grid must have at least one state"));
        }
        if let Some(bad) = states.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::arg(format!("state {bad} = {} is negative or non-finite", states[bad])));
        }
        if let Some(i) = states.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::arg(format!(
                "states must be strictly increasing: x[{i}] = {} >= x[{}] = {}",
                states[i],
                i + 1,
                states[i + 1]
            )));
        }
        Ok(Self { states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn min(&self) -> f64 {
        self.states[0]
    }

    pub fn max(&self) -> f64 {
        self.states[self.states.len() - 1]
    }

    /// Index of the state exactly equal to `x`, if any.
    pub fn position(&self, x: f64) -> Option<usize> {
        self.states.iter().position(|&s| s == x)
    }

    /// Multiply every state by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.states.iter().map(|x| x * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for StateGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StateGrid> for Vec<f64> {
    fn from(g: StateGrid) -> Self {
        g.states
    }
}

/// The diagonal matrix `D = diag(x)`.
#[derive(Clone, Copy, Debug)]
pub struct DiagD<'a> {
    grid: &'a StateGrid,
}

impl<'a> DiagD<'a> {
    pub fn new(grid: &'a StateGrid) -> Self {
        Self { grid }
    }

    /// Diagonal of `e^{-θD}`.
    pub fn exp_neg(&self, theta: C64) -> Vec<C64> {
        self.grid.states.iter().map(|&x| (-theta * x).exp()).collect()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d: Vec<C64> = self.grid.states.iter().map(|&x| C64::new(x, 0.0)).collect();
        CMatrix::from_diag(&d)
    }
}

/// Transition-rate matrix `G = (q_ij)` on a state grid.
///
/// Construction only checks shape and finiteness; the generator invariants
/// are reported by [`validate_generator`] and enforced when a [`Chain`] is
/// built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    grid: StateGrid,
    rates: RMatrix,
}

impl Generator {
    pub fn new(grid: StateGrid, rates: RMatrix) -> Result<Self> {
        let n = grid.len();
        if rates.rows() != n || rates.cols() != n {
            return Err(Error::arg(format!(
                "rate matrix is {}x{} but the grid has {n} states",
                rates.rows(),
                rates.cols()
            )));
        }
        Ok(Self { grid, rates })
    }

    /// Build from row-major rates.
    pub fn from_rows(states: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let grid = StateGrid::new(states)?;
        let n = grid.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::arg(format!("rate matrix must be {n}x{n}")));
        }
        let rates = RMatrix::new(n, n, rows.iter().flatten().copied().collect())?;
        Self::new(grid, rates)
    }

    pub fn grid(&self) -> &StateGrid {
        &self.grid
    }

    pub fn rates(&self) -> &RMatrix {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.rates.row(i)[j]
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        self.rates.to_complex()
    }

    /// `G − θD` as a complex matrix.
    pub fn shifted(&self, theta: C64) -> CMatrix {
        let mut m = self.to_cmatrix();
        for (i, &x) in self.grid.states().iter().enumerate() {
            m[(i, i)] -= theta * x;
        }
        m
    }

    /// `Σ_j q_ij f(x_j)` for every row.
    pub fn apply_real(&self, f: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.rates.row(i).iter().zip(f).map(|(q, v)| q * v).sum())
            .collect()
    }
}

/// One broken generator invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NegativeRate { row: usize, col: usize, value: f64 },
    PositiveDiagonal { row: usize, value: f64 },
    RowSum { row: usize, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeRate { row, col, value } => {
                write!(f, "q[{row}][{col}] = {value:e} is negative")
            }
            Violation::PositiveDiagonal { row, value } => {
                write!(f, "q[{row}][{row}] = {value:e} is positive")
            }
            Violation::RowSum { row, sum } => write!(f, "row {row} sums to {sum:e}"),
        }
    }
}

/// Absolute row-sum tolerance, scaled by the largest rate in the row once
/// rates exceed one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Every violated generator invariant; empty iff the generator is valid.
pub fn validate_generator(g: &Generator) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..g.len() {
        let row = g.rates.row(i);
        let mut scale: f64 = 1.0;
        for (j, &q) in row.iter().enumerate() {
            scale = scale.max(q.abs());
            if i == j {
                if q > 0.0 {
                    out.push(Violation::PositiveDiagonal { row: i, value: q });
                }
            } else if q < 0.0 {
                out.push(Violation::NegativeRate { row: i, col: j, value: q });
            }
        }
        let sum: f64 = row.iter().sum();
        if sum.abs() > ROW_SUM_TOL * scale {
            out.push(Violation::RowSum { row: i, sum });
        }
    }
    out
}

/// Negative transition probabilities above this are Padé roundoff and are
/// clamped to zero; anything more negative is an error.
pub const CLAMP_TOL: f64 = 1e-12;
/// Row-sum tolerance for transition matrices.
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// `P(dt) = e^{G dt}`, clamped and renormalized to be row-stochastic.
pub fn transition_matrix(g: &Generator, dt: f64) -> Result<CMatrix> {
    Ok(transition_matrix_real(g, dt)?.to_complex())
}

pub(crate) fn transition_matrix_real(g: &Generator, dt: f64) -> Result<RMatrix> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::arg(format!("transition interval must be a finite dt >= 0, got {dt}")));
    }
    let n = g.len();
    let p = expm(&g.to_cmatrix(), dt)?;
    let mut data = RMatrix::real_part_of(&p).as_slice().to_vec();
    for i in 0..n {
        let row = &mut data[i * n..(i + 1) * n];
        for (j, v) in row.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -CLAMP_TOL {
                    return Err(Error::numeric(format!(
                        "P(dt)[{i}][{j}] = {v:e} is below the clamp tolerance"
                    )));
                }
                *v = 0.0;
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::numeric(format!("row {i} of P(dt) sums to {sum}")));
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    RMatrix::new(n, n, data)
}

/// A validated generator with an optional monitoring interval `Δ` and its
/// cached transition matrix `P(Δ)`. Immutable once built.
#[derive(Clone, Debug)]
pub struct Chain {
    generator: Arc<Generator>,
    delta: Option<f64>,
    p_delta: Option<Arc<RMatrix>>,
}

impl Chain {
    pub fn new(generator: Generator) -> Result<Self> {
        let violations = validate_generator(&generator);
        if let Some(v) = violations.first() {
            return Err(Error::Construction(format!(
                "invalid generator ({} violations, first: {v})",
                violations.len()
            )));
        }
        Ok(Self { generator: Arc::new(generator), delta: None, p_delta: None })
    }

    pub fn with_delta(generator: Generator, delta: f64) -> Result<Self> {
        Self::new(generator)?.at_delta(delta)
    }

    /// The same generator with `P(delta)` computed and cached.
    pub fn at_delta(&self, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::arg(format!("monitoring interval must be positive, got {delta}")));
        }
        let p = transition_matrix_real(&self.generator, delta)?;
        Ok(Self { generator: Arc::clone(&self.generator), delta: Some(delta), p_delta: Some(Arc::new(p)) })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn grid(&self) -> &StateGrid {
        self.generator.grid()
    }

    pub fn states(&self) -> &[f64] {
        self.generator.grid().states()
    }

    pub fn len(&self) -> usize {
        self.generator.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generator.is_empty()
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn p_delta(&self) -> Option<&RMatrix> {
        self.p_delta.as_deref()
    }

    pub fn snapshot(&self) -> ChainSnapshot {
        let n = self.len();
        ChainSnapshot {
            states: self.states().to_vec(),
            rates: (0..n).map(|i| self.generator.rates().row(i).to_vec()).collect(),
            delta: self.delta,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.snapshot()).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: ChainSnapshot =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("chain snapshot: {e}")))?;
        snap.into_chain()
    }
}

/// Serialized form of a chain: `{"states": [...], "rates": [[...], ...], "delta": 0.083 | null}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSnapshot {
    pub states: Vec<f64>,
    pub rates: Vec<Vec<f64>>,
    pub delta: Option<f64>,
}

impl ChainSnapshot {
    pub fn into_chain(self) -> Result<Chain> {
        let chain = Chain::new(Generator::from_rows(self.states, &self.rates)?)?;
        match self.delta {
            Some(d) => chain.at_delta(d),
            None => Ok(chain),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(l: f64, m: f64) -> Generator {
        Generator::from_rows(vec![1.0, 2.0], &[vec![-l, l], vec![m, -m]]).unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(StateGrid::new(vec![]).is_err());
        assert!(StateGrid::new(vec![1.0, 1.0]).is_err());
        assert!(StateGrid::new(vec![-0.1, 1.0]).is_err());
        let g = StateGrid::new(vec![0.0, 0.5, 2.0]).unwrap();
        assert_eq!(g.position(0.5), Some(1));
        assert_eq!(g.position(0.6), None);
    }

    #[test]
    fn validate_examples() {
        assert!(validate_generator(&two_state(1.0, 2.0)).is_empty());
        let bad = Generator::from_rows(vec![1.0, 2.0], &[vec![-1.0, 0.5], vec![2.0, -2.0]]).unwrap();
        let v = validate_generator(&bad);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::RowSum { row: 0, sum } if (sum + 0.5).abs() < 1e-15));
        let neg = Generator::from_rows(vec![1.0, 2.0], &[vec![1.0, -1.0], vec![0.0, 0.0]]).unwrap();
        let v = validate_generator(&neg);
        assert!(v.contains(&Violation::PositiveDiagonal { row: 0, value: 1.0 }));
        assert!(v.contains(&Violation::NegativeRate { row: 0, col: 1, value: -1.0 }));
    }

    #[test]
    fn chain_rejects_invalid_generator() {
        let bad = Generator::from_rows(vec![1.0, 2.0], &[vec![-1.0, 0.5], vec![2.0, -2.0]]).unwrap();
        assert!(matches!(Chain::new(bad), Err(Error::Construction(_))));
    }

    #[test]
    fn transition_at_zero_is_identity() {
        let p = transition_matrix(&two_state(1.0, 3.0), 0.0).unwrap();
        assert!(p.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        assert!(transition_matrix(&two_state(1.0, 3.0), -1.0).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let chain = Chain::with_delta(two_state(0.7, 1.1), 0.25).unwrap();
        let back = Chain::from_json(&chain.to_json()).unwrap();
        assert_eq!(back.snapshot(), chain.snapshot());
        assert_eq!(back.p_delta(), chain.p_delta());
        assert!(Chain::from_json(r#"{"states":[1.0],"rates":[[0.0]],"delta":null,"extra":1}"#).is_err());
    }
}
