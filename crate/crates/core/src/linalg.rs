//! Dense complex linear algebra.
//!
//! Every matrix in the pricing formulas is small (N is a few hundred at
//! most) and dense: the generator `G`, the transition matrix `P(Δ)`, the
//! diagonal price matrix `D` and the composites `e^{-θD}P(Δ)` and `G - θD`.
//! Norms follow the conventions used throughout the crate: `norm_max` is
//! the entrywise maximum, `norm_one`/`norm_inf` the induced column/row-sum
//! norms.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Dense complex column vector with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CVector(Vec<C64>);

fn all_finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg("matrix dimensions must be at least 1x1"));
        }
        if data.len() != rows * cols {
            return Err(Error::arg(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !all_finite(&data) {
            return Err(Error::arg("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().iter().sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&z| z * s).collect())
    }

    pub fn add(&self, other: &CMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::arg(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    /// Add `s` to every diagonal entry.
    pub fn shift_diag(&self, s: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m.data[i * self.cols + i] += s;
        }
        m
    }

    /// Entrywise maximum modulus, `max |a_ij|`.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, z) in sums.iter_mut().zip(self.row(i)) {
                *s += z.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Induced ∞-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl CVector {
    pub fn new(data: Vec<C64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::arg("vector length must be at least 1"));
        }
        if !all_finite(&data) {
            return Err(Error::arg("vector entries must be finite"));
        }
        Ok(Self(data))
    }

    pub(crate) fn from_raw(data: Vec<C64>) -> Self {
        Self(data)
    }

    pub fn from_real(data: &[f64]) -> Result<Self> {
        Self::new(data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![ONE; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn norm_max(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.0)
    }

    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

/// Row-major real matrix used on the hot paths where the operand is known
/// to be real (generators and transition matrices).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::arg(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::arg("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_complex(&self) -> CMatrix {
        CMatrix::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    /// Real parts of a complex matrix; the caller asserts the imaginary parts are negligible.
    pub(crate) fn real_part_of(m: &CMatrix) -> Self {
        Self { rows: m.rows, cols: m.cols, data: m.data.iter().map(|z| z.re).collect() }
    }

    /// `out = self · v` for a complex `v` stored as split real/imaginary parts.
    pub fn mul_split(&self, v_re: &[f64], v_im: &[f64], out_re: &mut [f64], out_im: &mut [f64]) {
        debug_assert_eq!(v_re.len(), self.cols);
        for i in 0..self.rows {
            let (re, im) = dot2(self.row(i), v_re, v_im);
            out_re[i] = re;
            out_im[i] = im;
        }
    }
}

/// Two real dot products sharing one left operand, with four independent
/// accumulators so the loop vectorizes.
#[inline]
fn dot2(a: &[f64], x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = a.len();
    let mut sx = [0.0f64; 4];
    let mut sy = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        for l in 0..4 {
            sx[l] += a[k + l] * x[k + l];
            sy[l] += a[k + l] * y[k + l];
        }
    }
    let mut rx = (sx[0] + sx[1]) + (sx[2] + sx[3]);
    let mut ry = (sy[0] + sy[1]) + (sy[2] + sy[3]);
    for k in 4 * chunks..n {
        rx += a[k] * x[k];
        ry += a[k] * y[k];
    }
    (rx, ry)
}

/// Matrix–vector product `m · v`.
pub fn mat_vec(m: &CMatrix, v: &CVector) -> Result<CVector> {
    if m.cols != v.len() {
        return Err(Error::arg(format!(
            "dimension mismatch: {}x{} matrix times vector of length {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    let out = (0..m.rows)
        .map(|i| m.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum())
        .collect();
    Ok(CVector::from_raw(out))
}

/// Matrix product `a · b`.
pub fn mat_mul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.cols != b.rows {
        return Err(Error::arg(format!(
            "dimension mismatch: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(mul_unchecked(a, b))
}

fn mul_unchecked(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut c = CMatrix::zeros(m, n);
    // SAFETY: Complex64 is #[repr(C)] { re, im }, layout-identical to [f64; 2];
    // the strides describe the row-major buffers exactly.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.data.as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.data.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.data.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    c
}

/// Tolerances for [`mat_inverse_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseOptions {
    /// Upper bound on the 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
    pub max_condition: f64,
    /// Upper bound on `‖A·A⁻¹ − I‖_max`.
    pub residual_tol: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self { max_condition: 1e12, residual_tol: 1e-10 }
    }
}

/// LU factorization with partial pivoting, stored in place.
struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(m: &CMatrix) -> Result<Self> {
        let n = m.rows;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Singular {
                    message: format!("zero pivot in column {k}"),
                    residual: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv = ONE / lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] * inv;
                lu[i * n + k] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solve `A X = B` for a row-major `B` with `nrhs` columns.
    fn solve_into(&self, b: &[C64], nrhs: usize) -> Vec<C64> {
        let n = self.n;
        let mut x = vec![ZERO; n * nrhs];
        for i in 0..n {
            x[i * nrhs..(i + 1) * nrhs].copy_from_slice(&b[self.perm[i] * nrhs..(self.perm[i] + 1) * nrhs]);
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l != ZERO {
                    for c in 0..nrhs {
                        let v = x[k * nrhs + c];
                        x[i * nrhs + c] -= l * v;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                if u != ZERO {
                    for c in 0..nrhs {
                        let v = x[k * nrhs + c];
                        x[i * nrhs + c] -= u * v;
                    }
                }
            }
            let inv = ONE / self.lu[i * n + i];
            for c in 0..nrhs {
                x[i * nrhs + c] *= inv;
            }
        }
        x
    }
}

/// Inverse with the default [`InverseOptions`].
pub fn mat_inverse(m: &CMatrix) -> Result<CMatrix> {
    mat_inverse_with(m, InverseOptions::default())
}

pub fn mat_inverse_with(m: &CMatrix, opts: InverseOptions) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::arg(format!("cannot invert a {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    let lu = Lu::factor(m)?;
    let inv = CMatrix::from_raw(n, n, lu.solve_into(&CMatrix::identity(n).data, n));
    if !inv.is_finite() {
        return Err(Error::Singular { message: "inverse overflowed".into(), residual: f64::INFINITY });
    }
    let residual = mul_unchecked(m, &inv).max_abs_diff(&CMatrix::identity(n));
    let cond = m.norm_one() * inv.norm_one();
    if cond > opts.max_condition {
        return Err(Error::Singular {
            message: format!("condition estimate {cond:.3e} exceeds cap {:.3e}", opts.max_condition),
            residual,
        });
    }
    if residual > opts.residual_tol {
        return Err(Error::Singular { message: "residual check failed".into(), residual });
    }
    Ok(inv)
}

// Padé coefficients b_0..b_m of the diagonal [m/m] approximant to exp.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// 1-norm thresholds below which the [m/m] approximant is accurate to unit roundoff.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

fn lin_comb(terms: &[(f64, &CMatrix)], n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for (c, m) in terms {
        for (o, z) in out.data.iter_mut().zip(&m.data) {
            *o += z * c;
        }
    }
    out
}

fn pade_low(a: &CMatrix, b: &[f64]) -> Result<CMatrix> {
    let n = a.rows;
    let id = CMatrix::identity(n);
    let a2 = mul_unchecked(a, a);
    let mut powers = vec![id, a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = mul_unchecked(powers.last().unwrap(), &a2);
        powers.push(next);
    }
    let odd: Vec<(f64, &CMatrix)> = powers.iter().enumerate().map(|(j, p)| (b[2 * j + 1], p)).collect();
    let even: Vec<(f64, &CMatrix)> = powers.iter().enumerate().map(|(j, p)| (b[2 * j], p)).collect();
    let u = mul_unchecked(a, &lin_comb(&odd, n));
    let v = lin_comb(&even, n);
    pade_solve(&u, &v)
}

fn pade13(a: &CMatrix) -> Result<CMatrix> {
    let n = a.rows;
    let b = &PADE13;
    let id = CMatrix::identity(n);
    let a2 = mul_unchecked(a, a);
    let a4 = mul_unchecked(&a2, &a2);
    let a6 = mul_unchecked(&a4, &a2);
    let inner_u = lin_comb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let u_tail = lin_comb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)], n);
    let u = mul_unchecked(a, &mul_unchecked(&a6, &inner_u).add(&u_tail)?);
    let inner_v = lin_comb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let v_tail = lin_comb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)], n);
    let v = mul_unchecked(&a6, &inner_v).add(&v_tail)?;
    pade_solve(&u, &v)
}

/// `(V − U)⁻¹ (V + U)`.
fn pade_solve(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let n = u.rows;
    let p = v.add(u)?;
    let q = v.sub(u)?;
    let lu = Lu::factor(&q)?;
    Ok(CMatrix::from_raw(n, n, lu.solve_into(&p.data, n)))
}

/// Matrix exponential `e^{m t}` by scaling and squaring with a diagonal
/// Padé approximant of order 3–13 selected from the 1-norm of `m t`.
pub fn expm(m: &CMatrix, t: f64) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::arg(format!("expm needs a square matrix, got {}x{}", m.rows, m.cols)));
    }
    if !t.is_finite() {
        return Err(Error::arg("expm time must be finite"));
    }
    let a = m.scale(C64::new(t, 0.0));
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(CMatrix::identity(m.rows));
    }
    let result = if norm <= THETA3 {
        pade_low(&a, &PADE3)?
    } else if norm <= THETA5 {
        pade_low(&a, &PADE5)?
    } else if norm <= THETA7 {
        pade_low(&a, &PADE7)?
    } else if norm <= THETA9 {
        pade_low(&a, &PADE9)?
    } else {
        let s = (norm / THETA13).log2().ceil().max(0.0);
        if s > 1000.0 {
            return Err(Error::numeric(format!("expm scaling overflow: ‖mt‖₁ = {norm:.3e}")));
        }
        let s = s as i32;
        let mut r = pade13(&a.scale(C64::new(2f64.powi(-s), 0.0)))?;
        for _ in 0..s {
            r = mul_unchecked(&r, &r);
        }
        r
    };
    if !result.is_finite() {
        return Err(Error::numeric(format!("expm overflowed (‖mt‖₁ = {norm:.3e})")));
    }
    Ok(result)
}

/// `e^{m t} v` through the Padé approximant of the scaled matrix, stopping the
/// squaring phase early and finishing with repeated matrix–vector products
/// when that is cheaper. Preferable to [`expm_action`] when `‖m t‖₁` is large
/// relative to the dimension, as for stiff generators.
pub fn expm_apply(m: &CMatrix, t: f64, v: &CVector) -> Result<CVector> {
    if !m.is_square() || m.cols != v.len() {
        return Err(Error::arg(format!(
            "expm_apply needs a square matrix matching the vector: {}x{} and {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    if !t.is_finite() {
        return Err(Error::arg("expm_apply time must be finite"));
    }
    let n = m.rows;
    let a = m.scale(C64::new(t, 0.0));
    let norm = a.norm_one();
    let s = pade13_scaling(norm)?;
    if s == 0 {
        return mat_vec(&expm(m, t)?, v);
    }
    let q = finishing_products(s, n);
    let mut r = pade13(&a.scale(C64::new(2f64.powi(-(s as i32)), 0.0)))?;
    for _ in 0..s - q {
        r = mul_unchecked(&r, &r);
    }
    let mut out = v.as_slice().to_vec();
    let mut scratch = vec![ZERO; n];
    for _ in 0..1usize << q {
        LinearOperator::apply(&r, &out, &mut scratch);
        std::mem::swap(&mut out, &mut scratch);
    }
    if !all_finite(&out) {
        return Err(Error::numeric(format!("expm_apply overflowed (‖mt‖₁ = {norm:.3e})")));
    }
    Ok(CVector::from_raw(out))
}

/// Number of halvings that bring `norm` under the order-13 Padé threshold.
fn pade13_scaling(norm: f64) -> Result<u32> {
    if norm <= THETA13 {
        return Ok(0);
    }
    let s = (norm / THETA13).log2().ceil();
    if s > 1000.0 {
        return Err(Error::numeric(format!("expm scaling overflow: ‖mt‖₁ = {norm:.3e}")));
    }
    Ok(s as u32)
}

/// How many of the `s` final squarings to replace by `2^q` matrix–vector
/// products. A product costs about `3 N²` against `N³` for a squaring,
/// since the dense multiply runs much closer to peak throughput.
fn finishing_products(s: u32, n: usize) -> u32 {
    (0..=s.min(20))
        .min_by(|&p, &q| {
            let cost = |q: u32| (s - q) as f64 * n as f64 + 3.0 * (1u64 << q) as f64;
            cost(p).total_cmp(&cost(q))
        })
        .unwrap_or(0)
}

/// Estimated cost of [`expm_apply`] in units of `N²` multiply–adds.
pub fn expm_apply_cost(norm: f64, n: usize) -> f64 {
    let s = pade13_scaling(norm).unwrap_or(1000);
    let q = finishing_products(s, n);
    (6 + s - q) as f64 * n as f64 + 3.0 * (1u64 << q) as f64
}

/// Estimated cost of [`expm_action_with`] in units of `N²` multiply–adds.
pub fn expm_action_cost(shifted_norm: f64) -> f64 {
    let (m, s) = taylor_schedule(shifted_norm);
    m as f64 * s
}

/// A square linear operator that can be applied to vectors; lets
/// [`expm_action`] run on structured operators such as `G − θD` without
/// materializing them as complex matrices.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out = self · v`.
    fn apply(&self, v: &[C64], out: &mut [C64]);
    /// Induced 1-norm of `self − shift·I`.
    fn shifted_norm_one(&self, shift: C64) -> f64;
    fn trace(&self) -> C64;
}

impl LinearOperator for CMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    fn shifted_norm_one(&self, shift: C64) -> f64 {
        self.shift_diag(-shift).norm_one()
    }

    fn trace(&self) -> C64 {
        CMatrix::trace(self)
    }
}

/// Settings for [`expm_action_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionOptions {
    /// Relative truncation tolerance of each Taylor step.
    pub tol: f64,
    /// Maximum number of scaling steps before giving up.
    pub max_steps: usize,
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self { tol: f64::EPSILON / 2.0, max_steps: 10_000_000 }
    }
}

// Largest ‖A‖₁ for which the degree-m truncated Taylor series meets a
// backward error of 2^-53 (degrees 1..=30, then 35..=55 in steps of 5).
const TAYLOR_THETA: [(usize, f64); 35] = [
    (1, 2.29e-16),
    (2, 2.58e-8),
    (3, 1.39e-5),
    (4, 3.40e-4),
    (5, 2.40e-3),
    (6, 9.07e-3),
    (7, 2.38e-2),
    (8, 5.00e-2),
    (9, 8.96e-2),
    (10, 1.44e-1),
    (11, 2.14e-1),
    (12, 3.00e-1),
    (13, 4.00e-1),
    (14, 5.14e-1),
    (15, 6.41e-1),
    (16, 7.81e-1),
    (17, 9.31e-1),
    (18, 1.09),
    (19, 1.26),
    (20, 1.44),
    (21, 1.62),
    (22, 1.82),
    (23, 2.01),
    (24, 2.22),
    (25, 2.43),
    (26, 2.64),
    (27, 2.86),
    (28, 3.08),
    (29, 3.31),
    (30, 3.54),
    (35, 4.7),
    (40, 6.0),
    (45, 7.2),
    (50, 8.5),
    (55, 9.9),
];

/// Degree and number of scaling steps minimizing `m·s` for a given `‖A‖₁`.
pub(crate) fn taylor_schedule(norm: f64) -> (usize, f64) {
    if norm == 0.0 {
        return (0, 1.0);
    }
    TAYLOR_THETA
        .iter()
        .map(|&(m, theta)| (m, (norm / theta).ceil().max(1.0)))
        .min_by(|a, b| (a.0 as f64 * a.1).total_cmp(&(b.0 as f64 * b.1)))
        .unwrap()
}

/// `e^{m t} v` without forming `e^{m t}`: scaled truncated Taylor steps with
/// a trace shift and early termination once two consecutive terms are
/// below the tolerance relative to the running sum.
pub fn expm_action(m: &CMatrix, t: f64, v: &CVector) -> Result<CVector> {
    if !m.is_square() || m.cols != v.len() {
        return Err(Error::arg(format!(
            "expm_action needs a square matrix matching the vector: {}x{} and {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    expm_action_with(m, t, v, ActionOptions::default())
}

pub fn expm_action_with<Op: LinearOperator + ?Sized>(
    op: &Op,
    t: f64,
    v: &CVector,
    opts: ActionOptions,
) -> Result<CVector> {
    let n = op.dim();
    if n != v.len() {
        return Err(Error::arg(format!("operator of size {n} applied to vector of length {}", v.len())));
    }
    if !t.is_finite() {
        return Err(Error::arg("expm_action time must be finite"));
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let mu = op.trace() / n as f64;
    let norm = op.shifted_norm_one(mu) * t.abs();
    let (degree, steps) = taylor_schedule(norm);
    if !steps.is_finite() || steps > opts.max_steps as f64 {
        return Err(Error::numeric(format!(
            "expm_action would need {steps:.3e} scaling steps (‖A t‖₁ = {norm:.3e})"
        )));
    }
    let steps = steps as usize;
    let eta = (mu * (t / steps as f64)).exp();
    let h = t / steps as f64;

    let inf_norm = |x: &[C64]| x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut f = v.as_slice().to_vec();
    let mut b = f.clone();
    let mut scratch = vec![ZERO; n];
    for _ in 0..steps {
        let mut c1 = inf_norm(&b);
        for k in 1..=degree {
            op.apply(&b, &mut scratch);
            let coef = h / k as f64;
            for (bi, &si) in b.iter_mut().zip(&scratch) {
                *bi = (si - mu * *bi) * coef;
            }
            let c2 = inf_norm(&b);
            for (fi, bi) in f.iter_mut().zip(&b) {
                *fi += bi;
            }
            if c1 + c2 <= opts.tol * inf_norm(&f) {
                break;
            }
            c1 = c2;
        }
        for fi in f.iter_mut() {
            *fi *= eta;
        }
        b.copy_from_slice(&f);
    }
    if !all_finite(&f) {
        return Err(Error::numeric("expm_action produced non-finite values"));
    }
    Ok(CVector::from_raw(f))
}

/// Partial Neumann sum `Σ_{k=0}^{terms} (I − a)^k`, which converges to `a⁻¹`
/// when `‖I − a‖ < 1`. Intended for checking inverses in tests.
pub fn neumann_inverse_check(a: &CMatrix, terms: usize) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::arg("neumann_inverse_check needs a square matrix"));
    }
    let n = a.rows;
    let id = CMatrix::identity(n);
    let e = id.sub(a)?;
    let norm = e.norm_max();
    if norm >= 1.0 {
        return Err(Error::arg(format!("‖I − a‖_max = {norm:.3} is not below 1")));
    }
    let mut sum = id.clone();
    let mut power = id;
    for _ in 0..terms {
        power = mul_unchecked(&power, &e);
        sum = sum.add(&power)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn mat_vec_identity_and_permutation() {
        let v = CVector::from_real(&[1.0, 2.0]).unwrap();
        assert_eq!(mat_vec(&CMatrix::identity(2), &v).unwrap(), v);
        let p = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let w = mat_vec(&p, &CVector::from_real(&[3.0, 4.0]).unwrap()).unwrap();
        assert_eq!(w, CVector::from_real(&[4.0, 3.0]).unwrap());
    }

    #[test]
    fn mat_vec_dimension_mismatch() {
        let v = CVector::ones(3);
        assert!(matches!(mat_vec(&CMatrix::identity(2), &v), Err(Error::Argument(_))));
    }

    #[test]
    fn construction_rejects_non_finite() {
        assert!(CMatrix::new(1, 1, vec![C64::new(f64::NAN, 0.0)]).is_err());
        assert!(CVector::new(vec![]).is_err());
        assert!(CMatrix::new(2, 2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn inverse_of_identity_and_diagonal() {
        let inv = mat_inverse(&CMatrix::identity(3)).unwrap();
        assert!(inv.max_abs_diff(&CMatrix::identity(3)) < 1e-15);
        let d = CMatrix::from_diag(&[c(2.0), c(4.0)]);
        let inv = mat_inverse(&d).unwrap();
        assert!(inv.max_abs_diff(&CMatrix::from_diag(&[c(0.5), c(0.25)])) < 1e-15);
    }

    #[test]
    fn inverse_of_singular_matrix_fails() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(mat_inverse(&m), Err(Error::Singular { .. })));
    }

    #[test]
    fn expm_zero_and_scalar() {
        let e = expm(&CMatrix::zeros(3, 3), 2.0).unwrap();
        assert_eq!(e, CMatrix::identity(3));
        let a = C64::new(-0.7, 1.3);
        let e = expm(&CMatrix::from_diag(&[a]), 1.5).unwrap();
        assert!((e[(0, 0)] - (a * 1.5).exp()).norm() < 1e-14);
        // large scalar forces the scaling stage
        let e = expm(&CMatrix::from_diag(&[c(-40.0)]), 1.0).unwrap();
        assert!((e[(0, 0)].re - (-40f64).exp()).abs() < 1e-28);
    }

    #[test]
    fn expm_non_square_rejected() {
        assert!(expm(&CMatrix::zeros(2, 3), 1.0).is_err());
    }

    #[test]
    fn taylor_schedule_picks_cheapest() {
        assert_eq!(taylor_schedule(0.0), (0, 1.0));
        let (m, s) = taylor_schedule(100.0);
        assert!(m as f64 * s <= 55.0 * (100.0f64 / 9.9).ceil());
    }

    #[test]
    fn expm_action_trivial_cases() {
        let v = CVector::new(vec![C64::new(1.0, 2.0), c(-3.0)]).unwrap();
        assert_eq!(expm_action(&CMatrix::zeros(2, 2), 1.0, &v).unwrap(), v);
        let d = [C64::new(-2.0, 0.5), c(0.3)];
        let w = expm_action(&CMatrix::from_diag(&d), 0.8, &v).unwrap();
        for i in 0..2 {
            let expect = (d[i] * 0.8).exp() * v[i];
            assert!((w[i] - expect).norm() < 1e-14 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn neumann_precondition_and_geometric_series() {
        assert!(neumann_inverse_check(&CMatrix::from_diag(&[c(3.0)]), 5).is_err());
        let s = neumann_inverse_check(&CMatrix::identity(2), 7).unwrap();
        assert_eq!(s, CMatrix::identity(2));
        let s = neumann_inverse_check(&CMatrix::from_diag(&[c(0.5), c(0.5)]), 30).unwrap();
        assert!(s.max_abs_diff(&CMatrix::from_diag(&[c(2.0), c(2.0)])) < 1e-8);
    }

    #[test]
    fn real_matrix_split_product() {
        let m = RMatrix::new(2, 5, (0..10).map(|x| x as f64).collect()).unwrap();
        let re = [1.0, 0.0, 2.0, 0.0, 1.0];
        let im = [0.0, 1.0, 0.0, -1.0, 0.5];
        let (mut or, mut oi) = ([0.0; 2], [0.0; 2]);
        m.mul_split(&re, &im, &mut or, &mut oi);
        let v = CVector::new(re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect()).unwrap();
        let w = mat_vec(&m.to_complex(), &v).unwrap();
        for i in 0..2 {
            assert!((w[i] - C64::new(or[i], oi[i])).norm() < 1e-13);
        }
    }
}
