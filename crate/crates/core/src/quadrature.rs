//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::linalg::C64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-300, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
    /// `∫|f|` over the segment, for the roundoff floor.
    abs: f64,
}

fn gk15(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for k in 0..7 {
        let dx = h * XGK[k];
        let (lo, hi) = (f(c - dx), f(c + dx));
        let s = lo + hi;
        abs += (lo.norm() + hi.norm()) * WGK[k];
        kron += s * WGK[k];
        if k % 2 == 1 {
            gauss += s * WG[k / 2];
        }
    }
    Segment { a, b, value: kron * h, error: ((kron - gauss) * h).norm(), abs: abs * h.abs() }
}

/// `∫_a^b f(x) dx` for a complex-valued integrand.
pub fn integrate_complex(f: impl Fn(f64) -> C64, a: f64, b: f64, opts: QuadOptions) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::arg("integration bounds must be finite; use integrate_to_infinity"));
    }
    let mut segments = vec![gk15(&f, a, b)];
    loop {
        let total: C64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        let roundoff = 50.0 * f64::EPSILON * segments.iter().map(|s| s.abs).sum::<f64>();
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::numeric("integrand produced non-finite values"));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()).max(roundoff) {
            return Ok(total);
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::numeric(format!(
                "quadrature did not converge: error estimate {err:.3e} on |I| = {:.3e}",
                total.norm()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval cannot be split further in floating point
            return Ok(total);
        }
        segments.push(gk15(&f, s.a, mid));
        segments.push(gk15(&f, mid, s.b));
    }
}

/// `∫_a^b f(x) dx` for a real integrand.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    integrate_complex(|x| C64::new(f(x), 0.0), a, b, opts).map(|z| z.re)
}

/// `∫_a^∞ f(x) dx` via the substitution `x = a + u/(1−u)`.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, opts: QuadOptions) -> Result<f64> {
    integrate_complex_to_infinity(|x| C64::new(f(x), 0.0), a, opts).map(|z| z.re)
}

pub fn integrate_complex_to_infinity(f: impl Fn(f64) -> C64, a: f64, opts: QuadOptions) -> Result<C64> {
    integrate_complex(
        |u| {
            if u >= 1.0 {
                return C64::new(0.0, 0.0);
            }
            let w = 1.0 - u;
            let v = f(a + u / w) / (w * w);
            if v.re.is_finite() && v.im.is_finite() {
                v
            } else {
                C64::new(0.0, 0.0)
            }
        },
        0.0,
        1.0,
        opts,
    )
}
