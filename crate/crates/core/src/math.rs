//! Complex scalar helpers, polynomials of degree at most two, q-deformed
//! hyperbolic functions and Jacobi polynomials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shorthand used throughout the crate.
pub type C64 = Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative size below which a denominator is treated as a pole.
pub const POLE_TOL: f64 = 1e-12;

/// Real number lifted to the complex plane.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Principal square root with the cut on the negative real axis.
///
/// The result satisfies `Re(w) >= 0`, and `Im(w) >= 0` whenever `Re(w) = 0`,
/// so `-4` maps to `2i` regardless of the sign of a zero imaginary part.
pub fn sqrt_principal(z: C64) -> C64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            return re(z.re.sqrt());
        }
        return C64::new(0.0, (-z.re).sqrt());
    }
    let w = z.sqrt();
    if w.re == 0.0 && w.im < 0.0 {
        -w
    } else {
        w
    }
}

/// `exp(z) - 1` without cancellation for small `|z|`.
pub fn expm1_c(z: C64) -> C64 {
    if z.im == 0.0 {
        return re(z.re.exp_m1());
    }
    let half = z * 0.5;
    half.exp() * half.sinh() * 2.0
}

/// Polynomial `c0 + c1 s + c2 s^2` with complex coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LowPoly {
    pub c: [C64; 3],
}

impl LowPoly {
    pub fn new(c0: C64, c1: C64, c2: C64) -> Self {
        Self { c: [c0, c1, c2] }
    }

    pub fn real(c0: f64, c1: f64, c2: f64) -> Self {
        Self::new(re(c0), re(c1), re(c2))
    }

    pub fn constant(c0: C64) -> Self {
        Self::new(c0, C64::default(), C64::default())
    }

    pub fn linear(c0: C64, c1: C64) -> Self {
        Self::new(c0, c1, C64::default())
    }

    /// Index of the highest nonzero coefficient; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        (0..3).rev().find(|&i| self.c[i].norm() > 0.0).unwrap_or(0)
    }

    pub fn eval(&self, s: C64) -> C64 {
        (self.c[2] * s + self.c[1]) * s + self.c[0]
    }

    pub fn derivative(&self) -> LowPoly {
        LowPoly::linear(self.c[1], self.c[2] * 2.0)
    }

    /// Constant second derivative `2 c2`.
    pub fn second_derivative(&self) -> C64 {
        self.c[2] * 2.0
    }

    pub fn add(&self, other: &LowPoly) -> LowPoly {
        LowPoly::new(
            self.c[0] + other.c[0],
            self.c[1] + other.c[1],
            self.c[2] + other.c[2],
        )
    }

    pub fn sub(&self, other: &LowPoly) -> LowPoly {
        self.add(&other.scale(re(-1.0)))
    }

    pub fn scale(&self, k: C64) -> LowPoly {
        LowPoly::new(self.c[0] * k, self.c[1] * k, self.c[2] * k)
    }

    /// Product of two polynomials whose degrees sum to at most two.
    pub fn mul(&self, other: &LowPoly) -> Result<LowPoly> {
        let mut out = [C64::default(); 5];
        for i in 0..3 {
            for j in 0..3 {
                out[i + j] += self.c[i] * other.c[j];
            }
        }
        if out[3].norm() > 0.0 || out[4].norm() > 0.0 {
            return Err(Error::InvalidArgument(
                "product exceeds degree two".to_string(),
            ));
        }
        Ok(LowPoly::new(out[0], out[1], out[2]))
    }

    /// Largest coefficient modulus, used as a scale for relative checks.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Roots `(r_plus, r_minus) = (-b ± sqrt_principal(b^2 - 4ac)) / 2a` of a quadratic.
///
/// Both roots are computed through the cancellation-free pairing
/// `q = -(b + sign * sqrt(disc)) / 2`, `{q / a, c / q}` and then relabelled.
pub fn quadratic_roots(p: &LowPoly) -> Result<(C64, C64)> {
    let [c, b, a] = p.c;
    if a.norm() == 0.0 {
        return Err(Error::Degree);
    }
    let d = sqrt_principal(b * b - a * c * 4.0);
    let plus_aligned = (b.conj() * d).re >= 0.0;
    let qq = if plus_aligned {
        -(b + d) * 0.5
    } else {
        -(b - d) * 0.5
    };
    if qq.norm() == 0.0 {
        return Ok((C64::default(), C64::default()));
    }
    let r1 = qq / a;
    let r2 = c / qq;
    if plus_aligned {
        Ok((r2, r1))
    } else {
        Ok((r1, r2))
    }
}

/// `sinh_q(x) = (e^x - q e^-x) / 2`, evaluated as `e^-x (expm1(2x) + 1 - q) / 2`
/// so that `q = 1` keeps full relative accuracy near the origin.
pub fn sinh_q(x: C64, q: C64) -> C64 {
    (-x).exp() * (expm1_c(x * 2.0) + (re(1.0) - q)) * 0.5
}

/// `cosh_q(x) = (e^x + q e^-x) / 2`.
pub fn cosh_q(x: C64, q: C64) -> C64 {
    (x.exp() + q * (-x).exp()) * 0.5
}

/// Natural magnitude of the two exponentials in `sinh_q`, used for pole detection.
pub fn q_scale(x: C64, q: C64) -> f64 {
    0.5 * (x.exp().norm() + (q * (-x).exp()).norm())
}

/// `coth_q = cosh_q / sinh_q`, failing at zeros of `sinh_q`.
pub fn coth_q(x: C64, q: C64) -> Result<C64> {
    let s = sinh_q(x, q);
    if s.norm() <= POLE_TOL * q_scale(x, q) {
        return Err(Error::Singularity { x: x.re });
    }
    Ok(cosh_q(x, q) / s)
}

/// Jacobi polynomial indices `(nu1, nu2)` and degree `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiIndex {
    pub nu1: C64,
    pub nu2: C64,
    pub n: u32,
}

impl JacobiIndex {
    pub fn new(nu1: C64, nu2: C64, n: u32) -> Self {
        Self { nu1, nu2, n }
    }
}

/// `P_n^(nu1, nu2)(x)` from the three-term recurrence, continued to complex indices.
///
/// When a recurrence denominator vanishes (for instance `nu1 + nu2 = -k`), the
/// explicit binomial expansion is used instead.
pub fn jacobi_eval(idx: &JacobiIndex, x: C64) -> C64 {
    let (a, b) = (idx.nu1, idx.nu2);
    let n = idx.n;
    if n == 0 {
        return re(1.0);
    }
    let mut p_prev = re(1.0);
    let mut p = (a + 1.0) + (a + b + 2.0) * (x - 1.0) * 0.5;
    for k in 2..=n {
        let kf = k as f64;
        let s = a + b + 2.0 * kf;
        let denom = (a + b + kf) * (s - 2.0) * (2.0 * kf);
        if denom.norm() < 1e-14 {
            return jacobi_explicit(idx, x);
        }
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c2 = (a + kf - 1.0) * (b + kf - 1.0) * s * 2.0;
        let next = (c1 * p - c2 * p_prev) / denom;
        p_prev = p;
        p = next;
    }
    p
}

/// Generalised binomial coefficient `z (z-1) ... (z-j+1) / j!`.
pub fn binom_c(z: C64, j: u32) -> C64 {
    let mut out = re(1.0);
    for i in 0..j {
        out = out * (z - i as f64) / (i as f64 + 1.0);
    }
    out
}

/// Explicit sum `sum_m C(n+a, n-m) C(n+b, m) ((x-1)/2)^m ((x+1)/2)^(n-m)`,
/// equivalent to the Rodrigues formula expanded by Leibniz' rule.
pub fn jacobi_explicit(idx: &JacobiIndex, x: C64) -> C64 {
    let n = idx.n;
    let nf = n as f64;
    let lo = (x - 1.0) * 0.5;
    let hi = (x + 1.0) * 0.5;
    (0..=n)
        .map(|m| {
            binom_c(idx.nu1 + nf, n - m) * binom_c(idx.nu2 + nf, m) * lo.powu(m) * hi.powu(n - m)
        })
        .sum()
}

/// Composite Simpson rule on `n` equally spaced samples (`n` odd, `n >= 3`).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Complex variant of [`simpson`].
pub fn simpson_c(values: &[C64], h: f64) -> C64 {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { v * 4.0 } else { v * 2.0 };
    }
    acc * (h / 3.0)
}
