//! Eigenfunctions `psi = phi(s) y_n(s)` assembled from an accepted branch:
//! `phi` from `phi'/phi = pi/sigma`, `y_n` a Jacobi polynomial whose indices
//! are the exponents of the weight `rho` at the roots of `sigma`. Printed
//! closed-form shapes are available as alternative conventions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{
    cosh_q, jacobi_eval, re, simpson, simpson_c, sqrt_principal, JacobiIndex, LowPoly, C64, I,
};
use crate::nu::{
    self, hyperbolic_aux, reduced_params, weight_exponents, weight_integrable, NuTrace,
};
use crate::potentials::{DomainSpec, Family, PotentialSpec, Variant};

/// Smallest sample count accepted by [`normalize`].
pub const MIN_QUADRATURE_POINTS: usize = 1001;
/// Largest share of `int |psi|^2` allowed in the outer 5% of a truncated domain.
pub const TAIL_FRACTION: f64 = 1e-6;

/// Map from the physical coordinate to `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoordinateMap {
    /// `s = cos(alpha x)`.
    Cos { alpha: f64 },
    /// `s = cosh_q(alpha x) / scale` (complex `alpha`, `q` for the continued variants).
    CoshQ { alpha: C64, q: C64, scale: C64 },
    /// `s = exp(-rate x)`.
    Exp { rate: C64 },
}

impl CoordinateMap {
    pub fn for_spec(spec: &PotentialSpec) -> Self {
        let a = spec.alpha();
        let q = spec.q();
        use Family::*;
        use Variant::*;
        match (spec.family, spec.variant) {
            (TrigScarf, Base) => Self::Cos { alpha: a },
            (TrigScarf, Pt) => Self::CoshQ {
                alpha: re(a),
                q: re(1.0),
                scale: re(1.0),
            },
            (TrigScarf, QDeformedPt) => Self::CoshQ {
                alpha: re(a),
                q: re(q),
                scale: re(q.sqrt()),
            },
            (TrigScarf, NonPt) => Self::CoshQ {
                alpha: re(a),
                q: I * q,
                scale: sqrt_principal(I * q),
            },
            (HyperbolicScarf, Pt) => Self::CoshQ {
                alpha: I * a,
                q: re(q),
                scale: re(1.0),
            },
            (HyperbolicScarf, NonPt) => Self::CoshQ {
                alpha: re(a),
                q: I * q,
                scale: re(1.0),
            },
            (HyperbolicScarf, _) => Self::CoshQ {
                alpha: re(a),
                q: re(q),
                scale: re(1.0),
            },
            (ManningRosen, Pt) => Self::Exp {
                rate: I * (2.0 * a),
            },
            (ManningRosen, _) => Self::Exp { rate: re(2.0 * a) },
        }
    }

    pub fn apply(&self, x: f64) -> C64 {
        match *self {
            Self::Cos { alpha } => re((alpha * x).cos()),
            Self::CoshQ { alpha, q, scale } => cosh_q(alpha * x, q) / scale,
            Self::Exp { rate } => (-rate * x).exp(),
        }
    }
}

/// Which closed shape [`eval_psi`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WaveConvention {
    /// `prod |s - r_i|^{B_i} P_n^{(A_1, A_2)}(t)` from the accepted branch.
    #[default]
    Derived,
    /// The family's printed closed shape.
    Printed,
    /// Trigonometric Scarf printed shape with the Jacobi argument `s` instead of `1 - s^2`.
    PrintedArgumentS,
}

/// Constants of the printed closed shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PrintedShape {
    /// `(1 - s^2)^{lambda/2} P_n^{(nu, nu)}(1 - s^2)`, `nu = 1/2 + lambda + n`.
    Trig { lambda: C64, nu: C64 },
    /// `(s^2 - q)^{n - nu1/4 - 1} exp(nu2 atanh(s/sqrt q)) P_n^{(nu1, nu2)}(s)`.
    Hyperbolic { nu1: C64, nu2: C64, q: C64 },
    /// `exp(-rate x) (1 - exp(-nu x)) P_n^{(rate, nu - 1)}(1 - exp(-2x))`, `rate = 2 sqrt(eps + beta)`.
    ManningRosen { rate: C64, nu: C64 },
}

/// Closed description of one eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionSpec {
    pub family: Family,
    pub variant: Variant,
    pub n: u32,
    pub energy: C64,
    pub sigma: LowPoly,
    pub pi: LowPoly,
    /// Roots `r_1, r_2` of `sigma`.
    pub roots: [C64; 2],
    /// `phi = prod |s - r_i|^{phi_exponents[i]}`.
    pub phi_exponents: [C64; 2],
    /// `rho = prod |s - r_i|^{weight_exponents[i]}`.
    pub weight_exponents: [C64; 2],
    /// `y_n = P_n^{(A_1, A_2)}(t)`, `t = (2 s - r_1 - r_2) / (r_1 - r_2)`.
    pub jacobi: JacobiIndex,
    pub coordinate: CoordinateMap,
    /// Whether `s` stays on the real axis (absolute values are then taken).
    pub real_coordinate: bool,
    pub printed: Option<PrintedShape>,
    pub convention: WaveConvention,
    pub normalization: C64,
    /// `int psi^2 dx` without conjugation, reported for complex variants.
    pub pseudo_norm: Option<C64>,
    pub notes: Vec<String>,
}

fn printed_shape(
    spec: &PotentialSpec,
    eps: C64,
    n: u32,
    notes: &mut Vec<String>,
) -> Option<PrintedShape> {
    let rp = reduced_params(spec, eps).ok()?;
    match spec.family {
        Family::TrigScarf if spec.variant == Variant::Base => {
            let lambda = sqrt_principal(re(0.25) - rp.beta) + 0.5;
            Some(PrintedShape::Trig {
                lambda,
                nu: lambda + 0.5 + n as f64,
            })
        }
        Family::HyperbolicScarf => {
            let aux = hyperbolic_aux(&rp);
            notes.push("second printed Jacobi index read as nu2 = zeta2".into());
            Some(PrintedShape::Hyperbolic {
                nu1: re(1.0) - aux.zeta1,
                nu2: aux.zeta2,
                q: rp.q,
            })
        }
        Family::ManningRosen => Some(PrintedShape::ManningRosen {
            rate: sqrt_principal(eps + rp.beta) * 2.0,
            nu: re(1.0) - sqrt_principal(rp.gamma / rp.q + 1.0),
        }),
        _ => None,
    }
}

/// Builds the eigenfunction of level `n` from an accepted trace.
pub fn assemble(spec: &PotentialSpec, trace: &NuTrace, n: u32) -> Result<WavefunctionSpec> {
    let (pi, tau) = match (trace.pi, trace.tau) {
        (Some(p), Some(t)) => (p, t),
        _ => {
            return Err(Error::InvalidArgument(
                "trace has no accepted branch".into(),
            ))
        }
    };
    let sigma = trace.sigma;
    let w = weight_exponents(&sigma, &tau)
        .ok_or_else(|| Error::NonIntegrableWeight("sigma has no pair of distinct roots".into()))?;
    let form = nu::build_form(spec, trace.epsilon)?;
    if let Some(dom) = form.s_domain {
        if !weight_integrable(&w, &dom) {
            return Err(Error::NonIntegrableWeight(format!(
                "exponents {:?} at roots {:?} on ({}, {})",
                w.exponents, w.roots, dom.lo, dom.hi
            )));
        }
    }
    let [r1, r2] = w.roots;
    let c2 = sigma.c[2];
    let phi_exponents = [
        pi.eval(r1) / (c2 * (r1 - r2)),
        pi.eval(r2) / (c2 * (r2 - r1)),
    ];
    let mut notes = Vec::new();
    let printed = printed_shape(spec, trace.epsilon, n, &mut notes);
    let energy = trace
        .energy
        .unwrap_or_else(|| nu::energy_map(spec).to_energy(trace.epsilon));
    Ok(WavefunctionSpec {
        family: spec.family,
        variant: spec.variant,
        n,
        energy,
        sigma,
        pi,
        roots: w.roots,
        phi_exponents,
        weight_exponents: w.exponents,
        jacobi: JacobiIndex::new(w.exponents[0], w.exponents[1], n),
        coordinate: CoordinateMap::for_spec(spec),
        real_coordinate: form.s_domain.is_some(),
        printed,
        convention: WaveConvention::Derived,
        normalization: re(1.0),
        pseudo_norm: None,
        notes,
    })
}

/// Solves level `n` and assembles its eigenfunction.
pub fn wavefunction(spec: &PotentialSpec, n: u32) -> Result<WavefunctionSpec> {
    let sol = nu::solve_level(spec, n)?;
    assemble(spec, &sol.trace, n)
}

/// `psi` as a function of `s` (without normalization).
pub fn eval_psi_s(wf: &WavefunctionSpec, s: C64) -> C64 {
    let base = |r: C64| {
        let d = s - r;
        if wf.real_coordinate {
            re(d.re.abs())
        } else {
            d
        }
    };
    let [r1, r2] = wf.roots;
    let phi = base(r1).powc(wf.phi_exponents[0]) * base(r2).powc(wf.phi_exponents[1]);
    let t = (s * 2.0 - r1 - r2) / (r1 - r2);
    phi * jacobi_eval(&wf.jacobi, t)
}

fn eval_printed(wf: &WavefunctionSpec, x: f64, s: C64) -> Result<C64> {
    let n = wf.n;
    match (wf.printed, wf.convention) {
        (Some(PrintedShape::Trig { lambda, nu }), conv) => {
            let u = re(1.0) - s * s;
            let arg = if conv == WaveConvention::PrintedArgumentS {
                s
            } else {
                u
            };
            Ok(u.powc(lambda / 2.0) * jacobi_eval(&JacobiIndex::new(nu, nu, n), arg))
        }
        (Some(PrintedShape::Hyperbolic { nu1, nu2, q }), WaveConvention::Printed) => {
            let exponent = re(n as f64 - 1.0) - nu1 / 4.0;
            let z = s / sqrt_principal(q);
            Ok((s * s - q).powc(exponent)
                * (nu2 * z.atanh()).exp()
                * jacobi_eval(&JacobiIndex::new(nu1, nu2, n), s))
        }
        (Some(PrintedShape::ManningRosen { rate, nu }), WaveConvention::Printed) => {
            let e2 = (-2.0 * x).exp();
            Ok((-rate * x).exp()
                * (re(1.0) - (-nu * x).exp())
                * jacobi_eval(&JacobiIndex::new(rate, nu - 1.0, n), re(1.0 - e2)))
        }
        _ => Err(Error::UnsupportedVariant(format!(
            "no {:?} shape for {}/{}",
            wf.convention, wf.family, wf.variant
        ))),
    }
}

/// `psi_n(x)` including the normalization constant.
pub fn eval_psi(wf: &WavefunctionSpec, x: f64) -> Result<C64> {
    let s = wf.coordinate.apply(x);
    let v = match wf.convention {
        WaveConvention::Derived => eval_psi_s(wf, s),
        _ => eval_printed(wf, x, s)?,
    };
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Singularity { x });
    }
    Ok(v * wf.normalization)
}

/// Uniform sample of `psi` on `[left, right]` with an odd number of points.
fn sample(
    wf: &WavefunctionSpec,
    domain: &DomainSpec,
    n_points: usize,
) -> Result<(Vec<f64>, Vec<C64>, f64)> {
    let m = if n_points.is_multiple_of(2) {
        n_points + 1
    } else {
        n_points
    };
    let h = domain.length() / (m - 1) as f64;
    let xs: Vec<f64> = (0..m).map(|i| domain.left + i as f64 * h).collect();
    let mut vals = Vec::with_capacity(m);
    for (i, &x) in xs.iter().enumerate() {
        match eval_psi(wf, x) {
            Ok(v) => vals.push(v),
            Err(_) if i == 0 || i == m - 1 => {
                return Err(Error::NotNormalizable(format!(
                    "psi diverges at the endpoint x = {x}"
                )))
            }
            Err(e) => return Err(e),
        }
    }
    Ok((xs, vals, h))
}

/// Sets the normalization so that `int |psi|^2 dx = 1` by composite Simpson
/// quadrature; for non-Hermitian variants the shape is left unscaled and
/// `int psi^2 dx` is recorded instead.
pub fn normalize(
    wf: &WavefunctionSpec,
    domain: &DomainSpec,
    n_points: usize,
) -> Result<WavefunctionSpec> {
    if n_points < MIN_QUADRATURE_POINTS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_QUADRATURE_POINTS} quadrature points are required"
        )));
    }
    let mut out = wf.clone();
    out.normalization = re(1.0);
    let (_, vals, h) = sample(&out, domain, n_points)?;
    let dens: Vec<f64> = vals.iter().map(|v| v.norm_sqr()).collect();
    let total = simpson(&dens, h);
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NotNormalizable(format!("int |psi|^2 = {total}")));
    }
    if domain.truncation.is_some() {
        let m = dens.len();
        let start = (m - m / 20) & !1;
        let tail = simpson(&dens[start..], h);
        if tail / total > TAIL_FRACTION {
            return Err(Error::NotNormalizable(format!(
                "outer 5% of the domain carries {:.3e} of the norm",
                tail / total
            )));
        }
    }
    if wf.variant == Variant::Base {
        out.normalization = re(1.0 / total.sqrt());
    } else {
        out.pseudo_norm = Some(simpson_c(
            &vals.iter().map(|v| v * v).collect::<Vec<_>>(),
            h,
        ));
    }
    Ok(out)
}

/// Interior sign changes of `Re psi` on a uniform sample.
pub fn node_count(wf: &WavefunctionSpec, domain: &DomainSpec, n_points: usize) -> usize {
    let h = domain.length() / (n_points + 1) as f64;
    let vals: Vec<f64> = (1..=n_points)
        .filter_map(|i| eval_psi(wf, domain.left + i as f64 * h).ok())
        .map(|v| v.re)
        .collect();
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut count = 0;
    let mut last = 0.0f64;
    for v in vals {
        if v.abs() <= 1e-12 * scale {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

/// CSV with header `x,re_psi,im_psi`.
pub fn to_csv(wf: &WavefunctionSpec, xs: &[f64]) -> Result<String> {
    let mut out = String::from("x,re_psi,im_psi\n");
    for &x in xs {
        let v = eval_psi(wf, x)?;
        out.push_str(&format!("{x:e},{:e},{:e}\n", v.re, v.im));
    }
    Ok(out)
}

/// `int conj(psi_a) psi_b dx` by composite Simpson quadrature.
pub fn overlap(
    a: &WavefunctionSpec,
    b: &WavefunctionSpec,
    domain: &DomainSpec,
    n_points: usize,
) -> Result<C64> {
    let (_, va, h) = sample(a, domain, n_points)?;
    let (_, vb, _) = sample(b, domain, n_points)?;
    let prod: Vec<C64> = va.iter().zip(&vb).map(|(x, y)| x.conj() * y).collect();
    Ok(simpson_c(&prod, h))
}
