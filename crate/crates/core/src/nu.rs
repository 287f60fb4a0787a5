//! Numerical Nikiforov-Uvarov pipeline: reduced hypergeometric-type forms,
//! the discriminant condition for `k`, branch selection and the quantization
//! condition `lambda + n tau' + n(n-1) sigma''/2 = 0` solved by a secant method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{quadratic_roots, re, sqrt_principal, LowPoly, C64, I};
use crate::potentials::{Family, PotentialSpec, Variant};
use crate::spectra::{self, LevelEntry, RealityFlag, SpectrumResult};

/// Iteration budget of the secant solver.
pub const SECANT_BUDGET: usize = 200;
/// Convergence threshold on `|F_n| / max(1, |eps|)`.
pub const SECANT_TOL: f64 = 1e-12;

/// First-derivative coefficient used for the Manning-Rosen reduced equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TauTildeForm {
    /// `tau~ = 1 - q s`, the coefficient produced by `s = exp(-2 alpha x)`.
    #[default]
    Printed,
    /// `tau~ = 1 - 2 q s`, kept for comparison.
    Alternative,
}

/// Reduced energy and couplings of a spec.
///
/// For the hyperbolic Scarf family `epsilon`, `beta` and `gamma` hold the
/// squared quantities `eps^2 = (E - V0)/c`, `beta^2 = V1/c`, `gamma^2 = V2/c`
/// with `c = hbar^2 alpha^2 / 2m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub family: Family,
    pub variant: Variant,
    pub epsilon: C64,
    pub beta: C64,
    pub gamma: C64,
    /// Effective deformation (`iq` for the NonPt variants).
    pub q: C64,
}

/// Affine relation `E = offset + sign * scale * eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMap {
    pub scale: C64,
    pub offset: C64,
    pub sign: f64,
}

impl EnergyMap {
    pub fn to_epsilon(&self, e: C64) -> C64 {
        (e - self.offset) / self.scale * self.sign
    }

    pub fn to_energy(&self, eps: C64) -> C64 {
        self.offset + self.scale * eps * self.sign
    }
}

/// Real interval of the coordinate `s` traced out by the physical domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SDomain {
    pub lo: f64,
    /// `f64::INFINITY` for unbounded images (serialized as `null`).
    pub hi: f64,
}

/// The polynomial triple of `psi'' + (tau~/sigma) psi' + (sigma~/sigma^2) psi = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricForm {
    pub sigma: LowPoly,
    pub tau_tilde: LowPoly,
    pub sigma_tilde: LowPoly,
    /// Image of the physical domain when it is a real interval.
    #[serde(default)]
    pub s_domain: Option<SDomain>,
    /// Root of `sigma` crossed by a complex coordinate contour at a pole of the potential.
    #[serde(default)]
    pub contour_pole: Option<C64>,
}

/// Auxiliary constants of the hyperbolic Scarf branch table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicAux {
    pub zeta1: C64,
    pub zeta2: C64,
    pub mu: C64,
}

/// `(k, pi-sign)` label of one of the four branch combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchLabel {
    /// `+1` for `k = (-B + sqrt(D)) / 2A`, `-1` for the other root.
    pub k_root: i8,
    /// Sign in `pi = h ± (a s + b)`.
    pub pi_sign: i8,
}

pub const ALL_LABELS: [BranchLabel; 4] = [
    BranchLabel {
        k_root: 1,
        pi_sign: 1,
    },
    BranchLabel {
        k_root: 1,
        pi_sign: -1,
    },
    BranchLabel {
        k_root: -1,
        pi_sign: 1,
    },
    BranchLabel {
        k_root: -1,
        pi_sign: -1,
    },
];

/// Weight `rho = prod |s - r_i|^{e_i}` solving `(sigma rho)' = tau rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightExponents {
    pub roots: [C64; 2],
    pub exponents: [C64; 2],
}

/// One of the four `(k, ±)` combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchCandidate {
    pub label: BranchLabel,
    pub k: C64,
    pub pi: LowPoly,
    pub tau: LowPoly,
    pub tau_slope: C64,
    pub lambda: C64,
    /// Relative residual of `Q(s; k) = (a s + b)^2`.
    pub square_residual: f64,
    pub weight: Option<WeightExponents>,
    /// Integrability of the weight on a real coordinate image, or regularity
    /// (`Re phi exponent >= 1/2`) at the pole crossed by a complex contour;
    /// `None` when neither applies.
    pub integrable: Option<bool>,
    pub accepted: bool,
    pub rejection: Option<String>,
}

/// Derivation record of one pipeline evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuTrace {
    pub epsilon: C64,
    pub sigma: LowPoly,
    pub tau_tilde: LowPoly,
    pub sigma_tilde: LowPoly,
    pub k_candidates: [C64; 2],
    pub chosen: Option<BranchLabel>,
    pub chosen_k: Option<C64>,
    pub pi: Option<LowPoly>,
    pub tau: Option<LowPoly>,
    pub tau_slope: Option<C64>,
    pub lambda: Option<C64>,
    /// `-n tau' - n(n-1) sigma''/2` at `level` (level 0 when unset).
    pub lambda_n: Option<C64>,
    pub aux: Option<HyperbolicAux>,
    pub candidates: Vec<BranchCandidate>,
    pub level: Option<u32>,
    pub energy: Option<C64>,
    pub notes: Vec<String>,
}

fn kinetic_scale(spec: &PotentialSpec) -> C64 {
    let a2 = spec.alpha() * spec.alpha();
    let c = spec.kinetic() * a2;
    match (spec.family, spec.variant) {
        (Family::HyperbolicScarf, Variant::Pt) | (Family::ManningRosen, Variant::Pt) => re(-c),
        _ => re(c),
    }
}

/// Relation between physical energy and the reduced energy of the family.
pub fn energy_map(spec: &PotentialSpec) -> EnergyMap {
    let scale = kinetic_scale(spec);
    match spec.family {
        Family::TrigScarf => EnergyMap {
            scale,
            offset: re(0.0),
            sign: 1.0,
        },
        Family::HyperbolicScarf => EnergyMap {
            scale,
            offset: spec.v0(),
            sign: 1.0,
        },
        Family::ManningRosen => EnergyMap {
            scale,
            offset: re(0.0),
            sign: -1.0,
        },
    }
}

/// Reduced couplings at reduced energy `eps`.
pub fn reduced_params(spec: &PotentialSpec, eps: C64) -> Result<ReducedParams> {
    spec.validate()?;
    let scale = kinetic_scale(spec);
    let q = spec.q();
    let one_i = C64::new(1.0, 1.0);
    use Family::*;
    use Variant::*;
    let (beta, gamma, q_eff) = match (spec.family, spec.variant) {
        (TrigScarf, Base) | (TrigScarf, Pt) => (spec.a() / scale, re(0.0), re(1.0)),
        (TrigScarf, QDeformedPt) => (spec.a() / (scale * q), re(0.0), re(q)),
        (TrigScarf, NonPt) => (
            (spec.a1() + I * spec.a2()) / (scale * I * q),
            re(0.0),
            I * q,
        ),
        (HyperbolicScarf, Base) | (HyperbolicScarf, Pt) => {
            (spec.v1() / scale, spec.v2() / scale, re(q))
        }
        (HyperbolicScarf, NonPt) => (spec.v1() * one_i / scale, spec.v2() * one_i / scale, I * q),
        (ManningRosen, Base) | (ManningRosen, Pt) => {
            (spec.a() / scale, spec.b() * 4.0 / scale, re(q))
        }
        (ManningRosen, NonPt) => (
            (spec.a1() + I * spec.a2()) / scale,
            (spec.b1() + I * spec.b2()) * 4.0 / scale,
            I * q,
        ),
        (f, v) => return Err(Error::UnsupportedFamily(format!("{f}/{v}"))),
    };
    Ok(ReducedParams {
        family: spec.family,
        variant: spec.variant,
        epsilon: eps,
        beta,
        gamma,
        q: q_eff,
    })
}

fn s_domain(spec: &PotentialSpec) -> Option<SDomain> {
    let q = spec.q();
    use Family::*;
    use Variant::*;
    match (spec.family, spec.variant) {
        (TrigScarf, Base) => Some(SDomain { lo: -1.0, hi: 1.0 }),
        (TrigScarf, Pt) | (TrigScarf, QDeformedPt) => Some(SDomain {
            lo: 1.0,
            hi: f64::INFINITY,
        }),
        (HyperbolicScarf, Base) => Some(SDomain {
            lo: q.sqrt(),
            hi: f64::INFINITY,
        }),
        (ManningRosen, Base) if q > 0.0 => Some(SDomain {
            lo: 0.0,
            hi: 1.0 / q,
        }),
        (ManningRosen, Base) => Some(SDomain {
            lo: 0.0,
            hi: f64::INFINITY,
        }),
        _ => None,
    }
}

/// Builds `(sigma, tau~, sigma~)` for reduced energy `eps`.
pub fn build_form(spec: &PotentialSpec, eps: C64) -> Result<HypergeometricForm> {
    build_form_with(spec, eps, TauTildeForm::Printed)
}

/// [`build_form`] with an explicit choice of the Manning-Rosen `tau~`.
pub fn build_form_with(
    spec: &PotentialSpec,
    eps: C64,
    tau_form: TauTildeForm,
) -> Result<HypergeometricForm> {
    let rp = reduced_params(spec, eps)?;
    let (b, g, q) = (rp.beta, rp.gamma, rp.q);
    let zero = re(0.0);
    let (sigma, tau_tilde, sigma_tilde) = match (spec.family, spec.variant) {
        (Family::TrigScarf, Variant::Base) => (
            LowPoly::real(1.0, 0.0, -1.0),
            LowPoly::real(0.0, -1.0, 0.0),
            LowPoly::new(eps + b, zero, -eps),
        ),
        (Family::TrigScarf, _) => (
            LowPoly::real(-1.0, 0.0, 1.0),
            LowPoly::real(0.0, 1.0, 0.0),
            LowPoly::new(-eps - b, zero, eps),
        ),
        (Family::HyperbolicScarf, _) => (
            LowPoly::new(-q, zero, re(1.0)),
            LowPoly::real(0.0, 1.0, 0.0),
            LowPoly::new(-q * eps, -g, eps - b),
        ),
        (Family::ManningRosen, _) => {
            let tau_tilde = match tau_form {
                TauTildeForm::Printed => LowPoly::new(re(1.0), -q, zero),
                TauTildeForm::Alternative => LowPoly::new(re(1.0), -q * 2.0, zero),
            };
            // -eps (1 - q s)^2 - beta (1 - q^2 s^2) - gamma s, all over 4.
            let c0 = -eps - b;
            let c1 = eps * q * 2.0 - g;
            let c2 = -eps * q * q + b * q * q;
            (
                LowPoly::new(zero, re(1.0), -q),
                tau_tilde,
                LowPoly::new(c0, c1, c2).scale(re(0.25)),
            )
        }
    };
    Ok(HypergeometricForm {
        sigma,
        tau_tilde,
        sigma_tilde,
        s_domain: s_domain(spec),
        contour_pole: contour_pole(spec),
    })
}

/// The PT Manning-Rosen contour `s = exp(-2 i alpha x)` runs over the unit
/// circle and meets the root `1/q` of `sigma` when `|q| = 1`.
fn contour_pole(spec: &PotentialSpec) -> Option<C64> {
    let q = spec.q();
    (spec.family == Family::ManningRosen && spec.variant == Variant::Pt && q.abs() == 1.0)
        .then(|| re(1.0 / q))
}

/// Exponent of `phi = exp(int pi/sigma)` at the root `r` of `sigma`.
fn phi_exponent(sigma: &LowPoly, pi: &LowPoly, r: C64) -> Option<C64> {
    let (r1, r2) = quadratic_roots(sigma).ok()?;
    let other = if (r1 - r).norm() <= (r2 - r).norm() {
        r2
    } else {
        r1
    };
    let gap = r - other;
    (gap.norm() > 1e-12 * (1.0 + r.norm())).then(|| pi.eval(r) / (sigma.c[2] * gap))
}

/// `h = (sigma' - tau~) / 2` and the coefficients `(A, B, C)` of the discriminant
/// `D(k) = A k^2 + B k + C` of `Q(s; k) = h^2 - sigma~ + k sigma`, together with
/// the `k`-independent part `u` of `Q`.
struct Discriminant {
    h: LowPoly,
    u: [C64; 3],
    coeffs: LowPoly,
}

fn discriminant(form: &HypergeometricForm) -> Discriminant {
    let h = form.sigma.derivative().sub(&form.tau_tilde).scale(re(0.5));
    let (h0, h1) = (h.c[0], h.c[1]);
    let st = form.sigma_tilde.c;
    let sg = form.sigma.c;
    let u = [h0 * h0 - st[0], h0 * h1 * 2.0 - st[1], h1 * h1 - st[2]];
    let a = sg[1] * sg[1] - sg[2] * sg[0] * 4.0;
    let b = u[1] * sg[1] * 2.0 - (u[2] * sg[0] + u[0] * sg[2]) * 4.0;
    let c = u[1] * u[1] - u[2] * u[0] * 4.0;
    Discriminant {
        h,
        u,
        coeffs: LowPoly::new(c, b, a),
    }
}

/// Both values of `k` that make `Q(s; k)` a perfect square, labelled
/// `(k_plus, k_minus)` by the sign of the principal square root.
pub fn k_candidates(form: &HypergeometricForm) -> Result<(C64, C64)> {
    let d = discriminant(form);
    let [c, b, a] = d.coeffs.c;
    let scale = d.coeffs.max_abs().max(f64::MIN_POSITIVE);
    if a.norm() <= 1e-14 * scale {
        if b.norm() <= 1e-14 * scale {
            return Err(Error::DegenerateDiscriminant);
        }
        let k = -c / b;
        return Ok((k, k));
    }
    quadratic_roots(&d.coeffs)
}

/// Weight exponents for quadratic `sigma` with distinct roots.
pub fn weight_exponents(sigma: &LowPoly, tau: &LowPoly) -> Option<WeightExponents> {
    if sigma.degree() != 2 {
        return None;
    }
    let (r1, r2) = quadratic_roots(sigma).ok()?;
    let gap = r1 - r2;
    if gap.norm() <= 1e-12 * (1.0 + r1.norm()) {
        return None;
    }
    let p = tau.sub(&sigma.derivative());
    let c2 = sigma.c[2];
    Some(WeightExponents {
        roots: [r1, r2],
        exponents: [p.eval(r1) / (c2 * gap), p.eval(r2) / (c2 * -gap)],
    })
}

/// Whether `rho` is integrable on the real interval `dom`.
pub fn weight_integrable(w: &WeightExponents, dom: &SDomain) -> bool {
    let near = |r: C64, e: f64| {
        r.im.abs() <= 1e-9 * (1.0 + e.abs()) && (r.re - e).abs() <= 1e-9 * (1.0 + e.abs())
    };
    for (r, e) in w.roots.iter().zip(w.exponents.iter()) {
        let at_end = near(*r, dom.lo) || (dom.hi.is_finite() && near(*r, dom.hi));
        let inside = r.im.abs() <= 1e-9 && r.re > dom.lo && r.re < dom.hi;
        if (at_end || inside) && e.re <= -1.0 {
            return false;
        }
    }
    if dom.hi.is_infinite() && (w.exponents[0] + w.exponents[1]).re >= -1.0 {
        return false;
    }
    true
}

/// Evaluates one `(k, ±)` combination.
pub fn branch_candidate(form: &HypergeometricForm, label: BranchLabel) -> Result<BranchCandidate> {
    let (kp, km) = k_candidates(form)?;
    let k = if label.k_root > 0 { kp } else { km };
    let d = discriminant(form);
    let sg = form.sigma.c;
    let qc = [d.u[0] + k * sg[0], d.u[1] + k * sg[1], d.u[2] + k * sg[2]];
    let scale =
        d.u.iter()
            .chain(qc.iter())
            .map(|z| z.norm())
            .chain(sg.iter().map(|z| (k * z).norm()))
            .fold(1.0, f64::max);
    let residual = |a: C64, b: C64| {
        [qc[0] - b * b, qc[1] - a * b * 2.0, qc[2] - a * a]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / scale
    };
    // Take the square root of whichever end coefficient is better conditioned.
    // The pair is oriented so that `a` agrees with the principal root of the
    // leading coefficient, which keeps the sign label stable.
    let a_lead = sqrt_principal(qc[2]);
    let from_lead = (
        a_lead,
        if a_lead.norm() > 1e-12 * scale.sqrt() {
            qc[1] / (a_lead * 2.0)
        } else {
            sqrt_principal(qc[0])
        },
    );
    let b_const = sqrt_principal(qc[0]);
    let from_const = if b_const.norm() > 1e-12 * scale.sqrt() {
        let a = qc[1] / (b_const * 2.0);
        if (a * a_lead.conj()).re < 0.0 {
            (-a, -b_const)
        } else {
            (a, b_const)
        }
    } else {
        (a_lead, b_const)
    };
    let (a, b) = if residual(from_const.0, from_const.1) < residual(from_lead.0, from_lead.1) {
        from_const
    } else {
        from_lead
    };
    let square_residual = residual(a, b);
    let sgn = re(label.pi_sign as f64);
    let pi = d.h.add(&LowPoly::linear(b * sgn, a * sgn));
    let tau = form.tau_tilde.add(&pi.scale(re(2.0)));
    let tau_slope = tau.c[1];
    let lambda = k + pi.c[1];
    let weight = weight_exponents(&form.sigma, &tau);
    let integrable = match (form.s_domain, weight, form.contour_pole) {
        (Some(dom), Some(w), _) => Some(weight_integrable(&w, &dom)),
        (None, _, Some(r)) => phi_exponent(&form.sigma, &pi, r).map(|e| e.re >= 0.5 - 1e-12),
        _ => None,
    };
    Ok(BranchCandidate {
        label,
        k,
        pi,
        tau,
        tau_slope,
        lambda,
        square_residual,
        weight,
        integrable,
        accepted: false,
        rejection: None,
    })
}

fn rank(c: &BranchCandidate) -> (u8, f64, f64) {
    let integ = match c.integrable {
        Some(true) => 0,
        None => 1,
        Some(false) => 2,
    };
    (integ, c.k.norm(), c.tau_slope.re)
}

/// Enumerates the four combinations and accepts one with `Re(tau') < 0`.
///
/// Ties between admissible combinations are broken by integrability of the
/// weight on the coordinate image, then by the smaller `|k|`, then by the more
/// negative slope.
pub fn select_branch(form: &HypergeometricForm, ks: (C64, C64)) -> Result<NuTrace> {
    let mut candidates = Vec::with_capacity(4);
    for label in ALL_LABELS {
        let mut c = branch_candidate(form, label)?;
        c.k = if label.k_root > 0 { ks.0 } else { ks.1 };
        if c.tau_slope.re >= 0.0 {
            c.rejection = Some(format!("Re(tau') = {} >= 0", c.tau_slope.re));
        }
        candidates.push(c);
    }
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if c.rejection.is_some() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(j) => {
                let (ri, rj) = (rank(c), rank(&candidates[j]));
                let better = if ri.0 != rj.0 {
                    ri.0 < rj.0
                } else if (ri.1 - rj.1).abs() > 1e-12 * ri.1.max(rj.1).max(1.0) {
                    ri.1 < rj.1
                } else {
                    ri.2 < rj.2
                };
                Some(if better { i } else { j })
            }
        };
    }
    for (i, c) in candidates.iter_mut().enumerate() {
        if c.rejection.is_none() && Some(i) != best {
            c.rejection = Some("admissible but outranked by the tie-break order".into());
        }
    }
    let mut trace = NuTrace {
        epsilon: C64::default(),
        sigma: form.sigma,
        tau_tilde: form.tau_tilde,
        sigma_tilde: form.sigma_tilde,
        k_candidates: [ks.0, ks.1],
        chosen: None,
        chosen_k: None,
        pi: None,
        tau: None,
        tau_slope: None,
        lambda: None,
        lambda_n: None,
        aux: None,
        candidates,
        level: None,
        energy: None,
        notes: Vec::new(),
    };
    match best {
        None => Err(Error::NoAdmissibleBranch {
            trace: Box::new(trace),
        }),
        Some(i) => {
            trace.candidates[i].accepted = true;
            adopt(&mut trace, i);
            Ok(trace)
        }
    }
}

fn adopt(trace: &mut NuTrace, i: usize) {
    let c = &trace.candidates[i];
    trace.chosen = Some(c.label);
    trace.chosen_k = Some(c.k);
    trace.pi = Some(c.pi);
    trace.tau = Some(c.tau);
    trace.tau_slope = Some(c.tau_slope);
    trace.lambda = Some(c.lambda);
    trace.lambda_n = Some(re(0.0));
}

/// Residual `F_n = lambda + n tau' + n(n-1) sigma''/2` of the accepted branch.
pub fn level_equation(trace: &NuTrace, n: u32) -> Result<C64> {
    let (lambda, slope) = match (trace.lambda, trace.tau_slope) {
        (Some(l), Some(t)) => (l, t),
        _ => {
            return Err(Error::InvalidArgument(
                "trace has no accepted branch".into(),
            ))
        }
    };
    let nf = n as f64;
    Ok(lambda + slope * nf + trace.sigma.second_derivative() * (nf * (nf - 1.0) / 2.0))
}

/// `zeta1`, `zeta2`, `mu` of the hyperbolic Scarf branch table for the given
/// reduced couplings (`beta^2`, `gamma^2`, `q`).
pub fn hyperbolic_aux(rp: &ReducedParams) -> HyperbolicAux {
    let (b2, g2, q) = (rp.beta, rp.gamma, rp.q);
    let mu = q * 4.0 * sqrt_principal((b2 * 4.0 + 1.0).powu(2) - g2 * g2 * 16.0 / q);
    let base = b2 * 2.0 + 0.5;
    let shift = mu / (q * 8.0);
    HyperbolicAux {
        zeta1: sqrt_principal(base + shift),
        zeta2: sqrt_principal(base - shift),
        mu,
    }
}

/// Trace at reduced energy `eps` for a spec.
pub fn trace_at(spec: &PotentialSpec, eps: C64, tau_form: TauTildeForm) -> Result<NuTrace> {
    let form = build_form_with(spec, eps, tau_form)?;
    let ks = k_candidates(&form)?;
    let aux = (spec.family == Family::HyperbolicScarf)
        .then(|| reduced_params(spec, eps).map(|rp| hyperbolic_aux(&rp)))
        .transpose()?;
    let decorate = |t: &mut NuTrace| {
        t.epsilon = eps;
        t.aux = aux;
    };
    match select_branch(&form, ks) {
        Ok(mut t) => {
            decorate(&mut t);
            Ok(t)
        }
        Err(Error::NoAdmissibleBranch { mut trace }) => {
            decorate(&mut trace);
            Err(Error::NoAdmissibleBranch { trace })
        }
        Err(e) => Err(e),
    }
}

/// Trace with a fixed branch label (no selection), used while iterating in `eps`.
pub fn trace_with_label(
    spec: &PotentialSpec,
    eps: C64,
    label: BranchLabel,
    tau_form: TauTildeForm,
) -> Result<BranchCandidate> {
    let form = build_form_with(spec, eps, tau_form)?;
    branch_candidate(&form, label)
}

fn level_residual(c: &BranchCandidate, sigma: &LowPoly, n: u32) -> C64 {
    let nf = n as f64;
    c.lambda + c.tau_slope * nf + sigma.second_derivative() * (nf * (nf - 1.0) / 2.0)
}

/// Result of solving the quantization condition for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSolution {
    pub n: u32,
    pub epsilon: C64,
    pub energy: C64,
    pub trace: NuTrace,
    pub iterations: usize,
    pub seed: C64,
}

fn secant(
    spec: &PotentialSpec,
    n: u32,
    label: BranchLabel,
    tau_form: TauTildeForm,
    seed: C64,
    real_axis: bool,
) -> Result<(C64, usize)> {
    let eval = |eps: C64| -> Result<C64> {
        let form = build_form_with(spec, eps, tau_form)?;
        let c = branch_candidate(&form, label)?;
        Ok(level_residual(&c, &form.sigma, n))
    };
    let project = |z: C64| if real_axis { re(z.re) } else { z };
    let mut x0 = project(seed);
    let mut x1 = project(seed + re(1e-4 * seed.norm().max(1.0)));
    let mut f0 = eval(x0)?;
    let mut f1 = eval(x1)?;
    for it in 0..SECANT_BUDGET {
        if f1.norm() <= SECANT_TOL * x1.norm().max(1.0) {
            return Ok((x1, it));
        }
        let df = f1 - f0;
        if df.norm() == 0.0 {
            break;
        }
        let x2 = project(x1 - f1 * (x1 - x0) / df);
        if !(x2.re.is_finite() && x2.im.is_finite()) {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = eval(x1)?;
    }
    Err(Error::RootNotConverged {
        n,
        last: x1,
        residual: f1.norm(),
    })
}

/// Seeds for level `n`: the closed-form value first, then a logarithmic scan.
/// A seed may carry the branch label under which it was bracketed.
fn seeds(
    spec: &PotentialSpec,
    n: u32,
    real_axis: bool,
    tau_form: TauTildeForm,
) -> Vec<(C64, Option<BranchLabel>)> {
    let map = energy_map(spec);
    let mut out = Vec::new();
    if let Ok(e) = spectra::closed_form_energy(spec, n) {
        let eps = map.to_epsilon(e);
        if eps.re.is_finite() && eps.im.is_finite() {
            out.push((if real_axis { re(eps.re) } else { eps }, None));
        }
    }
    out.extend(scan_seeds(spec, n, tau_form));
    out
}

/// Sign changes of `Re F_n` on a 64-point logarithmic grid in `|eps|`, both
/// signs. Where the selected branch differs between neighbours, `F_n` is
/// evaluated under each of the two labels at both points.
fn scan_seeds(
    spec: &PotentialSpec,
    n: u32,
    tau_form: TauTildeForm,
) -> Vec<(C64, Option<BranchLabel>)> {
    let mut grid: Vec<f64> = (0..64)
        .map(|i| 10f64.powf(-3.0 + 7.0 * i as f64 / 63.0))
        .collect();
    let neg: Vec<f64> = grid.iter().rev().map(|x| -x).collect();
    grid = neg.into_iter().chain(grid).collect();
    let labels: Vec<Option<BranchLabel>> = grid
        .iter()
        .map(|&x| trace_at(spec, re(x), tau_form).ok()?.chosen)
        .collect();
    let residual = |x: f64, label: BranchLabel| -> Option<f64> {
        let form = build_form_with(spec, re(x), tau_form).ok()?;
        let c = branch_candidate(&form, label).ok()?;
        Some(level_residual(&c, &form.sigma, n).re)
    };
    let mut out = Vec::new();
    for i in 0..grid.len() - 1 {
        let (Some(la), Some(lb)) = (labels[i], labels[i + 1]) else {
            continue;
        };
        let tried: &[BranchLabel] = if la == lb { &[la] } else { &[la, lb] };
        for &label in tried {
            if let (Some(fa), Some(fb)) = (residual(grid[i], label), residual(grid[i + 1], label)) {
                if fa.signum() != fb.signum() {
                    let x = grid[i] - fa * (grid[i + 1] - grid[i]) / (fb - fa);
                    out.push((re(x), Some(label)));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.re.abs().total_cmp(&b.0.re.abs()));
    out
}

/// Solves the quantization condition for level `n`.
pub fn solve_level(spec: &PotentialSpec, n: u32) -> Result<LevelSolution> {
    solve_level_with(spec, n, TauTildeForm::Printed)
}

/// [`solve_level`] with an explicit Manning-Rosen `tau~`.
///
/// The branch is selected at the seed (or taken from the scan bracket) and
/// kept fixed while iterating; a root is accepted only when the same branch
/// is selected there.
pub fn solve_level_with(
    spec: &PotentialSpec,
    n: u32,
    tau_form: TauTildeForm,
) -> Result<LevelSolution> {
    spec.validate()?;
    let real_axis = spec.variant == Variant::Base;
    let map = energy_map(spec);
    let mut last_err: Option<Error> = None;
    for (seed, hint) in seeds(spec, n, real_axis, tau_form) {
        let label = match hint {
            Some(l) => l,
            None => match trace_at(spec, seed, tau_form) {
                Ok(t) => t.chosen.expect("accepted trace has a label"),
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            },
        };
        match secant(spec, n, label, tau_form, seed, real_axis) {
            Ok((eps, iterations)) => {
                let mut t = match trace_at(spec, eps, tau_form) {
                    Ok(t) => t,
                    Err(e) => {
                        last_err = Some(e);
                        continue;
                    }
                };
                if t.chosen != Some(label) {
                    last_err = Some(Error::BranchMismatch { n, epsilon: eps });
                    continue;
                }
                let nf = n as f64;
                t.level = Some(n);
                t.lambda_n = t
                    .tau_slope
                    .map(|ts| -(ts * nf) - t.sigma.second_derivative() * (nf * (nf - 1.0) / 2.0));
                let energy = map.to_energy(eps);
                t.energy = Some(energy);
                if tau_form == TauTildeForm::Alternative {
                    t.notes
                        .push("first-derivative coefficient 1 - 2 q s".into());
                }
                return Ok(LevelSolution {
                    n,
                    epsilon: eps,
                    energy,
                    trace: t,
                    iterations,
                    seed,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::RootNotConverged {
        n,
        last: C64::new(f64::NAN, f64::NAN),
        residual: f64::NAN,
    }))
}

/// Energies `E_0 .. E_{n_max}` from the numerical pipeline.
pub fn solve_spectrum_numeric(spec: &PotentialSpec, n_max: u32) -> Result<SpectrumResult> {
    let mut entries = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        let sol = solve_level(spec, n)?;
        entries.push(LevelEntry {
            n,
            re: sol.energy.re,
            im: sol.energy.im,
        });
    }
    let mut out = SpectrumResult::new(spec, entries);
    out.convention_note = format!("numerical pipeline; {}", spectra::unit_note(spec));
    out.reality_flag =
        spectra::flag_from_entries(&out.entries, 1e-12, spectra::reality_conditions(spec).ok());
    if out.reality_flag == RealityFlag::ConditionallyReal && spec.variant == Variant::Base {
        out.reality_flag = RealityFlag::AllReal;
    }
    Ok(out)
}
