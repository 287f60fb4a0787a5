//! Closed-form energy spectra of every family/variant pair and the
//! parameter predicates under which the non-Hermitian spectra are real.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{re, sqrt_principal, C64, I};
use crate::potentials::{Family, Params, PotentialSpec, Variant};

/// Default number of levels above the ground state.
pub const DEFAULT_N_MAX: u32 = 10;

/// One indexed energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub n: u32,
    pub re: f64,
    pub im: f64,
}

impl LevelEntry {
    pub fn new(n: u32, e: C64) -> Self {
        Self {
            n,
            re: e.re,
            im: e.im,
        }
    }

    pub fn energy(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Reality classification of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RealityFlag {
    /// Every level is real and the parameter predicates (if any) hold.
    AllReal,
    /// Every level is real although a parameter predicate fails.
    ConditionallyReal,
    /// At least one level has a non-negligible imaginary part.
    Complex,
}

/// A named parameter condition together with the value it was judged on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub measured: f64,
    pub holds: bool,
}

/// Reality predicates of one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealityConditions {
    pub family: Family,
    pub variant: Variant,
    pub predicates: Vec<Predicate>,
    /// Conjunction of all predicates (true when there are none).
    pub verdict: bool,
    pub report: String,
}

/// Indexed energies with provenance of the conventions used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub family: Family,
    pub variant: Variant,
    pub params: Params,
    pub hbar: f64,
    pub mass: f64,
    pub convention_note: String,
    pub entries: Vec<LevelEntry>,
    /// Second square-root candidates where a formula only fixes `E^2`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternates: Vec<LevelEntry>,
    pub reality_flag: RealityFlag,
    pub conditions: Option<RealityConditions>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl SpectrumResult {
    pub fn new(spec: &PotentialSpec, entries: Vec<LevelEntry>) -> Self {
        Self {
            family: spec.family,
            variant: spec.variant,
            params: spec.params.clone(),
            hbar: spec.hbar,
            mass: spec.mass,
            convention_note: String::new(),
            entries,
            alternates: Vec::new(),
            reality_flag: RealityFlag::AllReal,
            conditions: None,
            warnings: Vec::new(),
        }
    }

    pub fn energies(&self) -> Vec<C64> {
        self.entries.iter().map(LevelEntry::energy).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }

    /// CSV with header `n,re_E,im_E`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re_E,im_E\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.n, e.re, e.im));
        }
        out
    }
}

/// Unit convention statement attached to every result.
pub fn unit_note(spec: &PotentialSpec) -> String {
    format!(
        "hbar = {}, m = {}, c = hbar^2/2m = {}",
        spec.hbar,
        spec.mass,
        spec.kinetic()
    )
}

fn is_real(e: C64, tol: f64) -> bool {
    e.im.abs() <= tol * (1.0 + e.re.abs())
}

/// Reality flag of a list of levels at relative tolerance `tol`.
pub fn flag_from_entries(
    entries: &[LevelEntry],
    tol: f64,
    conditions: Option<RealityConditions>,
) -> RealityFlag {
    if !entries.iter().all(|e| is_real(e.energy(), tol)) {
        return RealityFlag::Complex;
    }
    match conditions {
        Some(c) if !c.verdict => RealityFlag::ConditionallyReal,
        _ => RealityFlag::AllReal,
    }
}

fn ca2(spec: &PotentialSpec) -> f64 {
    spec.kinetic() * spec.alpha() * spec.alpha()
}

/// Nested radical shared by the hyperbolic Scarf spectra:
/// `(n + 1/2) - 1/2 sqrt(1/2 + 2 u + 1/2 sqrt((4 u + 1)^2 - w))`.
fn hyperbolic_bracket(n: u32, u: C64, w: C64) -> C64 {
    let inner = sqrt_principal((u * 4.0 + 1.0).powu(2) - w);
    re(n as f64 + 0.5) - sqrt_principal(u * 2.0 + 0.5 + inner * 0.5) * 0.5
}

fn manning_rosen_y(n: u32, gamma: C64, q: f64) -> C64 {
    re(-(2.0 * n as f64 + 1.0)) + sqrt_principal(gamma / q + 1.0)
}

/// Hermitian Manning-Rosen closed form `c alpha^2 [Y^2/4 + beta^2/(4 Y^2)]`,
/// `Y = -(2n+1) + sqrt(1 + gamma/q)`.
fn manning_rosen_printed(spec: &PotentialSpec, n: u32) -> C64 {
    let c = ca2(spec);
    let beta = spec.a() / c;
    let gamma = spec.b() * 4.0 / c;
    let y = manning_rosen_y(n, gamma, spec.q());
    let tail = if beta.norm() == 0.0 {
        re(0.0)
    } else {
        beta * beta / (y * y * 4.0)
    };
    (y * y * 0.25 + tail) * c
}

/// `X = 2n + 1 - i sqrt(16 b^2/q - 1 - 8 i a^2)` of the non-PT Manning-Rosen spectrum.
fn nonpt_mr_x(n: u32, a2: C64, b2: C64, q: f64) -> C64 {
    re(2.0 * n as f64 + 1.0) - I * sqrt_principal(b2 * 16.0 / q - 1.0 - I * a2 * 8.0)
}

/// `eps^2` of the non-PT Manning-Rosen spectrum, with `eps = E / (4 c alpha^2)`.
pub fn nonpt_manning_rosen_eps_squared(spec: &PotentialSpec, n: u32) -> C64 {
    let (a2, b2) = nonpt_mr_couplings(spec);
    let x = nonpt_mr_x(n, a2, b2, spec.q());
    -(x * x) / 16.0 - I * a2 * 16.0 / (x * x)
}

fn nonpt_mr_couplings(spec: &PotentialSpec) -> (C64, C64) {
    let d = 4.0 * ca2(spec);
    (
        (spec.a1() + I * spec.a2()) / d,
        (spec.b1() + I * spec.b2()) / d,
    )
}

/// Closed-form energy of level `n` (for the non-PT Manning-Rosen spectrum,
/// the principal square-root candidate).
pub fn closed_form_energy(spec: &PotentialSpec, n: u32) -> Result<C64> {
    spec.validate()?;
    let c = ca2(spec);
    let nf = n as f64;
    use Family::*;
    use Variant::*;
    let e = match (spec.family, spec.variant) {
        (TrigScarf, Base) => {
            let r = sqrt_principal(re(0.25) - spec.a() / c);
            (r + (nf + 0.5)).powu(2) * c
        }
        (TrigScarf, Pt) => {
            let r = sqrt_principal(spec.a() / c + 0.25);
            -(re(nf + 0.5) - r).powu(2) * c
        }
        (TrigScarf, QDeformedPt) => {
            let r = sqrt_principal(spec.a() / (c * spec.q()) + 0.25);
            -(re(nf + 0.5) - r).powu(2) * c
        }
        (TrigScarf, NonPt) => {
            let num = I * spec.a1() - spec.a2();
            let r = sqrt_principal(-num / (c * spec.q()) + 0.25);
            -(re(nf + 0.5) - r).powu(2) * c
        }
        (HyperbolicScarf, Base) => {
            let u = spec.v1() / c;
            let w = spec.v2() * spec.v2() * 16.0 / (c * c * spec.q());
            spec.v1() + spec.v0() - hyperbolic_bracket(n, u, w).powu(2) * c
        }
        (HyperbolicScarf, Pt) => {
            let u = -spec.v1() / c;
            let w = spec.v2() * spec.v2() * 16.0 / (c * c * spec.q());
            spec.v1() - spec.v0() + hyperbolic_bracket(n, u, w).powu(2) * c
        }
        (HyperbolicScarf, NonPt) => {
            let u = spec.v1() * (I * 2.0 - 1.0) / c;
            let inner =
                sqrt_principal((u + 1.0).powu(2) - spec.v2() * spec.v2() / (c * c * spec.q()));
            let bracket = re(nf + 0.5) - sqrt_principal(u + 0.5 + inner * 0.5) * 0.5;
            spec.v0() + I * spec.v1() * C64::new(1.0, 1.0) + bracket.powu(2) * c
        }
        (ManningRosen, Base) => manning_rosen_printed(spec, n),
        (ManningRosen, Pt) => -manning_rosen_printed(spec, n),
        (ManningRosen, NonPt) => {
            sqrt_principal(nonpt_manning_rosen_eps_squared(spec, n)) * (4.0 * c)
        }
        (f, v) => {
            return Err(Error::UnsupportedVariant(format!(
                "no closed form for {f}/{v}"
            )))
        }
    };
    Ok(e)
}

fn convention_note(spec: &PotentialSpec) -> String {
    use Family::*;
    use Variant::*;
    let detail = match (spec.family, spec.variant) {
        (TrigScarf, Base) => "E_n = c alpha^2 [(n + 1/2) + sqrt(1/4 - A/(c alpha^2))]^2",
        (TrigScarf, Pt) => "E_n = -c alpha^2 (n + 1/2 - sqrt(A/(c alpha^2) + 1/4))^2",
        (TrigScarf, QDeformedPt) => "E_n = -c alpha^2 (n + 1/2 - sqrt(A/(c alpha^2 q) + 1/4))^2",
        (TrigScarf, NonPt) => {
            "E_n = -c alpha^2 (n + 1/2 - sqrt(-(i A1 - A2)/(c alpha^2 q) + 1/4))^2"
        }
        (HyperbolicScarf, Base) => "E_n = V0 + V1 - c alpha^2 [nested radical]^2",
        (HyperbolicScarf, Pt) => "E_n = V1 - V0 + c alpha^2 [nested radical with -V1]^2",
        (HyperbolicScarf, NonPt) => {
            "E_n = V0 + i(1+i)V1 + c alpha^2 [nested radical in (2i-1)V1]^2; V1, V2 are the values before complexification"
        }
        (ManningRosen, Base) => {
            "E_n = +c alpha^2 [Y^2/4 + beta^2/(4Y^2)] evaluated as written; neither overall sign reproduces the finite-difference bound states, which follow -c alpha^2 [X^2/4 + beta^2/X^2] with X = 2n+1+sqrt(1+gamma/q) (see solve_spectrum_numeric)"
        }
        (ManningRosen, Pt) => "E_n = -c alpha^2 [Y^2/4 + beta^2/(4Y^2)], the negation of the Hermitian form",
        (ManningRosen, NonPt) => {
            "eps^2 evaluated as written with eps = E/(4 c alpha^2); entries hold +sqrt(eps^2), alternates hold -sqrt(eps^2)"
        }
        _ => "",
    };
    format!("{detail}; {}; principal square roots", unit_note(spec))
}

fn validity_warnings(spec: &PotentialSpec) -> Vec<String> {
    let c = ca2(spec);
    let mut w = Vec::new();
    let pt_root = match (spec.family, spec.variant) {
        (Family::TrigScarf, Variant::Pt) => Some(sqrt_principal(spec.a() / c + 0.25)),
        (Family::TrigScarf, Variant::QDeformedPt) => {
            Some(sqrt_principal(spec.a() / (c * spec.q()) + 0.25))
        }
        _ => None,
    };
    if let Some(r) = pt_root {
        if r.re >= 1.0 {
            w.push(format!(
                "parameter domain: sqrt(1/4 + A/(c alpha^2)) = {} is not below 1",
                r.re
            ));
        }
    }
    w
}

/// Levels `0..=n_max` from the closed form of the family/variant pair.
pub fn closed_form_spectrum(spec: &PotentialSpec, n_max: u32) -> Result<SpectrumResult> {
    let entries = (0..=n_max)
        .map(|n| closed_form_energy(spec, n).map(|e| LevelEntry::new(n, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = SpectrumResult::new(spec, entries);
    if spec.family == Family::ManningRosen && spec.variant == Variant::NonPt {
        out.alternates = out
            .entries
            .iter()
            .map(|e| LevelEntry::new(e.n, -e.energy()))
            .collect();
    }
    out.convention_note = convention_note(spec);
    out.warnings = validity_warnings(spec);
    for e in &out.entries {
        if !(e.re.is_finite() && e.im.is_finite()) {
            out.warnings.push(format!(
                "level {}: the closed form is singular at these parameters",
                e.n
            ));
        }
    }
    let conditions = reality_conditions(spec).ok();
    out.reality_flag = flag_from_entries(&out.entries, 1e-12, conditions.clone());
    out.conditions = conditions;
    Ok(out)
}

const PRED_TOL: f64 = 1e-12;

fn pred(name: &str, measured: f64, holds: bool) -> Predicate {
    Predicate {
        name: name.into(),
        measured,
        holds,
    }
}

/// Evaluates the parameter predicates for real spectra.
///
/// Base, PT and q-deformed PT variants carry no predicates (verdict true).
pub fn reality_conditions(spec: &PotentialSpec) -> Result<RealityConditions> {
    spec.validate()?;
    let (predicates, report) = match (spec.family, spec.variant) {
        (_, Variant::Base) => (Vec::new(), "Hermitian: no restriction".to_string()),
        (_, Variant::Pt) | (_, Variant::QDeformedPt) => {
            (Vec::new(), "PT-symmetric: no restriction".to_string())
        }
        (Family::TrigScarf, Variant::NonPt) => {
            let a1 = spec.a1().re;
            // With A1 = 0 the level radicand is A2/(c alpha^2 q) + 1/4, which
            // must also be non-negative for the square root to stay real.
            let radicand = spec.a2().re / (ca2(spec) * spec.q()) + 0.25;
            (
                vec![
                    pred("A1 = 0", a1, a1.abs() <= PRED_TOL),
                    pred(
                        "A2/(c alpha^2 q) + 1/4 >= 0",
                        radicand,
                        radicand >= -PRED_TOL,
                    ),
                ],
                "real spectrum requires A1 = 0 and A2/(c alpha^2 q) + 1/4 >= 0".to_string(),
            )
        }
        (Family::HyperbolicScarf, Variant::NonPt) => {
            let (v1, v2) = (spec.v1(), spec.v2());
            (
                vec![
                    pred("Re(V1) = 0", v1.re, v1.re.abs() <= PRED_TOL),
                    pred("Im(V2) = 0", v2.im, v2.im.abs() <= PRED_TOL),
                ],
                "real spectrum requires Re(V1) = 0 and Im(V2) = 0".to_string(),
            )
        }
        (Family::ManningRosen, Variant::NonPt) => {
            let (a2, b2) = nonpt_mr_couplings(spec);
            let lhs = 16.0 * b2.re / spec.q() - 1.0;
            let rhs = 8.0 * a2.im;
            (
                vec![
                    pred("Re(a^2) = 0", a2.re, a2.re.abs() <= PRED_TOL),
                    pred("Im(b^2) = 0", b2.im, b2.im.abs() <= PRED_TOL),
                    pred("16 Re(b^2)/q - 1 < 8 Im(a^2)", lhs - rhs, lhs < rhs),
                ],
                "real spectrum requires Re(a^2) = 0, Im(b^2) = 0 and 16 Re(b^2)/q - 1 < 8 Im(a^2)"
                    .to_string(),
            )
        }
    };
    let verdict = predicates.iter().all(|p| p.holds);
    Ok(RealityConditions {
        family: spec.family,
        variant: spec.variant,
        predicates,
        verdict,
        report,
    })
}

/// Reality flag of the closed-form levels `0..=n_max` at tolerance `tol`.
///
/// For the non-PT Manning-Rosen spectrum both square-root candidates are
/// judged.
pub fn spectral_reality_scan(spec: &PotentialSpec, n_max: u32, tol: f64) -> Result<RealityFlag> {
    let r = closed_form_spectrum(spec, n_max)?;
    let all: Vec<LevelEntry> = r
        .entries
        .iter()
        .chain(r.alternates.iter())
        .copied()
        .collect();
    Ok(flag_from_entries(&all, tol, r.conditions))
}
