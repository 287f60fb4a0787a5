//! Potential families, their variants, evaluation on the real line and a
//! numerical PT-symmetry classifier.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{cosh_q, q_scale, re, sinh_q, sqrt_principal, C64, I, POLE_TOL};

/// The three potential families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `-A / sin^2(alpha x)` and its deformations.
    TrigScarf,
    /// `V0 + V1 coth_q^2 + V2 coth_q / sinh_q`.
    HyperbolicScarf,
    /// `A coth_q + B / sinh_q^2`.
    ManningRosen,
}

/// Hermitian base form or one of its non-Hermitian continuations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Variant {
    #[serde(rename = "base")]
    Base,
    /// `alpha -> i alpha`.
    #[serde(rename = "pt")]
    Pt,
    /// PT trigonometric Scarf with `sinh` replaced by `sinh_q`.
    #[serde(rename = "q-deformed-pt")]
    #[value(name = "q-deformed-pt", alias = "qpt")]
    QDeformedPt,
    /// Complexified couplings together with `q -> iq`.
    #[serde(rename = "nonpt")]
    #[value(name = "nonpt", alias = "non-pt")]
    NonPt,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::TrigScarf => "trig-scarf",
            Family::HyperbolicScarf => "hyperbolic-scarf",
            Family::ManningRosen => "manning-rosen",
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Base => "base",
            Variant::Pt => "pt",
            Variant::QDeformedPt => "q-deformed-pt",
            Variant::NonPt => "nonpt",
        })
    }
}

/// Serde adapter writing real numbers as plain JSON numbers and complex
/// numbers as `[re, im]`; both shapes (and `{"re", "im"}`) are accepted on input.
mod opt_complex {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
        Object { re: f64, im: f64 },
    }

    pub fn serialize<S: Serializer>(v: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(z) if z.im == 0.0 => s.serialize_f64(z.re),
            Some(z) => [z.re, z.im].serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        let r: Option<Repr> = Option::deserialize(d)?;
        Ok(r.map(|r| match r {
            Repr::Real(x) => C64::new(x, 0.0),
            Repr::Pair([a, b]) => C64::new(a, b),
            Repr::Object { re, im } => C64::new(re, im),
        }))
    }
}

/// Coupling constants. Only the fields used by the family/variant pair are set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(
        rename = "A",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub a: Option<C64>,
    #[serde(
        rename = "A1",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub a1: Option<C64>,
    #[serde(
        rename = "A2",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub a2: Option<C64>,
    #[serde(
        rename = "B",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub b: Option<C64>,
    #[serde(
        rename = "B1",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub b1: Option<C64>,
    #[serde(
        rename = "B2",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub b2: Option<C64>,
    #[serde(
        rename = "V0",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub v0: Option<C64>,
    #[serde(
        rename = "V1",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub v1: Option<C64>,
    #[serde(
        rename = "V2",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_complex"
    )]
    pub v2: Option<C64>,
    /// Inverse length scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Deformation parameter; the `i` of `q -> iq` is part of the NonPt formulas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Period `a` of the trigonometric Scarf potential (`alpha = pi / a`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

fn default_hbar() -> f64 {
    1.0
}

fn default_mass() -> f64 {
    0.5
}

/// Family, variant, couplings and unit convention. Defaults are `hbar = 1`, `2m = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub family: Family,
    pub variant: Variant,
    pub params: Params,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    A,
    A1,
    A2,
    B,
    B1,
    B2,
    V0,
    V1,
    V2,
    Q,
}

impl Field {
    fn name(self) -> &'static str {
        match self {
            Field::A => "A",
            Field::A1 => "A1",
            Field::A2 => "A2",
            Field::B => "B",
            Field::B1 => "B1",
            Field::B2 => "B2",
            Field::V0 => "V0",
            Field::V1 => "V1",
            Field::V2 => "V2",
            Field::Q => "q",
        }
    }
}

const ALL_FIELDS: [Field; 10] = [
    Field::A,
    Field::A1,
    Field::A2,
    Field::B,
    Field::B1,
    Field::B2,
    Field::V0,
    Field::V1,
    Field::V2,
    Field::Q,
];

impl PotentialSpec {
    /// Builds a spec with the default unit convention and validates it.
    pub fn new(family: Family, variant: Variant, params: Params) -> Result<Self> {
        let spec = Self {
            family,
            variant,
            params,
            hbar: default_hbar(),
            mass: default_mass(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Base trigonometric Scarf `-A / sin^2(alpha x)`.
    pub fn trig_scarf(a: f64, alpha: f64) -> Self {
        Self::new(
            Family::TrigScarf,
            Variant::Base,
            Params {
                a: Some(re(a)),
                alpha: Some(alpha),
                ..Params::default()
            },
        )
        .expect("valid trigonometric Scarf parameters")
    }

    /// Base q-deformed hyperbolic Scarf.
    pub fn hyperbolic_scarf(v0: f64, v1: f64, v2: f64, q: f64, alpha: f64) -> Self {
        Self::new(
            Family::HyperbolicScarf,
            Variant::Base,
            Params {
                v0: Some(re(v0)),
                v1: Some(re(v1)),
                v2: Some(re(v2)),
                q: Some(q),
                alpha: Some(alpha),
                ..Params::default()
            },
        )
        .expect("valid hyperbolic Scarf parameters")
    }

    /// Base Manning-Rosen `A coth_q + B / sinh_q^2`.
    pub fn manning_rosen(a: f64, b: f64, q: f64, alpha: f64) -> Self {
        Self::new(
            Family::ManningRosen,
            Variant::Base,
            Params {
                a: Some(re(a)),
                b: Some(re(b)),
                q: Some(q),
                alpha: Some(alpha),
                ..Params::default()
            },
        )
        .expect("valid Manning-Rosen parameters")
    }

    /// Same spec with another unit convention.
    pub fn with_units(mut self, hbar: f64, mass: f64) -> Self {
        self.hbar = hbar;
        self.mass = mass;
        self
    }

    fn required_fields(&self) -> Result<&'static [Field]> {
        use Family::*;
        use Variant::*;
        Ok(match (self.family, self.variant) {
            (TrigScarf, Base) | (TrigScarf, Pt) => &[Field::A],
            (TrigScarf, QDeformedPt) => &[Field::A, Field::Q],
            (TrigScarf, NonPt) => &[Field::A1, Field::A2, Field::Q],
            (HyperbolicScarf, Base) | (HyperbolicScarf, Pt) | (HyperbolicScarf, NonPt) => {
                &[Field::V0, Field::V1, Field::V2, Field::Q]
            }
            (ManningRosen, Base) | (ManningRosen, Pt) => &[Field::A, Field::B, Field::Q],
            (ManningRosen, NonPt) => &[Field::A1, Field::A2, Field::B1, Field::B2, Field::Q],
            (f, v) => return Err(Error::UnsupportedFamily(format!("{f}/{v}"))),
        })
    }

    fn field(&self, f: Field) -> Option<C64> {
        let p = &self.params;
        match f {
            Field::A => p.a,
            Field::A1 => p.a1,
            Field::A2 => p.a2,
            Field::B => p.b,
            Field::B1 => p.b1,
            Field::B2 => p.b2,
            Field::V0 => p.v0,
            Field::V1 => p.v1,
            Field::V2 => p.v2,
            Field::Q => p.q.map(re),
        }
    }

    /// Checks the field set, the unit constants and the ranges of `alpha` and `q`.
    pub fn validate(&self) -> Result<()> {
        let required = self.required_fields()?;
        for f in ALL_FIELDS {
            let present = self.field(f).is_some();
            let needed = required.contains(&f);
            if needed && !present {
                return Err(Error::InvalidSpec(format!(
                    "{}/{} requires parameter {}",
                    self.family,
                    self.variant,
                    f.name()
                )));
            }
            if !needed && present {
                return Err(Error::InvalidSpec(format!(
                    "parameter {} is not used by {}/{}",
                    f.name(),
                    self.family,
                    self.variant
                )));
            }
            if let Some(z) = self.field(f) {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "parameter {} is not finite",
                        f.name()
                    )));
                }
            }
        }
        match (self.params.alpha, self.params.period) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidSpec(
                    "alpha and period are mutually exclusive".into(),
                ))
            }
            (None, None) => return Err(Error::InvalidSpec("alpha (or period) is required".into())),
            (None, Some(_)) if self.family != Family::TrigScarf => {
                return Err(Error::InvalidSpec(
                    "period only applies to the trigonometric Scarf family".into(),
                ))
            }
            _ => {}
        }
        let alpha = self.alpha();
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::InvalidSpec(
                "alpha must be finite and nonzero".into(),
            ));
        }
        if let Some(q) = self.params.q {
            if !q.is_finite() || q == 0.0 {
                return Err(Error::InvalidSpec("q must be finite and nonzero".into()));
            }
            let needs_positive = matches!(
                (self.family, self.variant),
                (Family::HyperbolicScarf, Variant::Base)
                    | (Family::TrigScarf, Variant::QDeformedPt)
            );
            if needs_positive && q <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "{}/{} requires q > 0",
                    self.family, self.variant
                )));
            }
        }
        if self.variant == Variant::Base {
            for f in required {
                if let Some(z) = self.field(*f) {
                    if z.im != 0.0 {
                        return Err(Error::InvalidSpec(format!(
                            "base variant requires real {}",
                            f.name()
                        )));
                    }
                }
            }
        }
        if !(self.hbar > 0.0 && self.mass > 0.0 && self.hbar.is_finite() && self.mass.is_finite()) {
            return Err(Error::InvalidSpec("hbar and mass must be positive".into()));
        }
        Ok(())
    }

    /// Resolved inverse length (`pi / period` when the period is given).
    pub fn alpha(&self) -> f64 {
        match (self.params.alpha, self.params.period) {
            (Some(a), _) => a,
            (None, Some(p)) => PI / p,
            (None, None) => f64::NAN,
        }
    }

    /// Deformation parameter, 1 when the variant carries none.
    pub fn q(&self) -> f64 {
        self.params.q.unwrap_or(1.0)
    }

    /// Kinetic prefactor `hbar^2 / 2m`.
    pub fn kinetic(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    fn get(&self, f: Field) -> C64 {
        self.field(f).unwrap_or_default()
    }

    pub fn a(&self) -> C64 {
        self.get(Field::A)
    }
    pub fn a1(&self) -> C64 {
        self.get(Field::A1)
    }
    pub fn a2(&self) -> C64 {
        self.get(Field::A2)
    }
    pub fn b(&self) -> C64 {
        self.get(Field::B)
    }
    pub fn b1(&self) -> C64 {
        self.get(Field::B1)
    }
    pub fn b2(&self) -> C64 {
        self.get(Field::B2)
    }
    pub fn v0(&self) -> C64 {
        self.get(Field::V0)
    }
    pub fn v1(&self) -> C64 {
        self.get(Field::V1)
    }
    pub fn v2(&self) -> C64 {
        self.get(Field::V2)
    }

    /// Canonical pretty-printed JSON.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Parses and validates a JSON spec.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PotentialSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

fn pole_check(den: C64, scale: f64, x: f64) -> Result<()> {
    if den.norm() <= POLE_TOL * scale.max(f64::MIN_POSITIVE) || !den.norm().is_finite() {
        Err(Error::Singularity { x })
    } else {
        Ok(())
    }
}

/// `V(x)` for the family/variant pair.
///
/// The non-Hermitian continuations follow the closed expressions of the
/// respective variants; for the PT hyperbolic Scarf at exactly `q = 1` the
/// Morse-type form `V0 + V1 cos 2ax + V2 cos ax` is used.
pub fn evaluate(spec: &PotentialSpec, x: f64) -> Result<C64> {
    let alpha = spec.alpha();
    let ax = alpha * x;
    let q = spec.q();
    let y = re(ax);
    use Family::*;
    use Variant::*;
    match (spec.family, spec.variant) {
        (TrigScarf, Base) => {
            let s = ax.sin();
            pole_check(re(s), 1.0, x)?;
            Ok(-spec.a() / (s * s))
        }
        (TrigScarf, Pt) | (TrigScarf, QDeformedPt) => {
            let qq = if spec.variant == Pt { re(1.0) } else { re(q) };
            let s = sinh_q(y, qq);
            pole_check(s, q_scale(y, qq), x)?;
            Ok(spec.a() / (s * s))
        }
        (TrigScarf, NonPt) => {
            let qq = I * q;
            let s = sinh_q(y, qq);
            pole_check(s, q_scale(y, qq), x)?;
            Ok((spec.a1() + I * spec.a2()) / (s * s))
        }
        (HyperbolicScarf, Base) => {
            let qq = re(q);
            let s = sinh_q(y, qq);
            pole_check(s, q_scale(y, qq), x)?;
            let c = cosh_q(y, qq);
            Ok(spec.v0() + spec.v1() * c * c / (s * s) + spec.v2() * c / (s * s))
        }
        (HyperbolicScarf, Pt) => {
            if q == 1.0 {
                return Ok(spec.v0() + spec.v1() * (2.0 * ax).cos() + spec.v2() * ax.cos());
            }
            let (c2, s2) = ((2.0 * ax).cos(), (2.0 * ax).sin());
            let den = re((q * q - 1.0) * c2 - 4.0 * q) - I * ((q * q - 1.0) * s2);
            pole_check(den, (q * q - 1.0).abs() + 4.0 * q.abs(), x)?;
            let num1 = re((1.0 + q * q) * c2 + 4.0 * q) - I * ((q * q - 1.0) * s2);
            let num2 = re((1.0 + q) * ax.cos()) + I * ((1.0 - q) * ax.sin());
            let k2 = 2.0 / sqrt_principal(re(q));
            Ok(spec.v0() + spec.v1() * num1 / den + spec.v2() * k2 * num2 / den)
        }
        (HyperbolicScarf, NonPt) => {
            let u = q * (-2.0 * ax).exp();
            let den = re(u) + I;
            pole_check(den, 1.0 + u.abs(), x)?;
            let c1 = spec.v1() * C64::new(1.0, 1.0);
            let c2 = spec.v2() * C64::new(1.0, 1.0);
            let t1 = c1 * (re(u) - I).powu(2) / den.powu(2);
            let t2 = c2 / sqrt_principal(I * q) * (-ax).exp() * (re(1.0) + I * u) / den.powu(2);
            Ok(spec.v0() + t1 - t2)
        }
        (ManningRosen, Base) => {
            let qq = re(q);
            let s = sinh_q(y, qq);
            pole_check(s, q_scale(y, qq), x)?;
            let c = cosh_q(y, qq);
            Ok(spec.a() * c / s + spec.b() / (s * s))
        }
        (ManningRosen, Pt) => {
            let (c2, s2) = ((2.0 * ax).cos(), (2.0 * ax).sin());
            let den = re((1.0 + q * q) * c2 - 2.0 * q) + I * ((1.0 - q * q) * s2);
            pole_check(den, 1.0 + q * q + 2.0 * q.abs(), x)?;
            let num =
                spec.a() * (re((1.0 - q * q) * c2) + I * ((1.0 + q * q) * s2)) + spec.b() * 4.0;
            Ok(num / den)
        }
        (ManningRosen, NonPt) => {
            let u = (-2.0 * ax).exp();
            let den = (I * (q * u) - 1.0).powu(2);
            pole_check(den, 1.0 + (q * u).powi(2), x)?;
            let a = spec.a1() + I * spec.a2();
            let b = spec.b1() + I * spec.b2();
            Ok(I * a * (1.0 - q * q * u * u) / den + b * 4.0 * u / den)
        }
        (f, v) => Err(Error::UnsupportedFamily(format!("{f}/{v}"))),
    }
}

/// Transforms a Base spec into one of its variants.
///
/// Trigonometric Scarf: PT keeps `A`; the q-deformed PT form starts at `q = 1`;
/// NonPt sets `A1 = A`, `A2 = 0`, `q = 1`. Hyperbolic Scarf: PT and NonPt keep
/// the couplings (the `(1 + i)` complexification and `q -> iq` are built into
/// the NonPt expression). Manning-Rosen: NonPt sets `A1 = A`, `B1 = B` with
/// zero imaginary parts.
pub fn apply_variant(spec: &PotentialSpec, target: Variant) -> Result<PotentialSpec> {
    let unsupported = || Error::UnsupportedTransform {
        family: spec.family.to_string(),
        from: spec.variant.to_string(),
        to: target.to_string(),
    };
    if spec.variant != Variant::Base {
        if target == spec.variant {
            return Ok(spec.clone());
        }
        return Err(unsupported());
    }
    let mut out = spec.clone();
    out.variant = target;
    let p = &mut out.params;
    match (spec.family, target) {
        (_, Variant::Base) => return Ok(spec.clone()),
        (Family::TrigScarf, Variant::Pt) => {}
        (Family::TrigScarf, Variant::QDeformedPt) => p.q = Some(1.0),
        (Family::TrigScarf, Variant::NonPt) => {
            p.a1 = p.a.take();
            p.a2 = Some(re(0.0));
            p.q = Some(1.0);
        }
        (Family::HyperbolicScarf, Variant::Pt) | (Family::HyperbolicScarf, Variant::NonPt) => {}
        (Family::ManningRosen, Variant::Pt) => {}
        (Family::ManningRosen, Variant::NonPt) => {
            p.a1 = p.a.take();
            p.a2 = Some(re(0.0));
            p.b1 = p.b.take();
            p.b2 = Some(re(0.0));
        }
        _ => return Err(unsupported()),
    }
    out.validate()?;
    Ok(out)
}

/// Boundary treatment of the truncated problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Dirichlet,
}

/// Shape of the quantization domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    FiniteInterval,
    HalfLine,
    FullLine,
}

/// Open interval `(left, right)` on which the problem is quantized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub left: f64,
    pub right: f64,
    /// Truncation length for unbounded kinds.
    pub truncation: Option<f64>,
    pub boundary: Boundary,
}

impl DomainSpec {
    pub fn finite(left: f64, right: f64) -> Self {
        Self {
            kind: DomainKind::FiniteInterval,
            left,
            right,
            truncation: None,
            boundary: Boundary::Dirichlet,
        }
    }

    /// `(left, left + l)` with the singular or natural end at `left`.
    pub fn half_line(left: f64, l: f64) -> Self {
        Self {
            kind: DomainKind::HalfLine,
            left,
            right: left + l,
            truncation: Some(l),
            boundary: Boundary::Dirichlet,
        }
    }

    /// `(center - l, center + l)`.
    pub fn full_line(center: f64, l: f64) -> Self {
        Self {
            kind: DomainKind::FullLine,
            left: center - l,
            right: center + l,
            truncation: Some(l),
            boundary: Boundary::Dirichlet,
        }
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.left.is_finite() && self.right.is_finite() && self.right > self.left) {
            return Err(Error::InvalidArgument(format!(
                "domain ({}, {}) is empty or unbounded",
                self.left, self.right
            )));
        }
        if let Some(l) = self.truncation {
            if l <= 0.0 {
                return Err(Error::InvalidArgument(
                    "truncation length must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Location of the pole of `1 / sinh_q(alpha x)` on the real line, if any.
pub fn sinh_q_pole(q: f64, alpha: f64) -> Option<f64> {
    (q > 0.0).then(|| q.ln() / (2.0 * alpha))
}

/// Default quantization domain of a spec for truncation length `l`.
///
/// The PT Manning-Rosen potential at `q = 1` has poles at every multiple of
/// `pi / alpha`, so it is quantized on the cell `(0, pi / alpha)` instead of
/// the full line.
pub fn natural_domain(spec: &PotentialSpec, l: f64) -> DomainSpec {
    let alpha = spec.alpha().abs();
    let q = spec.q();
    use Family::*;
    use Variant::*;
    match (spec.family, spec.variant) {
        (TrigScarf, Base) => DomainSpec::finite(0.0, PI / alpha),
        (TrigScarf, Pt) => DomainSpec::half_line(0.0, l),
        (TrigScarf, QDeformedPt) => DomainSpec::half_line(sinh_q_pole(q, alpha).unwrap_or(0.0), l),
        (HyperbolicScarf, Base) | (ManningRosen, Base) => match sinh_q_pole(q, alpha) {
            Some(x0) => DomainSpec::half_line(x0, l),
            None => DomainSpec::full_line(0.0, l),
        },
        (ManningRosen, Pt) if q == 1.0 => DomainSpec::finite(0.0, PI / alpha),
        _ => DomainSpec::full_line(0.0, l),
    }
}

/// Reflection point about which the family's symmetry is checked.
pub fn natural_center(spec: &PotentialSpec) -> f64 {
    let alpha = spec.alpha().abs();
    let q = spec.q();
    use Family::*;
    use Variant::*;
    match (spec.family, spec.variant) {
        (TrigScarf, Base) => PI / (2.0 * alpha),
        (TrigScarf, QDeformedPt) | (HyperbolicScarf, Base) | (ManningRosen, Base) => {
            sinh_q_pole(q, alpha).unwrap_or(0.0)
        }
        _ => 0.0,
    }
}

/// Asymptotic potential value where bound states end; `None` means no
/// continuum (finite interval or confining box).
pub fn continuum_threshold(spec: &PotentialSpec) -> Option<C64> {
    let q = spec.q();
    use Family::*;
    use Variant::*;
    match (spec.family, spec.variant) {
        (TrigScarf, Base) => None,
        (TrigScarf, _) => Some(re(0.0)),
        (HyperbolicScarf, Base) => Some(spec.v0() + spec.v1()),
        (HyperbolicScarf, Pt) => None,
        (HyperbolicScarf, NonPt) => Some(spec.v0() + spec.v1() * C64::new(1.0, 1.0)),
        (ManningRosen, Base) => {
            if q > 0.0 {
                Some(spec.a())
            } else {
                Some(re(-spec.a().re.abs()))
            }
        }
        (ManningRosen, Pt) => None,
        (ManningRosen, NonPt) => Some(I * (spec.a1() + I * spec.a2())),
        (_, QDeformedPt) => None,
    }
}

/// Result of the numerical PT-symmetry classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtSymmetryReport {
    /// `max |V(2c - x)^* - V(x)|` over the grid.
    pub max_defect: f64,
    pub center: f64,
    pub tol: f64,
    pub verdict: bool,
    /// Parity structure of the family about `center`.
    pub structure: String,
}

fn structure_note(spec: &PotentialSpec) -> &'static str {
    use Family::*;
    use Variant::*;
    match (spec.family, spec.variant) {
        (TrigScarf, Base) => "real; even about pi/(2 alpha)",
        (HyperbolicScarf, Base) => "real; coth_q^2 and coth_q/sinh_q are even about the sinh_q zero",
        (ManningRosen, Base) => {
            "real; B/sinh_q^2 is even but A coth_q is odd about the sinh_q zero, so symmetry needs A = 0"
        }
        (_, Pt) | (_, QDeformedPt) => "complex continuation alpha -> i alpha",
        (_, NonPt) => "complexified couplings with q -> iq",
    }
}

/// Measures `max |V(2c - x)^* - V(x)|` on a grid symmetric about its midpoint `c`.
pub fn pt_symmetry_check(spec: &PotentialSpec, grid: &[f64], tol: f64) -> Result<PtSymmetryReport> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least two points".into(),
        ));
    }
    let center = 0.5 * (grid[0] + grid[grid.len() - 1]);
    let span = (grid[grid.len() - 1] - grid[0]).abs().max(1.0);
    for (a, b) in grid.iter().zip(grid.iter().rev()) {
        if ((a - center) + (b - center)).abs() > 1e-9 * span {
            return Err(Error::InvalidArgument(
                "grid is not symmetric about its midpoint".into(),
            ));
        }
    }
    let mut max_defect: f64 = 0.0;
    for &x in grid {
        let v = evaluate(spec, x)?;
        let w = evaluate(spec, 2.0 * center - x)?;
        max_defect = max_defect.max((w.conj() - v).norm());
    }
    Ok(PtSymmetryReport {
        max_defect,
        center,
        tol,
        verdict: max_defect <= tol,
        structure: structure_note(spec).to_string(),
    })
}

/// `n` equally spaced points in `[center - half, center + half]`.
pub fn symmetric_grid(center: f64, half: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let h = 2.0 * half / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let k = i as f64 - (n - 1) as f64 / 2.0;
            center + k * h
        })
        .collect()
}
