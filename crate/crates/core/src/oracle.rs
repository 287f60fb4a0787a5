//! Finite-difference oracle: second-order central differences with Dirichlet
//! ends, tridiagonal and dense eigenvalue solvers with residual
//! certification, conjugation-closure checks, level matching and Richardson
//! convergence studies.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{re, sqrt_principal, C64};
use crate::potentials::{evaluate, DomainSpec, PotentialSpec};
use crate::spectra::SpectrumResult;

/// Smallest accepted number of interior points.
pub const MIN_POINTS: usize = 50;
/// Largest matrix handed to the dense solver.
pub const DENSE_LIMIT: usize = 6000;
/// Relative window used when pairing formula levels with eigenvalues.
pub const MATCH_WINDOW: f64 = 0.05;
/// Number of eigenpairs checked by inverse iteration.
pub const CERTIFIED_PAIRS: usize = 5;
/// Relative residual bound of the certification.
pub const CERTIFICATION_BOUND: f64 = 1e-8;
const CERT_SEED: u64 = 0x6e75_7370_6563;

/// Tridiagonal descriptor `-c psi'' + V psi` on interior nodes `x_i = left + i h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHamiltonian {
    pub domain: DomainSpec,
    pub n: usize,
    pub h: f64,
    pub kinetic: f64,
    #[serde(skip)]
    pub diagonal: Vec<C64>,
    pub offdiagonal: f64,
}

impl GridHamiltonian {
    pub fn node(&self, i: usize) -> f64 {
        self.domain.left + (i + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn is_real(&self) -> bool {
        self.diagonal.iter().all(|d| d.im == 0.0)
    }

    /// Largest absolute matrix entry.
    pub fn max_abs(&self) -> f64 {
        self.diagonal
            .iter()
            .map(|d| d.norm())
            .fold(self.offdiagonal.abs(), f64::max)
    }

    /// `H v` for a vector on the interior nodes.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.n;
        let e = re(self.offdiagonal);
        (0..n)
            .map(|i| {
                let mut y = self.diagonal[i] * v[i];
                if i > 0 {
                    y += e * v[i - 1];
                }
                if i + 1 < n {
                    y += e * v[i + 1];
                }
                y
            })
            .collect()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let n = self.n;
        let mut a = vec![C64::default(); n * n];
        for i in 0..n {
            a[i * n + i] = self.diagonal[i];
            if i + 1 < n {
                a[i * n + i + 1] = re(self.offdiagonal);
                a[(i + 1) * n + i] = re(self.offdiagonal);
            }
        }
        a
    }
}

/// Samples the potential on `n` interior nodes of `domain`.
pub fn discretize(spec: &PotentialSpec, domain: &DomainSpec, n: usize) -> Result<GridHamiltonian> {
    domain.validate()?;
    if n < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_POINTS} interior points are required, got {n}"
        )));
    }
    let h = domain.length() / (n + 1) as f64;
    let kinetic = spec.kinetic();
    let mut diagonal = Vec::with_capacity(n);
    let mut singular = Vec::new();
    for i in 0..n {
        let x = domain.left + (i + 1) as f64 * h;
        match evaluate(spec, x) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => {
                diagonal.push(v + 2.0 * kinetic / (h * h))
            }
            Ok(_) | Err(Error::Singularity { .. }) => singular.push(x),
            Err(e) => return Err(e),
        }
    }
    if !singular.is_empty() {
        return Err(Error::SingularNodes { nodes: singular });
    }
    Ok(GridHamiltonian {
        domain: *domain,
        n,
        h,
        kinetic,
        diagonal,
        offdiagonal: -kinetic / (h * h),
    })
}

fn sort_spectrum(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Eigenvalues of a real symmetric tridiagonal matrix by implicit QL, unsorted.
pub fn tridiagonal_real(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let cap = 40 * n.max(1);
    let mut sweeps = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > cap {
                return Err(Error::EigenNotConverged { iterations: sweeps });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Eigenvalues of a complex symmetric tridiagonal matrix by implicit QL
/// with complex orthogonal rotations.
///
/// Fails with `EigenNotConverged` when a rotation degenerates
/// (`f^2 + g^2 = 0` with `f, g != 0`) or the sweep budget runs out.
pub fn tridiagonal_complex_symmetric(diag: &[C64], off: &[C64]) -> Result<Vec<C64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![C64::default(); n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let cap = 40 * n.max(1);
    let mut sweeps = 0usize;
    let one = re(1.0);
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].norm() + d[m + 1].norm();
                if e[m].norm() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > cap {
                return Err(Error::EigenNotConverged { iterations: sweeps });
            }
            let mut g = (d[l + 1] - d[l]) / (e[l] * 2.0);
            let mut r = sqrt_principal(g * g + one);
            let denom = if (g + r).norm() >= (g - r).norm() {
                g + r
            } else {
                g - r
            };
            g = d[m] - d[l] + e[l] / denom;
            let (mut s, mut c, mut p) = (one, one, C64::default());
            let mut early = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = sqrt_principal(f * f + g * g);
                e[i + 1] = r;
                if r.norm() <= f64::MIN_POSITIVE * 1e10 {
                    if f.norm() > 0.0 || g.norm() > 0.0 {
                        return Err(Error::EigenNotConverged { iterations: sweeps });
                    }
                    d[i + 1] -= p;
                    e[m] = C64::default();
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + c * b * 2.0;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = C64::default();
        }
    }
    if d.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::EigenNotConverged { iterations: sweeps });
    }
    Ok(d)
}

/// Reduces a dense row-major matrix to upper Hessenberg form in place by
/// Householder reflections.
pub fn hessenberg_reduce(a: &mut [C64], n: usize) {
    for k in 0..n.saturating_sub(2) {
        let alpha_norm: f64 = (k + 1..n)
            .map(|i| a[i * n + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            re(1.0)
        };
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[i * n + k]).collect();
        v[0] += phase * alpha_norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- (I - 2 v v^H / |v|^2) A
        for j in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| vt.conj() * a[(k + 1 + t) * n + j])
                .sum();
            let f = dot * 2.0 / vnorm2;
            for (t, vt) in v.iter().enumerate() {
                a[(k + 1 + t) * n + j] -= vt * f;
            }
        }
        // A <- A (I - 2 v v^H / |v|^2)
        for i in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vt)| a[i * n + k + 1 + t] * vt)
                .sum();
            let f = dot * 2.0 / vnorm2;
            for (t, vt) in v.iter().enumerate() {
                a[i * n + k + 1 + t] -= f * vt.conj();
            }
        }
        for i in k + 2..n {
            a[i * n + k] = C64::default();
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift QR with
/// Wilkinson shifts and Givens rotations, deflating from the bottom.
pub fn hessenberg_qr(h: &mut [C64], n: usize) -> Result<Vec<C64>> {
    let mut eig = vec![C64::default(); n];
    if n == 0 {
        return Ok(eig);
    }
    let cap = 40 * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let at = |i: usize, j: usize| i * n + j;
    loop {
        if hi == 0 {
            eig[0] = h[at(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[at(l - 1, l - 1)].norm() + h[at(l, l)].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[at(l, l - 1)].norm() <= f64::EPSILON * s {
                h[at(l, l - 1)] = C64::default();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[at(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > cap {
            return Err(Error::EigenNotConverged { iterations: total });
        }
        let a = h[at(hi - 1, hi - 1)];
        let b = h[at(hi - 1, hi)];
        let c = h[at(hi, hi - 1)];
        let d = h[at(hi, hi)];
        let mu = if since_deflation % 11 == 10 {
            d + re(h[at(hi, hi - 1)].norm() * 0.75)
        } else {
            let half = (a - d) * 0.5;
            let disc = sqrt_principal(half * half + b * c);
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hi {
            h[at(k, k)] -= mu;
        }
        let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[at(k, k)];
            let y = h[at(k + 1, k)];
            let nrm = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if nrm == 0.0 {
                (1.0, C64::default())
            } else if x.norm() == 0.0 {
                (0.0, y.conj() / y.norm())
            } else {
                let ph = x / x.norm();
                (x.norm() / nrm, ph * y.conj() / nrm)
            };
            for j in k..=hi {
                let u = h[at(k, j)];
                let w = h[at(k + 1, j)];
                h[at(k, j)] = u * cs + sn * w;
                h[at(k + 1, j)] = -sn.conj() * u + w * cs;
            }
            rots.push((cs, sn));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (cs, sn) = rots[idx];
            let top = (k + 2).min(hi);
            for i in l..=top {
                let u = h[at(i, k)];
                let w = h[at(i, k + 1)];
                h[at(i, k)] = u * cs + w * sn.conj();
                h[at(i, k + 1)] = -u * sn + w * cs;
            }
        }
        for k in l..=hi {
            h[at(k, k)] += mu;
        }
    }
    Ok(eig)
}

/// Eigenvalues of a general dense row-major matrix.
pub fn eigen_dense(a: &[C64], n: usize) -> Result<Vec<C64>> {
    if a.len() != n * n {
        return Err(Error::InvalidArgument("matrix is not n x n".into()));
    }
    let mut h = a.to_vec();
    hessenberg_reduce(&mut h, n);
    let mut eig = hessenberg_qr(&mut h, n)?;
    sort_spectrum(&mut eig);
    Ok(eig)
}

/// All eigenvalues of the grid Hamiltonian through the dense path.
pub fn eigen_complex_dense(h: &GridHamiltonian) -> Result<Vec<C64>> {
    if h.n > DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "dense budget is {DENSE_LIMIT} points, got {}",
            h.n
        )));
    }
    let mut a = h.to_dense();
    let mut eig = hessenberg_qr(&mut a, h.n)?;
    sort_spectrum(&mut eig);
    certify(h, &eig)?;
    Ok(eig)
}

/// All eigenvalues of the grid Hamiltonian, sorted by real part.
///
/// Real potentials use the symmetric QL iteration; complex ones use the
/// complex symmetric QL iteration and fall back to dense QR if it breaks
/// down. Five eigenvalues are certified by inverse iteration.
pub fn eigenvalues(h: &GridHamiltonian) -> Result<Vec<C64>> {
    let mut eig = if h.is_real() {
        let d: Vec<f64> = h.diagonal.iter().map(|z| z.re).collect();
        let e = vec![h.offdiagonal; h.n.saturating_sub(1)];
        tridiagonal_real(&d, &e)?.into_iter().map(re).collect()
    } else {
        let e = vec![re(h.offdiagonal); h.n.saturating_sub(1)];
        match tridiagonal_complex_symmetric(&h.diagonal, &e) {
            Ok(v) => v,
            Err(_) => return eigen_complex_dense(h),
        }
    };
    sort_spectrum(&mut eig);
    certify(h, &eig)?;
    Ok(eig)
}

/// Factorization of a tridiagonal matrix with partial pivoting.
struct TriLu {
    dl: Vec<C64>,
    d: Vec<C64>,
    du: Vec<C64>,
    du2: Vec<C64>,
    piv: Vec<bool>,
}

impl TriLu {
    fn factor(sub: &[C64], diag: &[C64], sup: &[C64]) -> Self {
        let n = diag.len();
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![C64::default(); n.saturating_sub(2)];
        let mut piv = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * d.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i].norm() == 0.0 {
                    d[i] = re(tiny);
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                piv[i] = true;
            }
        }
        if n > 0 && d[n - 1].norm() == 0.0 {
            d[n - 1] = re(tiny);
        }
        Self {
            dl,
            d,
            du,
            du2,
            piv,
        }
    }

    fn solve(&self, b: &mut [C64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.piv[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                let bi = b[i];
                b[i + 1] -= self.dl[i] * bi;
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvector estimate for `lambda` by two steps of inverse iteration.
pub fn inverse_iteration(h: &GridHamiltonian, lambda: C64) -> Vec<C64> {
    let n = h.n;
    let scale = h.max_abs().max(1e-300);
    let shift = lambda + C64::new(1.0, 1.0) * (scale * 1e-13);
    let off = vec![re(h.offdiagonal); n.saturating_sub(1)];
    let diag: Vec<C64> = h.diagonal.iter().map(|d| d - shift).collect();
    let lu = TriLu::factor(&off, &diag, &off);
    let mut v: Vec<C64> = (0..n)
        .map(|i| re(1.0 + 0.5 * ((i as f64) * 0.618).sin()))
        .collect();
    for _ in 0..3 {
        lu.solve(&mut v);
        let nv = norm2(&v);
        v.iter_mut().for_each(|z| *z /= nv);
    }
    v
}

/// `||H v - lambda v|| / ||v||`.
pub fn residual(h: &GridHamiltonian, lambda: C64, v: &[C64]) -> f64 {
    let hv = h.apply(v);
    let r: Vec<C64> = hv.iter().zip(v).map(|(a, b)| a - lambda * b).collect();
    norm2(&r) / norm2(v)
}

/// Certifies five seeded-random eigenvalues by inverse iteration residuals.
pub fn certify(h: &GridHamiltonian, eig: &[C64]) -> Result<()> {
    if eig.is_empty() {
        return Ok(());
    }
    let bound = CERTIFICATION_BOUND * h.max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(CERT_SEED);
    let picks = sample(&mut rng, eig.len(), CERTIFIED_PAIRS.min(eig.len()));
    for i in picks {
        let v = inverse_iteration(h, eig[i]);
        let r = residual(h, eig[i], &v);
        if r.is_nan() || r > bound {
            return Err(Error::CertificationFailed { residual: r, bound });
        }
    }
    Ok(())
}

/// Result of checking that a spectrum is closed under complex conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugationReport {
    pub tol: f64,
    /// Largest `|lambda_i - conj(lambda_j)| / (1 + |lambda_i|)` over the matching.
    pub max_mismatch: f64,
    pub real_count: usize,
    pub pair_count: usize,
    pub closed: bool,
}

/// Pairs each eigenvalue with the nearest unused conjugate and reports the
/// worst relative mismatch.
pub fn conjugation_pair_check(eigs: &[C64], tol: f64) -> ConjugationReport {
    let n = eigs.len();
    let mut used = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigs[b].im.abs().total_cmp(&eigs[a].im.abs()));
    let mut worst: f64 = 0.0;
    for &i in &order {
        if used[i] {
            continue;
        }
        let target = eigs[i].conj();
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if used[j] || (j == i && n > 1 && eigs[i].im.abs() > tol * (1.0 + eigs[i].norm())) {
                continue;
            }
            let d = (eigs[j] - target).norm();
            if d < best_d {
                best_d = d;
                best = Some(j);
            }
        }
        let j = best.unwrap_or(i);
        used[i] = true;
        used[j] = true;
        worst = worst.max(best_d.min((eigs[i] - target).norm()) / (1.0 + eigs[i].norm()));
    }
    let real_count = eigs
        .iter()
        .filter(|z| z.im.abs() <= tol * (1.0 + z.norm()))
        .count();
    ConjugationReport {
        tol,
        max_mismatch: worst,
        real_count,
        pair_count: (n - real_count) / 2,
        closed: worst <= tol,
    }
}

/// One formula level paired with an oracle eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedLevel {
    pub n: u32,
    pub formula: C64,
    pub oracle: C64,
    pub rel_err: f64,
}

/// Injective pairing of formula levels with oracle eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMatch {
    pub threshold: Option<C64>,
    pub window: f64,
    pub pairs: Vec<MatchedLevel>,
    pub unmatched_formula: Vec<u32>,
    pub unmatched_oracle: Vec<C64>,
    pub max_rel_err: Option<f64>,
}

fn rel_err(formula: C64, oracle: C64) -> f64 {
    let d = (formula - oracle).norm();
    if formula.norm() > 0.0 {
        d / formula.norm()
    } else {
        d
    }
}

/// Greedy nearest matching of formula entries to eigenvalues whose real part
/// lies below the threshold (no threshold for finite intervals).
pub fn match_levels(formula: &SpectrumResult, eigs: &[C64], threshold: Option<C64>) -> LevelMatch {
    match_levels_with_window(formula, eigs, threshold, MATCH_WINDOW)
}

/// [`match_levels`] with an explicit relative acceptance window.
pub fn match_levels_with_window(
    formula: &SpectrumResult,
    eigs: &[C64],
    threshold: Option<C64>,
    window: f64,
) -> LevelMatch {
    let candidates: Vec<C64> = eigs
        .iter()
        .copied()
        .filter(|z| threshold.is_none_or(|t| z.re < t.re))
        .collect();
    let mut used = vec![false; candidates.len()];
    let mut pairs = Vec::new();
    let mut unmatched_formula = Vec::new();
    for entry in &formula.entries {
        let e = entry.energy();
        let best = candidates
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, z)| (j, rel_err(e, *z)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, err)) if err <= window => {
                used[j] = true;
                pairs.push(MatchedLevel {
                    n: entry.n,
                    formula: e,
                    oracle: candidates[j],
                    rel_err: err,
                });
            }
            _ => unmatched_formula.push(entry.n),
        }
    }
    let unmatched_oracle = candidates
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(z, _)| *z)
        .collect();
    let max_rel_err = pairs.iter().map(|p| p.rel_err).reduce(f64::max);
    LevelMatch {
        threshold,
        window,
        pairs,
        unmatched_formula,
        unmatched_oracle,
        max_rel_err,
    }
}

/// `(r^p E_fine - E_coarse) / (r^p - 1)` with `r = h_coarse / h_fine`.
pub fn richardson(coarse: C64, fine: C64, ratio: f64, order: f64) -> C64 {
    let rp = ratio.powf(order);
    (fine * rp - coarse) / (rp - 1.0)
}

/// Refinement history of one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelConvergence {
    pub index: usize,
    pub values: Vec<C64>,
    pub extrapolated: C64,
    /// `|E_extrapolated - E_finest|`.
    pub step_estimate: f64,
    pub observed_order: Option<f64>,
    pub flagged: bool,
}

/// Richardson study over a list of grid sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub sizes: Vec<usize>,
    pub spacings: Vec<f64>,
    pub levels: Vec<LevelConvergence>,
}

/// Lowest `levels` eigenvalues on every grid in `sizes` (each grid on its own
/// thread), Richardson-extrapolated from the two finest grids with order 2.
///
/// A level is flagged when the observed order from the three finest grids is
/// outside `[1.5, 2.5]` or the successive differences do not shrink.
pub fn convergence_study(
    spec: &PotentialSpec,
    domain: &DomainSpec,
    sizes: &[usize],
    levels: usize,
) -> Result<ConvergenceReport> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "grid sizes must be ascending with at least two entries".into(),
        ));
    }
    let spectra: Vec<Result<(f64, Vec<C64>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .map(|&n| {
                scope.spawn(move || {
                    let h = discretize(spec, domain, n)?;
                    Ok((h.h, eigenvalues(&h)?))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("eigen worker panicked"))
            .collect()
    });
    let spectra = spectra.into_iter().collect::<Result<Vec<_>>>()?;
    let spacings: Vec<f64> = spectra.iter().map(|s| s.0).collect();
    let k = spectra.len();
    let available = spectra.iter().map(|s| s.1.len()).min().unwrap_or(0);
    let mut out = Vec::new();
    for idx in 0..levels.min(available) {
        let values: Vec<C64> = spectra.iter().map(|s| s.1[idx]).collect();
        let ratio = spacings[k - 2] / spacings[k - 1];
        let extrapolated = richardson(values[k - 2], values[k - 1], ratio, 2.0);
        let step_estimate = (extrapolated - values[k - 1]).norm();
        let (observed_order, flagged) = if k >= 3 {
            let d1 = (values[k - 2] - values[k - 3]).norm();
            let d2 = (values[k - 1] - values[k - 2]).norm();
            let r = spacings[k - 2] / spacings[k - 1];
            if d1 > 0.0 && d2 > 0.0 {
                let p = (d1 / d2).ln() / r.ln();
                (Some(p), !(1.5..=2.5).contains(&p) || d2 >= d1)
            } else {
                (None, false)
            }
        } else {
            (None, false)
        };
        out.push(LevelConvergence {
            index: idx,
            values,
            extrapolated,
            step_estimate,
            observed_order,
            flagged,
        });
    }
    Ok(ConvergenceReport {
        sizes: sizes.to_vec(),
        spacings,
        levels: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{Family, Params, Variant};
    use std::f64::consts::PI;

    fn box_spec() -> PotentialSpec {
        PotentialSpec::trig_scarf(0.0, 1.0)
    }

    #[test]
    fn box_spectrum() {
        let h = discretize(&box_spec(), &DomainSpec::finite(0.0, PI), 1000).unwrap();
        assert!(h.is_real());
        let e = eigenvalues(&h).unwrap();
        for (n, z) in e.iter().take(5).enumerate() {
            let k = (n + 1) as f64;
            let discrete = 2.0 / (h.h * h.h) * (1.0 - (k * h.h).cos());
            assert!((z.re - discrete).abs() / discrete < 1e-9);
            // Second-order truncation error k^2 h^2 / 12.
            let expect = k * k;
            assert!((z.re - expect).abs() / expect < 2.1e-5 * (k / 5.0).powi(2));
        }
        for (n, z) in e.iter().take(3).enumerate() {
            let expect = ((n + 1) * (n + 1)) as f64;
            assert!((z.re - expect).abs() / expect < 1e-5);
        }
    }

    #[test]
    fn box_converges_from_below() {
        let dom = DomainSpec::finite(0.0, PI);
        let coarse = eigenvalues(&discretize(&box_spec(), &dom, 200).unwrap()).unwrap();
        let fine = eigenvalues(&discretize(&box_spec(), &dom, 400).unwrap()).unwrap();
        for n in 0..4 {
            let exact = ((n + 1) * (n + 1)) as f64;
            assert!(coarse[n].re < fine[n].re && fine[n].re < exact);
        }
    }

    #[test]
    fn constant_potential_dominates() {
        let spec = PotentialSpec::new(
            Family::HyperbolicScarf,
            Variant::Base,
            Params {
                v0: Some(re(1e9)),
                v1: Some(re(0.0)),
                v2: Some(re(0.0)),
                q: Some(1.0),
                alpha: Some(1.0),
                ..Params::default()
            },
        )
        .unwrap();
        let h = discretize(&spec, &DomainSpec::finite(1.0, 2.0), 60).unwrap();
        let e = eigenvalues(&h).unwrap();
        assert!((e[0].re - 1e9).abs() / 1e9 < 1e-5);
    }

    #[test]
    fn rejects_singular_nodes_and_small_grids() {
        let spec = PotentialSpec::hyperbolic_scarf(0.0, 1.0, 1.0, 1.0, 1.0);
        let err = discretize(&spec, &DomainSpec::finite(-1.0, 1.0), 99).unwrap_err();
        match err {
            Error::SingularNodes { nodes } => assert_eq!(nodes, vec![0.0]),
            other => panic!("{other:?}"),
        }
        assert!(discretize(&box_spec(), &DomainSpec::finite(0.0, 1.0), 10).is_err());
    }

    #[test]
    fn dense_diagonal() {
        let n = 3;
        let mut a = vec![C64::default(); 9];
        a[0] = re(1.0);
        a[4] = C64::new(2.0, 1.0);
        a[8] = re(3.0);
        let e = eigen_dense(&a, n).unwrap();
        assert_eq!(e, vec![re(1.0), C64::new(2.0, 1.0), re(3.0)]);
    }

    #[test]
    fn laplacian_spectrum() {
        let n = 60;
        let d = vec![2.0; n];
        let o = vec![-1.0; n - 1];
        let mut e = tridiagonal_real(&d, &o).unwrap();
        e.sort_by(f64::total_cmp);
        for (k, v) in e.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_symmetric_matches_dense_and_closes_under_conjugation() {
        // PT-type: diagonal entries symmetric under i -> n-1-i with conjugation.
        let diag = [C64::new(1.0, 0.3), re(2.0), re(2.0), C64::new(1.0, -0.3)];
        let off = [re(1.0); 3];
        let mut ql = tridiagonal_complex_symmetric(&diag, &off).unwrap();
        sort_spectrum(&mut ql);
        let mut dense = vec![C64::default(); 16];
        for i in 0..4 {
            dense[i * 4 + i] = diag[i];
            if i < 3 {
                dense[i * 4 + i + 1] = off[i];
                dense[(i + 1) * 4 + i] = off[i];
            }
        }
        let qr = eigen_dense(&dense, 4).unwrap();
        for (a, b) in ql.iter().zip(&qr) {
            assert!((a - b).norm() < 1e-12, "{a} {b}");
        }
        // Each eigenvalue is a root of the characteristic polynomial.
        for z in &qr {
            let mut p0 = re(1.0);
            let mut p1 = diag[0] - z;
            for i in 1..4 {
                let p2 = (diag[i] - z) * p1 - off[i - 1] * off[i - 1] * p0;
                p0 = p1;
                p1 = p2;
            }
            assert!(p1.norm() < 1e-10);
        }
        assert!(conjugation_pair_check(&qr, 1e-10).closed);
    }

    #[test]
    fn conjugation_examples() {
        let r = conjugation_pair_check(&[re(1.0), re(2.0), re(3.0)], 1e-12);
        assert!(r.closed);
        assert_eq!((r.real_count, r.pair_count), (3, 0));
        let r = conjugation_pair_check(&[C64::new(1.0, 1.0), C64::new(1.0, -1.0), re(2.0)], 1e-12);
        assert!(r.closed);
        assert_eq!((r.real_count, r.pair_count), (1, 1));
        let r = conjugation_pair_check(&[C64::new(1.0, 1.0), re(2.0)], 1e-12);
        assert!(!r.closed);
    }

    #[test]
    fn tri_lu_solves() {
        let sub = [re(1.0), C64::new(0.0, 2.0), re(-1.0)];
        let diag = [re(0.0), re(1.0), C64::new(1.0, 1.0), re(4.0)];
        let sup = [re(3.0), re(1.0), re(0.5)];
        let x = [re(1.0), C64::new(0.0, 1.0), re(-2.0), re(0.5)];
        let mut b = vec![C64::default(); 4];
        for i in 0..4 {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += sub[i - 1] * x[i - 1];
            }
            if i < 3 {
                b[i] += sup[i] * x[i + 1];
            }
        }
        TriLu::factor(&sub, &diag, &sup).solve(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).norm() < 1e-14);
        }
    }

    #[test]
    fn richardson_is_exact_for_quadratic_error() {
        let exact = re(4.0);
        let coarse = exact + 0.3 * 0.1f64.powi(2);
        let fine = exact + 0.3 * 0.05f64.powi(2);
        assert!((richardson(coarse, fine, 2.0, 2.0) - exact).norm() < 1e-14);
    }

    #[test]
    fn box_observed_order() {
        let r = convergence_study(
            &box_spec(),
            &DomainSpec::finite(0.0, PI),
            &[100, 201, 403],
            2,
        )
        .unwrap();
        let p = r.levels[0].observed_order.unwrap();
        assert!((1.8..=2.2).contains(&p), "{p}");
        assert!(!r.levels[0].flagged);
        assert!((r.levels[0].extrapolated.re - 1.0).abs() < 1e-6);
    }
}
