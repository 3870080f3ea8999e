//! Certificates for `w(AB) ≤ w(A)w(B)` on commuting 2×2 pairs.
//!
//! A commuting pair with `w(A) = w(B) = 1` is brought to a shared upper
//! triangular form, then rewritten as `A = z₁I + s₁C`, `B = z₂I + s₂C` with
//!
//! ```text
//! γ = (a₁ − a₂)/a₃ ≥ 0,   r = 1/√(γ² + 1),   C = [[√(1−r²), 2r], [0, −√(1−r²)]]
//! ```
//!
//! and `s₁, s₂` real, `Re z₁, Re z₂ ≥ 0`. `W(C)` is the ellipse
//! `{cos θ + i r sin θ}`. If `W(A)` touches the unit circle at `e^{iφ}`, then
//! `A = (1 − t)A₀ + tA₁` with `A₀ = e^{iφ}I`, `A₁ = i(1−r²) sin φ I + ν ŝ C`,
//! `ŝ = √(cos²φ + r² sin²φ)`, `ν = sign s` and `t = |s|/ŝ ≤ 1`. Doing the same
//! for `B`, the product `AB` is a convex combination of `A₀B₀, A₀B₁, A₁B₀`
//! and `A₁B₁`; the first three have radius one and
//! `A₁B₁ = (1−r²)(uI + ivC)` with `u² + (1−r²)v² = 1`, which forces
//! `w(A₁B₁) ≤ √(1−r²)`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::mat::{c64, commutation_defect, require_order, schur2, CMat, CScalar, UnitaryWitness};
use crate::numrange::{contains, radius2_closed, DEFAULT_GRID};
use crate::optimize::bisect;

/// Commutation defect accepted as "commuting".
pub const COMMUTE_TOL: f64 = 1e-10;
/// Relative size of `a₃` below which a matrix takes the normal path.
pub const NON_NORMAL_TOL: f64 = 1e-10;
/// Entrywise reconstruction tolerance for canonical forms and certificates.
pub const RECONSTRUCT_TOL: f64 = 1e-10;
/// Tolerance on `w = 1` for normalized inputs.
pub const NORMALIZED_TOL: f64 = 1e-9;

const PHASE_TIE_TOL: f64 = 1e-12;
const TOUCH_GRID: usize = 2048;
const F_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    A,
    B,
}

/// `C(r) = [[√(1−r²), 2r], [0, −√(1−r²)]]`.
pub fn c_matrix(r: f64) -> CMat {
    let d = (1.0 - r * r).max(0.0).sqrt();
    c_matrix_with_diagonal(r, d)
}

fn c_matrix_with_diagonal(r: f64, d: f64) -> CMat {
    CMat::from_fn(2, |i, j| match (i, j) {
        (0, 0) => c64(d, 0.0),
        (0, 1) => c64(2.0 * r, 0.0),
        (1, 1) => c64(-d, 0.0),
        _ => c64(0.0, 0.0),
    })
}

/// `[[−r, √(1−r²)], [√(1−r²), r]]`, which satisfies `U*CU = −C`.
pub fn flip_unitary(r: f64) -> CMat {
    let d = (1.0 - r * r).max(0.0).sqrt();
    CMat::from_real_rows(&[[-r, d], [d, r]]).expect("finite entries")
}

fn non_scalar_part(m: &CMat) -> f64 {
    let scale = m.frobenius();
    if scale == 0.0 {
        return 0.0;
    }
    let mean = m.trace() / 2.0;
    (m - &CMat::scalar(2, mean)).frobenius() / scale
}

/// One unitary that puts both matrices of a commuting 2×2 pair in upper
/// triangular form.
///
/// The Schur vector comes from whichever matrix is further from scalar; if
/// both are scalar `U = I`.
pub fn simul_triangularize(a: &CMat, b: &CMat) -> Result<(UnitaryWitness, CMat, CMat)> {
    require_order(a, 2)?;
    require_order(b, 2)?;
    let defect = commutation_defect(a, b)?;
    if defect > COMMUTE_TOL {
        return Err(Error::NonCommuting { defect });
    }
    let a_scalar = a.is_scalar(NON_NORMAL_TOL);
    let b_scalar = b.is_scalar(NON_NORMAL_TOL);
    let already_triangular = a[(1, 0)].norm() == 0.0 && b[(1, 0)].norm() == 0.0;
    let u = match (a_scalar, b_scalar) {
        _ if already_triangular => UnitaryWitness::identity(2),
        (true, true) => UnitaryWitness::identity(2),
        (false, true) => schur2(a)?.0,
        (true, false) => schur2(b)?.0,
        (false, false) => {
            if non_scalar_part(a) >= non_scalar_part(b) {
                schur2(a)?.0
            } else {
                schur2(b)?.0
            }
        }
    };
    let mut ta = u.conjugate(a);
    let mut tb = u.conjugate(b);
    for (t, m) in [(&mut ta, a), (&mut tb, b)] {
        let lower = t[(1, 0)].norm();
        if lower > NON_NORMAL_TOL * m.frobenius().max(f64::MIN_POSITIVE) && lower > 0.0 {
            return Err(Error::Inconsistency(format!(
                "simultaneous triangularization left {lower:e} below the diagonal"
            )));
        }
        t[(1, 0)] = c64(0.0, 0.0);
    }
    Ok((u, ta, tb))
}

/// A commuting pair written as `A = e^{−it₁} U (z₁I + s₁C) U*` and
/// `B = e^{−it₂} U (z₂I + s₂C) U*`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPair {
    pub z1: CScalar,
    pub z2: CScalar,
    pub s1: f64,
    pub s2: f64,
    pub r: f64,
    pub gamma: f64,
    pub c: CMat,
    pub u: UnitaryWitness,
    pub phases: (f64, f64),
}

impl CanonicalPair {
    pub fn z(&self, which: Factor) -> CScalar {
        match which {
            Factor::A => self.z1,
            Factor::B => self.z2,
        }
    }

    pub fn s(&self, which: Factor) -> f64 {
        match which {
            Factor::A => self.s1,
            Factor::B => self.s2,
        }
    }

    pub fn phase(&self, which: Factor) -> f64 {
        match which {
            Factor::A => self.phases.0,
            Factor::B => self.phases.1,
        }
    }

    /// `zI + sC` in the canonical frame.
    pub fn canonical_matrix(&self, which: Factor) -> CMat {
        &CMat::scalar(2, self.z(which)) + &self.c.scale_real(self.s(which))
    }

    /// The original (normalized) input matrix rebuilt from the canonical data.
    pub fn reconstruct(&self, which: Factor) -> CMat {
        let phase = CScalar::from_polar(1.0, -self.phase(which));
        self.u
            .unconjugate(&self.canonical_matrix(which))
            .scale(phase)
    }

    /// `1 − r²`, computed as `(γr)²` to avoid cancellation for small `γ`.
    pub fn one_minus_r2(&self) -> f64 {
        (self.gamma * self.r).powi(2)
    }
}

/// Rewrites a commuting pair, normalized to `w = 1` by the caller, in the
/// canonical `zI + sC` form.
///
/// At least one matrix must be non-normal; the other may be non-normal or
/// scalar (it then gets `s = 0`). Pairs where both are normal return
/// [`Error::NormalPath`].
pub fn canonicalize(a: &CMat, b: &CMat) -> Result<CanonicalPair> {
    let (u0, ta, tb) = simul_triangularize(a, b)?;
    let relative_corner = |t: &CMat, m: &CMat| {
        let scale = m.frobenius();
        if scale == 0.0 {
            0.0
        } else {
            t[(0, 1)].norm() / scale
        }
    };
    let na = relative_corner(&ta, a);
    let nb = relative_corner(&tb, b);
    if na <= NON_NORMAL_TOL && nb <= NON_NORMAL_TOL {
        return Err(Error::NormalPath);
    }
    let lead = if na >= nb { &ta } else { &tb };
    let ratio = (lead[(0, 0)] - lead[(1, 1)]) / lead[(0, 1)];
    let gamma = ratio.norm();
    let psi = if gamma > 0.0 { ratio.arg() } else { 0.0 };
    // diagonal similarity diag(1, e^{iψ}) makes the shared ratio real and ≥ 0
    let d = CMat::diag(&[c64(1.0, 0.0), CScalar::from_polar(1.0, psi)]);
    let u = u0.then(&UnitaryWitness::certify(d)?)?;
    let r = 1.0 / (gamma * gamma + 1.0).sqrt();
    let c = c_matrix_with_diagonal(r, gamma * r);
    let rotate = CScalar::from_polar(1.0, psi);

    let split = |t: &CMat| {
        let z = (t[(0, 0)] + t[(1, 1)]) * 0.5;
        let diff = t[(0, 0)] - t[(1, 1)];
        let corner = t[(0, 1)] * rotate;
        // least-squares coefficient of C in the traceless part
        let s = (diff * (gamma * r) + corner * (2.0 * r)) / (2.0 * r * r * (gamma * gamma + 2.0));
        (z, s)
    };
    let (z1, s1) = split(&ta);
    let (z2, s2) = split(&tb);
    let (t1, z1, s1) = normalize_phase(z1, s1);
    let (t2, z2, s2) = normalize_phase(z2, s2);

    let pair = CanonicalPair {
        z1,
        z2,
        s1,
        s2,
        r,
        gamma,
        c,
        u,
        phases: (t1, t2),
    };
    for (which, m) in [(Factor::A, a), (Factor::B, b)] {
        let err = pair.reconstruct(which).max_abs_diff(m);
        if err > RECONSTRUCT_TOL * (1.0 + m.frobenius()) {
            return Err(Error::Inconsistency(format!(
                "canonical form of {which:?} reconstructs with error {err:e}"
            )));
        }
    }
    Ok(pair)
}

/// Picks `t ∈ {−arg s, −arg s + π}` with `Re(e^{it}z) ≥ 0`, preferring
/// `s ≥ 0` when `Re(e^{it}z)` vanishes. Returns `(t, e^{it}z, e^{it}s)`.
fn normalize_phase(z: CScalar, s: CScalar) -> (f64, CScalar, f64) {
    let base = if s.norm() > 0.0 { -s.arg() } else { 0.0 };
    let x = (CScalar::from_polar(1.0, base) * z).re;
    let t = if x.abs() <= PHASE_TIE_TOL || x > 0.0 {
        base
    } else {
        base + PI
    };
    // adding zero turns −0 into +0
    let t = t.rem_euclid(TAU) + 0.0;
    let rot = CScalar::from_polar(1.0, t);
    (t, rot * z, (rot * s).re)
}

/// Where the boundary of `W(zI + sC)` meets the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchPoint {
    pub phi: f64,
    pub point: CScalar,
}

/// Locates the touch point `e^{iφ}`, `φ ∈ [−π/2, π/2]`, of a normalized factor.
///
/// The ellipse `{α + |s|(cos θ + i r sin θ)}` is the level set
/// `Q = s²` of `Q(x, y) = (x − α₁)² + (y − α₂)²/r²`, and it lies inside the unit disk, so the
/// touch point minimizes `Q` on the unit circle. The minimizer is found as a
/// root of `dQ/dφ`, which keeps `φ` accurate to rounding. Ties go to the
/// smallest `|φ|`, then to `φ ≥ 0`.
pub fn touch_point(cp: &CanonicalPair, which: Factor) -> Result<TouchPoint> {
    let m = cp.canonical_matrix(which);
    let radius = radius2_closed(&m)?;
    if (radius - 1.0).abs() > NORMALIZED_TOL {
        return Err(Error::NotNormalized { radius });
    }
    let z = cp.z(which);
    let s = cp.s(which).abs();
    let phi = if s == 0.0 {
        z.arg()
    } else {
        min_ellipse_form_on_circle(z, cp.r)
    };
    if phi.cos() < -PHASE_TIE_TOL {
        return Err(Error::Inconsistency(format!(
            "touch angle {phi} outside [−π/2, π/2]"
        )));
    }
    Ok(TouchPoint {
        phi: phi.clamp(-PI / 2.0, PI / 2.0),
        point: CScalar::from_polar(1.0, phi),
    })
}

fn min_ellipse_form_on_circle(z: CScalar, r: f64) -> f64 {
    let (a1, a2) = (z.re, z.im);
    let inv_r2 = 1.0 / (r * r);
    let q = |t: f64| {
        let (s, c) = t.sin_cos();
        (c - a1).powi(2) + (s - a2).powi(2) * inv_r2
    };
    let dq = |t: f64| {
        let (s, c) = t.sin_cos();
        -2.0 * (c - a1) * s + 2.0 * (s - a2) * c * inv_r2
    };
    let step = TAU / TOUCH_GRID as f64;
    let grid: Vec<f64> = (0..=TOUCH_GRID).map(|k| -PI + k as f64 * step).collect();
    let slopes: Vec<f64> = grid.iter().map(|&t| dq(t)).collect();
    let slope_scale = 1.0 + inv_r2;
    if slopes.iter().all(|d| d.abs() <= 1e-14 * slope_scale) {
        // Q is constant on the circle: every point touches
        return 0.0;
    }
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for k in 0..TOUCH_GRID {
        if slopes[k] < 0.0 && slopes[k + 1] >= 0.0 {
            let t = bisect(dq, grid[k], grid[k + 1]);
            candidates.push((t, q(t)));
        }
    }
    if candidates.is_empty() {
        // minimum sits exactly on the seam at ±π
        candidates.push((-PI, q(-PI)));
    }
    let q_min = candidates
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * q_min.abs().max(1.0);
    let fold = |t: f64| {
        // −π and π are the same point
        if t <= -PI + 1e-15 {
            PI
        } else {
            t
        }
    };
    candidates
        .into_iter()
        .filter(|&(_, v)| v <= q_min + tie)
        .map(|(t, _)| fold(t))
        .min_by(|x, y| {
            let key = |t: f64| (t.abs(), if t >= 0.0 { 0 } else { 1 });
            let (kx, ky) = (key(*x), key(*y));
            kx.0.total_cmp(&ky.0).then(kx.1.cmp(&ky.1))
        })
        .expect("at least one candidate")
}

/// `ŝ = √(cos²φ + r² sin²φ)`, checking `|s| ≤ ŝ`.
pub fn s_hat_and_assert(cp: &CanonicalPair, phi: f64, which: Factor) -> Result<f64> {
    let s_hat = s_hat(phi, cp.r);
    let s = cp.s(which).abs();
    if s > s_hat + RECONSTRUCT_TOL {
        return Err(Error::Inconsistency(format!(
            "|s| = {s} exceeds ŝ = {s_hat}; the factor was not normalized to w = 1"
        )));
    }
    Ok(s_hat)
}

pub fn s_hat(phi: f64, r: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    (c * c + r * r * s * s).sqrt()
}

/// `M = (1 − t)A₀ + tA₁` with `A₀ = e^{iφ}I` and
/// `A₁ = i(1−r²) sin φ I + ν ŝ C(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCertificate {
    pub a0: CMat,
    pub a1: CMat,
    pub t: f64,
    pub phi: f64,
    pub s_hat: f64,
    pub nu: i8,
    pub r: f64,
}

impl ConvexCertificate {
    /// Builds the certificate data for the given angle, `r`, sign and weight.
    pub fn new(phi: f64, r: f64, nu: i8, t: f64) -> Self {
        let s_hat = s_hat(phi, r);
        let a0 = CMat::scalar(2, CScalar::from_polar(1.0, phi));
        let a1 = Self::a1_for(phi, r, nu, s_hat);
        Self {
            a0,
            a1,
            t,
            phi,
            s_hat,
            nu,
            r,
        }
    }

    fn a1_for(phi: f64, r: f64, nu: i8, s_hat: f64) -> CMat {
        let centre = c64(0.0, (1.0 - r * r) * phi.sin());
        &CMat::scalar(2, centre) + &c_matrix(r).scale_real(f64::from(nu) * s_hat)
    }

    /// Certificate for a unimodular scalar matrix `μI`: `t = 0`, `r = 1`.
    pub fn for_scalar(mu: CScalar) -> Result<Self> {
        if (mu.norm() - 1.0).abs() > NORMALIZED_TOL {
            return Err(Error::NotNormalized { radius: mu.norm() });
        }
        Ok(Self::new(mu.arg(), 1.0, 1, 0.0))
    }

    /// `(1 − t)A₀ + tA₁`.
    pub fn combination(&self) -> CMat {
        &self.a0.scale_real(1.0 - self.t) + &self.a1.scale_real(self.t)
    }

    /// Re-checks the certificate against the matrix it certifies.
    pub fn verify(&self, target: &CMat) -> Result<()> {
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::Inconsistency(format!(
                "weight t = {} outside [0, 1]",
                self.t
            )));
        }
        let err = self.combination().max_abs_diff(target);
        if err > RECONSTRUCT_TOL {
            return Err(Error::Inconsistency(format!(
                "convex combination misses its target by {err:e}"
            )));
        }
        let w1 = radius2_closed(&self.a1)?;
        if w1 > 1.0 + NORMALIZED_TOL {
            return Err(Error::Inconsistency(format!("w(A₁) = {w1} exceeds 1")));
        }
        let expected = s_hat(self.phi, self.r);
        if (self.s_hat - expected).abs() > 1e-12 {
            return Err(Error::Inconsistency(format!(
                "ŝ = {} disagrees with √(cos²φ + r²sin²φ) = {expected}",
                self.s_hat
            )));
        }
        Ok(())
    }
}

/// Convex-combination certificate for one factor of a canonical pair.
pub fn decompose(cp: &CanonicalPair, which: Factor) -> Result<ConvexCertificate> {
    let touch = touch_point(cp, which)?;
    let s_hat = s_hat_and_assert(cp, touch.phi, which)?;
    let s = cp.s(which);
    let nu = if s >= 0.0 { 1 } else { -1 };
    let t = (s.abs() / s_hat).min(1.0);
    let cert = ConvexCertificate::new(touch.phi, cp.r, nu, t);
    cert.verify(&cp.canonical_matrix(which))?;
    Ok(cert)
}

/// Conjugates by the flip unitary when `ν₂ = −1`, turning `(ν₁, ν₂)` into
/// `(−ν₁, 1)`. A no-op when `ν₂ = 1`.
pub fn flip_nu2(
    cp: &CanonicalPair,
    cert_a: &ConvexCertificate,
    cert_b: &ConvexCertificate,
) -> Result<(CanonicalPair, ConvexCertificate, ConvexCertificate)> {
    if cert_b.nu == 1 {
        return Ok((cp.clone(), cert_a.clone(), cert_b.clone()));
    }
    let flip = UnitaryWitness::certify(flip_unitary(cp.r))?;
    let flipped_c = flip.conjugate(&cp.c);
    let err = (&flipped_c + &cp.c).max_abs_diff(&CMat::zeros(2));
    if err > 1e-12 {
        return Err(Error::Inconsistency(format!(
            "U*CU + C = {err:e}, expected 0"
        )));
    }
    let pair = CanonicalPair {
        s1: -cp.s1,
        s2: -cp.s2,
        u: cp.u.then(&flip)?,
        ..cp.clone()
    };
    let mut flipped = Vec::with_capacity(2);
    for (cert, which) in [(cert_a, Factor::A), (cert_b, Factor::B)] {
        let next = ConvexCertificate::new(cert.phi, cert.r, -cert.nu, cert.t);
        let direct = flip.conjugate(&cert.a1);
        let err = direct.max_abs_diff(&next.a1);
        if err > 1e-12 {
            return Err(Error::Inconsistency(format!(
                "flipped A₁ of {which:?} deviates by {err:e}"
            )));
        }
        next.verify(&pair.canonical_matrix(which))?;
        flipped.push(next);
    }
    let cert_b = flipped.pop().expect("two certificates");
    let cert_a = flipped.pop().expect("two certificates");
    Ok((pair, cert_a, cert_b))
}

/// Quantities behind the bound `w(A₁B₁) ≤ √(1−r²) < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductBoundReport {
    pub u_coef: f64,
    pub v_coef: f64,
    /// `u² + (1−r²)v²`, which equals one.
    pub identity: f64,
    /// Maximum of `f(θ) = |u + iv(cos θ + i r sin θ)|²`.
    pub f_max: f64,
    pub radius_a1b1: f64,
    /// `√(1−r²)`.
    pub bound: f64,
    /// Set when `r = 1`, where `A₁B₁ = 0`.
    pub zero_product: bool,
}

/// Verifies the product bound for certificates with `ν₂ = 1`.
pub fn product_bound(
    cert_a: &ConvexCertificate,
    cert_b: &ConvexCertificate,
    r: f64,
) -> Result<ProductBoundReport> {
    if cert_b.nu != 1 {
        return Err(Error::InvalidArgument("product bound needs ν₂ = 1".into()));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidArgument(format!("r = {r} outside (0, 1]")));
    }
    let k = 1.0 - r * r;
    let (w1, w2) = (cert_a.phi.sin(), cert_b.phi.sin());
    let (h1, h2) = (cert_a.s_hat, cert_b.s_hat);
    let nu1 = f64::from(cert_a.nu);
    let u = nu1 * h1 * h2 - w1 * w2 * k;
    let v = w1 * h2 + nu1 * w2 * h1;
    let identity = u * u + k * v * v;
    if (identity - 1.0).abs() > RECONSTRUCT_TOL {
        return Err(Error::Inconsistency(format!(
            "u² + (1−r²)v² = {identity}, expected 1"
        )));
    }

    let product = &cert_a.a1 * &cert_b.a1;
    let factored = (&CMat::scalar(2, c64(u, 0.0)) + &c_matrix(r).scale(c64(0.0, v))).scale_real(k);
    let err = product.max_abs_diff(&factored);
    if err > 1e-12 {
        return Err(Error::Inconsistency(format!(
            "A₁B₁ differs from (1−r²)(uI + ivC) by {err:e}"
        )));
    }

    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        (u - r * v * s).powi(2) + (v * c).powi(2)
    };
    let mut f_max = (0..F_GRID)
        .map(|i| f(i as f64 * TAU / F_GRID as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    if k > 0.0 && v != 0.0 {
        let sin_star = -r * u / (k * v);
        if sin_star.abs() <= 1.0 {
            f_max = f_max.max(f(sin_star.asin()));
        }
    }

    let radius_a1b1 = radius2_closed(&product)?;
    let zero_product = k == 0.0;
    let bound = k.sqrt();
    if zero_product {
        if radius_a1b1 > 1e-12 {
            return Err(Error::Inconsistency(format!(
                "r = 1 but w(A₁B₁) = {radius_a1b1:e}"
            )));
        }
    } else {
        // f ≤ 1/(1−r²), compared after scaling by 1 − r²
        if f_max * k > 1.0 + NORMALIZED_TOL {
            return Err(Error::Inconsistency(format!(
                "max f = {f_max} exceeds 1/(1−r²) = {}",
                1.0 / k
            )));
        }
        if radius_a1b1 > bound + RECONSTRUCT_TOL {
            return Err(Error::Inconsistency(format!(
                "w(A₁B₁) = {radius_a1b1} exceeds √(1−r²) = {bound}"
            )));
        }
    }
    Ok(ProductBoundReport {
        u_coef: u,
        v_coef: v,
        identity,
        f_max,
        radius_a1b1,
        bound,
        zero_product,
    })
}

/// Which argument the pair took through [`certify_pair`].
#[derive(Debug, Clone, PartialEq)]
pub enum CertificateRoute {
    /// At least one factor is non-normal: full canonical certificates.
    Canonical {
        pair: CanonicalPair,
        cert_a: ConvexCertificate,
        cert_b: ConvexCertificate,
        product: ProductBoundReport,
        /// `w(A₀B₀), w(A₀B₁), w(A₁B₀), w(A₁B₁)`.
        corners: [f64; 4],
        /// `w(AB)` of the normalized pair.
        radius_product: f64,
    },
    /// Both factors scalar: `t = 0` certificates with `r = 1`.
    Scalar {
        cert_a: ConvexCertificate,
        cert_b: ConvexCertificate,
        product: ProductBoundReport,
    },
    /// Both factors normal, at least one non-scalar: simultaneously
    /// diagonalizable, no certificate needed.
    Diagonal,
    /// One factor is zero.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCertificate {
    pub radius_a: f64,
    pub radius_b: f64,
    pub route: CertificateRoute,
}

/// Normalizes a commuting 2×2 pair and produces every certificate the
/// product bound rests on, re-checking each one.
pub fn certify_pair(a: &CMat, b: &CMat) -> Result<PairCertificate> {
    require_order(a, 2)?;
    require_order(b, 2)?;
    let defect = commutation_defect(a, b)?;
    if defect > COMMUTE_TOL {
        return Err(Error::NonCommuting { defect });
    }
    let radius_a = radius2_closed(a)?;
    let radius_b = radius2_closed(b)?;
    if radius_a == 0.0 || radius_b == 0.0 {
        return Ok(PairCertificate {
            radius_a,
            radius_b,
            route: CertificateRoute::Zero,
        });
    }
    let an = a.scale_real(1.0 / radius_a);
    let bn = b.scale_real(1.0 / radius_b);
    let route = match canonicalize(&an, &bn) {
        Ok(pair) => canonical_route(pair, &an, &bn)?,
        Err(Error::NormalPath) => {
            if an.is_scalar(NON_NORMAL_TOL) && bn.is_scalar(NON_NORMAL_TOL) {
                let cert_a = ConvexCertificate::for_scalar(an[(0, 0)])?;
                let cert_b = ConvexCertificate::for_scalar(bn[(0, 0)])?;
                cert_a.verify(&an)?;
                cert_b.verify(&bn)?;
                let product = product_bound(&cert_a, &cert_b, 1.0)?;
                CertificateRoute::Scalar {
                    cert_a,
                    cert_b,
                    product,
                }
            } else {
                CertificateRoute::Diagonal
            }
        }
        Err(e) => return Err(e),
    };
    Ok(PairCertificate {
        radius_a,
        radius_b,
        route,
    })
}

fn canonical_route(pair: CanonicalPair, an: &CMat, bn: &CMat) -> Result<CertificateRoute> {
    let cert_a = decompose(&pair, Factor::A)?;
    let cert_b = decompose(&pair, Factor::B)?;
    let (pair, cert_a, cert_b) = flip_nu2(&pair, &cert_a, &cert_b)?;
    let product = product_bound(&cert_a, &cert_b, pair.r)?;

    let corners = [
        radius2_closed(&(&cert_a.a0 * &cert_b.a0))?,
        radius2_closed(&(&cert_a.a0 * &cert_b.a1))?,
        radius2_closed(&(&cert_a.a1 * &cert_b.a0))?,
        radius2_closed(&(&cert_a.a1 * &cert_b.a1))?,
    ];
    let (ta, tb) = (cert_a.t, cert_b.t);
    let weighted = [
        ((1.0 - ta) * (1.0 - tb), &cert_a.a0 * &cert_b.a0),
        ((1.0 - ta) * tb, &cert_a.a0 * &cert_b.a1),
        (ta * (1.0 - tb), &cert_a.a1 * &cert_b.a0),
        (ta * tb, &cert_a.a1 * &cert_b.a1),
    ];
    let mut combination = CMat::zeros(2);
    for (weight, corner) in &weighted {
        combination = &combination + &corner.scale_real(*weight);
    }
    let canonical_product = &pair.canonical_matrix(Factor::A) * &pair.canonical_matrix(Factor::B);
    let err = combination.max_abs_diff(&canonical_product);
    if err > 1e-9 {
        return Err(Error::Inconsistency(format!(
            "AB is not the weighted sum of its corner products (error {err:e})"
        )));
    }
    let radius_product = radius2_closed(&(an * bn))?;
    let corner_max = corners.iter().copied().fold(0.0, f64::max);
    if radius_product > corner_max + NORMALIZED_TOL {
        return Err(Error::Inconsistency(format!(
            "w(AB) = {radius_product} exceeds the largest corner radius {corner_max}"
        )));
    }
    // the touch point must lie in W(A) for each original normalized factor
    for (which, m) in [(Factor::A, an), (Factor::B, bn)] {
        let cert = if which == Factor::A { &cert_a } else { &cert_b };
        let phase = CScalar::from_polar(1.0, -pair.phase(which));
        let point = CScalar::from_polar(1.0, cert.phi) * phase;
        if !contains(m, point, DEFAULT_GRID)? {
            return Err(Error::Inconsistency(format!(
                "touch point of {which:?} is not in its numerical range"
            )));
        }
    }
    Ok(CertificateRoute::Canonical {
        pair,
        cert_a,
        cert_b,
        product,
        corners,
        radius_product,
    })
}
