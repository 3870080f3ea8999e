//! Dense complex matrices of small order.
//!
//! Everything here works in binary64. Tolerances are relative to the
//! Frobenius norm of the input unless stated otherwise.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used for every matrix entry.
pub type CScalar = Complex64;

/// Largest supported matrix order.
pub const MAX_ORDER: usize = 16;

/// Bound on `‖U*U − I‖_F` accepted by [`UnitaryWitness::certify`].
pub const UNITARY_TOL: f64 = 1e-12;

const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;
const NEWTON_MAX_STEPS: usize = 64;

#[inline]
pub fn c64(re: f64, im: f64) -> CScalar {
    Complex64::new(re, im)
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    order: usize,
    data: Vec<CScalar>,
}

impl CMat {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(order: usize, data: Vec<CScalar>) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        if data.len() != order * order {
            return Err(Error::EntryCount {
                expected: order * order,
                got: data.len(),
            });
        }
        if let Some(k) = data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite {
                row: k / order,
                col: k % order,
            });
        }
        Ok(Self { order, data })
    }

    pub fn from_rows<R: AsRef<[CScalar]>>(rows: &[R]) -> Result<Self> {
        let order = rows.len();
        let mut data = Vec::with_capacity(order * order);
        for row in rows {
            let row = row.as_ref();
            if row.len() != order {
                return Err(Error::EntryCount {
                    expected: order,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(order, data)
    }

    /// Convenience constructor for real matrices.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let complex: Vec<Vec<CScalar>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| c64(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    /// Panics if `order` is outside `1..=16`.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> CScalar) -> Self {
        assert!(
            (1..=MAX_ORDER).contains(&order),
            "unsupported order {order}"
        );
        let mut data = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                data.push(f(i, j));
            }
        }
        Self { order, data }
    }

    pub fn zeros(order: usize) -> Self {
        Self::from_fn(order, |_, _| CScalar::new(0.0, 0.0))
    }

    pub fn identity(order: usize) -> Self {
        Self::scalar(order, c64(1.0, 0.0))
    }

    pub fn scalar(order: usize, mu: CScalar) -> Self {
        Self::from_fn(order, |i, j| if i == j { mu } else { c64(0.0, 0.0) })
    }

    pub fn diag(values: &[CScalar]) -> Self {
        Self::from_fn(
            values.len(),
            |i, j| if i == j { values[i] } else { c64(0.0, 0.0) },
        )
    }

    /// Matrix unit `E_ij` (zero-based indices).
    pub fn unit(order: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(order);
        m[(i, j)] = c64(1.0, 0.0);
        m
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[CScalar] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[CScalar]> {
        self.data.chunks(self.order)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> CScalar {
        (0..self.order).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: CScalar) -> Self {
        Self {
            order: self.order,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(c64(c, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        adjoint(self)
    }

    /// `self^m` for `m ≥ 0` by repeated squaring.
    pub fn pow(&self, mut m: u32) -> Self {
        let mut result = Self::identity(self.order);
        let mut base = self.clone();
        while m > 0 {
            if m & 1 == 1 {
                result = &result * &base;
            }
            m >>= 1;
            if m > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.order, other.order);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.order, other.order);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖A − A*‖_F / ‖A‖_F` (zero for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.frobenius();
        if scale == 0.0 {
            return 0.0;
        }
        self.distance(&self.adjoint()) / scale
    }

    /// `‖AA* − A*A‖_F / ‖A‖_F²` (zero for the zero matrix).
    pub fn normality_defect(&self) -> f64 {
        let scale = self.frobenius();
        if scale == 0.0 {
            return 0.0;
        }
        let adj = self.adjoint();
        (self * &adj).distance(&(&adj * self)) / (scale * scale)
    }

    /// True when the matrix equals `μI` up to `tol·‖A‖_F` entrywise.
    pub fn is_scalar(&self, tol: f64) -> bool {
        let scale = self.frobenius();
        if scale == 0.0 {
            return true;
        }
        let d0 = self[(0, 0)];
        for i in 0..self.order {
            for j in 0..self.order {
                let z = self[(i, j)];
                let dev = if i == j { (z - d0).norm() } else { z.norm() };
                if dev > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Hermitian part `(A + A*)/2` and skew part `(A − A*)/(2i)`, both
    /// exactly Hermitian in floating point.
    pub fn cartesian_parts(&self) -> (Self, Self) {
        let n = self.order;
        let mut re = Self::zeros(n);
        let mut im = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let a = self[(i, j)];
                let b = self[(j, i)].conj();
                let h = (a + b) * 0.5;
                // (a − b)/(2i) = −i(a − b)/2
                let k = (a - b) * c64(0.0, -0.5);
                if i == j {
                    re[(i, i)] = c64(h.re, 0.0);
                    im[(i, i)] = c64(k.re, 0.0);
                } else {
                    re[(i, j)] = h;
                    re[(j, i)] = h.conj();
                    im[(i, j)] = k;
                    im[(j, i)] = k.conj();
                }
            }
        }
        (re, im)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = CScalar;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &CScalar {
        &self.data[i * self.order + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CScalar {
        &mut self.data[i * self.order + j]
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat({})[", self.order)?;
        for row in self.rows() {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// The operator impls panic on mismatched orders; `mul` is the checked form.
impl Mul for &CMat {
    type Output = CMat;

    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.order, rhs.order, "order mismatch in product");
        let n = self.order;
        let mut out = vec![c64(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == c64(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        CMat {
            order: n,
            data: out,
        }
    }
}

impl Add for &CMat {
    type Output = CMat;

    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.order, rhs.order, "order mismatch in sum");
        CMat {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;

    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.order, rhs.order, "order mismatch in difference");
        CMat {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &CMat {
    type Output = CMat;

    fn neg(self) -> CMat {
        CMat {
            order: self.order,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }
}

/// A unitary matrix together with its measured defect `‖U*U − I‖_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryWitness {
    pub u: CMat,
    pub defect: f64,
}

impl UnitaryWitness {
    pub fn identity(order: usize) -> Self {
        Self {
            u: CMat::identity(order),
            defect: 0.0,
        }
    }

    /// Measures the defect and rejects anything above [`UNITARY_TOL`].
    pub fn certify(u: CMat) -> Result<Self> {
        let defect = (&u.adjoint() * &u).distance(&CMat::identity(u.order()));
        if defect > UNITARY_TOL {
            return Err(Error::Inconsistency(format!(
                "unitary defect {defect:e} exceeds {UNITARY_TOL:e}"
            )));
        }
        Ok(Self { u, defect })
    }

    /// `U* M U`.
    pub fn conjugate(&self, m: &CMat) -> CMat {
        &(&self.u.adjoint() * m) * &self.u
    }

    /// `U M U*`.
    pub fn unconjugate(&self, m: &CMat) -> CMat {
        &(&self.u * m) * &self.u.adjoint()
    }

    /// Composition `self · other`, re-certified.
    pub fn then(&self, other: &UnitaryWitness) -> Result<Self> {
        Self::certify(&self.u * &other.u)
    }
}

fn same_order(a: &CMat, b: &CMat) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    Ok(())
}

pub(crate) fn require_order(a: &CMat, order: usize) -> Result<()> {
    if a.order() != order {
        return Err(Error::WrongOrder {
            expected: order,
            got: a.order(),
        });
    }
    Ok(())
}

/// Checked matrix product.
pub fn mul(a: &CMat, b: &CMat) -> Result<CMat> {
    same_order(a, b)?;
    Ok(a * b)
}

pub fn adjoint(a: &CMat) -> CMat {
    let n = a.order();
    CMat::from_fn(n, |i, j| a[(j, i)].conj())
}

/// `‖AB − BA‖_F / max(1, ‖A‖_F‖B‖_F)`.
pub fn commutation_defect(a: &CMat, b: &CMat) -> Result<f64> {
    same_order(a, b)?;
    let comm = (a * b).distance(&(b * a));
    Ok(comm / (a.frobenius() * b.frobenius()).max(1.0))
}

/// Eigenvalues of a 2×2 matrix, larger modulus first (ties: larger real
/// part, then larger imaginary part).
pub fn eig2(a: &CMat) -> Result<(CScalar, CScalar)> {
    require_order(a, 2)?;
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let mean = (p + s) * 0.5;
    let half_diff = (p - s) * 0.5;
    let delta = (half_diff * half_diff + q * r).sqrt();
    // Pick the sign that adds constructively, then recover the other root
    // from the determinant.
    let big = if (mean.conj() * delta).re >= 0.0 {
        mean + delta
    } else {
        mean - delta
    };
    let small = if big.norm() > 0.0 {
        (p * s - q * r) / big
    } else {
        c64(0.0, 0.0)
    };
    Ok(order_eigenpair(big, small))
}

fn order_eigenpair(x: CScalar, y: CScalar) -> (CScalar, CScalar) {
    let key = |z: CScalar| (z.norm(), z.re, z.im);
    let (kx, ky) = (key(x), key(y));
    if kx.partial_cmp(&ky) == Some(std::cmp::Ordering::Less) {
        (y, x)
    } else {
        (x, y)
    }
}

/// Unitary triangularization `U*AU = T` of a 2×2 matrix, with
/// `diag(T) = eig2(A)`.
pub fn schur2(a: &CMat) -> Result<(UnitaryWitness, CMat)> {
    let (l1, l2) = eig2(a)?;
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let cand1 = [q, l1 - p];
    let cand2 = [l1 - s, r];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let (v, nrm) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    if nrm == 0.0 {
        // A is scalar.
        return Ok((UnitaryWitness::identity(2), a.clone()));
    }
    let nrm = nrm.sqrt();
    let mut x = [v[0] / nrm, v[1] / nrm];
    // Fix the phase: first nonzero component real positive.
    let pivot = if x[0].norm() > 0.0 { x[0] } else { x[1] };
    let phase = pivot.conj() / pivot.norm();
    x = [x[0] * phase, x[1] * phase];
    let y = if x[0].norm() > 0.0 {
        [-x[1].conj(), x[0].conj()]
    } else {
        [c64(1.0, 0.0), c64(0.0, 0.0)]
    };
    let u = CMat::from_rows(&[[x[0], y[0]], [x[1], y[1]]])?;
    let witness = UnitaryWitness::certify(u)?;
    let mut t = witness.conjugate(a);
    t[(0, 0)] = l1;
    t[(1, 1)] = l2;
    t[(1, 0)] = c64(0.0, 0.0);
    Ok((witness, t))
}

/// Largest eigenvalue of a Hermitian matrix by cyclic Jacobi rotations.
pub fn lambda_max_hermitian(h: &CMat) -> Result<f64> {
    let defect = h.hermitian_defect();
    if defect > 1e-12 {
        return Err(Error::NotHermitian { defect });
    }
    let mut work = h.as_slice().to_vec();
    Ok(jacobi_lambda_max(&mut work, h.order()))
}

/// Jacobi iteration on a row-major Hermitian buffer, destroyed in place.
///
/// The buffer must be exactly Hermitian; callers inside the crate build it
/// that way, which is why this skips the check.
pub(crate) fn jacobi_lambda_max(h: &mut [CScalar], n: usize) -> f64 {
    debug_assert_eq!(h.len(), n * n);
    if n == 1 {
        return h[0].re;
    }
    let total: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let target = (JACOBI_REL_TOL * JACOBI_REL_TOL) * total;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * h[i * n + j].norm_sqr();
            }
        }
        if off <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(h, n, p, q);
            }
        }
    }
    (0..n)
        .map(|i| h[i * n + i].re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// One complex Jacobi rotation annihilating `h[p][q]`.
#[inline]
fn rotate(h: &mut [CScalar], n: usize, p: usize, q: usize) {
    let hpq = h[p * n + q];
    let mag = hpq.norm();
    if mag == 0.0 {
        return;
    }
    let app = h[p * n + p].re;
    let aqq = h[q * n + q].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // e^{-iα} with α = arg h[p][q]
    let emi = hpq.conj() / mag;
    let epi = emi.conj();
    // columns: H ← H J with J = [[c, s], [−s e^{−iα}, c e^{−iα}]]
    for k in 0..n {
        let hkp = h[k * n + p];
        let hkq = h[k * n + q];
        h[k * n + p] = hkp * c - hkq * emi * s;
        h[k * n + q] = hkp * s + hkq * emi * c;
    }
    // rows: H ← J* H
    for k in 0..n {
        let hpk = h[p * n + k];
        let hqk = h[q * n + k];
        h[p * n + k] = hpk * c - hqk * epi * s;
        h[q * n + k] = hpk * s + hqk * epi * c;
    }
    h[p * n + p] = c64(app - t * mag, 0.0);
    h[q * n + q] = c64(aqq + t * mag, 0.0);
    h[p * n + q] = c64(0.0, 0.0);
    h[q * n + p] = c64(0.0, 0.0);
}

/// Largest eigenvalue of a row-major Hermitian buffer by Householder
/// reduction to real tridiagonal form, destroyed in place.
///
/// Same contract as [`jacobi_lambda_max`]; several times faster from order
/// three up, which matters for support-function scans. `upper_hint`, when it
/// really is an upper bound, starts a Newton iteration close to the answer.
pub(crate) fn tridiagonal_lambda_max(h: &mut [CScalar], n: usize, upper_hint: Option<f64>) -> f64 {
    debug_assert_eq!(h.len(), n * n);
    match n {
        1 => return h[0].re,
        2 => {
            let (a, d) = (h[0].re, h[3].re);
            let half = 0.5 * (a - d);
            return 0.5 * (a + d) + half.hypot(h[1].norm());
        }
        _ => {}
    }
    let mut t = Tridiagonal::default();
    t.reduce(h, n);
    t.top_eigenvalue(upper_hint)
}

/// Real symmetric tridiagonal matrix kept as diagonal and squared couplings.
struct Tridiagonal {
    n: usize,
    diag: [f64; MAX_ORDER],
    off2: [f64; MAX_ORDER],
}

impl Default for Tridiagonal {
    fn default() -> Self {
        Self {
            n: 0,
            diag: [0.0; MAX_ORDER],
            off2: [0.0; MAX_ORDER],
        }
    }
}

impl Tridiagonal {
    fn reduce(&mut self, h: &mut [CScalar], n: usize) {
        self.n = n;
        let mut v = [c64(0.0, 0.0); MAX_ORDER];
        let mut w = [c64(0.0, 0.0); MAX_ORDER];
        for k in 0..n - 1 {
            self.diag[k] = h[k * n + k].re;
            let m = n - k - 1;
            let norm2: f64 = (k + 1..n).map(|i| h[i * n + k].norm_sqr()).sum();
            self.off2[k] = norm2;
            if m == 1 || norm2 == 0.0 {
                continue;
            }
            // reflector sending h[k+1.., k] to a multiple of e₁
            let x0 = h[(k + 1) * n + k];
            let phase = if x0.norm() > 0.0 {
                x0 / x0.norm()
            } else {
                c64(1.0, 0.0)
            };
            for (t, i) in (k + 1..n).enumerate() {
                v[t] = h[i * n + k];
            }
            v[0] += phase * norm2.sqrt();
            let vnorm = v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut v[..m] {
                *z /= vnorm;
            }
            // trailing block A ← (I − 2vv*) A (I − 2vv*) = A − vw* − wv*
            let base = k + 1;
            let mut kappa = 0.0;
            for r in 0..m {
                let row = &h[(base + r) * n + base..(base + r) * n + n];
                let p: CScalar = row.iter().zip(&v[..m]).map(|(a, b)| a * b).sum();
                w[r] = p;
                kappa += (v[r].conj() * p).re;
            }
            for r in 0..m {
                w[r] = (w[r] - v[r] * kappa) * 2.0;
            }
            for r in 0..m {
                for c in 0..m {
                    let idx = (base + r) * n + base + c;
                    h[idx] -= v[r] * w[c].conj() + w[r] * v[c].conj();
                }
            }
        }
        self.diag[n - 1] = h[(n - 1) * n + n - 1].re;
    }

    fn frobenius(&self) -> f64 {
        let n = self.n;
        let d: f64 = self.diag[..n].iter().map(|x| x * x).sum();
        let e: f64 = self.off2[..n - 1].iter().sum();
        (d + 2.0 * e).sqrt()
    }

    /// Pivots of the LDLᵀ factorization of `T − xI`. Returns `Σ q'ᵢ/qᵢ`, the
    /// derivative of `log|det(T − xI)|`, when every pivot is negative, that
    /// is when `x > λ_max`.
    fn log_det_slope_above(&self, x: f64) -> Option<f64> {
        let mut q = 1.0;
        let mut dq = 0.0;
        let mut slope = 0.0;
        for i in 0..self.n {
            let (next, dnext) = if i == 0 {
                (self.diag[0] - x, -1.0)
            } else {
                let e2 = self.off2[i - 1];
                (self.diag[i] - x - e2 / q, -1.0 + e2 * dq / (q * q))
            };
            if next.is_nan() || next >= 0.0 {
                return None;
            }
            q = next;
            dq = dnext;
            slope += dq / q;
        }
        Some(slope)
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64, pivot_floor: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.n {
            let coupling = if i > 0 { self.off2[i - 1] / q } else { 0.0 };
            q = self.diag[i] - x - coupling;
            if q.abs() < pivot_floor {
                q = -pivot_floor;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off2[i - 1].sqrt() } else { 0.0 };
            let right = if i + 1 < n { self.off2[i].sqrt() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    fn top_eigenvalue(&self, upper_hint: Option<f64>) -> f64 {
        let n = self.n;
        let scale = self.frobenius();
        if scale == 0.0 {
            return 0.0;
        }
        let tol = 4.0 * f64::EPSILON * scale;
        let (lo, hi) = self.gershgorin();
        // Newton on det(xI − T) from above decreases monotonically to λ_max,
        // and its step δ brackets the error: δ ≤ x − λ_max ≤ nδ.
        let mut x = match upper_hint {
            Some(u) if u < hi && self.log_det_slope_above(u).is_some() => u,
            _ => hi + tol,
        };
        let mut floor = lo;
        for _ in 0..NEWTON_MAX_STEPS {
            let Some(slope) = self.log_det_slope_above(x) else {
                break;
            };
            let step = 1.0 / slope;
            floor = floor.max(x - n as f64 * step);
            if n as f64 * step <= tol {
                return x - step;
            }
            let next = x - step;
            if self.log_det_slope_above(next).is_none() {
                // rounding pushed the iterate below λ_max
                return self.bisect_top(floor, x, scale);
            }
            x = next;
        }
        // slow convergence on a tight cluster at the top
        self.bisect_top(floor, x, scale)
    }

    fn bisect_top(&self, mut lo: f64, mut hi: f64, scale: f64) -> f64 {
        let n = self.n;
        let pivot_floor = f64::EPSILON * scale * 1e-3;
        if self.count_below(lo, pivot_floor) == n {
            lo -= scale;
        }
        for _ in 0..128 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid, pivot_floor) == n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Spectral norm `√λ_max(A*A)`.
pub fn op_norm(a: &CMat) -> f64 {
    let gram = &a.adjoint() * a;
    let mut work = gram.as_slice().to_vec();
    jacobi_lambda_max(&mut work, a.order()).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nilpotent() -> CMat {
        CMat::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap()
    }

    fn c_mat(r: f64) -> CMat {
        let d = (1.0 - r * r).sqrt();
        CMat::from_real_rows(&[[d, 2.0 * r], [0.0, -d]]).unwrap()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            CMat::new(0, vec![]),
            Err(Error::UnsupportedOrder(0))
        ));
        assert!(matches!(
            CMat::new(17, vec![]),
            Err(Error::UnsupportedOrder(17))
        ));
        assert!(matches!(
            CMat::new(2, vec![c64(0.0, 0.0); 3]),
            Err(Error::EntryCount {
                expected: 4,
                got: 3
            })
        ));
        let mut d = vec![c64(0.0, 0.0); 4];
        d[3] = c64(f64::NAN, 0.0);
        assert!(matches!(
            CMat::new(2, d),
            Err(Error::NonFinite { row: 1, col: 1 })
        ));
    }

    #[test]
    fn products() {
        let x = CMat::from_rows(&[
            [c64(1.0, 2.0), c64(3.0, 0.0)],
            [c64(0.0, -1.0), c64(4.0, 4.0)],
        ])
        .unwrap();
        assert_eq!(mul(&CMat::identity(2), &x).unwrap(), x);
        assert_eq!(
            mul(&CMat::unit(4, 0, 1), &CMat::unit(4, 1, 3)).unwrap(),
            CMat::unit(4, 0, 3)
        );
        let lower = CMat::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(mul(&nilpotent(), &lower).unwrap(), CMat::unit(2, 0, 0));
        assert!(matches!(
            mul(&CMat::identity(2), &CMat::identity(3)),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn adjoints() {
        let h = CMat::from_rows(&[
            [c64(1.0, 0.0), c64(2.0, -1.0)],
            [c64(2.0, 1.0), c64(-3.0, 0.0)],
        ])
        .unwrap();
        assert_eq!(adjoint(&h), h);
        assert_eq!(
            adjoint(&nilpotent()),
            CMat::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap()
        );
        let i = CMat::scalar(2, c64(0.0, 1.0));
        assert_eq!(adjoint(&i), CMat::scalar(2, c64(0.0, -1.0)));
    }

    #[test]
    fn commutation_defects() {
        let a = CMat::from_rows(&[
            [c64(1.0, 1.0), c64(2.0, 0.0)],
            [c64(0.5, 0.0), c64(-1.0, 0.3)],
        ])
        .unwrap();
        let a2 = &a * &a;
        assert!(commutation_defect(&a, &a2).unwrap() < 1e-15);
        let e = |i, j| CMat::unit(4, i, j);
        let x = &e(0, 1) + &e(2, 3);
        let y = &e(0, 2) + &e(1, 3);
        assert_eq!(commutation_defect(&x, &y).unwrap(), 0.0);
        let lower = CMat::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(commutation_defect(&nilpotent(), &lower).unwrap() > 0.5);
    }

    #[test]
    fn eig2_examples() {
        let (a, b) = eig2(&CMat::from_real_rows(&[[1.0, 1.0], [0.0, 2.0]]).unwrap()).unwrap();
        assert_eq!((a, b), (c64(2.0, 0.0), c64(1.0, 0.0)));
        let (a, b) = eig2(&nilpotent()).unwrap();
        assert_eq!((a.norm(), b.norm()), (0.0, 0.0));
        let (a, b) = eig2(&c_mat(0.6)).unwrap();
        assert!((a - c64(0.8, 0.0)).norm() < 1e-15);
        assert!((b - c64(-0.8, 0.0)).norm() < 1e-15);
        assert!(eig2(&CMat::identity(3)).is_err());
    }

    #[test]
    fn schur2_examples() {
        let t = CMat::from_rows(&[
            [c64(2.0, 1.0), c64(1.0, -1.0)],
            [c64(0.0, 0.0), c64(1.0, 0.0)],
        ])
        .unwrap();
        let (u, tt) = schur2(&t).unwrap();
        assert_eq!(u.u, CMat::identity(2));
        assert!(tt.max_abs_diff(&t) < 1e-15);

        let lower = CMat::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let (u, tt) = schur2(&lower).unwrap();
        assert_eq!(
            u.u,
            CMat::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
        );
        assert_eq!(tt, nilpotent());

        let (u, tt) = schur2(&CMat::scalar(2, c64(0.0, 3.0))).unwrap();
        assert_eq!(u.u, CMat::identity(2));
        assert_eq!(tt, CMat::scalar(2, c64(0.0, 3.0)));
    }

    #[test]
    fn lambda_max_examples() {
        let d = CMat::from_real_rows(&[[1.0, 0.0], [0.0, 3.0]]).unwrap();
        assert_eq!(lambda_max_hermitian(&d).unwrap(), 3.0);
        let x = CMat::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!((lambda_max_hermitian(&x).unwrap() - 1.0).abs() < 1e-15);
        let re_c = CMat::from_real_rows(&[[0.8, 0.6], [0.6, -0.8]]).unwrap();
        assert!((lambda_max_hermitian(&re_c).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            lambda_max_hermitian(&nilpotent()),
            Err(Error::NotHermitian { .. })
        ));
        assert_eq!(lambda_max_hermitian(&CMat::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn lambda_max_complex_hermitian() {
        // [[2, i], [−i, 2]] has eigenvalues 1 and 3
        let h = CMat::from_rows(&[
            [c64(2.0, 0.0), c64(0.0, 1.0)],
            [c64(0.0, -1.0), c64(2.0, 0.0)],
        ])
        .unwrap();
        assert!((lambda_max_hermitian(&h).unwrap() - 3.0).abs() < 1e-14);
        // circulant-like 3x3 with known spectrum: J − I has eigenvalues 2, −1, −1
        let j = CMat::from_fn(3, |i, k| if i == k { c64(0.0, 0.0) } else { c64(1.0, 0.0) });
        assert!((lambda_max_hermitian(&j).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn op_norm_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMat::from_rows(&[[c64(s, 0.0), c64(0.0, s)], [c64(0.0, s), c64(s, 0.0)]]).unwrap();
        assert!((op_norm(&u) - 1.0).abs() < 1e-15);
        assert!((op_norm(&nilpotent()) - 1.0).abs() < 1e-15);
        let d = CMat::diag(&[c64(2.0, 0.0), c64(0.0, -3.0)]);
        assert!((op_norm(&d) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn power_by_squaring() {
        let a = c_mat(0.6);
        let direct = &(&a * &a) * &a;
        assert!(a.pow(3).max_abs_diff(&direct) < 1e-15);
        assert_eq!(a.pow(0), CMat::identity(2));
    }

    #[test]
    fn scalar_and_normal_predicates() {
        assert!(CMat::scalar(3, c64(1.0, -2.0)).is_scalar(1e-10));
        assert!(CMat::zeros(2).is_scalar(1e-10));
        assert!(!nilpotent().is_scalar(1e-10));
        assert!(CMat::diag(&[c64(1.0, 0.0), c64(0.0, 5.0)]).normality_defect() < 1e-15);
        assert!(nilpotent().normality_defect() > 0.5);
    }

    #[test]
    fn tridiagonal_matches_jacobi() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in 1..=MAX_ORDER {
            for _ in 0..20 {
                let a = CMat::from_fn(n, |_, _| c64(next(), next()));
                let h = (&a + &a.adjoint()).scale_real(0.5);
                let mut x = h.as_slice().to_vec();
                let mut y = h.as_slice().to_vec();
                let fast = tridiagonal_lambda_max(&mut x, n, None);
                let slow = jacobi_lambda_max(&mut y, n);
                assert!(
                    (fast - slow).abs() <= 1e-13 * (1.0 + h.frobenius()),
                    "{n}: {fast} vs {slow}"
                );
            }
        }
        let g = CMat::from_fn(6, |i, j| {
            c64((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i as f64) - (j as f64))
        });
        let h = &g + &g.adjoint();
        let exact = lambda_max_hermitian(&h).unwrap();
        for hint in [
            exact + 1e-3,
            exact + 10.0,
            exact - 1e-3,
            exact - 10.0,
            f64::NAN,
        ] {
            let mut x = h.as_slice().to_vec();
            let got = tridiagonal_lambda_max(&mut x, 6, Some(hint));
            assert!(
                (got - exact).abs() < 1e-13 * h.frobenius(),
                "hint {hint}: {got} vs {exact}"
            );
        }
        let mut zero = vec![c64(0.0, 0.0); 9];
        assert_eq!(tridiagonal_lambda_max(&mut zero, 3, None), 0.0);
        let mut diag = CMat::diag(&[c64(-5.0, 0.0), c64(2.0, 0.0), c64(2.0, 0.0), c64(-1.0, 0.0)])
            .as_slice()
            .to_vec();
        assert!((tridiagonal_lambda_max(&mut diag, 4, None) - 2.0).abs() < 1e-14);
    }
}
