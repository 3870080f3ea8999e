//! Numerical range `W(A)` and numerical radius `w(A)`.
//!
//! Two independent routes are provided. The support-function route works
//! for any order: `w(A) = max_θ λ_max(Re(e^{−iθ}A))`, and `μ ∈ W(A)` iff
//! `Re(e^{−iθ}μ) ≤ λ_max(Re(e^{−iθ}A))` for every `θ`. The closed-form route
//! is specific to order two, where `W(A)` is an elliptical disk whose foci are
//! the eigenvalues and whose minor axis is `√(tr A*A − |λ₁|² − |λ₂|²)`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::mat::{c64, eig2, require_order, tridiagonal_lambda_max, CMat, CScalar};
use crate::optimize::{bisect, golden_max};

/// Default number of angles scanned by the support-function routines.
pub const DEFAULT_GRID: usize = 720;
/// Smallest grid accepted by [`radius_support`] and [`contains`].
pub const MIN_GRID: usize = 16;
/// Additive slack that makes boundary points members of `W(A)`.
pub const CONTAINS_TOL: f64 = 1e-9;

const REFINE_WIDTH: f64 = 1e-12;
const MAX_REFINED_LOBES: usize = 32;
const ELLIPSE_CELLS: usize = 256;

/// `θ ↦ λ_max(cos θ·Re A + sin θ·Im A)` with a reusable work buffer.
pub(crate) struct SupportFunction {
    order: usize,
    re: CMat,
    im: CMat,
    work: Vec<CScalar>,
    /// Lipschitz constant of the support function in θ.
    slope_bound: f64,
    last: Option<(f64, f64)>,
}

impl SupportFunction {
    pub(crate) fn new(a: &CMat) -> Self {
        let (re, im) = a.cartesian_parts();
        let n = a.order();
        Self {
            order: n,
            re,
            im,
            work: vec![c64(0.0, 0.0); n * n],
            slope_bound: a.frobenius(),
            last: None,
        }
    }

    pub(crate) fn eval(&mut self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let re = self.re.as_slice();
        let im = self.im.as_slice();
        for ((w, x), y) in self.work.iter_mut().zip(re).zip(im) {
            *w = x * c + y * s;
        }
        // |h(θ) − h(θ')| ≤ ‖A‖_F |θ − θ'|, so the previous value bounds this one
        let hint = self.last.map(|(t, v)| {
            let reach = self.slope_bound * (theta - t).abs();
            v + reach * (1.0 + 1e-12) + 1e-15 * self.slope_bound
        });
        let value = tridiagonal_lambda_max(&mut self.work, self.order, hint);
        self.last = Some((theta, value));
        value
    }
}

/// Support function `h_A(θ) = λ_max(Re(e^{−iθ}A))` of `W(A)` in direction `e^{iθ}`.
pub fn support(a: &CMat, theta: f64) -> f64 {
    SupportFunction::new(a).eval(theta)
}

/// Numerical radius by a grid scan of the support function followed by
/// golden-section refinement of every lobe that could hold the maximum.
pub fn radius_support(a: &CMat, grid: usize) -> Result<f64> {
    if grid < MIN_GRID {
        return Err(Error::GridTooCoarse(grid));
    }
    let scale = a.frobenius();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut sf = SupportFunction::new(a);
    let step = TAU / grid as f64;
    let values: Vec<f64> = (0..grid).map(|k| sf.eval(k as f64 * step)).collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let slack = 1e-14 * (1.0 + scale);
    if hi - lo <= slack {
        // W(A) is a disk centred at the origin (up to rounding)
        return Ok(hi.max(0.0));
    }
    // h(θ) ≥ w·cos(θ − θ*), so the grid under-reports any lobe maximum by
    // at most a factor cos(step/2) ≥ 1 − step²/8.
    let threshold = hi * (1.0 - step * step / 8.0) - slack;
    let mut lobes: Vec<usize> = (0..grid)
        .filter(|&k| {
            let v = values[k];
            v >= threshold && v >= values[(k + grid - 1) % grid] && v >= values[(k + 1) % grid]
        })
        .collect();
    lobes.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    lobes.truncate(MAX_REFINED_LOBES);

    let mut best = hi;
    for k in lobes {
        let centre = k as f64 * step;
        let (_, v) = golden_max(|t| sf.eval(t), centre - step, centre + step, REFINE_WIDTH);
        best = best.max(v);
    }
    Ok(best.max(0.0))
}

/// Half-plane membership test for `μ ∈ W(A)` over `grid` directions.
pub fn contains(a: &CMat, mu: CScalar, grid: usize) -> Result<bool> {
    if grid < MIN_GRID {
        return Err(Error::GridTooCoarse(grid));
    }
    let mut sf = SupportFunction::new(a);
    let step = TAU / grid as f64;
    Ok((0..grid).all(|k| {
        let theta = k as f64 * step;
        let projection = (CScalar::from_polar(1.0, -theta) * mu).re;
        projection <= sf.eval(theta) + CONTAINS_TOL
    }))
}

/// The numerical range of a 2×2 matrix as an elliptical disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseDisk {
    pub center: CScalar,
    pub foci: (CScalar, CScalar),
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Direction of the major axis, in `[0, π)`.
    pub rotation: f64,
}

impl EllipseDisk {
    /// Boundary point at parameter `θ`.
    pub fn point_at(&self, theta: f64) -> CScalar {
        let local = c64(self.semi_major * theta.cos(), self.semi_minor * theta.sin());
        self.center + CScalar::from_polar(1.0, self.rotation) * local
    }

    /// Support function of the disk in direction `e^{iθ}`.
    pub fn support(&self, theta: f64) -> f64 {
        let phi = theta - self.rotation;
        let reach = (self.semi_major * phi.cos()).hypot(self.semi_minor * phi.sin());
        (CScalar::from_polar(1.0, -theta) * self.center).re + reach
    }

    /// Distance between the foci divided by two.
    pub fn half_focal_distance(&self) -> f64 {
        (self.foci.0 - self.foci.1).norm() * 0.5
    }

    /// Membership with additive slack `tol` on the defining quadratic form.
    pub fn contains_point(&self, mu: CScalar, tol: f64) -> bool {
        let local = CScalar::from_polar(1.0, -self.rotation) * (mu - self.center);
        let (a, b) = (self.semi_major, self.semi_minor);
        if b == 0.0 {
            return local.im.abs() <= tol && local.re.abs() <= a + tol;
        }
        let q = (local.re / a).powi(2) + (local.im / b).powi(2);
        q <= 1.0 + tol / b.min(a)
    }

    /// Largest modulus over the disk.
    ///
    /// `|p(θ)|²` is a trigonometric polynomial of degree two, so its
    /// derivative has at most four zeros. Sign changes of the derivative on a
    /// fixed grid bracket them; bisection pins each one down.
    pub fn max_modulus(&self) -> f64 {
        let local = CScalar::from_polar(1.0, -self.rotation) * self.center;
        let (x0, y0) = (local.re, local.im);
        let (a, b) = (self.semi_major, self.semi_minor);
        let g = |t: f64| {
            let (s, c) = t.sin_cos();
            (x0 + a * c).powi(2) + (y0 + b * s).powi(2)
        };
        let dg = |t: f64| {
            let (s, c) = t.sin_cos();
            -2.0 * a * s * (x0 + a * c) + 2.0 * b * c * (y0 + b * s)
        };
        let step = TAU / ELLIPSE_CELLS as f64;
        let mut best_k = 0;
        let mut best = g(0.0);
        let mut d_prev = dg(0.0);
        for k in 0..ELLIPSE_CELLS {
            let t0 = k as f64 * step;
            let t1 = t0 + step;
            let d_next = dg(t1);
            let v = g(t0);
            if v > best {
                best = v;
                best_k = k;
            }
            if d_prev > 0.0 && d_next <= 0.0 {
                best = best.max(g(bisect(dg, t0, t1)));
            }
            d_prev = d_next;
        }
        // two stationary points can share a cell; refine around the best sample too
        let centre = best_k as f64 * step;
        let (_, v) = golden_max(g, centre - step, centre + step, REFINE_WIDTH);
        best.max(v).sqrt()
    }
}

/// Closed-form numerical range of a 2×2 matrix.
pub fn ellipse2(a: &CMat) -> Result<EllipseDisk> {
    require_order(a, 2)?;
    let (l1, l2) = eig2(a)?;
    let tr_gram = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
    let minor_sq = tr_gram - l1.norm_sqr() - l2.norm_sqr();
    let semi_minor = 0.5 * minor_sq.max(0.0).sqrt();
    let diff = l1 - l2;
    let half_focal = 0.5 * diff.norm();
    let semi_major = semi_minor.hypot(half_focal);
    let rotation = if diff.norm() <= 1e-15 * (1.0 + tr_gram.sqrt()) {
        0.0
    } else {
        diff.arg().rem_euclid(PI)
    };
    // arg can land on π after rem_euclid rounding
    let rotation = if rotation >= PI { 0.0 } else { rotation };
    Ok(EllipseDisk {
        center: (l1 + l2) * 0.5,
        foci: (l1, l2),
        semi_major,
        semi_minor,
        rotation,
    })
}

/// Numerical radius of a 2×2 matrix from its elliptical range.
pub fn radius2_closed(a: &CMat) -> Result<f64> {
    Ok(ellipse2(a)?.max_modulus())
}

/// Sampled boundary of `W(A)` for a 2×2 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub samples: Vec<(f64, CScalar)>,
}

/// `m` equally spaced boundary samples of `W(A)`, starting at the end of the
/// major axis.
pub fn boundary(a: &CMat, m: usize) -> Result<BoundaryTrace> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!(
            "boundary needs at least 4 points, got {m}"
        )));
    }
    let disk = ellipse2(a)?;
    let step = TAU / m as f64;
    let samples = (0..m)
        .map(|k| {
            let theta = k as f64 * step;
            (theta, disk.point_at(theta))
        })
        .collect();
    Ok(BoundaryTrace { samples })
}
