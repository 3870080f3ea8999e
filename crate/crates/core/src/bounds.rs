//! Numerical-radius inequalities, the equality cases of the commuting 2×2
//! product bound, and randomized ratio search.

use crate::error::{Error, Result};
use crate::family::{FamilyRegistry, PairSample};
use crate::mat::{commutation_defect, op_norm, require_order, schur2, CMat};
use crate::numrange::{radius2_closed, radius_support, DEFAULT_GRID};

/// `|ratio − 1|` at or below this counts as equality.
pub const EQUALITY_TOL: f64 = 1e-7;
/// Relative slack granted to every inequality check.
pub const THEOREM_SLACK: f64 = 1e-9;
/// Commutation defect accepted by the commuting checks.
pub const COMMUTE_TOL: f64 = 1e-10;
/// Relative tolerance for "scalar" and "normal".
pub const STRUCTURE_TOL: f64 = 1e-10;

const SANDWICH_SLACK: f64 = 1e-10;

/// `w(A)`: closed form for order two, support function otherwise.
pub fn radius(a: &CMat) -> Result<f64> {
    if a.order() == 2 {
        radius2_closed(a)
    } else {
        radius_support(a, DEFAULT_GRID)
    }
}

fn within(lhs: f64, rhs: f64, rel: f64) -> bool {
    lhs <= rhs + rel * rhs.abs().max(1.0)
}

fn require_commuting(a: &CMat, b: &CMat) -> Result<f64> {
    let defect = commutation_defect(a, b)?;
    if defect > COMMUTE_TOL {
        return Err(Error::NonCommuting { defect });
    }
    Ok(defect)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EqualityClass {
    /// `A = μI`.
    ScalarA,
    /// `B = μI`.
    ScalarB,
    /// A common unitary diagonalizes both with `|a₁| ≥ |a₂|` and `|b₁| ≥ |b₂|`.
    SimulDiagOrdered,
    Strict,
}

impl EqualityClass {
    pub fn name(self) -> &'static str {
        match self {
            Self::ScalarA => "ScalarA",
            Self::ScalarB => "ScalarB",
            Self::SimulDiagOrdered => "SimulDiagOrdered",
            Self::Strict => "Strict",
        }
    }

    pub fn is_equality(self) -> bool {
        self != Self::Strict
    }
}

/// Outcome of checking `w(AB) ≤ w(A)w(B)` for one commuting 2×2 pair.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictReport {
    pub wa: f64,
    pub wb: f64,
    pub wab: f64,
    /// `w(AB)/(w(A)w(B))`; `None` when either factor is zero.
    pub ratio: Option<f64>,
    pub equality_class: EqualityClass,
    pub commutation_defect: f64,
    pub holds: bool,
}

/// Checks the product bound on a commuting 2×2 pair and classifies equality.
pub fn verify_submult_2x2(a: &CMat, b: &CMat) -> Result<VerdictReport> {
    require_order(a, 2)?;
    require_order(b, 2)?;
    let defect = require_commuting(a, b)?;
    let wa = radius2_closed(a)?;
    let wb = radius2_closed(b)?;
    let wab = radius2_closed(&(a * b))?;
    let equality_class = classify_equality(a, b)?;
    let ratio = if wa > 0.0 && wb > 0.0 {
        Some(wab / (wa * wb))
    } else {
        None
    };
    let holds = ratio.is_none_or(|q| q <= 1.0 + THEOREM_SLACK);
    Ok(VerdictReport {
        wa,
        wb,
        wab,
        ratio,
        equality_class,
        commutation_defect: defect,
        holds,
    })
}

/// Which equality case of the commuting 2×2 product bound a pair falls in.
///
/// Zero matrices count as scalar. Two normal matrices are ordered when their
/// shared eigenbasis sorts both eigenvalue moduli the same way; a relative
/// modulus gap below [`EQUALITY_TOL`] in either factor leaves the order free.
pub fn classify_equality(a: &CMat, b: &CMat) -> Result<EqualityClass> {
    require_order(a, 2)?;
    require_order(b, 2)?;
    require_commuting(a, b)?;
    if a.is_scalar(STRUCTURE_TOL) {
        return Ok(EqualityClass::ScalarA);
    }
    if b.is_scalar(STRUCTURE_TOL) {
        return Ok(EqualityClass::ScalarB);
    }
    if a.normality_defect() > STRUCTURE_TOL || b.normality_defect() > STRUCTURE_TOL {
        return Ok(EqualityClass::Strict);
    }
    // A is normal and not scalar, so its Schur basis diagonalizes B as well
    let (u, ta) = schur2(a)?;
    let tb = u.conjugate(b);
    let (a1, a2) = (ta[(0, 0)].norm(), ta[(1, 1)].norm());
    let (b1, b2) = (tb[(0, 0)].norm(), tb[(1, 1)].norm());
    let gap = |x: f64, y: f64| {
        let top = x.max(y);
        if top == 0.0 {
            0.0
        } else {
            (x - y).abs() / top
        }
    };
    let aligned =
        (a1 - a2) * (b1 - b2) >= 0.0 || gap(a1, a2) <= EQUALITY_TOL || gap(b1, b2) <= EQUALITY_TOL;
    Ok(if aligned {
        EqualityClass::SimulDiagOrdered
    } else {
        EqualityClass::Strict
    })
}

/// `w(A) ≤ ‖A‖ ≤ 2w(A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichCheck {
    pub radius: f64,
    pub norm: f64,
    pub holds: bool,
}

pub fn check_sandwich(a: &CMat) -> Result<SandwichCheck> {
    let radius = radius(a)?;
    let norm = op_norm(a);
    let slack = SANDWICH_SLACK * norm.max(1.0);
    let holds = radius <= norm + slack && norm <= 2.0 * radius + slack;
    Ok(SandwichCheck {
        radius,
        norm,
        holds,
    })
}

/// `w(Aᵐ) ≤ w(A)ᵐ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCheck {
    pub m: u32,
    pub radius_power: f64,
    pub radius_to_m: f64,
    pub holds: bool,
}

pub fn check_power(a: &CMat, m: u32) -> Result<PowerCheck> {
    if m == 0 {
        return Err(Error::InvalidArgument("power must be at least 1".into()));
    }
    let radius_power = radius(&a.pow(m))?;
    let radius_to_m = radius(a)?.powi(m as i32);
    Ok(PowerCheck {
        m,
        radius_power,
        radius_to_m,
        holds: within(radius_power, radius_to_m, THEOREM_SLACK),
    })
}

/// `w(AB) ≤ c·w(A)w(B)` for some constant `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductCheck {
    pub wa: f64,
    pub wb: f64,
    pub wab: f64,
    pub constant: f64,
    pub holds: bool,
}

impl ProductCheck {
    fn new(a: &CMat, b: &CMat, constant: f64) -> Result<Self> {
        let wa = radius(a)?;
        let wb = radius(b)?;
        let wab = radius(&(a * b))?;
        Ok(Self {
            wa,
            wb,
            wab,
            constant,
            holds: within(wab, constant * wa * wb, THEOREM_SLACK),
        })
    }

    pub fn ratio(&self) -> Option<f64> {
        let denom = self.wa * self.wb;
        (denom > 0.0).then(|| self.wab / denom)
    }
}

/// `w(AB) ≤ 2w(A)w(B)` for commuting `A, B`, plus the identity
/// `w((A+B)² − (A−B)²) = 4w(AB)` it is derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutingCheck {
    pub product: ProductCheck,
    /// `w((A+B)² − (A−B)²)`.
    pub radius_difference: f64,
    pub identity_holds: bool,
    pub holds: bool,
}

pub fn check_commuting_factor2(a: &CMat, b: &CMat) -> Result<CommutingCheck> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    require_commuting(a, b)?;
    let product = ProductCheck::new(a, b, 2.0)?;
    let sum = a + b;
    let diff = a - b;
    let radius_difference = radius(&(&(&sum * &sum) - &(&diff * &diff)))?;
    let four = 4.0 * product.wab;
    let identity_holds = (radius_difference - four).abs() <= THEOREM_SLACK * four.max(1.0);
    Ok(CommutingCheck {
        product,
        radius_difference,
        identity_holds,
        holds: product.holds && identity_holds,
    })
}

/// `w(AB) ≤ 4w(A)w(B)` with no commutation assumption.
pub fn check_general_factor4(a: &CMat, b: &CMat) -> Result<ProductCheck> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    ProductCheck::new(a, b, 4.0)
}

/// The chain `w(XY) ≤ ‖XY‖ ≤ ‖A‖‖B‖ = w(A)‖B‖ ≤ 2w(A)w(B)` for normal `A`,
/// checked for both `XY = AB` and `XY = BA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMixedCheck {
    pub wa: f64,
    pub wb: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub wab: f64,
    pub wba: f64,
    pub norm_ab: f64,
    pub norm_ba: f64,
    /// Every link of both chains.
    pub chain_holds: bool,
    /// `w(AB) ≤ w(A)w(B)` and `w(BA) ≤ w(A)w(B)`, checked when `B` is normal too.
    pub both_normal: Option<bool>,
    pub holds: bool,
}

pub fn check_normal_mixed(a_normal: &CMat, b: &CMat) -> Result<NormalMixedCheck> {
    if a_normal.order() != b.order() {
        return Err(Error::DimensionMismatch {
            left: a_normal.order(),
            right: b.order(),
        });
    }
    let defect = a_normal.normality_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::NotNormal { defect });
    }
    let a = a_normal;
    let wa = radius(a)?;
    let wb = radius(b)?;
    let norm_a = op_norm(a);
    let norm_b = op_norm(b);
    let ab = a * b;
    let ba = b * a;
    let wab = radius(&ab)?;
    let wba = radius(&ba)?;
    let norm_ab = op_norm(&ab);
    let norm_ba = op_norm(&ba);

    let tol = THEOREM_SLACK;
    let product_norms = norm_a * norm_b;
    let mut chain_holds =
        (norm_a - wa).abs() <= tol * norm_a.max(1.0) && within(product_norms, 2.0 * wa * wb, tol);
    for (w, n) in [(wab, norm_ab), (wba, norm_ba)] {
        chain_holds &= within(w, n, tol) && within(n, product_norms, tol);
    }
    let both_normal = (b.normality_defect() <= STRUCTURE_TOL)
        .then(|| within(wab, wa * wb, tol) && within(wba, wa * wb, tol));
    Ok(NormalMixedCheck {
        wa,
        wb,
        norm_a,
        norm_b,
        wab,
        wba,
        norm_ab,
        norm_ba,
        chain_holds,
        both_normal,
        holds: chain_holds && both_normal.unwrap_or(true),
    })
}

/// Best constant `c` with `w(AB) ≤ c·w(A)w(B)` proved for commuting pairs of
/// the given order: 1 up to order two, 2 beyond.
pub fn commuting_bound(order: usize) -> f64 {
    if order <= 2 {
        1.0
    } else {
        2.0
    }
}

/// `(E₁₂ + E₃₄, E₁₃ + E₂₄)` embedded in order `n ≥ 4`.
pub fn extremal_pair(order: usize) -> Result<(CMat, CMat)> {
    if order < 4 {
        return Err(Error::InvalidArgument(format!(
            "the extremal pair needs order at least 4, got {order}"
        )));
    }
    let a = &CMat::unit(order, 0, 1) + &CMat::unit(order, 2, 3);
    let b = &CMat::unit(order, 0, 2) + &CMat::unit(order, 1, 3);
    Ok((a, b))
}

/// `(Iₙ, Iₙ + N)` with `N` the upper shift: an equality case of every order.
pub fn scalar_seed_pair(order: usize) -> (CMat, CMat) {
    let a = CMat::identity(order);
    let mut b = CMat::identity(order);
    for i in 1..order {
        b = &b + &CMat::unit(order, i - 1, i);
    }
    (a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub order: usize,
    pub max_ratio: f64,
    pub argmax: PairSample,
    /// Pairs with a defined ratio, seeded pairs included.
    pub evaluated: usize,
    pub bound: f64,
    pub bound_holds: bool,
}

/// Family tag of the identity/shift pair that opens every search.
pub const SEEDED_SCALAR: &str = "seeded-scalar";
/// Family tag of the order ≥ 4 pair with ratio two.
pub const SEEDED_EXTREMAL: &str = "seeded-extremal";

fn commuting_ratio(a: &CMat, b: &CMat) -> Result<Option<f64>> {
    require_commuting(a, b)?;
    let wa = radius(a)?;
    let wb = radius(b)?;
    if wa == 0.0 || wb == 0.0 {
        return Ok(None);
    }
    Ok(Some(radius(&(a * b))? / (wa * wb)))
}

/// Largest `w(AB)/(w(A)w(B))` over seeded pairs and `samples` draws of
/// `family`; sample `k` uses stream `k` of `seed`.
///
/// The scalar seed pair is always evaluated, and for order ≥ 4 so is the
/// extremal pair. The first pair attaining the maximum is reported.
pub fn ratio_search(
    order: usize,
    samples: usize,
    family: &str,
    seed: u64,
) -> Result<SearchOutcome> {
    ratio_search_with(&FamilyRegistry::builtin(), order, samples, family, seed)
}

pub fn ratio_search_with(
    registry: &FamilyRegistry,
    order: usize,
    samples: usize,
    family: &str,
    seed: u64,
) -> Result<SearchOutcome> {
    let generator = registry.get(family)?;
    if samples > 0 && !generator.supports_order(order) {
        return Err(Error::FamilyOrder {
            family: generator.name(),
            order,
        });
    }
    let (a, b) = scalar_seed_pair(order);
    let mut seeded = vec![PairSample {
        a,
        b,
        seed,
        stream: 0,
        family: SEEDED_SCALAR.to_string(),
    }];
    if order >= 4 {
        let (a, b) = extremal_pair(order)?;
        seeded.push(PairSample {
            a,
            b,
            seed,
            stream: 0,
            family: SEEDED_EXTREMAL.to_string(),
        });
    }

    let mut best: Option<(f64, PairSample)> = None;
    let mut evaluated = 0;
    let mut consider = |sample: PairSample| -> Result<()> {
        if let Some(q) = commuting_ratio(&sample.a, &sample.b)? {
            evaluated += 1;
            if best.as_ref().is_none_or(|(top, _)| q > *top) {
                best = Some((q, sample));
            }
        }
        Ok(())
    };
    for sample in seeded {
        consider(sample)?;
    }
    for k in 0..samples as u64 {
        consider(registry.sample(family, order, seed, k)?)?;
    }
    let (max_ratio, argmax) = best.expect("the scalar seed pair has a ratio");
    let bound = commuting_bound(order);
    Ok(SearchOutcome {
        order,
        max_ratio,
        argmax,
        evaluated,
        bound,
        bound_holds: max_ratio <= bound + THEOREM_SLACK,
    })
}
