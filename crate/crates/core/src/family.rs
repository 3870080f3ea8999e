//! Seeded generators of commuting matrix pairs, registered by name.
//!
//! Every sample is drawn from a ChaCha stream selected by `(seed, stream)`,
//! so sample `k` of a sweep can be regenerated without replaying the others.
//! Entries have independent standard-normal real and imaginary parts.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::commute::c_matrix;
use crate::error::{Error, Result};
use crate::mat::{c64, commutation_defect, CMat, CScalar, MAX_ORDER};

pub type SampleRng = ChaCha8Rng;

/// Commutation defect a generated pair must stay under.
pub const PAIR_COMMUTE_TOL: f64 = 1e-10;

pub fn sample_rng(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian(rng: &mut impl Rng) -> CScalar {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix(n: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(n, |_, _| gaussian(rng))
}

pub fn gaussian_vector(n: usize, rng: &mut impl Rng) -> Vec<CScalar> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Uniformly distributed unit vector in `ℂⁿ`.
pub fn unit_vector(n: usize, rng: &mut impl Rng) -> Vec<CScalar> {
    loop {
        let v = gaussian_vector(n, rng);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-distributed unitary from Gram–Schmidt on a Gaussian matrix, with
/// one reorthogonalization pass.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let mut cols: Vec<Vec<CScalar>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = gaussian_vector(n, rng);
        for _ in 0..2 {
            for q in &cols {
                let proj: CScalar = q.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    CMat::from_fn(n, |i, j| cols[j][i])
}

/// `Σ c_k M^k` by Horner's rule.
pub fn polynomial_in(m: &CMat, coeffs: &[CScalar]) -> CMat {
    let n = m.order();
    let mut acc = CMat::zeros(n);
    for &c in coeffs.iter().rev() {
        acc = &(&acc * m) + &CMat::scalar(n, c);
    }
    acc
}

pub trait PairFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn supports_order(&self, order: usize) -> bool;

    /// Draws one commuting pair of the given order.
    fn generate(&self, order: usize, rng: &mut SampleRng) -> Result<(CMat, CMat)>;
}

/// `B = p(A)` for a random `A` and a random polynomial of degree `≤ n − 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PolynomialFamily;

impl PairFamily for PolynomialFamily {
    fn name(&self) -> &'static str {
        "polynomial-in-A"
    }

    fn supports_order(&self, order: usize) -> bool {
        (1..=MAX_ORDER).contains(&order)
    }

    fn generate(&self, order: usize, rng: &mut SampleRng) -> Result<(CMat, CMat)> {
        let a = gaussian_matrix(order, rng);
        // keep the powers of A at unit scale
        let scaled = a.scale_real(1.0 / a.frobenius().max(1e-300));
        let coeffs = gaussian_vector(order, rng);
        Ok((a, polynomial_in(&scaled, &coeffs)))
    }
}

/// Two upper-triangular matrices conjugated by one random unitary. For order
/// two the second matrix obeys the shared ratio `(b₁−b₂)/b₃ = (a₁−a₂)/a₃`;
/// for larger orders it is a polynomial in the first triangular factor.
#[derive(Debug, Clone, Copy, Default)]
pub struct SharedTriangularFamily;

impl PairFamily for SharedTriangularFamily {
    fn name(&self) -> &'static str {
        "shared-triangular"
    }

    fn supports_order(&self, order: usize) -> bool {
        (1..=MAX_ORDER).contains(&order)
    }

    fn generate(&self, order: usize, rng: &mut SampleRng) -> Result<(CMat, CMat)> {
        let u = random_unitary(order, rng);
        let mut ta = gaussian_matrix(order, rng);
        for i in 0..order {
            for j in 0..i {
                ta[(i, j)] = c64(0.0, 0.0);
            }
        }
        let tb = if order == 2 {
            let ratio = (ta[(0, 0)] - ta[(1, 1)]) / ta[(0, 1)];
            let (b1, b3) = (gaussian(rng), gaussian(rng));
            CMat::from_rows(&[[b1, b3], [c64(0.0, 0.0), b1 - ratio * b3]])?
        } else {
            let scaled = ta.scale_real(1.0 / ta.frobenius().max(1e-300));
            polynomial_in(&scaled, &gaussian_vector(order, rng))
        };
        let adj = u.adjoint();
        Ok((&(&u * &ta) * &adj, &(&u * &tb) * &adj))
    }
}

/// Independent random diagonal matrices.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiagonalFamily;

impl PairFamily for DiagonalFamily {
    fn name(&self) -> &'static str {
        "diagonal"
    }

    fn supports_order(&self, order: usize) -> bool {
        (1..=MAX_ORDER).contains(&order)
    }

    fn generate(&self, order: usize, rng: &mut SampleRng) -> Result<(CMat, CMat)> {
        let a = CMat::diag(&gaussian_vector(order, rng));
        let b = CMat::diag(&gaussian_vector(order, rng));
        Ok((a, b))
    }
}

/// `A = z₁I + s₁C(r)`, `B = z₂I + s₂C(r)` with random complex `z`, `s` and a
/// shared `r ∈ (0, 1]`. One draw in sixteen takes `r = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalFormFamily;

impl PairFamily for CanonicalFormFamily {
    fn name(&self) -> &'static str {
        "canonical-form"
    }

    fn supports_order(&self, order: usize) -> bool {
        order == 2
    }

    fn generate(&self, order: usize, rng: &mut SampleRng) -> Result<(CMat, CMat)> {
        if order != 2 {
            return Err(Error::FamilyOrder {
                family: self.name(),
                order,
            });
        }
        let r = if rng.random_range(0..16) == 0 {
            1.0
        } else {
            rng.random_range(0.02..1.0)
        };
        let c = c_matrix(r);
        let mut draw = || &CMat::scalar(2, gaussian(rng)) + &c.scale(gaussian(rng));
        let a = draw();
        let b = draw();
        Ok((a, b))
    }
}

#[derive(Clone)]
pub struct FamilyRegistry {
    families: BTreeMap<&'static str, Arc<dyn PairFamily>>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        Self {
            families: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(PolynomialFamily));
        registry.register(Arc::new(SharedTriangularFamily));
        registry.register(Arc::new(DiagonalFamily));
        registry.register(Arc::new(CanonicalFormFamily));
        registry
    }

    pub fn register(&mut self, family: Arc<dyn PairFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn PairFamily>> {
        self.families
            .get(name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "pair family",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.keys().copied().collect()
    }

    /// Draws sample `stream` of `family` for `seed` and checks commutation.
    pub fn sample(&self, family: &str, order: usize, seed: u64, stream: u64) -> Result<PairSample> {
        let generator = self.get(family)?;
        if !generator.supports_order(order) {
            return Err(Error::FamilyOrder {
                family: generator.name(),
                order,
            });
        }
        let mut rng = sample_rng(seed, stream);
        let (a, b) = generator.generate(order, &mut rng)?;
        let defect = commutation_defect(&a, &b)?;
        if defect > PAIR_COMMUTE_TOL {
            return Err(Error::Inconsistency(format!(
                "family `{family}` produced a pair with commutation defect {defect:e}"
            )));
        }
        Ok(PairSample {
            a,
            b,
            seed,
            stream,
            family: generator.name().to_string(),
        })
    }
}

/// One generated pair and what is needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub a: CMat,
    pub b: CMat,
    pub seed: u64,
    pub stream: u64,
    pub family: String,
}

/// Deterministic pair for `(family, seed)` from the builtin registry.
pub fn gen_commuting_pair(order: usize, family: &str, seed: u64) -> Result<PairSample> {
    FamilyRegistry::builtin().sample(family, order, seed, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_families() {
        let registry = FamilyRegistry::builtin();
        assert_eq!(
            registry.names(),
            vec![
                "canonical-form",
                "diagonal",
                "polynomial-in-A",
                "shared-triangular"
            ]
        );
        assert!(matches!(
            registry.get("random"),
            Err(Error::UnknownStrategy {
                kind: "pair family",
                ..
            })
        ));
    }

    #[test]
    fn polynomial_pair_commutes() {
        let s = gen_commuting_pair(2, "polynomial-in-A", 7).unwrap();
        assert!(commutation_defect(&s.a, &s.b).unwrap() < 1e-14);
        assert_eq!(s, gen_commuting_pair(2, "polynomial-in-A", 7).unwrap());
        assert_ne!(s, gen_commuting_pair(2, "polynomial-in-A", 8).unwrap());
    }

    #[test]
    fn canonical_pair_shares_ratio() {
        for seed in 0..20 {
            let s = gen_commuting_pair(2, "canonical-form", seed).unwrap();
            let ga = (s.a[(0, 0)] - s.a[(1, 1)]) / s.a[(0, 1)];
            let gb = (s.b[(0, 0)] - s.b[(1, 1)]) / s.b[(0, 1)];
            assert!((ga - gb).norm() < 1e-10 * (1.0 + ga.norm()));
            assert_eq!(s.a[(1, 0)], c64(0.0, 0.0));
        }
        assert!(matches!(
            gen_commuting_pair(3, "canonical-form", 0),
            Err(Error::FamilyOrder { .. })
        ));
    }

    #[test]
    fn diagonal_pair_is_normal() {
        let s = gen_commuting_pair(4, "diagonal", 1).unwrap();
        assert_eq!(s.a.normality_defect(), 0.0);
        assert_eq!(s.b.normality_defect(), 0.0);
        assert_eq!(commutation_defect(&s.a, &s.b).unwrap(), 0.0);
    }

    #[test]
    fn every_family_commutes_across_orders() {
        let registry = FamilyRegistry::builtin();
        for name in registry.names() {
            for order in 1..=6 {
                if !registry.get(name).unwrap().supports_order(order) {
                    continue;
                }
                for stream in 0..10 {
                    registry.sample(name, order, 3, stream).unwrap();
                }
            }
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = sample_rng(11, 0);
        for n in [1, 2, 5, 16] {
            let u = random_unitary(n, &mut rng);
            let defect = (&u.adjoint() * &u).distance(&CMat::identity(n));
            assert!(defect < 1e-13, "order {n}: {defect:e}");
        }
    }

    #[test]
    fn streams_are_independent_of_each_other() {
        let registry = FamilyRegistry::builtin();
        let direct = registry.sample("diagonal", 3, 99, 5).unwrap();
        let again = registry.sample("diagonal", 3, 99, 5).unwrap();
        let other = registry.sample("diagonal", 3, 99, 6).unwrap();
        assert_eq!(direct, again);
        assert_ne!(direct.a, other.a);
    }
}
