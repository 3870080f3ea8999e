//! Interchangeable numerical-radius algorithms, registered by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mat::CMat;
use crate::numrange::{radius2_closed, radius_support, DEFAULT_GRID};

/// Disagreement above this between two methods is reported as an oracle failure.
pub const AGREEMENT_TOL: f64 = 1e-9;

pub trait RadiusMethod: Send + Sync {
    fn name(&self) -> &'static str;

    fn supports_order(&self, order: usize) -> bool;

    fn radius(&self, a: &CMat) -> Result<f64>;
}

/// Support-function scan with golden-section refinement; any order.
#[derive(Debug, Clone, Copy)]
pub struct SupportMethod {
    pub grid: usize,
}

impl Default for SupportMethod {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID }
    }
}

impl RadiusMethod for SupportMethod {
    fn name(&self) -> &'static str {
        "support"
    }

    fn supports_order(&self, _order: usize) -> bool {
        true
    }

    fn radius(&self, a: &CMat) -> Result<f64> {
        radius_support(a, self.grid)
    }
}

/// Closed-form elliptical range; order two only.
#[derive(Debug, Clone, Copy, Default)]
pub struct EllipseMethod;

impl RadiusMethod for EllipseMethod {
    fn name(&self) -> &'static str {
        "ellipse"
    }

    fn supports_order(&self, order: usize) -> bool {
        order == 2
    }

    fn radius(&self, a: &CMat) -> Result<f64> {
        radius2_closed(a)
    }
}

#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Arc<dyn RadiusMethod>>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self {
            methods: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(SupportMethod::default()));
        registry.register(Arc::new(EllipseMethod));
        registry
    }

    /// Adds a method, replacing any previous one with the same name.
    pub fn register(&mut self, method: Arc<dyn RadiusMethod>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn RadiusMethod>> {
        self.methods
            .get(name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "radius method",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.keys().copied().collect()
    }

    /// Runs every registered method that supports the order of `a`.
    pub fn evaluate_all(&self, a: &CMat) -> Result<Vec<(&'static str, f64)>> {
        self.methods
            .values()
            .filter(|m| m.supports_order(a.order()))
            .map(|m| Ok((m.name(), m.radius(a)?)))
            .collect()
    }
}

/// Largest pairwise gap among method results.
pub fn spread(results: &[(&'static str, f64)]) -> f64 {
    let values = results.iter().map(|&(_, v)| v);
    let hi = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.fold(f64::INFINITY, f64::min);
    if results.is_empty() {
        0.0
    } else {
        hi - lo
    }
}
