//! Pass/fail reports with replayable witnesses.

use crate::exterior::{ConstMultiVector, DiffForm, MultiVectorField};
use crate::ratpoly::{Poly, Rational};
use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// The nonzero object certifying a failed identity. Re-evaluating it (at the
/// witness point when one is recorded) must give something nonzero.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    Scalar(Rational),
    Poly(Poly),
    MultiVector(MultiVectorField),
    Form(DiffForm),
    ConstMultiVector(ConstMultiVector),
    Vector(Vec<Rational>),
    /// Componentwise polynomial residual (e.g. a bundle section).
    PolyVec(Vec<Poly>),
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        match self {
            Residual::Scalar(c) => c.is_zero(),
            Residual::Poly(p) => p.is_zero(),
            Residual::MultiVector(t) => t.is_zero(),
            Residual::Form(t) => t.is_zero(),
            Residual::ConstMultiVector(t) => t.is_zero(),
            Residual::Vector(v) => v.iter().all(Rational::is_zero),
            Residual::PolyVec(v) => v.iter().all(Poly::is_zero),
        }
    }
}

/// Everything needed to replay one failed identity instance: which identity
/// family it came from, the index tuples that select the instance, any
/// sampled polynomial inputs, an optional point where the residual is
/// nonzero, and the residual itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub identity: String,
    pub tuples: Vec<Vec<usize>>,
    pub inputs: Vec<Poly>,
    pub point: Option<Vec<Rational>>,
    pub residual: Residual,
}

impl Witness {
    pub fn new(identity: impl Into<String>, residual: Residual) -> Self {
        Witness {
            identity: identity.into(),
            tuples: Vec::new(),
            inputs: Vec::new(),
            point: None,
            residual,
        }
    }

    pub fn with_tuples(mut self, tuples: Vec<Vec<usize>>) -> Self {
        self.tuples = tuples;
        self
    }

    pub fn with_inputs(mut self, inputs: Vec<Poly>) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_point(mut self, point: Vec<Rational>) -> Self {
        self.point = Some(point);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckStats {
    /// Identity instances checked before the verdict was reached.
    pub identities_checked: u64,
}

impl CheckStats {
    pub fn new(identities_checked: u64) -> Self {
        CheckStats { identities_checked }
    }
}

/// Outcome of a checker run. A failing report always carries a witness.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub stats: CheckStats,
}

impl CheckReport {
    pub fn pass(stats: CheckStats) -> Self {
        CheckReport { verdict: Verdict::Pass, witness: None, stats }
    }

    pub fn fail(witness: Witness, stats: CheckStats) -> Self {
        debug_assert!(!witness.residual.is_zero(), "fail witness must have nonzero residual");
        CheckReport { verdict: Verdict::Fail, witness: Some(witness), stats }
    }

    pub fn is_pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
