//! Operator-level verification of every commutation relation.
//!
//! Each relation is instantiated on two or three qudits, both sides are
//! compiled to full operators, and the largest entrywise difference is
//! compared against the tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::gf::{Elem, Field};
use crate::rewrite::{commute_pair, Relation, Rewrite, RewriteError};
use crate::simulator::{Gate, Operator};

/// Rewrite rule under test; [`commute_pair`] unless a fixture swaps it out.
pub type Rule = dyn Fn(&Field, Gate, Gate) -> Result<Rewrite, RewriteError> + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive,
    Random { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureCase {
    pub params: Vec<u32>,
    pub left: String,
    pub right: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationCheck {
    pub field: String,
    pub relation: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub max_deviation: f64,
    pub first_failure: Option<FailureCase>,
}

impl RelationCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub tolerance: f64,
    pub all_pass: bool,
    pub checks: Vec<RelationCheck>,
}

/// Relations exercised by the suite (every relation the rewriter knows).
pub const SUITE: [Relation; 15] = Relation::ALL;

/// The `left · right` instance of `rel` for parameters `(a, b)`, on wires
/// `m = 0, n = 1, l = 2`, plus the register size it needs. `None` when the
/// parameters fall outside the relation's domain.
pub fn instance(f: &Field, rel: Relation, a: Elem, b: Elem) -> Option<(Gate, Gate, usize)> {
    use Relation::*;
    let nz = |x: Elem| !x.is_zero();
    let one_plus = f.add(Elem::ONE, f.mul(a, b));
    Some(match rel {
        ShiftMerge => (Gate::a(0, a), Gate::a(0, b), 1),
        ScaleMerge if nz(a) && nz(b) => (Gate::d(0, a), Gate::d(0, b), 1),
        ScaleShift if nz(a) => (Gate::d(0, a), Gate::a(0, b), 1),
        ControlShift => (Gate::c(0, 1, a), Gate::a(0, b), 2),
        TargetShift => (Gate::c(0, 1, a), Gate::a(1, b), 2),
        ControlScale if nz(b) => (Gate::c(0, 1, a), Gate::d(0, b), 2),
        TargetScale if nz(b) => (Gate::c(0, 1, a), Gate::d(1, b), 2),
        CnotMerge => (Gate::c(0, 1, a), Gate::c(0, 1, b), 2),
        CnotReverse if nz(one_plus) => (Gate::c(0, 1, a), Gate::c(1, 0, b), 2),
        CnotReverseSwap if !nz(one_plus) => (Gate::c(0, 1, a), Gate::c(1, 0, b), 2),
        SharedControl => (Gate::c(0, 1, a), Gate::c(0, 2, b), 3),
        SharedTarget => (Gate::c(0, 1, a), Gate::c(2, 1, b), 3),
        Chain => (Gate::c(1, 2, b), Gate::c(0, 1, a), 3),
        ChainReversed => (Gate::c(0, 1, a), Gate::c(1, 2, b), 3),
        Disjoint => (Gate::c(0, 1, a), Gate::a(2, b), 3),
        _ => return None,
    })
}

fn parameter_pairs(f: &Field, rel: Relation, sampling: Sampling, salt: u64) -> Vec<(Elem, Elem)> {
    match sampling {
        Sampling::Exhaustive => f
            .elements()
            .flat_map(|a| f.elements().map(move |b| (a, b)))
            .filter(|&(a, b)| instance(f, rel, a, b).is_some())
            .collect(),
        Sampling::Random { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let d = f.order() as u64;
            let mut out = Vec::with_capacity(samples);
            while out.len() < samples {
                let b = f.elem(rng.gen_range(0..d)).unwrap();
                let a = if rel == Relation::CnotReverseSwap {
                    // the swap branch needs a·b = -1
                    match f.inv(b) {
                        Ok(binv) => f.neg(binv),
                        Err(_) => continue,
                    }
                } else {
                    f.elem(rng.gen_range(0..d)).unwrap()
                };
                if instance(f, rel, a, b).is_some() {
                    out.push((a, b));
                }
            }
            out
        }
    }
}

/// Checks one relation over one field.
pub fn check_relation(f: &Field, rel: Relation, sampling: Sampling, tol: f64, rule: &Rule) -> RelationCheck {
    let salt = (f.order() as u64) << 8 | rel as u64;
    let mut check = RelationCheck {
        field: f.to_string(),
        relation: rel.name(),
        cases: 0,
        failures: 0,
        max_deviation: 0.0,
        first_failure: None,
    };
    for (a, b) in parameter_pairs(f, rel, sampling, salt) {
        let (left, right, qudits) = instance(f, rel, a, b).expect("filtered");
        check.cases += 1;
        let outcome = rule(f, left, right).map_err(|e| e.to_string()).and_then(|rw| {
            if rw.relation != rel {
                return Err(format!("dispatched to {} instead", rw.relation.name()));
            }
            let lhs = Operator::from_product(f, qudits, &[left, right]).map_err(|e| e.to_string())?;
            let rhs = Operator::from_product(f, qudits, &rw.product).map_err(|e| e.to_string())?;
            Ok(lhs.max_deviation(&rhs))
        });
        let failure = match outcome {
            Ok(dev) => {
                check.max_deviation = check.max_deviation.max(dev);
                (dev >= tol).then(|| format!("max entrywise deviation {dev:e}"))
            }
            Err(msg) => Some(msg),
        };
        if let Some(detail) = failure {
            check.failures += 1;
            check.first_failure.get_or_insert(FailureCase {
                params: vec![a.index(), b.index()],
                left: format!("{left:?}"),
                right: format!("{right:?}"),
                detail,
            });
        }
    }
    check
}

/// Runs every relation over every field, exhaustively for `d <= exhaustive_limit`
/// and on `samples` seeded random parameter pairs above it.
pub fn run_suite(
    fields: &[Field],
    exhaustive_limit: u32,
    samples: usize,
    seed: u64,
    tol: f64,
    rule: &Rule,
) -> RelationReport {
    let jobs: Vec<(&Field, Relation)> = fields.iter().flat_map(|f| SUITE.iter().map(move |&r| (f, r))).collect();
    let checks: Vec<RelationCheck> = jobs
        .par_iter()
        .map(|&(f, rel)| {
            let sampling = if f.order() <= exhaustive_limit {
                Sampling::Exhaustive
            } else {
                Sampling::Random { samples, seed }
            };
            check_relation(f, rel, sampling, tol, rule)
        })
        .collect();
    let all_pass = checks.iter().all(RelationCheck::passed);
    RelationReport { tolerance: tol, all_pass, checks }
}

/// The production rule.
pub fn standard_rule(f: &Field, left: Gate, right: Gate) -> Result<Rewrite, RewriteError> {
    commute_pair(f, left, right)
}
