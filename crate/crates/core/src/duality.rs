//! Dual graphs and their local-unitary equivalence.
//!
//! The dual of a standard-form graph swaps the roles of `S` and `O` and
//! reverses every edge. The explicit dressing tried here conjugates CNOTs
//! with `U = H_m† V_m V_n H_n`; whether that works depends on the field's
//! polynomial basis, so it is measured rather than assumed. The dressing-free
//! check compares the reduced spectra of both states.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::entangle::Signature;
use crate::gf::{irreducible_polys, Elem, Field};
use crate::rewrite::{GraphState, RewriteError};
use crate::simulator::{format_digits, Gate, Init, Operator, SimError, StateVector, DEFAULT_TOL};

/// Where a duality check first fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    /// `"conjugation"` or `"state"`.
    pub check: &'static str,
    /// CNOT parameter (conjugation check only).
    pub a: Option<u32>,
    pub row: String,
    pub col: String,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub field: String,
    pub polynomial: String,
    pub conjugation_identity_holds: bool,
    /// Explicit dressing maps the graph state onto its dual (graph checks only).
    pub state_equivalence_holds: Option<bool>,
    /// Reduced spectra of graph and dual agree (graph checks only).
    pub signature_match: Option<bool>,
    pub max_deviation: f64,
    pub counterexample: Option<Counterexample>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Swaps `S` and `O`; edge `i -> j` with label `b` becomes `j -> i` with label `b`.
pub fn dual_graph(g: &GraphState) -> GraphState {
    let edges: Vec<(usize, usize, Elem)> = g.edges().map(|(i, j, b)| (j, i, b)).collect();
    GraphState::new(g.field().clone(), g.qudits(), g.o().to_vec(), edges).expect("reversed edges run from the new S")
}

/// `U = H_m† V_m V_n H_n` on qudits `m = 0, n = 1`, as a left-to-right product.
fn dressing(m: usize, n: usize) -> [Gate; 4] {
    [Gate::Hdg { q: m }, Gate::V { q: m }, Gate::V { q: n }, Gate::H { q: n }]
}

/// Result of comparing `U C_mn(a) U†` with `C_nm(a)` for one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationCheck {
    pub a: Elem,
    pub max_deviation: f64,
    pub first_difference: Option<(usize, usize, Complex64, Complex64)>,
}

impl ConjugationCheck {
    pub fn holds(&self) -> bool {
        self.first_difference.is_none()
    }
}

/// Compares `H_m† V_m V_n H_n C_mn(a) H_n† V_n† V_m† H_m` with `C_nm(a)`.
pub fn check_conjugation_identity(field: &Field, a: Elem, tol: f64) -> Result<ConjugationCheck, SimError> {
    if a.is_zero() {
        return Err(SimError::ZeroScale);
    }
    let u = dressing(0, 1);
    let mut product: Vec<Gate> = u.to_vec();
    product.push(Gate::c(0, 1, a));
    product.extend(u.iter().rev().map(|g| g.adjoint(field)));
    let lhs = Operator::from_product(field, 2, &product)?;
    let rhs = Operator::from_product(field, 2, &[Gate::c(1, 0, a)])?;
    Ok(ConjugationCheck { a, max_deviation: lhs.max_deviation(&rhs), first_difference: lhs.first_difference(&rhs, tol) })
}

/// Runs the conjugation check for every `a != 0` of one field.
pub fn conjugation_report(field: &Field, tol: f64) -> Result<DualityReport, SimError> {
    let checks = field
        .nonzero_elements()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| check_conjugation_identity(field, a, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let d = field.order() as usize;
    let counterexample = checks.iter().find_map(|c| {
        c.first_difference.map(|(r, col, x, y)| Counterexample {
            check: "conjugation",
            a: Some(c.a.index()),
            row: format_digits(r, d, 2),
            col: format_digits(col, d, 2),
            lhs: pair(x),
            rhs: pair(y),
        })
    });
    Ok(DualityReport {
        field: field.to_string(),
        polynomial: field.poly_string(),
        conjugation_identity_holds: counterexample.is_none(),
        state_equivalence_holds: None,
        signature_match: None,
        max_deviation: checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max),
        counterexample,
    })
}

/// One conjugation report per monic irreducible polynomial of degree `n` over `Z_p`.
pub fn polynomial_sweep(p: u32, n: u32, tol: f64) -> Result<Vec<DualityReport>, RewriteError> {
    let polys = irreducible_polys(p, n)?;
    polys
        .iter()
        .map(|low| {
            let mut full = low.clone();
            full.push(1);
            let f = Field::new(p, n, Some(&full))?;
            Ok(conjugation_report(&f, tol)?)
        })
        .collect()
}

/// Applies the dressing `H_m† V_m` on `S` and `V_n H_n` on `O` to the graph
/// state, compares with the dual state up to phase, and independently
/// compares the reduced spectra of the two undressed states.
pub fn verify_dual_equivalence(g: &GraphState, tol: f64) -> Result<DualityReport, RewriteError> {
    let field = g.field();
    let dual = dual_graph(g);
    let original = g.state()?;
    let target = dual.state()?;

    let mut dressed = original.clone();
    for q in 0..g.qudits() {
        let seq = if g.s().contains(&q) { [Gate::V { q }, Gate::Hdg { q }] } else { [Gate::H { q }, Gate::V { q }] };
        dressed.apply_all(&seq)?;
    }
    let deviation = dressed.register().phase_aligned_deviation(target.register());
    let state_ok = dressed.equal_up_to_phase(&target, tol) && deviation < tol;

    let sa = Signature::of(original.register())?;
    let sb = Signature::of(target.register())?;
    let sig_dev = sa.max_difference(&sb);
    let signature_ok = sig_dev.is_some_and(|x| x < tol);

    let counterexample = (!state_ok).then(|| {
        let ov = dressed.register().inner(target.register());
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
        let d = field.order() as usize;
        let (idx, x, y) = dressed
            .amplitudes()
            .iter()
            .zip(target.amplitudes())
            .enumerate()
            .map(|(i, (&x, &y))| (i, x * phase, y))
            .max_by(|a, b| (a.1 - a.2).norm().total_cmp(&(b.1 - b.2).norm()))
            .expect("nonempty register");
        Counterexample { check: "state", a: None, row: format_digits(idx, d, g.qudits()), col: String::new(), lhs: pair(x), rhs: pair(y) }
    });
    Ok(DualityReport {
        field: field.to_string(),
        polynomial: field.poly_string(),
        conjugation_identity_holds: conjugation_report(field, tol)?.conjugation_identity_holds,
        state_equivalence_holds: Some(state_ok),
        signature_match: Some(signature_ok),
        max_deviation: deviation.max(sig_dev.unwrap_or(f64::INFINITY)),
        counterexample,
    })
}

/// Checks `V H |0> = |s>` and `H† V |s> = |0>` up to global phase; returns
/// the larger phase-aligned deviation.
pub fn check_reference_states(field: &Arc<Field>) -> Result<f64, SimError> {
    let mut zero = StateVector::init(field.clone(), &[Init::Zero])?;
    let s = StateVector::init(field.clone(), &[Init::S])?;
    zero.apply_all(&[Gate::H { q: 0 }, Gate::V { q: 0 }])?;
    let first = zero.register().phase_aligned_deviation(s.register());
    let mut back = s.clone();
    back.apply_all(&[Gate::V { q: 0 }, Gate::Hdg { q: 0 }])?;
    let zero = StateVector::init(field.clone(), &[Init::Zero])?;
    Ok(first.max(back.register().phase_aligned_deviation(zero.register())))
}

/// Convenience for callers that only hold a field descriptor.
pub fn field_report(p: u32, n: u32, poly_index: u64) -> Result<DualityReport, RewriteError> {
    let f = Field::from_descriptor(p, n, poly_index)?;
    Ok(conjugation_report(&f, DEFAULT_TOL)?)
}
