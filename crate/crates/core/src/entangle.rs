//! Four-party maximally entangled states and bipartition verdicts.
//!
//! A state is called maximally entangled when every bipartition leaves the
//! smaller side maximally mixed. For four parties that means the 4 single
//! qudits and the 3 unordered 2|2 splits; the remaining pairs are the
//! complements of the checked ones and carry the same spectrum.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf::{Elem, Field, GfError};
use crate::rewrite::SymbolicState;
use crate::simulator::{checked_size, digits, index_of, Register, SimError, StateVector, MAX_AMPLITUDES};

/// Largest dimension `mes_for_dimension` will factor.
pub const MAX_FACTOR_DIM: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntangleError {
    #[error("dimension {0} is below 2")]
    TooSmall(u64),
    #[error("dimension {d}: {reason}")]
    Refused { d: u64, reason: String },
    #[error("dimension {d} exceeds the factoring guard of {max}")]
    FactorGuard { d: u64, max: u64 },
    #[error("input {index} of the composition is not maximally entangled")]
    NotMaximallyEntangled { index: usize },
    #[error("composition needs states with equal party counts, got {0:?}")]
    PartyMismatch(Vec<usize>),
    #[error("composition needs at least one state")]
    Empty,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// One checked subset `A` of a bipartition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartitionRecord {
    /// 1-based party labels.
    #[serde(rename = "A")]
    pub subset: Vec<usize>,
    pub rank: usize,
    pub deviation: f64,
    pub maximally_mixed: bool,
    pub flat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartitionReport {
    pub verdict: bool,
    pub dim: usize,
    pub parties: usize,
    pub tolerance: f64,
    pub bipartitions: Vec<BipartitionRecord>,
}

/// A state over the integer ring `Z_d`; `d` need not be a prime power.
#[derive(Debug, Clone, PartialEq)]
pub struct RingState {
    pub modulus: usize,
    pub register: Register,
}

/// Subsets `A` with `|A| <= N/2`, each unordered bipartition once: when
/// `|A| = N/2` only the side containing party 0 is listed.
pub fn bipartition_subsets(parties: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=parties / 2 {
        for mask in 0u32..(1 << parties) {
            if mask.count_ones() as usize != size {
                continue;
            }
            if 2 * size == parties && mask & 1 == 0 {
                continue;
            }
            out.push((0..parties).filter(|&q| mask >> q & 1 == 1).collect());
        }
    }
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn record(reg: &Register, subset: &[usize], tol: f64) -> Result<BipartitionRecord, SimError> {
    let rho = reg.reduced_density(subset)?;
    let spectrum = rho.spectrum();
    let nonzero: Vec<f64> = spectrum.iter().copied().filter(|&x| x > tol).collect();
    let flat = match (nonzero.first(), nonzero.last()) {
        (Some(hi), Some(lo)) => hi - lo < tol,
        _ => false,
    };
    let deviation = rho.deviation_from_maximally_mixed();
    Ok(BipartitionRecord {
        subset: subset.iter().map(|q| q + 1).collect(),
        rank: nonzero.len(),
        deviation,
        maximally_mixed: deviation < tol,
        flat,
    })
}

/// Checks every bipartition of a pure state for maximal mixedness.
pub fn mes_verdict(reg: &Register, tol: f64) -> Result<BipartitionReport, SimError> {
    let subsets = bipartition_subsets(reg.qudits());
    let bipartitions = subsets
        .par_iter()
        .map(|a| record(reg, a, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BipartitionReport {
        verdict: !bipartitions.is_empty() && bipartitions.iter().all(|r| r.maximally_mixed),
        dim: reg.dim(),
        parties: reg.qudits(),
        tolerance: tol,
        bipartitions,
    })
}

/// `ψ(a_r) = d⁻¹ Σ_{i,k} |a_i, a_i + a_r a_k, a_k, a_i + a_k>`.
pub fn psi_state(field: &Arc<Field>, a_r: Elem) -> Result<StateVector, EntangleError> {
    if !field.contains(a_r) {
        return Err(SimError::BadParameter(a_r).into());
    }
    let d = field.order() as usize;
    let support = field.elements().flat_map(|i| {
        field.elements().map(move |k| {
            let ket = [i, field.add(i, field.mul(a_r, k)), k, field.add(i, k)];
            index_of(&ket.map(|x| x.index() as usize), d)
        })
    });
    let reg = Register::uniform_over(d, 4, support.collect::<Vec<_>>())?;
    Ok(StateVector::from_register(field.clone(), reg)?)
}

/// `P′ = d⁻¹ Σ_{i,k} |i, i−k, k, i+k>` with arithmetic mod `d`.
pub fn p_prime_state(d: usize) -> Result<RingState, EntangleError> {
    if d < 2 {
        return Err(EntangleError::TooSmall(d as u64));
    }
    let support = (0..d).flat_map(|i| (0..d).map(move |k| index_of(&[i, (i + d - k) % d, k, (i + k) % d], d)));
    let register = Register::uniform_over(d, 4, support.collect::<Vec<_>>())?;
    Ok(RingState { modulus: d, register })
}

/// Systemwise tensor product: party `q` of the result is the tuple of the
/// inputs' parties `q`, with the first input as the most significant digit.
/// Each input must pass [`mes_verdict`] at `tol`.
pub fn compose_mes(states: &[&Register], tol: f64) -> Result<Register, EntangleError> {
    let first = states.first().ok_or(EntangleError::Empty)?;
    let parties = first.qudits();
    if states.iter().any(|s| s.qudits() != parties) {
        return Err(EntangleError::PartyMismatch(states.iter().map(|s| s.qudits()).collect()));
    }
    for (index, s) in states.iter().enumerate() {
        if !mes_verdict(s, tol)?.verdict {
            return Err(EntangleError::NotMaximallyEntangled { index });
        }
    }
    let dim = states
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.dim()))
        .filter(|&d| checked_size(d, parties).is_ok())
        .ok_or(SimError::SizeGuard { dim: usize::MAX, qudits: parties, max: MAX_AMPLITUDES })?;
    checked_size(dim, parties)?;

    // fold pairwise over the sparse supports
    let mut acc: Vec<(Vec<usize>, Complex64)> = vec![(vec![0; parties], Complex64::new(1.0, 0.0))];
    for s in states {
        let sd = s.dim();
        let terms: Vec<(Vec<usize>, Complex64)> = s
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, &a)| (digits(i, sd, parties), a))
            .collect();
        let mut next = Vec::with_capacity(acc.len() * terms.len());
        for (hi, a) in &acc {
            for (lo, b) in &terms {
                let dg = hi.iter().zip(lo).map(|(h, l)| h * sd + l).collect();
                next.push((dg, a * b));
            }
        }
        acc = next;
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); checked_size(dim, parties)?];
    for (dg, a) in acc {
        amps[index_of(&dg, dim)] += a;
    }
    Ok(Register::new(dim, parties, amps)?)
}

/// One factor of a composite construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ingredient {
    /// `ψ(a_r)` over `GF(p^n)` with the given polynomial index.
    Psi { p: u32, n: u32, poly: u64, a_r: u32 },
    /// `P′` over `Z_d`.
    PPrime { d: usize },
}

impl Ingredient {
    pub fn dim(&self) -> usize {
        match *self {
            Ingredient::Psi { p, n, .. } => p.pow(n) as usize,
            Ingredient::PPrime { d } => d,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Ingredient::Psi { a_r, .. } => format!("psi(a_r = {a_r}) over GF({})", self.dim()),
            Ingredient::PPrime { d } => format!("P'({d})"),
        }
    }

    pub fn build(&self) -> Result<Register, EntangleError> {
        match *self {
            Ingredient::Psi { p, n, poly, a_r } => {
                let f = Arc::new(Field::from_descriptor(p, n, poly)?);
                let a = f.elem(a_r as u64)?;
                Ok(psi_state(&f, a)?.into_register())
            }
            Ingredient::PPrime { d } => Ok(p_prime_state(d)?.register),
        }
    }
}

/// Recipe for a four-party maximally entangled state of local dimension `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MesRecipe {
    pub d: u64,
    pub ingredients: Vec<Ingredient>,
}

impl MesRecipe {
    pub fn describe(&self) -> String {
        self.ingredients.iter().map(Ingredient::describe).collect::<Vec<_>>().join(" (x) ")
    }

    /// Builds the state, checking each ingredient on the way.
    pub fn build(&self, tol: f64) -> Result<Register, EntangleError> {
        checked_size(self.d as usize, 4)?;
        let parts = self.ingredients.iter().map(Ingredient::build).collect::<Result<Vec<_>, _>>()?;
        if parts.len() == 1 {
            return Ok(parts.into_iter().next().expect("one part"));
        }
        let refs: Vec<&Register> = parts.iter().collect();
        compose_mes(&refs, tol)
    }
}

fn prime_factors(mut d: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= d {
        while d % p == 0 {
            out.push(p);
            d /= p;
        }
        p += 1;
    }
    if d > 1 {
        out.push(d);
    }
    out
}

/// Chooses a construction for dimension `d`: `P′(d)` for odd `d`, and for
/// multiples of four `ψ` over `GF(2^m)` (with `a_r` the smallest index ≥ 2)
/// composed with `P′(p)` for every odd prime factor `p`.
pub fn mes_for_dimension(d: u64) -> Result<MesRecipe, EntangleError> {
    if d < 2 {
        return Err(EntangleError::TooSmall(d));
    }
    if d > MAX_FACTOR_DIM {
        return Err(EntangleError::FactorGuard { d, max: MAX_FACTOR_DIM });
    }
    if d % 2 == 1 {
        return Ok(MesRecipe { d, ingredients: vec![Ingredient::PPrime { d: d as usize }] });
    }
    if d % 4 == 2 {
        return Err(EntangleError::Refused {
            d,
            reason: "no construction for d = 2 mod 4; existence unknown; conjectured not to exist".into(),
        });
    }
    let factors = prime_factors(d);
    let m = factors.iter().filter(|&&p| p == 2).count() as u32;
    let two = Field::of_order(1 << m)?;
    let mut ingredients = vec![Ingredient::Psi { p: 2, n: m, poly: two.poly_index(), a_r: 2 }];
    ingredients.extend(factors.iter().filter(|&&p| p != 2).map(|&p| Ingredient::PPrime { d: p as usize }));
    Ok(MesRecipe { d, ingredients })
}

/// Rank of `ρ_A` for a C-only circuit state, from dimension counting:
/// `d^(rank(M_A) + rank(M_Ā) − k)` where `M_A` keeps the columns in `A`.
pub fn symbolic_rdm_rank(sym: &SymbolicState, subset: &[usize]) -> u64 {
    let f = sym.field();
    let m = sym.matrix();
    let rest: Vec<usize> = (0..sym.qudits()).filter(|q| !subset.contains(q)).collect();
    let ra = m.select_columns(subset).rank(f);
    let rb = m.select_columns(&rest).rank(f);
    let exp = ra + rb - sym.rank();
    (f.order() as u64).pow(exp as u32)
}

/// Partial trace of a mixed state of `qudits` systems of dimension `dim`.
pub fn partial_trace(rho: &DMatrix<Complex64>, dim: usize, qudits: usize, keep: &[usize]) -> DMatrix<Complex64> {
    let rest: Vec<usize> = (0..qudits).filter(|q| !keep.contains(q)).collect();
    let kd = dim.pow(keep.len() as u32);
    let rd = dim.pow(rest.len() as u32);
    let place = |kdg: &[usize], rdg: &[usize]| {
        let mut full = vec![0; qudits];
        for (&q, &x) in keep.iter().zip(kdg) {
            full[q] = x;
        }
        for (&q, &x) in rest.iter().zip(rdg) {
            full[q] = x;
        }
        index_of(&full, dim)
    };
    DMatrix::from_fn(kd, kd, |r, c| {
        let (rk, ck) = (digits(r, dim, keep.len()), digits(c, dim, keep.len()));
        (0..rd)
            .map(|e| {
                let ed = digits(e, dim, rest.len());
                rho[(place(&rk, &ed), place(&ck, &ed))]
            })
            .sum()
    })
}

fn max_mixed_deviation(m: &DMatrix<Complex64>) -> f64 {
    let level = 1.0 / m.nrows() as f64;
    let mut worst: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let t = if r == c { level } else { 0.0 };
            worst = worst.max((m[(r, c)] - t).norm());
        }
    }
    worst
}

fn numeric_rank(m: &DMatrix<Complex64>, tol: f64) -> usize {
    m.clone().singular_values().iter().filter(|&&x| x > tol).count()
}

/// One three-party state checked for maximally mixed pair marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripartiteCheck {
    pub source: String,
    pub rank: usize,
    pub marginals_maximally_mixed: bool,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub d: u64,
    /// The trivial example `I/d³`: rank `d³ ≥ d`.
    pub trivial: TripartiteCheck,
    /// `Tr_D` of a four-party maximally entangled state: rank exactly `d`.
    pub from_mes: Option<TripartiteCheck>,
    pub rank_equals_d: Option<bool>,
    pub note: Option<String>,
}

const PAIRS: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];

/// Three-party states whose pair marginals are all `I/d²`: the trivial
/// `I/d³` and, when a four-party MES exists, the state left after tracing
/// out its fourth party.
pub fn entropy_problem_checks(d: u64, tol: f64) -> Result<EntropyReport, EntangleError> {
    if d < 2 {
        return Err(EntangleError::TooSmall(d));
    }
    let du = d as usize;
    let side = checked_size(du, 3)?;
    let rho = DMatrix::<Complex64>::identity(side, side) / Complex64::new(side as f64, 0.0);
    let dev = PAIRS
        .iter()
        .map(|p| max_mixed_deviation(&partial_trace(&rho, du, 3, p)))
        .fold(0.0, f64::max);
    let trivial = TripartiteCheck {
        source: format!("I/{d}^3"),
        rank: numeric_rank(&rho, tol),
        marginals_maximally_mixed: dev < tol,
        max_deviation: dev,
    };
    let recipe = match mes_for_dimension(d) {
        Ok(r) => r,
        Err(EntangleError::Refused { reason, .. }) => {
            return Ok(EntropyReport { d, trivial, from_mes: None, rank_equals_d: None, note: Some(reason) })
        }
        Err(e) => return Err(e),
    };
    let mes = recipe.build(tol)?;
    let abc = mes.reduced_density(&[0, 1, 2])?;
    // rank(ρ_ABC) equals rank(ρ_D); use the small side once ρ_ABC gets large
    let rank = if abc.side() <= 512 { abc.rank(tol) } else { mes.reduced_density(&[3])?.rank(tol) };
    let dev = PAIRS
        .iter()
        .map(|p| mes.reduced_density(p).map(|r| r.deviation_from_maximally_mixed()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let from_mes = TripartiteCheck {
        source: format!("Tr_D of {}", recipe.describe()),
        rank,
        marginals_maximally_mixed: dev < tol,
        max_deviation: dev,
    };
    Ok(EntropyReport { d, trivial, rank_equals_d: Some(rank == du), from_mes: Some(from_mes), note: None })
}

/// Multiset of reduced spectra over all subsets `|A| <= N/2`; invariant
/// under local unitaries and party permutations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Signature {
    pub spectra: Vec<Vec<f64>>,
}

impl Signature {
    pub fn of(reg: &Register) -> Result<Signature, SimError> {
        let n = reg.qudits();
        let mut spectra = Vec::new();
        for size in 1..=n / 2 {
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let a: Vec<usize> = (0..n).filter(|&q| mask >> q & 1 == 1).collect();
                spectra.push(reg.reduced_density(&a)?.spectrum());
            }
        }
        spectra.sort_by(|a, b| cmp_spectra(a, b));
        Ok(Signature { spectra })
    }

    /// Eigenvalues snapped to a `1e-8` grid, for hashing.
    pub fn key(&self) -> Vec<Vec<i64>> {
        let mut k: Vec<Vec<i64>> = self
            .spectra
            .iter()
            .map(|s| s.iter().map(|x| (x * 1e8).round() as i64).collect())
            .collect();
        k.sort();
        k
    }

    /// Largest eigenvalue difference after sorting, `None` on shape mismatch.
    pub fn max_difference(&self, other: &Signature) -> Option<f64> {
        if self.spectra.len() != other.spectra.len() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.spectra.iter().zip(&other.spectra) {
            if a.len() != b.len() {
                return None;
            }
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        Some(worst)
    }

    /// Nonzero eigenvalue count of each spectrum above `tol`.
    pub fn ranks(&self, tol: f64) -> Vec<usize> {
        self.spectra.iter().map(|s| s.iter().filter(|&&x| x > tol).count()).collect()
    }
}

fn cmp_spectra(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            let o = x.total_cmp(y);
            if (x - y).abs() > 1e-9 && o.is_ne() {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    })
}
