//! Symbolic circuit engine and the bipartite standard form.
//!
//! A circuit of `C`, `A`, `D` and `W` gates acting on `|s>`/`|0>` inputs
//! always produces a uniform superposition over an affine subspace
//! `{ x·M + t : x ∈ F^k }`, where `k` counts the `|s>` inputs and `M` is a
//! rank-`k` matrix with one column per qudit. [`SymbolicState`] tracks `M` and
//! `t` exactly; [`canonicalize`] reads the standard bipartite graph off the
//! reduced row echelon form of `M`.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{Elem, Field, GfError};
use crate::linalg::{Echelon, Matrix};
use crate::simulator::{checked_size, Gate, Init, Register, SimError, StateVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("gate {0:?} has no affine symbolic form")]
    NotSymbolic(Gate),
    #[error("no commutation relation rewrites {0:?} · {1:?}")]
    NoRelation(Gate, Gate),
    #[error("a bipartition needs 1 <= k <= N-1 inputs in |s>, got k = {k} of N = {qudits}")]
    NoBipartition { k: usize, qudits: usize },
    #[error("coefficient matrix lost rank ({rank} < {k}); this cannot happen for unitary gates")]
    RankDefect { rank: usize, k: usize },
    #[error("gate {0:?} is not allowed here; only generalized CNOT gates are")]
    NotCnot(Gate),
    #[error("invalid graph: {0}")]
    BadGraph(String),
    #[error("states live over different fields or registers")]
    Mismatch,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A gate list acting in time order on a product of `|s>` and `|0>` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    field: Arc<Field>,
    init: Vec<Init>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(field: Arc<Field>, init: Vec<Init>, gates: Vec<Gate>) -> Result<Circuit, RewriteError> {
        for g in &gates {
            g.validate(&field, init.len())?;
        }
        Ok(Circuit { field, init, gates })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn init(&self) -> &[Init] {
        &self.init
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn qudits(&self) -> usize {
        self.init.len()
    }

    pub fn is_cnot_only(&self) -> bool {
        self.gates.iter().all(|g| matches!(g, Gate::C { .. }))
    }

    /// Dense simulation.
    pub fn simulate(&self) -> Result<StateVector, SimError> {
        let mut st = StateVector::init(self.field.clone(), &self.init)?;
        st.apply_all(&self.gates)?;
        Ok(st)
    }

    /// Exact affine image of the circuit.
    pub fn symbolic(&self) -> Result<SymbolicState, RewriteError> {
        let mut sym = SymbolicState::from_init(self.field.clone(), &self.init);
        for g in &self.gates {
            sym.apply(g)?;
        }
        Ok(sym)
    }
}

/// Uniform superposition over `{ x·M + t }` with `M` a `k × N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicState {
    field: Arc<Field>,
    matrix: Matrix,
    offsets: Vec<Elem>,
}

impl SymbolicState {
    /// Row `i` is the unit vector of the `i`-th `|s>` input.
    pub fn from_init(field: Arc<Field>, init: &[Init]) -> SymbolicState {
        let free: Vec<usize> = (0..init.len()).filter(|&q| init[q] == Init::S).collect();
        let mut matrix = Matrix::zeros(free.len(), init.len());
        for (i, &q) in free.iter().enumerate() {
            matrix.set(i, q, Elem::ONE);
        }
        SymbolicState { field, matrix, offsets: vec![Elem::ZERO; init.len()] }
    }

    pub fn new(field: Arc<Field>, matrix: Matrix, offsets: Vec<Elem>) -> Result<SymbolicState, RewriteError> {
        if offsets.len() != matrix.cols() {
            return Err(RewriteError::Mismatch);
        }
        let rank = matrix.rank(&field);
        if rank != matrix.rows() {
            return Err(RewriteError::RankDefect { rank, k: matrix.rows() });
        }
        Ok(SymbolicState { field, matrix, offsets })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn offsets(&self) -> &[Elem] {
        &self.offsets
    }

    pub fn k(&self) -> usize {
        self.matrix.rows()
    }

    pub fn qudits(&self) -> usize {
        self.matrix.cols()
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank(&self.field)
    }

    /// Column and offset update for one gate.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), RewriteError> {
        gate.validate(&self.field, self.qudits())?;
        let f = &*self.field;
        let m = &mut self.matrix;
        let t = &mut self.offsets;
        match *gate {
            Gate::C { control, target, a } => {
                for r in 0..m.rows() {
                    let v = f.add(m.get(r, target), f.mul(a, m.get(r, control)));
                    m.set(r, target, v);
                }
                t[target] = f.add(t[target], f.mul(a, t[control]));
            }
            Gate::A { q, a } => t[q] = f.add(t[q], a),
            Gate::D { q, a } => {
                for r in 0..m.rows() {
                    m.set(r, q, f.mul(a, m.get(r, q)));
                }
                t[q] = f.mul(a, t[q]);
            }
            Gate::W { a, b } => {
                m.swap_columns(a, b);
                t.swap(a, b);
            }
            Gate::H { .. } | Gate::Hdg { .. } | Gate::V { .. } => return Err(RewriteError::NotSymbolic(*gate)),
        }
        Ok(())
    }

    /// Basis indices of the denoted state, ascending; full rank makes them
    /// distinct, one per `x ∈ F^k`.
    pub fn support(&self) -> Result<Vec<usize>, SimError> {
        let f = &*self.field;
        let d = f.order() as usize;
        let n = self.qudits();
        checked_size(d, n)?;
        let k = self.k();
        let count = d.pow(k as u32);
        let mut out = Vec::with_capacity(count);
        let mut x = vec![Elem::ZERO; k];
        for j in 0..count {
            let mut v = j;
            for slot in x.iter_mut().rev() {
                *slot = f.elem((v % d) as u64).expect("digit below order");
                v /= d;
            }
            let mut idx = 0;
            for q in 0..n {
                let mut val = self.offsets[q];
                for (i, &xi) in x.iter().enumerate() {
                    val = f.add(val, f.mul(xi, self.matrix.get(i, q)));
                }
                idx = idx * d + val.index() as usize;
            }
            out.push(idx);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// The dense state `d^{-k/2} Σ_x |x·M + t>`.
    pub fn to_register(&self) -> Result<Register, SimError> {
        Register::uniform_over(self.field.order() as usize, self.qudits(), self.support()?)
    }

    pub fn echelon(&self) -> Echelon {
        self.matrix.echelon(&self.field)
    }

    /// Same denoted state: equal row spaces and offsets congruent modulo them.
    pub fn same_state(&self, other: &SymbolicState) -> bool {
        if self.field != other.field || self.qudits() != other.qudits() || self.k() != other.k() {
            return false;
        }
        let (a, b) = (self.echelon(), other.echelon());
        if a != b {
            return false;
        }
        let f = &*self.field;
        let diff: Vec<Elem> = self.offsets.iter().zip(&other.offsets).map(|(&x, &y)| f.sub(x, y)).collect();
        a.contains(f, &diff)
    }
}

/// Free-function form of [`SymbolicState::same_state`].
pub fn states_equal_symbolic(a: &SymbolicState, b: &SymbolicState) -> bool {
    a.same_state(b)
}

/// Directed bipartite graph: edges run from `S` (inputs `|s>`) to `O`
/// (inputs `|0>`) and carry nonzero field labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphState {
    field: Arc<Field>,
    qudits: usize,
    s: Vec<usize>,
    o: Vec<usize>,
    edges: BTreeMap<(usize, usize), Elem>,
}

impl GraphState {
    /// Zero labels are dropped; repeated edges are rejected.
    pub fn new<I>(field: Arc<Field>, qudits: usize, s: Vec<usize>, edges: I) -> Result<GraphState, RewriteError>
    where
        I: IntoIterator<Item = (usize, usize, Elem)>,
    {
        let mut s = s;
        s.sort_unstable();
        let before = s.len();
        s.dedup();
        if s.len() != before || s.iter().any(|&q| q >= qudits) {
            return Err(RewriteError::BadGraph(format!("S = {s:?} is not a set of qudits below {qudits}")));
        }
        let o: Vec<usize> = (0..qudits).filter(|q| s.binary_search(q).is_err()).collect();
        let mut map = BTreeMap::new();
        for (from, to, label) in edges {
            if s.binary_search(&from).is_err() || o.binary_search(&to).is_err() {
                return Err(RewriteError::BadGraph(format!("edge {from} -> {to} does not run from S to O")));
            }
            if !field.contains(label) {
                return Err(RewriteError::Field(GfError::ElementOutOfRange {
                    index: label.index() as u64,
                    order: field.order(),
                }));
            }
            if map.insert((from, to), label).is_some() {
                return Err(RewriteError::BadGraph(format!("edge {from} -> {to} listed twice")));
            }
        }
        map.retain(|_, l| !l.is_zero());
        Ok(GraphState { field, qudits, s, o, edges: map })
    }

    /// Standard form on `S = {0..k}`, `O = {k..N}` with `labels[j][l]` the
    /// label of edge `j -> k + l`.
    pub fn from_label_matrix(field: Arc<Field>, labels: &Matrix) -> Result<GraphState, RewriteError> {
        let k = labels.rows();
        let n = k + labels.cols();
        let mut edges = Vec::new();
        for j in 0..k {
            for l in 0..labels.cols() {
                edges.push((j, k + l, labels.get(j, l)));
            }
        }
        GraphState::new(field, n, (0..k).collect(), edges)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn qudits(&self) -> usize {
        self.qudits
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn o(&self) -> &[usize] {
        &self.o
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Elem)> + '_ {
        self.edges.iter().map(|(&(a, b), &l)| (a, b, l))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, from: usize, to: usize) -> Elem {
        self.edges.get(&(from, to)).copied().unwrap_or(Elem::ZERO)
    }

    pub fn init_pattern(&self) -> Vec<Init> {
        (0..self.qudits)
            .map(|q| if self.s.binary_search(&q).is_ok() { Init::S } else { Init::Zero })
            .collect()
    }

    /// The standard-form circuit; its gates commute, so edge order is arbitrary.
    pub fn circuit(&self) -> Circuit {
        let gates = self.edges().map(|(a, b, l)| Gate::c(a, b, l)).collect();
        Circuit { field: self.field.clone(), init: self.init_pattern(), gates }
    }

    pub fn state(&self) -> Result<StateVector, SimError> {
        self.circuit().simulate()
    }

    pub fn symbolic(&self) -> SymbolicState {
        self.circuit().symbolic().expect("C gates are symbolic")
    }
}

/// Result of [`canonicalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Canonical {
    /// `permutation[slot]` is the original qudit placed in standard-form slot `slot`.
    pub permutation: Vec<usize>,
    /// Standard form on slots `S = {0..k}`, `O = {k..N}`.
    pub graph: GraphState,
    /// Residual shifts `A(t)` on standard-form slots, nonzero only when the
    /// input contained `A` gates.
    pub corrections: Vec<(usize, Elem)>,
}

impl Canonical {
    pub fn is_identity_permutation(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Standard-form circuit, residual shifts, then the wire permutation.
    pub fn reproduce(&self) -> Result<Register, SimError> {
        let mut st = self.graph.state()?;
        for &(q, a) in &self.corrections {
            st.apply(&Gate::a(q, a))?;
        }
        Ok(st.register().permute_qudits(&self.permutation))
    }
}

/// Canonical bipartite form of a symbolic state.
///
/// The pivot columns of the reduced row echelon form (the earliest set of `k`
/// independent columns) become `S`; each remaining column `l` carries the
/// labels `b_{j,l}` of the reduced matrix.
pub fn canonicalize_symbolic(sym: &SymbolicState) -> Result<Canonical, RewriteError> {
    let (k, n) = (sym.k(), sym.qudits());
    if k == 0 || k >= n {
        return Err(RewriteError::NoBipartition { k, qudits: n });
    }
    let f = &*sym.field;
    let ech = sym.echelon();
    if ech.pivots.len() != k {
        return Err(RewriteError::RankDefect { rank: ech.pivots.len(), k });
    }
    let rest: Vec<usize> = (0..n).filter(|c| !ech.pivots.contains(c)).collect();
    let mut permutation = ech.pivots.clone();
    permutation.extend(&rest);
    let labels = ech.matrix.select_columns(&rest);
    let graph = GraphState::from_label_matrix(sym.field.clone(), &labels)?;

    // t' = t - Σ_j t[pivot_j] · row_j vanishes on the pivots.
    let reduced = ech.reduce(f, &sym.offsets);
    let corrections = permutation
        .iter()
        .enumerate()
        .filter(|&(_, &wire)| !reduced[wire].is_zero())
        .map(|(slot, &wire)| (slot, reduced[wire]))
        .collect();
    Ok(Canonical { permutation, graph, corrections })
}

/// Standard form of a circuit of `C`, `A`, `D` and `W` gates, up to the
/// returned qudit permutation and residual shifts.
pub fn canonicalize(circuit: &Circuit) -> Result<Canonical, RewriteError> {
    let k = circuit.init.iter().filter(|&&i| i == Init::S).count();
    if k == 0 || k >= circuit.qudits() {
        return Err(RewriteError::NoBipartition { k, qudits: circuit.qudits() });
    }
    canonicalize_symbolic(&circuit.symbolic()?)
}

/// Commutation relations between gates, named by the gates they reorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `A(a)A(b) = A(a+b)`
    ShiftMerge,
    /// `D(a)D(b) = D(ab)`
    ScaleMerge,
    /// `D(a)A(b) = A(ab)D(a)`
    ScaleShift,
    /// `C_mn(a)A_m(b) = A_n(ab)A_m(b)C_mn(a)`
    ControlShift,
    /// `C_mn(a)A_n(b) = A_n(b)C_mn(a)`
    TargetShift,
    /// `C_mn(a)D_m(b) = D_m(b)C_mn(ba)`
    ControlScale,
    /// `C_mn(a)D_n(b) = D_n(b)C_mn(b⁻¹a)`
    TargetScale,
    /// `C_mn(a)C_mn(b) = C_mn(a+b)`
    CnotMerge,
    /// `C_mn(a)C_nm(b)` with `A = 1 + ab ≠ 0`
    CnotReverse,
    /// `C_mn(a)C_nm(b)` with `1 + ab = 0`, which needs a swap
    CnotReverseSwap,
    /// `C_mn(a)C_ml(b) = C_ml(b)C_mn(a)`
    SharedControl,
    /// `C_mn(a)C_ln(b) = C_ln(b)C_mn(a)`
    SharedTarget,
    /// `C_nl(b)C_mn(a) = C_ml(ab)C_mn(a)C_nl(b)`
    Chain,
    /// `C_mn(a)C_nl(b) = C_nl(b)C_mn(a)C_ml(-ab)`
    ChainReversed,
    /// gates on disjoint wires swap
    Disjoint,
}

impl Relation {
    pub const ALL: [Relation; 15] = [
        Relation::ShiftMerge,
        Relation::ScaleMerge,
        Relation::ScaleShift,
        Relation::ControlShift,
        Relation::TargetShift,
        Relation::ControlScale,
        Relation::TargetScale,
        Relation::CnotMerge,
        Relation::CnotReverse,
        Relation::CnotReverseSwap,
        Relation::SharedControl,
        Relation::SharedTarget,
        Relation::Chain,
        Relation::ChainReversed,
        Relation::Disjoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relation::ShiftMerge => "shift-merge",
            Relation::ScaleMerge => "scale-merge",
            Relation::ScaleShift => "scale-shift",
            Relation::ControlShift => "control-shift",
            Relation::TargetShift => "target-shift",
            Relation::ControlScale => "control-scale",
            Relation::TargetScale => "target-scale",
            Relation::CnotMerge => "cnot-merge",
            Relation::CnotReverse => "cnot-reverse",
            Relation::CnotReverseSwap => "cnot-reverse-swap",
            Relation::SharedControl => "shared-control",
            Relation::SharedTarget => "shared-target",
            Relation::Chain => "chain",
            Relation::ChainReversed => "chain-reversed",
            Relation::Disjoint => "disjoint",
        }
    }
}

/// A matched relation and its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub relation: Relation,
    /// Operator product, leftmost factor acting last.
    pub product: Vec<Gate>,
}

impl Rewrite {
    /// The right-hand side in time order.
    pub fn sequence(&self) -> Vec<Gate> {
        self.product.iter().rev().copied().collect()
    }
}

/// Rewrites the operator product `left · right` (`right` acts first) with the
/// unique matching commutation relation.
pub fn commute_pair(field: &Field, left: Gate, right: Gate) -> Result<Rewrite, RewriteError> {
    use Gate::*;
    let f = field;
    let done = |relation, product| Ok(Rewrite { relation, product });
    let lw = left.wires();
    if !lw.iter().any(|w| right.wires().contains(w)) {
        return done(Relation::Disjoint, vec![right, left]);
    }
    match (left, right) {
        (A { q, a }, A { q: q2, a: b }) if q == q2 => done(Relation::ShiftMerge, vec![Gate::a(q, f.add(a, b))]),
        (D { q, a }, D { q: q2, a: b }) if q == q2 => done(Relation::ScaleMerge, vec![Gate::d(q, f.mul(a, b))]),
        (D { q, a }, A { q: q2, a: b }) if q == q2 => {
            done(Relation::ScaleShift, vec![Gate::a(q, f.mul(a, b)), Gate::d(q, a)])
        }
        (C { control: m, target: n, a }, A { q, a: b }) if q == m => done(
            Relation::ControlShift,
            vec![Gate::a(n, f.mul(a, b)), Gate::a(m, b), left],
        ),
        (C { target: n, .. }, A { q, .. }) if q == n => done(Relation::TargetShift, vec![right, left]),
        (C { control: m, target: n, a }, D { q, a: b }) if q == m => {
            done(Relation::ControlScale, vec![right, Gate::c(m, n, f.mul(b, a))])
        }
        (C { control: m, target: n, a }, D { q, a: b }) if q == n => {
            let binv = f.inv(b).map_err(|_| RewriteError::Sim(SimError::ZeroScale))?;
            done(Relation::TargetScale, vec![right, Gate::c(m, n, f.mul(binv, a))])
        }
        (C { control: m, target: n, a }, C { control: m2, target: n2, a: b }) => {
            if m == m2 && n == n2 {
                done(Relation::CnotMerge, vec![Gate::c(m, n, f.add(a, b))])
            } else if m == n2 && n == m2 {
                let big_a = f.add(Elem::ONE, f.mul(a, b));
                if big_a.is_zero() {
                    // b ≠ 0 here since a·b = -1
                    let binv = f.inv(b)?;
                    done(
                        Relation::CnotReverseSwap,
                        vec![Gate::W { a: m, b: n }, Gate::d(m, a), Gate::d(n, b), Gate::c(m, n, binv)],
                    )
                } else {
                    let ainv = f.inv(big_a)?;
                    done(
                        Relation::CnotReverse,
                        vec![
                            Gate::d(m, ainv),
                            Gate::d(n, big_a),
                            Gate::c(n, m, f.mul(big_a, b)),
                            Gate::c(m, n, f.mul(ainv, a)),
                        ],
                    )
                }
            } else if m == m2 {
                done(Relation::SharedControl, vec![right, left])
            } else if n == n2 {
                done(Relation::SharedTarget, vec![right, left])
            } else if m == n2 {
                // left = C_nl(b'), right = C_mn(a'): control of left is target of right
                done(Relation::Chain, vec![Gate::c(m2, n, f.mul(b, a)), right, left])
            } else {
                // n == m2: left = C_mn(a), right = C_nl(b)
                done(
                    Relation::ChainReversed,
                    vec![right, left, Gate::c(m, n2, f.neg(f.mul(a, b)))],
                )
            }
        }
        _ => Err(RewriteError::NoRelation(left, right)),
    }
}

/// Applies `steps` random successful pair rewrites to the time-ordered gate
/// list, returning the new list. Gate pairs without a relation are skipped.
pub fn random_rewrites<R: rand::Rng>(field: &Field, gates: &[Gate], steps: usize, rng: &mut R) -> Vec<Gate> {
    let mut seq = gates.to_vec();
    if seq.len() < 2 {
        return seq;
    }
    let mut applied = 0;
    let mut attempts = 0;
    while applied < steps && attempts < steps * 50 && seq.len() >= 2 {
        attempts += 1;
        let i = rng.gen_range(0..seq.len() - 1);
        // time order [.., x, y, ..] is the product y · x
        match commute_pair(field, seq[i + 1], seq[i]) {
            Ok(rw) => {
                seq.splice(i..i + 2, rw.sequence());
                applied += 1;
            }
            Err(_) => continue,
        }
    }
    seq
}
