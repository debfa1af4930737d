//! Dense state-vector simulation of qudit registers.
//!
//! Basis index layout: qudit 0 is the most significant base-d digit, so the
//! digit string of an index reads like a ket, left to right.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field};

/// Default absolute tolerance for amplitude and eigenvalue comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest state vector the simulator will allocate.
pub const MAX_AMPLITUDES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("register of {qudits} qudits with local dimension {dim} exceeds the {max}-amplitude guard")]
    SizeGuard { dim: usize, qudits: usize, max: usize },
    #[error("qudit {qudit} out of range for a {qudits}-qudit register")]
    WireOutOfRange { qudit: usize, qudits: usize },
    #[error("two-qudit gate needs distinct qudits, got {0} twice")]
    RepeatedWire(usize),
    #[error("D(0) is not unitary")]
    ZeroScale,
    #[error("gate parameter {0} is not an element of the field")]
    BadParameter(Elem),
    #[error("subset must be a nonempty proper subset of the qudits, got {0:?}")]
    BadSubset(Vec<usize>),
    #[error("amplitude vector of length {len} does not match {dim}^{qudits}")]
    BadLength { len: usize, dim: usize, qudits: usize },
    #[error("state dump: {0}")]
    Dump(String),
}

/// Initial single-qudit state: the uniform superposition `|s>` or `|0>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Init {
    S,
    Zero,
}

/// A gate on 0-based qudit indices. `Hdg` is the adjoint of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    /// `|x> -> |x + a>`
    A { q: usize, a: Elem },
    /// `|x> -> |a x>`, `a != 0`
    D { q: usize, a: Elem },
    /// `|x>_c |y>_t -> |x>_c |y + a x>_t`
    C { control: usize, target: usize, a: Elem },
    /// Fourier transform with phase `ω^{x·y}`, ω a primitive p-th root of unity.
    H { q: usize },
    Hdg { q: usize },
    /// Coefficient reversal `|x> -> |reverse(x)>`.
    V { q: usize },
    /// Swap.
    W { a: usize, b: usize },
}

impl Gate {
    pub fn a(q: usize, a: Elem) -> Gate {
        Gate::A { q, a }
    }

    pub fn d(q: usize, a: Elem) -> Gate {
        Gate::D { q, a }
    }

    pub fn c(control: usize, target: usize, a: Elem) -> Gate {
        Gate::C { control, target, a }
    }

    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::A { q, .. } | Gate::D { q, .. } | Gate::H { q } | Gate::Hdg { q } | Gate::V { q } => {
                vec![q]
            }
            Gate::C { control, target, .. } => vec![control, target],
            Gate::W { a, b } => vec![a, b],
        }
    }

    pub fn is_permutation(&self) -> bool {
        !matches!(self, Gate::H { .. } | Gate::Hdg { .. })
    }

    /// The adjoint gate (exact for every kind in the set).
    pub fn adjoint(&self, field: &Field) -> Gate {
        match *self {
            Gate::A { q, a } => Gate::A { q, a: field.neg(a) },
            Gate::D { q, a } => Gate::D { q, a: field.inv(a).unwrap_or(Elem::ZERO) },
            Gate::C { control, target, a } => Gate::C { control, target, a: field.neg(a) },
            Gate::H { q } => Gate::Hdg { q },
            Gate::Hdg { q } => Gate::H { q },
            Gate::V { q } => Gate::V { q },
            Gate::W { a, b } => Gate::W { a, b },
        }
    }

    pub fn validate(&self, field: &Field, qudits: usize) -> Result<(), SimError> {
        for w in self.wires() {
            if w >= qudits {
                return Err(SimError::WireOutOfRange { qudit: w, qudits });
            }
        }
        match *self {
            Gate::C { control, target, .. } if control == target => Err(SimError::RepeatedWire(control)),
            Gate::W { a, b } if a == b => Err(SimError::RepeatedWire(a)),
            Gate::D { a, .. } if a.is_zero() => Err(SimError::ZeroScale),
            Gate::A { a, .. } | Gate::D { a, .. } | Gate::C { a, .. } if !field.contains(a) => {
                Err(SimError::BadParameter(a))
            }
            _ => Ok(()),
        }
    }

    /// Relabels wires through `map` (old index -> new index).
    pub fn remap(&self, map: &[usize]) -> Gate {
        match *self {
            Gate::A { q, a } => Gate::A { q: map[q], a },
            Gate::D { q, a } => Gate::D { q: map[q], a },
            Gate::C { control, target, a } => Gate::C { control: map[control], target: map[target], a },
            Gate::H { q } => Gate::H { q: map[q] },
            Gate::Hdg { q } => Gate::Hdg { q: map[q] },
            Gate::V { q } => Gate::V { q: map[q] },
            Gate::W { a, b } => Gate::W { a: map[a], b: map[b] },
        }
    }
}

/// `d^n`, or a guard error when it exceeds [`MAX_AMPLITUDES`].
pub fn checked_size(dim: usize, qudits: usize) -> Result<usize, SimError> {
    let guard = SimError::SizeGuard { dim, qudits, max: MAX_AMPLITUDES };
    let mut size: usize = 1;
    for _ in 0..qudits {
        size = size.checked_mul(dim).ok_or(guard.clone())?;
        if size > MAX_AMPLITUDES {
            return Err(guard);
        }
    }
    Ok(size)
}

/// Base-d digits of `index`, most significant (qudit 0) first.
pub fn digits(index: usize, dim: usize, qudits: usize) -> Vec<usize> {
    let mut out = vec![0; qudits];
    let mut v = index;
    for slot in out.iter_mut().rev() {
        *slot = v % dim;
        v /= dim;
    }
    out
}

pub fn index_of(digits: &[usize], dim: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * dim + x)
}

/// A plain dense register: `qudits` systems of local dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    dim: usize,
    qudits: usize,
    amps: Vec<Complex64>,
}

impl Register {
    pub fn new(dim: usize, qudits: usize, amps: Vec<Complex64>) -> Result<Register, SimError> {
        let size = checked_size(dim, qudits)?;
        if amps.len() != size {
            return Err(SimError::BadLength { len: amps.len(), dim, qudits });
        }
        Ok(Register { dim, qudits, amps })
    }

    /// Uniform superposition over the given basis indices (duplicates add up
    /// before normalization).
    pub fn uniform_over<I: IntoIterator<Item = usize>>(
        dim: usize,
        qudits: usize,
        support: I,
    ) -> Result<Register, SimError> {
        let size = checked_size(dim, qudits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); size];
        for i in support {
            amps[i] += 1.0;
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(Register { dim, qudits, amps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qudits(&self) -> usize {
        self.qudits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Register) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn equal_up_to_phase(&self, other: &Register, tol: f64) -> bool {
        self.dim == other.dim
            && self.qudits == other.qudits
            && (1.0 - self.inner(other).norm()).abs() < tol
            && (self.norm() - 1.0).abs() < tol
            && (other.norm() - 1.0).abs() < tol
    }

    /// Largest entrywise difference after removing the relative global phase.
    pub fn phase_aligned_deviation(&self, other: &Register) -> f64 {
        let ov = self.inner(other);
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (b - a * phase).norm())
            .fold(0.0, f64::max)
    }

    /// Indices whose amplitude magnitude exceeds `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.amps.len()).filter(|&i| self.amps[i].norm() > tol).collect()
    }

    /// Reorders qudits: qudit `q` of `self` becomes qudit `perm[q]` of the result.
    pub fn permute_qudits(&self, perm: &[usize]) -> Register {
        assert_eq!(perm.len(), self.qudits);
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut moved = vec![0; self.qudits];
        for (i, &a) in self.amps.iter().enumerate() {
            let dg = digits(i, self.dim, self.qudits);
            for (q, &x) in dg.iter().enumerate() {
                moved[perm[q]] = x;
            }
            amps[index_of(&moved, self.dim)] = a;
        }
        Register { dim: self.dim, qudits: self.qudits, amps }
    }

    /// Partial trace onto `subset` (0-based, any order; kept in sorted order).
    pub fn reduced_density(&self, subset: &[usize]) -> Result<DensityMatrix, SimError> {
        let mut keep: Vec<usize> = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() || keep.len() != subset.len() || keep.len() >= self.qudits || keep.iter().any(|&q| q >= self.qudits) {
            return Err(SimError::BadSubset(subset.to_vec()));
        }
        let rest: Vec<usize> = (0..self.qudits).filter(|q| !keep.contains(q)).collect();
        let rows = self.dim.pow(keep.len() as u32);
        let cols = self.dim.pow(rest.len() as u32);
        let strides: Vec<usize> = (0..self.qudits).map(|q| self.dim.pow((self.qudits - 1 - q) as u32)).collect();
        let mut m = DMatrix::<Complex64>::zeros(rows, cols);
        for (i, &a) in self.amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let r = keep.iter().fold(0, |acc, &q| acc * self.dim + (i / strides[q]) % self.dim);
            let c = rest.iter().fold(0, |acc, &q| acc * self.dim + (i / strides[q]) % self.dim);
            m[(r, c)] = a;
        }
        let rho = &m * m.adjoint();
        Ok(DensityMatrix { subset: keep, dim: self.dim, matrix: rho })
    }

    /// Debug dump: one `digits re im` line per nonzero amplitude, ascending.
    /// Digits are concatenated for `dim <= 10` and dot-separated above.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() <= 1e-15 {
                continue;
            }
            let _ = writeln!(out, "{} {} {}", format_digits(i, self.dim, self.qudits), a.re, a.im);
        }
        out
    }

    /// Parses [`Register::dump`] output for a known register shape.
    pub fn parse_dump(dim: usize, qudits: usize, text: &str) -> Result<Register, SimError> {
        let size = checked_size(dim, qudits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); size];
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| SimError::Dump(format!("line {}: {what}", ln + 1));
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad("expected `digits re im`"));
            }
            let dg = parse_digits(parts[0], dim, qudits).ok_or_else(|| bad("bad digit string"))?;
            let re: f64 = parts[1].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = parts[2].parse().map_err(|_| bad("bad imaginary part"))?;
            amps[index_of(&dg, dim)] = Complex64::new(re, im);
        }
        Ok(Register { dim, qudits, amps })
    }
}

pub fn format_digits(index: usize, dim: usize, qudits: usize) -> String {
    let dg = digits(index, dim, qudits);
    if dim <= 10 {
        dg.iter().map(|x| char::from(b'0' + *x as u8)).collect()
    } else {
        dg.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")
    }
}

fn parse_digits(s: &str, dim: usize, qudits: usize) -> Option<Vec<usize>> {
    let dg: Vec<usize> = if dim <= 10 {
        s.chars().map(|c| c.to_digit(10).map(|x| x as usize)).collect::<Option<_>>()?
    } else {
        s.split('.').map(|t| t.parse().ok()).collect::<Option<_>>()?
    };
    (dg.len() == qudits && dg.iter().all(|&x| x < dim)).then_some(dg)
}

/// Reduced density matrix on a sorted subset of qudits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub subset: Vec<usize>,
    pub dim: usize,
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues, descending. `ρ` is positive semidefinite, so these are its
    /// singular values; the SVD stays finite on highly degenerate spectra
    /// where the symmetric eigensolver can return `inf`.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().singular_values().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.spectrum().into_iter().filter(|&x| x > tol).count()
    }

    /// `max |ρ - I/side|` over all entries.
    pub fn deviation_from_maximally_mixed(&self) -> f64 {
        let side = self.side();
        let level = 1.0 / side as f64;
        let mut worst: f64 = 0.0;
        for r in 0..side {
            for c in 0..side {
                let target = if r == c { level } else { 0.0 };
                worst = worst.max((self.matrix[(r, c)] - target).norm());
            }
        }
        worst
    }
}

#[inline]
fn elem_at(digit: usize) -> Elem {
    crate::gf::elem_unchecked(digit as u32)
}

/// Precomputed layout and phases for applying gates over one field.
struct Kernel<'a> {
    field: &'a Field,
    dim: usize,
    strides: Vec<usize>,
    omega: Vec<Complex64>,
    scale: f64,
}

impl<'a> Kernel<'a> {
    fn new(field: &'a Field, qudits: usize) -> Kernel<'a> {
        let dim = field.order() as usize;
        let p = field.characteristic();
        Kernel {
            field,
            dim,
            strides: (0..qudits).map(|q| dim.pow((qudits - 1 - q) as u32)).collect(),
            omega: (0..p).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)).collect(),
            scale: 1.0 / (dim as f64).sqrt(),
        }
    }

    #[inline]
    fn digit(&self, index: usize, q: usize) -> usize {
        (index / self.strides[q]) % self.dim
    }

    #[inline]
    fn set(&self, index: usize, q: usize, value: usize) -> usize {
        index - self.digit(index, q) * self.strides[q] + value * self.strides[q]
    }

    /// Image of a permutation gate on a basis index.
    fn permute(&self, gate: &Gate, i: usize) -> usize {
        let f = self.field;
        let e = |x: usize| elem_at(x);
        match *gate {
            Gate::A { q, a } => self.set(i, q, f.add(e(self.digit(i, q)), a).index() as usize),
            Gate::D { q, a } => self.set(i, q, f.mul(e(self.digit(i, q)), a).index() as usize),
            Gate::C { control, target, a } => {
                let x = e(self.digit(i, control));
                let y = e(self.digit(i, target));
                self.set(i, target, f.add(y, f.mul(a, x)).index() as usize)
            }
            Gate::V { q } => self.set(i, q, f.reverse(e(self.digit(i, q))).index() as usize),
            Gate::W { a, b } => {
                let (x, y) = (self.digit(i, a), self.digit(i, b));
                self.set(self.set(i, a, y), b, x)
            }
            Gate::H { .. } | Gate::Hdg { .. } => unreachable!("not a permutation"),
        }
    }

    /// Column `i` of the gate's matrix, pushed as `(row, amplitude)` pairs.
    fn column(&self, gate: &Gate, i: usize, out: &mut Vec<(usize, Complex64)>) {
        match *gate {
            Gate::H { q } | Gate::Hdg { q } => {
                let conj = matches!(gate, Gate::Hdg { .. });
                let x = elem_at(self.digit(i, q));
                for y in self.field.elements() {
                    let k = self.field.dot(x, y) as usize;
                    let w = if conj { self.omega[k].conj() } else { self.omega[k] };
                    out.push((self.set(i, q, y.index() as usize), w * self.scale));
                }
            }
            _ => out.push((self.permute(gate, i), Complex64::new(1.0, 0.0))),
        }
    }
}

/// Sparse-column operator on a small register, built by pushing each basis
/// vector through a gate sequence.
#[derive(Debug, Clone)]
pub struct Operator {
    dim: usize,
    qudits: usize,
    columns: Vec<Vec<(usize, Complex64)>>,
}

impl Operator {
    /// Operator of `gates` applied in time order (first element acts first).
    pub fn from_sequence(field: &Field, qudits: usize, gates: &[Gate]) -> Result<Operator, SimError> {
        let size = checked_size(field.order() as usize, qudits)?;
        for g in gates {
            g.validate(field, qudits)?;
        }
        let k = Kernel::new(field, qudits);
        let mut columns = Vec::with_capacity(size);
        let mut buf = Vec::new();
        for b in 0..size {
            let mut col = vec![(b, Complex64::new(1.0, 0.0))];
            for g in gates {
                buf.clear();
                for &(i, amp) in &col {
                    let start = buf.len();
                    k.column(g, i, &mut buf);
                    for entry in &mut buf[start..] {
                        entry.1 *= amp;
                    }
                }
                buf.sort_unstable_by_key(|e| e.0);
                col.clear();
                for &(i, a) in &buf {
                    match col.last_mut() {
                        Some(last) if last.0 == i => last.1 += a,
                        _ => col.push((i, a)),
                    }
                }
                col.retain(|e| e.1.norm() > 1e-14);
            }
            columns.push(col);
        }
        Ok(Operator { dim: field.order() as usize, qudits, columns })
    }

    /// Operator of a product written left to right (rightmost acts first).
    pub fn from_product(field: &Field, qudits: usize, product: &[Gate]) -> Result<Operator, SimError> {
        let seq: Vec<Gate> = product.iter().rev().copied().collect();
        Operator::from_sequence(field, qudits, &seq)
    }

    pub fn size(&self) -> usize {
        self.columns.len()
    }

    pub fn qudits(&self) -> usize {
        self.qudits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, a) in col {
                m[(r, c)] = a;
            }
        }
        m
    }

    /// Walks the union of both supports column by column, calling `visit`
    /// with `(row, col, self_entry, other_entry)` until it returns `false`.
    fn walk_entries<F>(&self, other: &Operator, mut visit: F)
    where
        F: FnMut(usize, usize, Complex64, Complex64) -> bool,
    {
        assert_eq!(self.size(), other.size());
        let zero = Complex64::new(0.0, 0.0);
        for (c, (a, b)) in self.columns.iter().zip(&other.columns).enumerate() {
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let (row, x, y) = match (a.get(i), b.get(j)) {
                    (Some(&(ra, xa)), Some(&(rb, xb))) if ra == rb => {
                        i += 1;
                        j += 1;
                        (ra, xa, xb)
                    }
                    (Some(&(ra, xa)), Some(&(rb, _))) if ra < rb => {
                        i += 1;
                        (ra, xa, zero)
                    }
                    (Some(&(ra, xa)), None) => {
                        i += 1;
                        (ra, xa, zero)
                    }
                    (_, Some(&(rb, xb))) => {
                        j += 1;
                        (rb, zero, xb)
                    }
                    (None, None) => unreachable!(),
                };
                if !visit(row, c, x, y) {
                    return;
                }
            }
        }
    }

    /// Largest entrywise `|self - other|`; absent entries are zero.
    pub fn max_deviation(&self, other: &Operator) -> f64 {
        let mut worst: f64 = 0.0;
        self.walk_entries(other, |_, _, x, y| {
            worst = worst.max((x - y).norm());
            true
        });
        worst
    }

    /// First entry (column-major) where the operators differ by `tol` or more.
    pub fn first_difference(&self, other: &Operator, tol: f64) -> Option<(usize, usize, Complex64, Complex64)> {
        let mut found = None;
        self.walk_entries(other, |r, c, x, y| {
            if (x - y).norm() >= tol {
                found = Some((r, c, x, y));
                false
            } else {
                true
            }
        });
        found
    }
}

/// State of `N` qudits over a finite field.
#[derive(Debug, Clone)]
pub struct StateVector {
    field: Arc<Field>,
    reg: Register,
}

impl StateVector {
    /// Product state of `|s>` and `|0>` factors.
    pub fn init(field: Arc<Field>, pattern: &[Init]) -> Result<StateVector, SimError> {
        let dim = field.order() as usize;
        let qudits = pattern.len();
        let size = checked_size(dim, qudits)?;
        let free: Vec<usize> = (0..qudits).filter(|&q| pattern[q] == Init::S).collect();
        let count = dim.pow(free.len() as u32);
        let strides: Vec<usize> = (0..qudits).map(|q| dim.pow((qudits - 1 - q) as u32)).collect();
        let amp = Complex64::new(1.0 / (count as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); size];
        for j in 0..count {
            let dg = digits(j, dim, free.len());
            let idx: usize = free.iter().zip(&dg).map(|(&q, &x)| x * strides[q]).sum();
            amps[idx] = amp;
        }
        Ok(StateVector { field, reg: Register { dim, qudits, amps } })
    }

    pub fn from_register(field: Arc<Field>, reg: Register) -> Result<StateVector, SimError> {
        if reg.dim != field.order() as usize {
            return Err(SimError::BadLength { len: reg.amps.len(), dim: field.order() as usize, qudits: reg.qudits });
        }
        Ok(StateVector { field, reg })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn register(&self) -> &Register {
        &self.reg
    }

    pub fn into_register(self) -> Register {
        self.reg
    }

    pub fn qudits(&self) -> usize {
        self.reg.qudits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.reg.amps
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(&self.field, self.reg.qudits)?;
        let k = Kernel::new(&self.field, self.reg.qudits);
        let amps = &self.reg.amps;
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        if gate.is_permutation() {
            for (i, &a) in amps.iter().enumerate() {
                out[k.permute(gate, i)] = a;
            }
        } else {
            let mut col = Vec::with_capacity(k.dim);
            for (i, &a) in amps.iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                col.clear();
                k.column(gate, i, &mut col);
                for &(r, w) in &col {
                    out[r] += w * a;
                }
            }
        }
        self.reg.amps = out;
        Ok(())
    }

    /// Applies `gates` in time order.
    pub fn apply_all<'g, I: IntoIterator<Item = &'g Gate>>(&mut self, gates: I) -> Result<(), SimError> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    pub fn reduced_density(&self, subset: &[usize]) -> Result<DensityMatrix, SimError> {
        self.reg.reduced_density(subset)
    }

    pub fn equal_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.reg.equal_up_to_phase(&other.reg, tol)
    }
}

/// The d×d matrix of the Fourier gate, `H[x][y] = ω^{x·y} / √d`.
pub fn fourier_matrix(field: &Field) -> DMatrix<Complex64> {
    let op = Operator::from_sequence(field, 1, &[Gate::H { q: 0 }]).expect("single qudit fits");
    op.to_dense()
}
