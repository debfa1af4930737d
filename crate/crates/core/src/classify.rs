//! Enumeration of standard-form graph states up to local unitaries.
//!
//! Graphs are enumerated with `S = {0..k}` for `1 <= k <= N/2` and every
//! label matrix; relabeling qudits cannot change the local-unitary class, so
//! fixing `S` to the first slots loses nothing. Only genuinely multipartite
//! entangled states are kept (no bipartition is a product). Types are the
//! sizes of `S`: for `k <= N/2` the reduced state of `S` has rank `d^k`
//! while a `k = 1` state has rank `d` on every subset, so different `k` never
//! share an invariant signature when `N <= 5`. Within a type the graphs are
//! further bucketed by their signature.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::entangle::Signature;
use crate::gf::Field;
use crate::io::GraphJson;
use crate::linalg::Matrix;
use crate::rewrite::{GraphState, RewriteError};
use crate::simulator::{checked_size, digits, SimError};

/// Largest party count accepted by [`classify`].
pub const MAX_PARTIES: usize = 5;

/// Largest number of label matrices enumerated per `k`.
pub const MAX_GRAPHS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bucket {
    pub graphs: usize,
    /// Reduced-state ranks over the subsets `|A| <= N/2`, sorted.
    pub rank_profile: Vec<usize>,
    pub representative: GraphJson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeRecord {
    pub s_size: usize,
    pub graphs: usize,
    pub buckets: Vec<Bucket>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub parties: usize,
    pub field: String,
    pub enumerated: usize,
    pub genuinely_entangled: usize,
    pub type_count: usize,
    pub bucket_count: usize,
    pub types: Vec<TypeRecord>,
    /// Signatures found under more than one `|S|`; expected empty.
    pub shared_signatures: usize,
}

fn label_matrix(field: &Field, k: usize, cols: usize, code: usize) -> Matrix {
    let d = field.order() as usize;
    let flat = digits(code, d, k * cols);
    let rows = (0..k)
        .map(|j| (0..cols).map(|l| field.elem(flat[j * cols + l] as u64).expect("digit below d")).collect())
        .collect();
    Matrix::from_rows(rows)
}

/// Enumerates and buckets the genuinely entangled standard-form graph
/// states of `parties` qudits.
pub fn classify(parties: usize, field: &Arc<Field>, tol: f64) -> Result<ClassReport, RewriteError> {
    if !(2..=MAX_PARTIES).contains(&parties) {
        return Err(RewriteError::BadGraph(format!("classification supports 2..={MAX_PARTIES} parties, got {parties}")));
    }
    let d = field.order() as usize;
    checked_size(d, parties)?;
    let mut enumerated = 0;
    let mut genuinely = 0;
    let mut types = Vec::new();
    let mut seen: BTreeMap<Vec<Vec<i64>>, usize> = BTreeMap::new();
    let mut shared = 0;
    for k in 1..=parties / 2 {
        let cols = parties - k;
        let count = d.checked_pow((k * cols) as u32).filter(|&c| c <= MAX_GRAPHS).ok_or(SimError::SizeGuard {
            dim: d,
            qudits: k * cols,
            max: MAX_GRAPHS,
        })?;
        enumerated += count;
        let found = (0..count)
            .into_par_iter()
            .map(|code| {
                let g = GraphState::from_label_matrix(field.clone(), &label_matrix(field, k, cols, code))?;
                let sig = Signature::of(g.state()?.register())?;
                let ranks = sig.ranks(tol);
                let entangled = ranks.iter().all(|&r| r > 1);
                Ok::<_, RewriteError>(entangled.then_some((code, g, sig, ranks)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut buckets: BTreeMap<Vec<Vec<i64>>, Bucket> = BTreeMap::new();
        let mut graphs = 0;
        for (_, g, sig, mut ranks) in found.into_iter().flatten() {
            graphs += 1;
            ranks.sort_unstable();
            buckets
                .entry(sig.key())
                .and_modify(|b| b.graphs += 1)
                .or_insert_with(|| Bucket { graphs: 1, rank_profile: ranks, representative: GraphJson::from(&g) });
        }
        for key in buckets.keys() {
            if let Some(&other) = seen.get(key) {
                if other != k {
                    shared += 1;
                }
            } else {
                seen.insert(key.clone(), k);
            }
        }
        genuinely += graphs;
        if graphs > 0 {
            types.push(TypeRecord { s_size: k, graphs, buckets: buckets.into_values().collect() });
        }
    }
    Ok(ClassReport {
        parties,
        field: field.to_string(),
        enumerated,
        genuinely_entangled: genuinely,
        type_count: types.len(),
        bucket_count: types.iter().map(|t| t.buckets.len()).sum(),
        types,
        shared_signatures: shared,
    })
}
