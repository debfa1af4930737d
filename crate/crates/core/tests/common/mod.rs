//! Random circuit generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use qudit_graphs::{Circuit, Field, Gate, Init};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn field(d: u32) -> Arc<Field> {
    Arc::new(Field::of_order(d).unwrap())
}

/// Init pattern with `1 <= k <= n-1` qudits in `|s>` at random positions.
pub fn random_init<R: Rng>(n: usize, rng: &mut R) -> Vec<Init> {
    let k = rng.gen_range(1..n);
    let mut init: Vec<Init> = (0..n).map(|q| if q < k { Init::S } else { Init::Zero }).collect();
    init.shuffle(rng);
    init
}

pub fn random_cnot<R: Rng>(f: &Field, n: usize, rng: &mut R) -> Gate {
    let c = rng.gen_range(0..n);
    let mut t = rng.gen_range(0..n - 1);
    if t >= c {
        t += 1;
    }
    Gate::c(c, t, f.elem(rng.gen_range(0..f.order() as u64)).unwrap())
}

/// C-only circuit on `2..=max_n` qudits with up to `max_gates` gates.
pub fn random_cnot_circuit<R: Rng>(f: &Arc<Field>, max_n: usize, max_gates: usize, rng: &mut R) -> Circuit {
    let n = rng.gen_range(2..=max_n);
    let init = random_init(n, rng);
    let len = rng.gen_range(0..=max_gates);
    let gates = (0..len).map(|_| random_cnot(f, n, rng)).collect();
    Circuit::new(f.clone(), init, gates).unwrap()
}

/// Circuit of C, A and D gates.
pub fn random_affine_circuit<R: Rng>(f: &Arc<Field>, max_n: usize, max_gates: usize, rng: &mut R) -> Circuit {
    let n = rng.gen_range(2..=max_n);
    let init = random_init(n, rng);
    let len = rng.gen_range(0..=max_gates);
    let d = f.order() as u64;
    let gates = (0..len)
        .map(|_| match rng.gen_range(0..4) {
            0 => Gate::a(rng.gen_range(0..n), f.elem(rng.gen_range(0..d)).unwrap()),
            1 => Gate::d(rng.gen_range(0..n), f.elem(rng.gen_range(1..d)).unwrap()),
            _ => random_cnot(f, n, rng),
        })
        .collect();
    Circuit::new(f.clone(), init, gates).unwrap()
}

/// Nonempty proper subset of `0..n`.
pub fn random_subset<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() && s.len() < n {
            return s;
        }
    }
}
