//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use qudit_graphs::classify::classify;
use qudit_graphs::duality::{conjugation_report, dual_graph, polynomial_sweep, verify_dual_equivalence};
use qudit_graphs::entangle::{
    entropy_problem_checks, mes_for_dimension, mes_verdict, p_prime_state, psi_state, symbolic_rdm_rank, EntangleError,
    Ingredient,
};
use qudit_graphs::io::{parse_state, write_state};
use qudit_graphs::linalg::Matrix;
use qudit_graphs::relations::{run_suite, standard_rule};
use qudit_graphs::simulator::{digits, index_of};
use qudit_graphs::{canonicalize, Field, GraphState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{field, random_cnot_circuit, random_subset};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn f4_tables() -> Outcome {
    let add = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
    let mul = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
    let f = Field::new(2, 2, Some(&[1, 1, 1])).map_err(|e| e.to_string())?;
    let (ga, gm) = (f.add_table(), f.mul_table());
    let mut matches = 0;
    for r in 0..4 {
        for c in 0..4 {
            ensure(ga[r][c] == add[r][c], || format!("{r}+{c}: got {}, table {}", ga[r][c], add[r][c]))?;
            ensure(gm[r][c] == mul[r][c], || format!("{r}x{c}: got {}, table {}", gm[r][c], mul[r][c]))?;
            matches += 2;
        }
    }
    Ok(format!("{matches}/32 entries match"))
}

fn relation_suite() -> Outcome {
    let fields: Vec<Field> = [2, 3, 4, 5, 7, 8, 9].iter().map(|&d| Field::of_order(d).unwrap()).collect();
    let r = run_suite(&fields, 5, 1000, 20240531, 1e-10, &standard_rule);
    let cases: usize = r.checks.iter().map(|c| c.cases).sum();
    let worst = r.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    if let Some(bad) = r.checks.iter().find(|c| !c.passed()) {
        return Err(format!("{} over {}: {:?}", bad.relation, bad.field, bad.first_failure));
    }
    Ok(format!("{} relation/field checks, {cases} instances, max deviation {worst:.1e}", r.checks.len()))
}

fn canonical_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [2, 3, 4, 5] {
        let f = field(d);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + d as u64);
        for i in 0..200 {
            let c = random_cnot_circuit(&f, 5, 30, &mut rng);
            let canon = canonicalize(&c).map_err(|e| format!("d={d} #{i}: {e}"))?;
            let original = c.simulate().map_err(|e| e.to_string())?;
            let rebuilt = canon.reproduce().map_err(|e| e.to_string())?;
            let dev = original.register().phase_aligned_deviation(&rebuilt);
            worst = worst.max(dev);
            ensure(canon.corrections.is_empty(), || format!("d={d} #{i}: C-only circuit left shifts"))?;
            ensure(original.register().equal_up_to_phase(&rebuilt, 1e-10) && dev < 1e-10, || {
                format!("d={d} #{i}: deviation {dev:e}")
            })?;
        }
    }
    Ok(format!("800 circuits reproduced, max deviation {worst:.1e}"))
}

fn psi_literal() -> Outcome {
    let printed = [
        "0000", "0211", "0322", "0133", "1101", "1310", "1223", "1032", "2202", "2013", "2120", "2331", "3303", "3112",
        "3021", "3230",
    ];
    let f = field(4);
    let s = psi_state(&f, f.elem(2).unwrap()).map_err(|e| e.to_string())?;
    let support = s.register().support(1e-12);
    ensure(support.len() == 16, || format!("{} terms", support.len()))?;
    for ket in printed {
        let dg: Vec<usize> = ket.chars().map(|c| c.to_digit(10).unwrap() as usize).collect();
        let a = s.amplitudes()[index_of(&dg, 4)];
        ensure((a.re - 0.25).abs() < 1e-12 && a.im.abs() < 1e-12, || format!("|{ket}> has amplitude {a}"))?;
    }
    Ok("16 printed terms, amplitude 1/4 each, nothing else".into())
}

fn psi_entanglement() -> Outcome {
    let mut checked = 0;
    for d in [2, 3, 4, 5, 7, 8, 9] {
        let f = field(d);
        for a in f.elements() {
            let s = psi_state(&f, a).map_err(|e| e.to_string())?;
            let v = mes_verdict(s.register(), 1e-10).map_err(|e| e.to_string())?.verdict;
            let expect = d != 2 && a.index() >= 2;
            ensure(v == expect, || format!("d={d} a_r={a}: verdict {v}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (d, a_r) pairs as predicted"))
}

fn p_prime_parity() -> Outcome {
    for d in [3, 5, 7, 9, 11, 13, 15, 2, 4, 6, 8] {
        let s = p_prime_state(d).map_err(|e| e.to_string())?;
        let v = mes_verdict(&s.register, 1e-10).map_err(|e| e.to_string())?.verdict;
        ensure(v == (d % 2 == 1), || format!("d={d}: verdict {v}"))?;
    }
    Ok("odd 3..15 true, even 2..8 false".into())
}

fn multiple_of_four() -> Outcome {
    let recipe = mes_for_dimension(12).map_err(|e| e.to_string())?;
    ensure(
        recipe.ingredients == vec![Ingredient::Psi { p: 2, n: 2, poly: 3, a_r: 2 }, Ingredient::PPrime { d: 3 }],
        || format!("unexpected recipe {}", recipe.describe()),
    )?;
    let reg = recipe.build(1e-9).map_err(|e| e.to_string())?;
    ensure(reg.amplitudes().len() == 20736, || "wrong register size".into())?;
    let reg = parse_state(&write_state(&reg, &[recipe.describe()])).map_err(|e| e.to_string())?;
    let rep = mes_verdict(&reg, 1e-9).map_err(|e| e.to_string())?;
    ensure(rep.bipartitions.len() == 7, || format!("{} subsets", rep.bipartitions.len()))?;
    ensure(rep.verdict, || format!("{:?}", rep.bipartitions))?;
    let worst = rep.bipartitions.iter().map(|b| b.deviation).fold(0.0, f64::max);
    match mes_for_dimension(6) {
        Err(EntangleError::Refused { reason, .. }) => {
            ensure(reason.contains("conjectured not to exist"), || reason.clone())?;
        }
        other => return Err(format!("d=6 not refused: {other:?}")),
    }
    Ok(format!("d=12 state: 7 subsets maximally mixed, max deviation {worst:.1e}; d=6 refused"))
}

fn duality() -> Outcome {
    for d in [2, 3, 5, 7] {
        let r = conjugation_report(&Field::of_order(d).unwrap(), 1e-10).map_err(|e| e.to_string())?;
        ensure(r.conjugation_identity_holds, || format!("prime field {d}: {:?}", r.counterexample))?;
    }
    let mut findings = Vec::new();
    for (p, n) in [(2, 2), (2, 3)] {
        for r in polynomial_sweep(p, n, 1e-10).map_err(|e| e.to_string())? {
            ensure(r.conjugation_identity_holds == r.counterexample.is_none(), || format!("{}: indefinite report", r.field))?;
            findings.push(format!(
                "GF({}) {}: {}",
                p.pow(n),
                r.polynomial,
                if r.conjugation_identity_holds { "holds" } else { "fails" }
            ));
        }
    }
    let mut graphs = 0;
    let mut dressed = 0;
    for d in [2u32, 3, 4] {
        let f = field(d);
        let du = d as usize;
        for n in 2..=4usize {
            for k in 1..n {
                let cols = n - k;
                for code in 0..du.pow((k * cols) as u32) {
                    let flat = digits(code, du, k * cols);
                    let rows = (0..k)
                        .map(|j| (0..cols).map(|l| f.elem(flat[j * cols + l] as u64).unwrap()).collect())
                        .collect();
                    let g = GraphState::from_label_matrix(f.clone(), &Matrix::from_rows(rows)).unwrap();
                    ensure(dual_graph(&dual_graph(&g)) == g, || "dual is not an involution".into())?;
                    let r = verify_dual_equivalence(&g, 1e-10).map_err(|e| e.to_string())?;
                    ensure(r.signature_match == Some(true), || format!("signature mismatch: {r:?}"))?;
                    graphs += 1;
                    dressed += usize::from(r.state_equivalence_holds == Some(true));
                }
            }
        }
    }
    Ok(format!(
        "prime fields hold; {}; {graphs} graphs match their duals' signatures ({dressed} also via the explicit dressing)",
        findings.join(", ")
    ))
}

fn classification() -> Outcome {
    let mut lines = Vec::new();
    for d in [2, 3] {
        let f = field(d);
        let mut counts = Vec::new();
        for n in 2..=5 {
            let r = classify(n, &f, 1e-10).map_err(|e| e.to_string())?;
            ensure(r.shared_signatures == 0, || format!("d={d} N={n}: signature shared across types"))?;
            counts.push((r.type_count, r.bucket_count));
        }
        let types: Vec<usize> = counts.iter().map(|c| c.0).collect();
        ensure(types == [1, 1, 2, 2], || format!("d={d}: type counts {types:?}"))?;
        let buckets: Vec<usize> = counts.iter().map(|c| c.1).collect();
        lines.push(format!("d={d} types {types:?} (signature buckets {buckets:?})"));
    }
    Ok(lines.join("; "))
}

fn entropy() -> Outcome {
    for d in [3, 4, 5] {
        let r = entropy_problem_checks(d, 1e-10).map_err(|e| e.to_string())?;
        ensure(r.trivial.marginals_maximally_mixed && r.trivial.rank == (d * d * d) as usize, || {
            format!("d={d}: trivial example {:?}", r.trivial)
        })?;
        let m = r.from_mes.ok_or_else(|| format!("d={d}: no MES"))?;
        ensure(m.rank == d as usize && m.marginals_maximally_mixed, || format!("d={d}: {m:?}"))?;
    }
    Ok("d=3,4,5: rank(rho_ABC) = d, pair marginals I/d^2; I/d^3 has the same pair marginals but rank d^3".into())
}

fn symbolic_rank_oracle() -> Outcome {
    let mut pairs = 0;
    for d in [2, 3, 4, 5] {
        let f = field(d);
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + d as u64);
        for i in 0..500 {
            let c = random_cnot_circuit(&f, 5, 30, &mut rng);
            let a = random_subset(c.qudits(), &mut rng);
            let sym = c.symbolic().map_err(|e| e.to_string())?;
            let symbolic = symbolic_rdm_rank(&sym, &a);
            let rho = c.simulate().map_err(|e| e.to_string())?.reduced_density(&a).map_err(|e| e.to_string())?;
            let dense = rho.rank(1e-10) as u64;
            ensure(symbolic == dense, || format!("d={d} #{i} A={a:?}: symbolic {symbolic}, dense {dense}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (circuit, subset) pairs agree"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("F4 tables", Duration::from_secs(1), f4_tables),
        ("commutation relations", Duration::from_secs(120), relation_suite),
        ("standard form reproduces the circuit state", Duration::from_secs(120), canonical_oracle),
        ("psi(2) expansion", Duration::from_secs(1), psi_literal),
        ("psi(a_r) maximal entanglement", Duration::from_secs(60), psi_entanglement),
        ("P' parity", Duration::from_secs(60), p_prime_parity),
        ("multiple-of-four construction", Duration::from_secs(60), multiple_of_four),
        ("duality", Duration::from_secs(180), duality),
        ("classification", Duration::from_secs(300), classification),
        ("tripartite marginals", Duration::from_secs(30), entropy),
        ("symbolic vs dense rank", Duration::from_secs(120), symbolic_rank_oracle),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; over the {budget:?} budget")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

