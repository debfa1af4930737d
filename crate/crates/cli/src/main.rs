//! `qgraph`: command-line front end for qudit graph states.
//!
//! Exit codes: 0 success or verdict true, 1 verdict false, 2 usage or parse
//! error, 3 resource guard.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qudit_graphs::classify::{classify, ClassReport};
use qudit_graphs::duality::{polynomial_sweep, verify_dual_equivalence, DualityReport};
use qudit_graphs::entangle::{mes_for_dimension, mes_verdict, EntangleError};
use qudit_graphs::io::{self, CanonicalJson};
use qudit_graphs::relations::{run_suite, standard_rule};
use qudit_graphs::{canonicalize, Field, GfError, RewriteError, SimError, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "qgraph", version, about = "Graph states over finite fields: normalize, classify, check duality and maximal entanglement")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Absolute tolerance for numerical comparisons.
    #[arg(long, default_value_t = DEFAULT_TOL, global = true)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Bring a circuit of C, A, D and W gates to standard bipartite form.
    Normalize {
        circuit: PathBuf,
        /// Field override as `p,n,poly_index` (or `p n poly_index`).
        #[arg(long)]
        field: Option<String>,
        /// Re-simulate the circuit and the standard form and compare them.
        #[arg(long)]
        verify: bool,
    },
    /// Enumerate standard-form graph states of N qudits and group them.
    Classify {
        parties: usize,
        /// Field as `p,n,poly_index`.
        #[arg(long, conflicts_with = "dim")]
        field: Option<String>,
        /// Field order; uses the default polynomial.
        #[arg(long)]
        dim: Option<u32>,
    },
    /// Check the duality dressing for every polynomial of a field, or a graph against its dual.
    DualCheck {
        /// Field as `p,n` or `p,n,poly_index`; every irreducible polynomial of degree n is checked.
        #[arg(long, required_unless_present = "graph")]
        field: Option<String>,
        /// Graph JSON file.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Check every bipartition of a state file for maximal mixedness.
    VerifyMes { state: PathBuf },
    /// Build a four-party maximally entangled state of local dimension d.
    MakeMes {
        d: u64,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify every commutation relation as an operator identity.
    RelationsTest {
        /// Field orders, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
        dims: Vec<u32>,
        /// Extra fields as `p,n,poly_index`; repeatable.
        #[arg(long)]
        field: Vec<String>,
        /// Orders up to this bound are checked exhaustively.
        #[arg(long, default_value_t = 5)]
        exhaustive_limit: u32,
        /// Random parameter pairs per relation above the bound.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Simulate a circuit file and write its state.
    Simulate {
        circuit: PathBuf,
        #[arg(long)]
        field: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Message plus exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
}

fn sim_failure(e: &SimError) -> Failure {
    let code = if matches!(e, SimError::SizeGuard { .. }) { 3 } else { 2 };
    Failure { code, message: e.to_string() }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Failure {
        sim_failure(&e)
    }
}

impl From<RewriteError> for Failure {
    fn from(e: RewriteError) -> Failure {
        match &e {
            RewriteError::Sim(s) => sim_failure(s),
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<EntangleError> for Failure {
    fn from(e: EntangleError) -> Failure {
        match &e {
            EntangleError::Sim(s) => sim_failure(s),
            EntangleError::FactorGuard { .. } => Failure { code: 3, message: e.to_string() },
            EntangleError::Refused { .. } => Failure { code: 1, message: e.to_string() },
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<GfError> for Failure {
    fn from(e: GfError) -> Failure {
        Failure::usage(e.to_string())
    }
}

impl From<io::FormatError> for Failure {
    fn from(e: io::FormatError) -> Failure {
        Failure::usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_numbers(desc: &str) -> Result<Vec<u64>, Failure> {
    desc.split(|c: char| c == ',' || c == ':' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Failure::usage(format!("bad field descriptor `{desc}`"))))
        .collect()
}

/// `p,n,poly_index` or `p,n` (default polynomial).
fn parse_field(desc: &str) -> Result<Field, Failure> {
    match parse_numbers(desc)?.as_slice() {
        &[p, n] => Ok(Field::new(p as u32, n as u32, None)?),
        &[p, n, poly] => Ok(Field::from_descriptor(p as u32, n as u32, poly)?),
        _ => Err(Failure::usage(format!("field descriptor `{desc}` needs `p,n` or `p,n,poly_index`"))),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct NormalizeOutput {
    #[serde(flatten)]
    canonical: CanonicalJson,
    verified: Option<bool>,
}

fn normalize(cli: &Cli, path: &Path, field: Option<&str>, verify: bool) -> Result<u8, Failure> {
    let field = field.map(parse_field).transpose()?.map(Arc::new);
    let circuit = io::parse_circuit(&read(path)?, field)?;
    let canon = canonicalize(&circuit)?;
    let verified = if verify {
        let original = circuit.simulate()?;
        let rebuilt = canon.reproduce()?;
        Some(original.register().equal_up_to_phase(&rebuilt, cli.tol))
    } else {
        None
    };
    let text = match cli.format {
        Format::Json => json(&NormalizeOutput { canonical: CanonicalJson::from(&canon), verified }),
        Format::Dot => {
            let perm: Vec<String> = canon.permutation.iter().map(|q| (q + 1).to_string()).collect();
            format!("// permutation {}\n{}", perm.join(" "), io::graph_to_dot(&canon.graph))
        }
        Format::Text => {
            let perm: Vec<String> = canon.permutation.iter().map(|q| (q + 1).to_string()).collect();
            let mut out = format!("permutation {}\n{}", perm.join(" "), io::graph_to_text(&canon.graph));
            for &(q, a) in &canon.corrections {
                out.push_str(&format!("correction A {} {}\n", q + 1, a));
            }
            if let Some(v) = verified {
                out.push_str(&format!("verified {v}\n"));
            }
            out
        }
    };
    print!("{text}");
    Ok(if verified == Some(false) { 1 } else { 0 })
}

fn class_text(r: &ClassReport) -> String {
    let mut out = format!(
        "N = {} over {}: {} graphs enumerated, {} genuinely entangled\n{} types, {} signature buckets\n",
        r.parties, r.field, r.enumerated, r.genuinely_entangled, r.type_count, r.bucket_count
    );
    for t in &r.types {
        out.push_str(&format!("type |S| = {}: {} graphs\n", t.s_size, t.graphs));
        for b in &t.buckets {
            let edges: Vec<String> =
                b.representative.edges.iter().map(|e| format!("{}->{}:{}", e.from, e.to, e.label)).collect();
            out.push_str(&format!("  bucket of {}: ranks {:?}; e.g. {}\n", b.graphs, b.rank_profile, edges.join(" ")));
        }
    }
    out
}

fn duality_text(reports: &[DualityReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!(
            "{} [{}]: conjugation {}",
            r.field,
            r.polynomial,
            if r.conjugation_identity_holds { "holds" } else { "fails" }
        ));
        if let Some(s) = r.state_equivalence_holds {
            out.push_str(&format!(", dressing {}", if s { "holds" } else { "fails" }));
        }
        if let Some(s) = r.signature_match {
            out.push_str(&format!(", signatures {}", if s { "match" } else { "differ" }));
        }
        out.push_str(&format!(", max deviation {:e}\n", r.max_deviation));
        if let Some(c) = &r.counterexample {
            out.push_str(&format!("  first failure: {c:?}\n"));
        }
    }
    out
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if !(cli.tol > 0.0) {
        return Err(Failure::usage("tolerance must be positive"));
    }
    match &cli.command {
        Command::Normalize { circuit, field, verify } => normalize(cli, circuit, field.as_deref(), *verify),
        Command::Classify { parties, field, dim } => {
            let f = match (field, dim) {
                (Some(s), _) => parse_field(s)?,
                (None, Some(d)) => Field::of_order(*d)?,
                (None, None) => return Err(Failure::usage("classify needs --field or --dim")),
            };
            let r = classify(*parties, &Arc::new(f), cli.tol)?;
            print!("{}", if cli.format == Format::Text { class_text(&r) } else { json(&r) });
            Ok(0)
        }
        Command::DualCheck { field, graph } => {
            let reports = if let Some(path) = graph {
                let g = io::graph_from_json(&read(path)?)?;
                vec![verify_dual_equivalence(&g, cli.tol)?]
            } else {
                let desc = field.as_deref().expect("clap enforces one of the two");
                let f = parse_field(desc)?;
                polynomial_sweep(f.characteristic(), f.degree(), cli.tol)?
            };
            print!("{}", if cli.format == Format::Text { duality_text(&reports) } else { json(&reports) });
            let ok = if graph.is_some() {
                reports.iter().all(|r| r.signature_match == Some(true))
            } else {
                reports.iter().all(|r| r.conjugation_identity_holds)
            };
            Ok(if ok { 0 } else { 1 })
        }
        Command::VerifyMes { state } => {
            let reg = io::parse_state(&read(state)?)?;
            let r = mes_verdict(&reg, cli.tol)?;
            if cli.format == Format::Text {
                println!("verdict {}", r.verdict);
                for b in &r.bipartitions {
                    println!("A = {:?}: rank {}, deviation {:e}, maximally mixed {}", b.subset, b.rank, b.deviation, b.maximally_mixed);
                }
            } else {
                print!("{}", json(&r));
            }
            Ok(if r.verdict { 0 } else { 1 })
        }
        Command::MakeMes { d, output } => {
            let recipe = mes_for_dimension(*d)?;
            let reg = recipe.build(cli.tol)?;
            let provenance = vec![format!("four-party maximally entangled state, d = {d}"), format!("construction: {}", recipe.describe())];
            write_out(output.as_deref(), &io::write_state(&reg, &provenance))?;
            Ok(0)
        }
        Command::RelationsTest { dims, field, exhaustive_limit, samples, seed } => {
            let mut fields = dims.iter().map(|&d| Field::of_order(d)).collect::<Result<Vec<_>, _>>()?;
            for desc in field {
                fields.push(parse_field(desc)?);
            }
            if let Some(big) = fields.iter().find(|f| f.order() > 9) {
                return Err(Failure { code: 3, message: format!("relations-test supports fields up to order 9, got {}", big.order()) });
            }
            let r = run_suite(&fields, *exhaustive_limit, *samples, *seed, cli.tol, &standard_rule);
            if cli.format == Format::Text {
                for c in &r.checks {
                    println!("{:>8} {:<18} {:>6} cases  {}", c.field, c.relation, c.cases, if c.passed() { "pass" } else { "FAIL" });
                }
                println!("all pass: {}", r.all_pass);
            } else {
                print!("{}", json(&r));
            }
            Ok(if r.all_pass { 0 } else { 1 })
        }
        Command::Simulate { circuit, field, output } => {
            let field = field.as_deref().map(parse_field).transpose()?.map(Arc::new);
            let c = io::parse_circuit(&read(circuit)?, field)?;
            let st = c.simulate()?;
            let provenance = vec![format!("simulated from {}", circuit.display()), format!("field {}", c.field())];
            write_out(output.as_deref(), &io::write_state(st.register(), &provenance))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("qgraph: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
