//! Text formats: circuit files, graph JSON and DOT, state files.
//!
//! Circuit files are line oriented, qudits are numbered from 1 and `#`
//! starts a comment:
//!
//! ```text
//! field 2 2 3      # p n polynomial-index
//! qudits 4
//! init s s 0 0
//! C 1 3 1          # control target label
//! A 2 3
//! D 2 2
//! H 1
//! Hdg 1
//! V 4
//! W 1 2
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::rewrite::{Canonical, Circuit, GraphState};
use crate::simulator::{Gate, Init, Register};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph JSON: {0}")]
    Json(String),
    #[error("state file: {0}")]
    State(String),
}

fn perr(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

/// Parses a circuit file. `field_override` replaces the file's `field` line
/// (which then becomes optional).
pub fn parse_circuit(text: &str, field_override: Option<Arc<Field>>) -> Result<Circuit, FormatError> {
    let mut field = field_override.clone();
    let mut qudits: Option<usize> = None;
    let mut init: Option<Vec<Init>> = None;
    let mut gates = Vec::new();
    let mut last_line = 0;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        let num = |i: usize| -> Result<u64, FormatError> {
            let t = tok.get(i).ok_or_else(|| perr(line, format!("`{}` is missing an argument", tok[0])))?;
            t.parse::<u64>().map_err(|_| perr(line, format!("expected a nonnegative integer, got `{t}`")))
        };
        let arity = |n: usize| -> Result<(), FormatError> {
            if tok.len() != n + 1 {
                return Err(perr(line, format!("`{}` takes {n} arguments, got {}", tok[0], tok.len() - 1)));
            }
            Ok(())
        };
        match tok[0] {
            "field" => {
                arity(3)?;
                let f = Field::from_descriptor(num(1)? as u32, num(2)? as u32, num(3)?)
                    .map_err(|e| perr(line, e.to_string()))?;
                if field_override.is_none() {
                    if field.is_some() {
                        return Err(perr(line, "duplicate `field` line"));
                    }
                    field = Some(Arc::new(f));
                }
            }
            "qudits" => {
                arity(1)?;
                if qudits.is_some() {
                    return Err(perr(line, "duplicate `qudits` line"));
                }
                let n = num(1)? as usize;
                if n == 0 {
                    return Err(perr(line, "a circuit needs at least one qudit"));
                }
                qudits = Some(n);
            }
            "init" => {
                if init.is_some() {
                    return Err(perr(line, "duplicate `init` line"));
                }
                let pattern = tok[1..]
                    .iter()
                    .map(|t| match *t {
                        "s" | "S" => Ok(Init::S),
                        "0" => Ok(Init::Zero),
                        other => Err(perr(line, format!("initial state must be `s` or `0`, got `{other}`"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                init = Some(pattern);
            }
            name => {
                let f = field.as_ref().ok_or_else(|| perr(line, "gate before the `field` line"))?;
                let n = qudits.ok_or_else(|| perr(line, "gate before the `qudits` line"))?;
                let wire = |i: usize| -> Result<usize, FormatError> {
                    let w = num(i)? as usize;
                    if w == 0 || w > n {
                        return Err(perr(line, format!("qudit {w} out of range 1..={n}")));
                    }
                    Ok(w - 1)
                };
                let elem = |i: usize| -> Result<Elem, FormatError> {
                    f.elem(num(i)?).map_err(|e| perr(line, e.to_string()))
                };
                let gate = match name {
                    "C" => {
                        arity(3)?;
                        Gate::c(wire(1)?, wire(2)?, elem(3)?)
                    }
                    "A" => {
                        arity(2)?;
                        Gate::a(wire(1)?, elem(2)?)
                    }
                    "D" => {
                        arity(2)?;
                        Gate::d(wire(1)?, elem(2)?)
                    }
                    "H" => {
                        arity(1)?;
                        Gate::H { q: wire(1)? }
                    }
                    "Hdg" => {
                        arity(1)?;
                        Gate::Hdg { q: wire(1)? }
                    }
                    "V" => {
                        arity(1)?;
                        Gate::V { q: wire(1)? }
                    }
                    "W" => {
                        arity(2)?;
                        Gate::W { a: wire(1)?, b: wire(2)? }
                    }
                    other => return Err(perr(line, format!("unknown directive `{other}`"))),
                };
                gate.validate(f, n).map_err(|e| perr(line, e.to_string()))?;
                gates.push(gate);
            }
        }
    }
    let end = last_line.max(1);
    let field = field.ok_or_else(|| perr(end, "missing `field` line"))?;
    let n = qudits.ok_or_else(|| perr(end, "missing `qudits` line"))?;
    let init = init.ok_or_else(|| perr(end, "missing `init` line"))?;
    if init.len() != n {
        return Err(perr(end, format!("`init` lists {} qudits but `qudits` says {n}", init.len())));
    }
    Circuit::new(field, init, gates).map_err(|e| perr(end, e.to_string()))
}

/// Serializes a circuit in the format read by [`parse_circuit`].
pub fn write_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    let f = c.field();
    let _ = writeln!(out, "field {f}");
    let _ = writeln!(out, "qudits {}", c.qudits());
    let init: Vec<&str> = c.init().iter().map(|i| if *i == Init::S { "s" } else { "0" }).collect();
    let _ = writeln!(out, "init {}", init.join(" "));
    for g in c.gates() {
        let _ = match *g {
            Gate::C { control, target, a } => writeln!(out, "C {} {} {}", control + 1, target + 1, a),
            Gate::A { q, a } => writeln!(out, "A {} {}", q + 1, a),
            Gate::D { q, a } => writeln!(out, "D {} {}", q + 1, a),
            Gate::H { q } => writeln!(out, "H {}", q + 1),
            Gate::Hdg { q } => writeln!(out, "Hdg {}", q + 1),
            Gate::V { q } => writeln!(out, "V {}", q + 1),
            Gate::W { a, b } => writeln!(out, "W {} {}", a + 1, b + 1),
        };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub p: u32,
    pub n: u32,
    pub poly: u64,
}

impl From<&Field> for FieldJson {
    fn from(f: &Field) -> FieldJson {
        FieldJson { p: f.characteristic(), n: f.degree(), poly: f.poly_index() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: usize,
    pub to: usize,
    pub label: u32,
}

/// Graph state with 1-based qudit labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub field: FieldJson,
    pub qudits: usize,
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    #[serde(rename = "O")]
    pub o: Vec<usize>,
    pub edges: Vec<EdgeJson>,
}

impl From<&GraphState> for GraphJson {
    fn from(g: &GraphState) -> GraphJson {
        GraphJson {
            field: FieldJson::from(&**g.field()),
            qudits: g.qudits(),
            s: g.s().iter().map(|q| q + 1).collect(),
            o: g.o().iter().map(|q| q + 1).collect(),
            edges: g.edges().map(|(a, b, l)| EdgeJson { from: a + 1, to: b + 1, label: l.index() }).collect(),
        }
    }
}

impl GraphJson {
    pub fn to_graph(&self) -> Result<GraphState, FormatError> {
        let bad = |m: String| FormatError::Json(m);
        let f = Field::from_descriptor(self.field.p, self.field.n, self.field.poly).map_err(|e| bad(e.to_string()))?;
        let zero_based = |v: &[usize]| -> Result<Vec<usize>, FormatError> {
            v.iter()
                .map(|&q| if q == 0 || q > self.qudits { Err(bad(format!("qudit {q} out of range"))) } else { Ok(q - 1) })
                .collect()
        };
        let s = zero_based(&self.s)?;
        let mut o = zero_based(&self.o)?;
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let ends = zero_based(&[e.from, e.to])?;
                let label = f.elem(e.label as u64).map_err(|err| bad(err.to_string()))?;
                Ok((ends[0], ends[1], label))
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let g = GraphState::new(Arc::new(f), self.qudits, s, edges).map_err(|e| bad(e.to_string()))?;
        o.sort_unstable();
        if o != g.o() {
            return Err(bad("O must be the complement of S".into()));
        }
        Ok(g)
    }
}

pub fn graph_to_json(g: &GraphState) -> String {
    serde_json::to_string_pretty(&GraphJson::from(g)).expect("graph JSON serializes")
}

pub fn graph_from_json(text: &str) -> Result<GraphState, FormatError> {
    let j: GraphJson = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    j.to_graph()
}

/// Graphviz rendering: `S` qudits as boxes on the top row, `O` qudits as
/// circles on the bottom row, edges labeled by field element index.
pub fn graph_to_dot(g: &GraphState) -> String {
    let mut out = String::from("digraph graph_state {\n  rankdir=TB;\n");
    let _ = writeln!(out, "  label=\"GF({}) poly {}\";", g.field().order(), g.field().poly_string());
    out.push_str("  { rank=same;");
    for q in g.s() {
        let _ = write!(out, " q{};", q + 1);
    }
    out.push_str(" }\n  { rank=same;");
    for q in g.o() {
        let _ = write!(out, " q{};", q + 1);
    }
    out.push_str(" }\n");
    for q in g.s() {
        let _ = writeln!(out, "  q{0} [label=\"{0}\", shape=box];", q + 1);
    }
    for q in g.o() {
        let _ = writeln!(out, "  q{0} [label=\"{0}\", shape=circle];", q + 1);
    }
    for (a, b, l) in g.edges() {
        let _ = writeln!(out, "  q{} -> q{} [label=\"{}\"];", a + 1, b + 1, l);
    }
    out.push_str("}\n");
    out
}

/// Plain text summary of a graph.
pub fn graph_to_text(g: &GraphState) -> String {
    let one = |v: &[usize]| v.iter().map(|q| (q + 1).to_string()).collect::<Vec<_>>().join(" ");
    let mut out = format!("field {}\nS {}\nO {}\n", g.field(), one(g.s()), one(g.o()));
    for (a, b, l) in g.edges() {
        let _ = writeln!(out, "edge {} -> {} label {}", a + 1, b + 1, l);
    }
    out
}

/// Normalization result with 1-based labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalJson {
    /// `permutation[i]` is the original qudit placed at standard-form qudit `i + 1`.
    pub permutation: Vec<usize>,
    pub graph: GraphJson,
    /// Residual shifts `A(label)` on standard-form qudits.
    pub corrections: Vec<ShiftCorrection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftCorrection {
    pub qudit: usize,
    pub shift: u32,
}

impl From<&Canonical> for CanonicalJson {
    fn from(c: &Canonical) -> CanonicalJson {
        CanonicalJson {
            permutation: c.permutation.iter().map(|q| q + 1).collect(),
            graph: GraphJson::from(&c.graph),
            corrections: c.corrections.iter().map(|&(q, a)| ShiftCorrection { qudit: q + 1, shift: a.index() }).collect(),
        }
    }
}

/// State file: a `# dim D qudits N` header, free `#` provenance lines,
/// then the register dump.
pub fn write_state(reg: &Register, provenance: &[String]) -> String {
    let mut out = format!("# dim {} qudits {}\n", reg.dim(), reg.qudits());
    for p in provenance {
        let _ = writeln!(out, "# {p}");
    }
    out.push_str(&reg.dump());
    out
}

pub fn parse_state(text: &str) -> Result<Register, FormatError> {
    let header = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|l| {
            let t: Vec<&str> = l.split_whitespace().collect();
            match t.as_slice() {
                ["dim", d, "qudits", n] => Some((d.parse::<usize>().ok()?, n.parse::<usize>().ok()?)),
                _ => None,
            }
        })
        .ok_or_else(|| FormatError::State("missing `# dim D qudits N` header".into()))?;
    Register::parse_dump(header.0, header.1, text).map_err(|e| FormatError::State(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = "\
# four qudits over F4
field 2 2 3
qudits 4
init s s 0 0
C 1 3 1
C 1 4 1
C 2 3 1
C 2 4 2
C 3 1 3
";

    #[test]
    fn circuit_round_trip() {
        let c = parse_circuit(FIG2, None).unwrap();
        assert_eq!(c.qudits(), 4);
        assert_eq!(c.gates().len(), 5);
        assert_eq!(c.gates()[4], Gate::c(2, 0, c.field().elem(3).unwrap()));
        let text = write_circuit(&c);
        assert_eq!(parse_circuit(&text, None).unwrap(), c);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("field 2 2 3\nqudits 2\ninit s 0\nC 1 3 1\n", 4, "out of range"),
            ("field 4 1 0\n", 1, "prime"),
            ("field 2 2 3\nqudits 2\ninit s x\n", 3, "`s` or `0`"),
            ("field 2 2 3\nqudits 2\ninit s 0\nC 1 2 7\n", 4, "element"),
            ("field 2 2 3\nqudits 2\ninit s 0\nQ 1\n", 4, "unknown"),
            ("field 2 2 3\nqudits 2\ninit s 0\nD 1 0\n", 4, "D(0)"),
            ("field 2 2 3\nqudits 2\ninit s 0\nC 1 1 1\n", 4, "distinct"),
            ("qudits 2\ninit s 0\nC 1 2 1\n", 3, "field"),
            ("field 2 2 3\nqudits 3\ninit s 0\n", 3, "init"),
        ];
        for (text, line, needle) in cases {
            match parse_circuit(text, None) {
                Err(FormatError::Parse { line: l, message }) => {
                    assert_eq!(l, line, "{text:?}: {message}");
                    assert!(message.contains(needle), "{text:?}: {message}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn field_override() {
        let f = Arc::new(Field::of_order(5).unwrap());
        let c = parse_circuit("qudits 2\ninit s 0\nC 1 2 4\n", Some(f)).unwrap();
        assert_eq!(c.field().order(), 5);
    }

    #[test]
    fn graph_json_round_trip() {
        let f = Arc::new(Field::of_order(4).unwrap());
        let g = GraphState::new(f.clone(), 4, vec![0, 1], [(0, 2, Elem::ONE), (1, 3, f.elem(2).unwrap())]).unwrap();
        let text = graph_to_json(&g);
        assert!(text.contains("\"S\""));
        assert_eq!(graph_from_json(&text).unwrap(), g);
        let dot = graph_to_dot(&g);
        assert!(dot.contains("q1 [label=\"1\", shape=box]"));
        assert!(dot.contains("q3 [label=\"3\", shape=circle]"));
        assert!(dot.contains("q2 -> q4 [label=\"2\"]"));
    }

    #[test]
    fn graph_json_rejects_bad_o() {
        let text = r#"{"field":{"p":3,"n":1,"poly":0},"qudits":2,"S":[1],"O":[1],"edges":[]}"#;
        assert!(graph_from_json(text).is_err());
    }

    #[test]
    fn state_file_round_trip() {
        let reg = Register::uniform_over(3, 2, [0, 4, 8]).unwrap();
        let text = write_state(&reg, &["Bell state".into()]);
        assert!(text.starts_with("# dim 3 qudits 2\n# Bell state\n"));
        let back = parse_state(&text).unwrap();
        assert!(back.equal_up_to_phase(&reg, 1e-12));
        assert!(parse_state("000 1 0\n").is_err());
    }
}
