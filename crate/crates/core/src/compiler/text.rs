//! Line-oriented circuit format.
//!
//! ```text
//! # comment
//! n 3            optional register size; otherwise the largest index used
//! X 1 1.5708     Z q φ, CP q γ (link q, q+1), CNOT c t, SWAP a b
//! U 2 a11r a11i a12r a12i a21r a21i a22r a22i
//! ```
//!
//! Angles are radians. Keywords are case-insensitive.

use std::fmt::Write as _;

use super::{CircuitIR, CircuitOp};
use crate::constants::{MAX_QUBITS, TOL};
use crate::error::{Error, Result};
use crate::native_gates::NativeGate;
use crate::qstate::{QubitIndex, UnitaryMatrix, C64};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

struct LineParser<'a> {
    line: usize,
    toks: Vec<Token<'a>>,
    end_column: usize,
}

impl LineParser<'_> {
    fn err(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn expect_args(&self, count: usize) -> Result<()> {
        let have = self.toks.len() - 1;
        if have < count {
            return Err(self.err(
                self.end_column,
                format!("{} expects {count} arguments, found {have}", self.toks[0].text),
            ));
        }
        if have > count {
            return Err(self.err(self.toks[count + 1].column, "unexpected extra argument"));
        }
        Ok(())
    }

    fn qubit(&self, i: usize) -> Result<QubitIndex> {
        let t = &self.toks[i];
        match t.text.parse::<usize>() {
            Ok(0) => Err(self.err(t.column, "qubit indices start at 1")),
            Ok(v) if v > MAX_QUBITS => Err(self.err(
                t.column,
                format!("qubit {v} exceeds the limit of {MAX_QUBITS}"),
            )),
            Ok(v) => Ok(QubitIndex::new(v)),
            Err(_) => Err(self.err(t.column, format!("expected a qubit index, found `{}`", t.text))),
        }
    }

    fn number(&self, i: usize) -> Result<f64> {
        let t = &self.toks[i];
        match t.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(t.column, format!("expected a number, found `{}`", t.text))),
        }
    }
}

/// Polar projection `W·V†` of `m = W·Σ·V†`. Rows typed with a few decimals
/// are only unitary to the input tolerance; the IR wants machine precision.
fn nearest_unitary(m: nalgebra::DMatrix<C64>) -> Result<UnitaryMatrix> {
    let svd = m.svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(w), Some(v_t)) => UnitaryMatrix::new(w * v_t),
        _ => Err(Error::NotUnitary(f64::NAN)),
    }
}

/// A parsed op with the column of its keyword, kept for diagnostics that
/// need the final register size.
struct Located {
    op: CircuitOp,
    line: usize,
    column: usize,
}

/// Parses circuit text. Errors carry 1-based line and column numbers.
pub fn parse(src: &str) -> Result<CircuitIR> {
    let mut declared: Option<(usize, usize)> = None;
    let mut ops = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks = tokens(body);
        if toks.is_empty() {
            continue;
        }
        let lp = LineParser {
            line,
            end_column: body.trim_end().chars().count() + 1,
            toks,
        };
        let head = &lp.toks[0];
        let column = head.column;
        let op = match head.text.to_ascii_uppercase().as_str() {
            "N" => {
                lp.expect_args(1)?;
                if declared.is_some() || !ops.is_empty() {
                    return Err(lp.err(column, "register size must be declared once, before any op"));
                }
                let t = &lp.toks[1];
                let n = t
                    .text
                    .parse::<usize>()
                    .ok()
                    .filter(|n| (1..=MAX_QUBITS).contains(n))
                    .ok_or_else(|| {
                        lp.err(t.column, format!("register size must be 1..={MAX_QUBITS}"))
                    })?;
                declared = Some((n, line));
                continue;
            }
            "X" | "Z" => {
                lp.expect_args(2)?;
                let qb = lp.qubit(1)?;
                let a = lp.number(2)?;
                let gate = if head.text.eq_ignore_ascii_case("x") {
                    NativeGate::x(a, qb)
                } else {
                    NativeGate::z(a, qb)
                };
                CircuitOp::Native { gate }
            }
            "CP" => {
                lp.expect_args(2)?;
                let qb = lp.qubit(1)?;
                if qb.get() == MAX_QUBITS {
                    return Err(lp.err(lp.toks[1].column, "CP acts on the link q, q+1"));
                }
                let gamma = lp.number(2)?;
                CircuitOp::Native {
                    gate: NativeGate::Cphase { gamma, qubit: qb },
                }
            }
            "CNOT" | "SWAP" => {
                lp.expect_args(2)?;
                let a = lp.qubit(1)?;
                let b = lp.qubit(2)?;
                let cnot = head.text.eq_ignore_ascii_case("cnot");
                if a == b {
                    let msg = if cnot {
                        "control equals target"
                    } else {
                        "SWAP needs two distinct qubits"
                    };
                    return Err(lp.err(lp.toks[2].column, msg));
                }
                if cnot {
                    CircuitOp::Cnot { control: a, target: b }
                } else {
                    CircuitOp::Swap { a, b }
                }
            }
            "U" => {
                lp.expect_args(9)?;
                let qb = lp.qubit(1)?;
                let mut e = [C64::new(0.0, 0.0); 4];
                for (k, slot) in e.iter_mut().enumerate() {
                    *slot = C64::new(lp.number(2 + 2 * k)?, lp.number(3 + 2 * k)?);
                }
                let m = nalgebra::DMatrix::from_row_slice(2, 2, &e);
                let typed = UnitaryMatrix::with_tolerance(m.clone(), TOL.user_unitarity)
                    .map_err(|err| lp.err(column, err.to_string()))?;
                let u = if typed.unitarity_error() <= TOL.algebraic {
                    typed
                } else {
                    nearest_unitary(m).map_err(|err| lp.err(column, err.to_string()))?
                };
                CircuitOp::SingleQubit { u, qubit: qb }
            }
            other => return Err(lp.err(column, format!("unknown operation `{other}`"))),
        };
        ops.push(Located { op, line, column });
    }

    let needed = ops
        .iter()
        .flat_map(|l| l.op.support())
        .map(QubitIndex::get)
        .max()
        .unwrap_or(1);
    let n = match declared {
        Some((n, _)) => n,
        None => needed,
    };
    let mut ir = CircuitIR::new(n)?;
    for l in ops {
        let (line, column) = (l.line, l.column);
        ir.push(l.op).map_err(|e| Error::Parse {
            line,
            column,
            message: e.to_string(),
        })?;
    }
    Ok(ir)
}

/// Writes `ir` back in the text format. One-qubit unitaries are printed with
/// full round-trip precision.
pub fn to_text(ir: &CircuitIR) -> String {
    let mut out = format!("n {}\n", ir.n_qubits);
    for op in &ir.ops {
        let _ = match op {
            CircuitOp::Native { gate } => writeln!(out, "{gate}"),
            CircuitOp::Cnot { control, target } => {
                writeln!(out, "CNOT {} {}", control.get(), target.get())
            }
            CircuitOp::Swap { a, b } => writeln!(out, "SWAP {} {}", a.get(), b.get()),
            CircuitOp::SingleQubit { u, qubit } => {
                let _ = write!(out, "U {}", qubit.get());
                for r in 0..2 {
                    for c in 0..2 {
                        let z = u.get(r, c);
                        let _ = write!(out, " {:?} {:?}", z.re, z.im);
                    }
                }
                writeln!(out)
            }
        };
    }
    out
}
