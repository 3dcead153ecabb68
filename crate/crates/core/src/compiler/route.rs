use super::{CircuitIR, CircuitOp, LinearTopology};
use crate::error::{Error, Result};
use crate::qstate::QubitIndex;

/// Adjacent SWAPs that carry the state of `from` next to `to`, leaving it on
/// the neighbour of `to` that lies on the `from` side.
fn approach(from: QubitIndex, to: QubitIndex) -> Vec<(QubitIndex, QubitIndex)> {
    let (f, t) = (from.get(), to.get());
    if f < t {
        (f..t - 1).map(|i| (QubitIndex::new(i), QubitIndex::new(i + 1))).collect()
    } else {
        (t + 2..=f)
            .rev()
            .map(|i| (QubitIndex::new(i - 1), QubitIndex::new(i)))
            .collect()
    }
}

fn push_swaps(out: &mut CircuitIR, chain: impl Iterator<Item = (QubitIndex, QubitIndex)>) -> Result<()> {
    for (a, b) in chain {
        out.swap(a, b)?;
    }
    Ok(())
}

/// Rewrites every two-qubit op onto chain links.
///
/// A distant `CNOT(c, t)` becomes a SWAP chain that walks the control next to
/// the target, the adjacent CNOT, and the reversed chain. A distant
/// `SWAP(a, b)` becomes the usual `2|a−b|−1` adjacent swaps. The qubit layout
/// is back to the identity after each rewritten op.
pub fn route(ir: &CircuitIR, topo: &LinearTopology) -> Result<CircuitIR> {
    if topo.n_qubits < ir.n_qubits {
        return Err(Error::QubitOutOfRange {
            qubit: ir.n_qubits,
            n: topo.n_qubits,
        });
    }
    let mut out = CircuitIR::new(ir.n_qubits)?;
    for op in &ir.ops {
        match *op {
            CircuitOp::Cnot { control, target } if !topo.connected(control, target) => {
                let chain = approach(control, target);
                let moved = chain.last().map_or(control, |&(a, b)| {
                    if control < target {
                        b
                    } else {
                        a
                    }
                });
                push_swaps(&mut out, chain.iter().copied())?;
                out.cnot(moved, target)?;
                push_swaps(&mut out, chain.iter().rev().copied())?;
            }
            CircuitOp::Swap { a, b } if !topo.connected(a, b) => {
                let (lo, hi) = (a.min(b), a.max(b));
                let up = approach(lo, hi);
                push_swaps(&mut out, up.iter().copied())?;
                let (x, y) = (QubitIndex::new(hi.get() - 1), hi);
                out.swap(x, y)?;
                push_swaps(&mut out, up.iter().rev().copied())?;
            }
            _ => {
                out.push(op.clone())?;
            }
        }
    }
    Ok(out)
}
