#![allow(dead_code)]

use dxdq::compiler::CircuitIR;
use dxdq::qstate::{haar_unitary, q};
use rand::Rng;

/// Random circuit of one-qubit Haar gates and CNOTs between arbitrary pairs.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, depth: usize) -> CircuitIR {
    let mut c = CircuitIR::new(n).unwrap();
    for _ in 0..depth {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        if n > 1 && a != b && rng.random_bool(0.5) {
            c.cnot(q(a), q(b)).unwrap();
        } else {
            c.single(haar_unitary(2, rng), q(a)).unwrap();
        }
    }
    c
}

pub fn max_diff(a: &[dxdq::C64], b: &[dxdq::C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
