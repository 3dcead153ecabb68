//! Dense state vectors and unitaries over `n ≤ 12` qubits.
//!
//! Qubit 1 is the most significant bit of a basis index: in a 3-qubit
//! register `|q1 q2 q3⟩ = |110⟩` has index 6.

use std::fmt;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize, Serializer};

use crate::constants::{MAX_QUBITS, TOL};
use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// 1-based qubit number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct QubitIndex(usize);

impl QubitIndex {
    /// Panics on 0; qubits are numbered from 1.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "qubit indices start at 1");
        QubitIndex(index)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn check(self, n: usize) -> Result<()> {
        if self.0 > n {
            return Err(Error::QubitOutOfRange { qubit: self.0, n });
        }
        Ok(())
    }

    /// Bit position of this qubit inside a basis index of an `n`-qubit register.
    pub fn shift(self, n: usize) -> usize {
        n - self.0
    }

    pub fn is_adjacent(self, other: QubitIndex) -> bool {
        self.0.abs_diff(other.0) == 1
    }
}

impl TryFrom<usize> for QubitIndex {
    type Error = Error;

    fn try_from(index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::QubitOutOfRange { qubit: 0, n: 0 });
        }
        Ok(QubitIndex(index))
    }
}

impl From<QubitIndex> for usize {
    fn from(q: QubitIndex) -> usize {
        q.0
    }
}

impl fmt::Display for QubitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shorthand used throughout the tests and the compiler.
pub fn q(index: usize) -> QubitIndex {
    QubitIndex::new(index)
}

fn check_register(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
    }
    Ok(())
}

fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

/// Dense unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: DMatrix<C64>,
}

impl UnitaryMatrix {
    /// Checks squareness, power-of-two dimension and unitarity within 1e-10.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(m, TOL.algebraic)
    }

    pub fn with_tolerance(m: DMatrix<C64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n = qubits_for_dim(m.nrows()).ok_or(Error::DimensionMismatch {
            expected: m.nrows().next_power_of_two(),
            found: m.nrows(),
        })?;
        check_register(n)?;
        let u = UnitaryMatrix { m };
        let err = u.unitarity_error();
        if err > tol {
            return Err(Error::NotUnitary(err));
        }
        Ok(u)
    }

    /// Wraps a matrix that is unitary by construction.
    pub(crate) fn from_raw(m: DMatrix<C64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows().is_power_of_two());
        UnitaryMatrix { m }
    }

    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix::from_raw(DMatrix::identity(dim, dim))
    }

    pub fn identity_qubits(n: usize) -> Self {
        Self::identity(1 << n)
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        UnitaryMatrix::from_raw(self.m.adjoint())
    }

    /// Matrix product `self · rhs` (rhs acts first).
    pub fn mul(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        self.check_same_dim(rhs)?;
        Ok(UnitaryMatrix::from_raw(&self.m * &rhs.m))
    }

    /// Multiplies by a unit-modulus scalar.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        UnitaryMatrix::from_raw(&self.m * C64::from_polar(1.0, phase))
    }

    pub fn kron(&self, rhs: &UnitaryMatrix) -> Self {
        UnitaryMatrix::from_raw(self.m.kronecker(&rhs.m))
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn determinant(&self) -> C64 {
        self.m.determinant()
    }

    /// `max |U†U − I|` over all entries.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let p = self.m.adjoint() * &self.m;
        let mut worst = 0.0f64;
        for c in 0..d {
            for r in 0..d {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((p[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// Entrywise max-norm `‖self − other‖_max`.
    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(max_abs_diff(&self.m, &other.m))
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|c| (0..d).all(|r| r == c || self.m[(r, c)] == ZERO))
    }

    /// Left-multiplies in place by `gate` acting on `targets` (identity elsewhere).
    pub fn apply_local(&mut self, gate: &UnitaryMatrix, targets: &[QubitIndex]) -> Result<()> {
        let n = self.n_qubits();
        let shifts = local_shifts(gate, targets, n)?;
        let d = self.dim();
        for column in self.m.as_mut_slice().chunks_mut(d) {
            apply_to_amplitudes(column, gate.matrix(), &shifts);
        }
        Ok(())
    }

    /// Left-multiplies in place by a diagonal operator given by its entries.
    pub(crate) fn apply_diagonal(&mut self, diag: &[C64]) {
        let d = self.dim();
        for column in self.m.as_mut_slice().chunks_mut(d) {
            for (a, p) in column.iter_mut().zip(diag) {
                *a *= p;
            }
        }
    }

    fn check_same_dim(&self, other: &UnitaryMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

type Rows = Vec<Vec<[f64; 2]>>;

fn rows_of(m: &DMatrix<C64>) -> Rows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

impl Serialize for UnitaryMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            dim: usize,
            /// Row-major `[re, im]` pairs.
            entries: Rows,
        }
        Repr {
            dim: self.dim(),
            entries: rows_of(&self.m),
        }
        .serialize(s)
    }
}

/// Normalized pure state over `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: DVector<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_register(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = ONE;
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Basis state from a bit string such as `"101"` (qubit 1 first).
    pub fn from_bits(bits: &str) -> Result<Self> {
        let mut index = 0usize;
        for (pos, ch) in bits.chars().enumerate() {
            let b = match ch {
                '0' => 0,
                '1' => 1,
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        column: pos + 1,
                        message: format!("expected 0 or 1, found {ch:?}"),
                    })
                }
            };
            index = (index << 1) | b;
        }
        Self::basis(bits.len(), index)
    }

    /// Requires unit norm within 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_dim(amps.len()).ok_or(Error::DimensionMismatch {
            expected: amps.len().next_power_of_two(),
            found: amps.len(),
        })?;
        check_register(n)?;
        let s = StateVector {
            n_qubits: n,
            amps: DVector::from_vec(amps),
        };
        let norm = s.norm();
        if (norm - 1.0).abs() > TOL.algebraic {
            return Err(Error::InvalidParameter(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Max entrywise distance after removing the global phase of the overlap.
    pub fn phase_distance(&self, other: &StateVector) -> Result<f64> {
        let ov = other.inner(self)?;
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - phase * b).norm())
            .fold(0.0, f64::max))
    }

    pub fn apply_local(&mut self, gate: &UnitaryMatrix, targets: &[QubitIndex]) -> Result<()> {
        let shifts = local_shifts(gate, targets, self.n_qubits)?;
        apply_to_amplitudes(self.amps.as_mut_slice(), gate.matrix(), &shifts);
        Ok(())
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            n_qubits: usize,
            amplitudes: Vec<[f64; 2]>,
        }
        Repr {
            n_qubits: self.n_qubits,
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(s)
    }
}

/// Validates a small-gate placement and returns the bit shifts of its targets
/// (first target is the gate's most significant qubit).
fn local_shifts(gate: &UnitaryMatrix, targets: &[QubitIndex], n: usize) -> Result<Vec<usize>> {
    let k = targets.len();
    if k == 0 || gate.dim() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            found: gate.dim(),
        });
    }
    for (i, t) in targets.iter().enumerate() {
        t.check(n)?;
        if targets[..i].contains(t) {
            return Err(Error::DuplicateTarget(t.get()));
        }
    }
    Ok(targets.iter().map(|t| t.shift(n)).collect())
}

fn apply_to_amplitudes(amps: &mut [C64], gate: &DMatrix<C64>, shifts: &[usize]) {
    let k = shifts.len();
    let sub = 1usize << k;
    let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let offsets: Vec<usize> = (0..sub)
        .map(|j| {
            (0..k)
                .filter(|i| (j >> (k - 1 - i)) & 1 == 1)
                .map(|i| 1usize << shifts[i])
                .sum()
        })
        .collect();
    let mut buf = vec![ZERO; sub];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (b, off) in buf.iter_mut().zip(&offsets) {
            *b = amps[base + off];
        }
        for (r, off) in offsets.iter().enumerate() {
            amps[base + off] = (0..sub).map(|c| gate[(r, c)] * buf[c]).sum();
        }
    }
}

/// Places a 1- or 2-qubit gate on `targets` inside an `n`-qubit register.
///
/// Two-qubit gates must sit on an ascending adjacent pair `(q, q+1)`, the only
/// couplings the chain provides.
pub fn embed(gate: &UnitaryMatrix, targets: &[QubitIndex], n: usize) -> Result<UnitaryMatrix> {
    check_register(n)?;
    let shifts = local_shifts(gate, targets, n)?;
    if targets.len() == 2 && targets[1].get() != targets[0].get() + 1 {
        return Err(Error::NonAdjacent(targets[0].get(), targets[1].get()));
    }
    if targets.len() > 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: gate.dim(),
        });
    }
    let dim = 1usize << n;
    let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let local_index = |idx: usize| {
        shifts
            .iter()
            .fold(0usize, |acc, s| (acc << 1) | ((idx >> s) & 1))
    };
    let m = DMatrix::from_fn(dim, dim, |r, c| {
        if r & !mask != c & !mask {
            ZERO
        } else {
            gate.get(local_index(r), local_index(c))
        }
    });
    Ok(UnitaryMatrix::from_raw(m))
}

/// `U · s`.
pub fn apply(u: &UnitaryMatrix, s: &StateVector) -> Result<StateVector> {
    if u.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: s.dim(),
        });
    }
    Ok(StateVector {
        n_qubits: s.n_qubits,
        amps: u.matrix() * &s.amps,
    })
}

/// Product in temporal order: `ops[0]` acts first, so the result is
/// `ops[k-1] · … · ops[0]`. An empty list is rejected because its dimension
/// is unknown.
pub fn compose(ops: &[UnitaryMatrix]) -> Result<UnitaryMatrix> {
    let (first, rest) = ops.split_first().ok_or(Error::DimensionMismatch {
        expected: 1,
        found: 0,
    })?;
    rest.iter().try_fold(first.clone(), |acc, op| op.mul(&acc))
}

/// Global phase `φ` used to align `v` with `u`: the argument of the
/// largest-magnitude entry of `V†U` (first in row-major order on ties).
pub fn aligning_phase(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    u.check_same_dim(v)?;
    let m = v.matrix().adjoint() * u.matrix();
    let d = m.nrows();
    let mut best = ZERO;
    for r in 0..d {
        for c in 0..d {
            if m[(r, c)].norm() > best.norm() {
                best = m[(r, c)];
            }
        }
    }
    Ok(best.arg())
}

/// `‖U − e^{iφ}V‖_max` with `φ` chosen by [`aligning_phase`]. Zero exactly when
/// the operators agree up to a global phase.
pub fn phase_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    let phi = aligning_phase(u, v)?;
    Ok(max_abs_diff(u.matrix(), &(v.matrix() * C64::from_polar(1.0, phi))))
}

/// `|tr(V†U)|² / d²`, in `[0, 1]`.
pub fn gate_fidelity(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    u.check_same_dim(v)?;
    let d = u.dim() as f64;
    let tr = (v.matrix().adjoint() * u.matrix()).trace();
    Ok((tr.norm_sqr() / (d * d)).min(1.0))
}

/// Operator that permutes basis states by `f` (must be a bijection).
fn permutation_unitary(n: usize, f: impl Fn(usize) -> usize) -> UnitaryMatrix {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        m[(f(c), c)] = ONE;
    }
    UnitaryMatrix::from_raw(m)
}

/// Exact CNOT on any (not necessarily adjacent) pair.
pub fn cnot_matrix(n: usize, control: QubitIndex, target: QubitIndex) -> Result<UnitaryMatrix> {
    check_register(n)?;
    control.check(n)?;
    target.check(n)?;
    if control == target {
        return Err(Error::ControlEqualsTarget(control.get()));
    }
    let (cs, ts) = (control.shift(n), target.shift(n));
    Ok(permutation_unitary(n, |i| {
        if (i >> cs) & 1 == 1 {
            i ^ (1 << ts)
        } else {
            i
        }
    }))
}

/// Exact SWAP on any pair.
pub fn swap_matrix(n: usize, a: QubitIndex, b: QubitIndex) -> Result<UnitaryMatrix> {
    check_register(n)?;
    a.check(n)?;
    b.check(n)?;
    if a == b {
        return Err(Error::DuplicateTarget(a.get()));
    }
    let (sa, sb) = (a.shift(n), b.shift(n));
    Ok(permutation_unitary(n, |i| {
        if ((i >> sa) & 1) != ((i >> sb) & 1) {
            i ^ (1 << sa) ^ (1 << sb)
        } else {
            i
        }
    }))
}

pub fn pauli_x() -> UnitaryMatrix {
    UnitaryMatrix::from_raw(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
}

pub fn pauli_y() -> UnitaryMatrix {
    UnitaryMatrix::from_raw(DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]))
}

pub fn pauli_z() -> UnitaryMatrix {
    UnitaryMatrix::from_raw(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]))
}

pub fn hadamard() -> UnitaryMatrix {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    UnitaryMatrix::from_raw(DMatrix::from_row_slice(2, 2, &[h, h, h, -h]))
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `diag(R)` folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut qm = qr.q();
    for (j, mut col) in qm.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        col *= ph;
    }
    UnitaryMatrix::from_raw(qm)
}

/// Haar unitary rescaled into SU(d).
pub fn haar_special_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let u = haar_unitary(dim, rng);
    let phase = u.determinant().arg() / dim as f64;
    u.with_global_phase(-phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::native_gates::cp_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    /// Kronecker-product oracle: builds I⊗…⊗G⊗…⊗I by explicit products.
    fn kron_oracle(gate: &DMatrix<C64>, first: usize, n: usize) -> DMatrix<C64> {
        let k = gate.nrows().trailing_zeros() as usize;
        let left = DMatrix::<C64>::identity(1 << (first - 1), 1 << (first - 1));
        let rest = n - (first - 1) - k;
        let right = DMatrix::<C64>::identity(1 << rest, 1 << rest);
        left.kronecker(gate).kronecker(&right)
    }

    #[test]
    fn embed_identity_is_identity() {
        let u = embed(&UnitaryMatrix::identity(2), &[q(1)], 3).unwrap();
        assert_eq!(u, UnitaryMatrix::identity(8));
    }

    #[test]
    fn embed_sigma_x_on_second_qubit() {
        let u = embed(&pauli_x(), &[q(2)], 2).unwrap();
        let s = apply(&u, &StateVector::from_bits("00").unwrap()).unwrap();
        assert_eq!(s, StateVector::from_bits("01").unwrap());
        let expected = UnitaryMatrix::identity(2).kron(&pauli_x());
        assert_eq!(u, expected);
    }

    #[test]
    fn embed_cp_matches_kronecker_oracle() {
        let cp = cp_matrix(FRAC_PI_2);
        let u = embed(&cp, &[q(1), q(2)], 3).unwrap();
        let oracle = kron_oracle(cp.matrix(), 1, 3);
        assert!(max_abs_diff(u.matrix(), &oracle) < 1e-15);
        assert!(u.is_diagonal());
        // |110⟩ = index 6: qubits 1 and 2 both set, so the CP entry for |11⟩.
        let e = u.get(6, 6);
        assert!((e - C64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
    }

    #[test]
    fn embed_matches_oracle_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            for first in 1..=n {
                let g = haar_unitary(2, &mut rng);
                let u = embed(&g, &[q(first)], n).unwrap();
                assert!(max_abs_diff(u.matrix(), &kron_oracle(g.matrix(), first, n)) < 1e-15);
                if first < n {
                    let g2 = haar_unitary(4, &mut rng);
                    let u2 = embed(&g2, &[q(first), q(first + 1)], n).unwrap();
                    assert!(
                        max_abs_diff(u2.matrix(), &kron_oracle(g2.matrix(), first, n)) < 1e-15
                    );
                }
            }
        }
    }

    #[test]
    fn embed_rejects_bad_placements() {
        let cp = cp_matrix(1.0);
        assert_eq!(
            embed(&cp, &[q(1), q(3)], 3),
            Err(Error::NonAdjacent(1, 3))
        );
        assert_eq!(embed(&cp, &[q(2), q(1)], 3), Err(Error::NonAdjacent(2, 1)));
        assert!(matches!(
            embed(&pauli_x(), &[q(1), q(2)], 3),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            embed(&pauli_x(), &[q(4)], 3),
            Err(Error::QubitOutOfRange { qubit: 4, n: 3 })
        );
        assert!(matches!(
            embed(&pauli_x(), &[q(1)], 13),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn apply_basics() {
        let s = StateVector::from_bits("1").unwrap();
        assert_eq!(apply(&UnitaryMatrix::identity(2), &s).unwrap(), s);
        let flipped = apply(&embed(&pauli_x(), &[q(1)], 1).unwrap(), &StateVector::zero(1).unwrap())
            .unwrap();
        assert_eq!(flipped, s);
        assert!(apply(&UnitaryMatrix::identity(4), &s).is_err());
    }

    #[test]
    fn compose_order_and_involution() {
        let x = pauli_x();
        assert_eq!(compose(std::slice::from_ref(&x)).unwrap(), x);
        assert_eq!(compose(&[x.clone(), x.clone()]).unwrap(), UnitaryMatrix::identity(2));
        // First-listed acts first: Z then X gives X·Z.
        let xz = compose(&[pauli_z(), pauli_x()]).unwrap();
        assert_eq!(xz, pauli_x().mul(&pauli_z()).unwrap());
        assert!(compose(&[]).is_err());
        assert!(compose(&[x, UnitaryMatrix::identity(4)]).is_err());
    }

    #[test]
    fn phase_distance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(4, &mut rng);
        assert_eq!(phase_distance(&u, &u).unwrap(), 0.0);
        let shifted = u.with_global_phase(PI / 3.0);
        assert!(phase_distance(&u, &shifted).unwrap() < 1e-12);
        assert!((phase_distance(&UnitaryMatrix::identity(2), &pauli_x()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_distance_identity_vs_x_against_phase_scan() {
        // Oracle: min over a fine φ grid of max|I − e^{iφ}σx| never drops below 1.
        let id = UnitaryMatrix::identity(2);
        let x = pauli_x();
        let scan = (0..3600)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / 3600.0;
                max_abs_diff(id.matrix(), &(x.matrix() * C64::from_polar(1.0, phi)))
            })
            .fold(f64::INFINITY, f64::min);
        assert!((scan - 1.0).abs() < 1e-12);
        assert!((phase_distance(&id, &x).unwrap() - scan).abs() < 1e-12);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::NotUnitary(_))));
        let m3 = DMatrix::<C64>::identity(3, 3);
        assert!(matches!(UnitaryMatrix::new(m3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn local_application_matches_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = haar_unitary(4, &mut rng);
        let mut acc = haar_unitary(8, &mut rng);
        let expected = embed(&g, &[q(2), q(3)], 3).unwrap().mul(&acc).unwrap();
        acc.apply_local(&g, &[q(2), q(3)]).unwrap();
        assert!(acc.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn cnot_and_swap_permutations() {
        let c = cnot_matrix(2, q(1), q(2)).unwrap();
        let s = apply(&c, &StateVector::from_bits("10").unwrap()).unwrap();
        assert_eq!(s, StateVector::from_bits("11").unwrap());
        let sw = swap_matrix(3, q(1), q(3)).unwrap();
        let s = apply(&sw, &StateVector::from_bits("100").unwrap()).unwrap();
        assert_eq!(s, StateVector::from_bits("001").unwrap());
        assert_eq!(cnot_matrix(2, q(1), q(1)), Err(Error::ControlEqualsTarget(1)));
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [2, 4, 8] {
            let u = haar_unitary(dim, &mut rng);
            assert!(u.unitarity_error() < 1e-13);
            let su = haar_special_unitary(dim, &mut rng);
            assert!((su.determinant() - ONE).norm() < 1e-12);
        }
    }
}
