//! Exact state-vector simulation of small qubit registers.
//!
//! Amplitude index `i` encodes the computational basis ket whose binary
//! expansion is `i`, with qubit 0 in the most significant position. All
//! operations return fresh states; nothing is mutated in place from the
//! caller's point of view.
//!
//! Measurements take the uniform variate as an argument instead of an RNG so
//! that collapse is a pure function. Outcomes are selected by the cumulative
//! rule in a fixed order: `+1` before `-1`, and `PhiPlus, PhiMinus, PsiPlus,
//! PsiMinus` for the Bell basis.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Amplitude = Complex64;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 16;

/// Numerical tolerance for norms, probabilities and phase comparisons.
pub const TOLERANCE: f64 = 1e-9;

/// Outcomes whose probability falls below this are treated as impossible:
/// they are never sampled and are left out of exact distributions.
pub const SUPPORT_EPS: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("register size {0} is outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("GHZ register needs 2..={MAX_QUBITS} qubits, got {0}")]
    GhzSize(usize),
    #[error("{labels} basis labels but {bits} bits")]
    LengthMismatch { labels: usize, bits: usize },
    #[error("product preparation supports Z and X only, got {0}")]
    UnsupportedBasis(Basis),
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),
    #[error("qubit {index} out of range for a {num_qubits}-qubit register")]
    IndexOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit {0} is used more than once")]
    IndexCollision(usize),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("state contains a non-finite amplitude")]
    NonFinite,
}

/// Single-qubit measurement basis. `Z` is the computational basis (written
/// ⊕ in the protocol literature), `X` the Hadamard basis (⊗).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    /// Maps the symbolic basis names `⊕`/`⊗` (and the plain letters) onto labels.
    pub fn from_symbol(symbol: char) -> Option<Basis> {
        match symbol {
            '⊕' | 'Z' | 'z' => Some(Basis::Z),
            '⊗' | 'X' | 'x' => Some(Basis::X),
            'Y' | 'y' => Some(Basis::Y),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Basis::Z => '⊕',
            Basis::X => '⊗',
            Basis::Y => 'Y',
        }
    }

    /// Eigenvector for the given outcome, as `(amp(|0⟩), amp(|1⟩))`.
    pub fn eigenvector(self, outcome: MeasOutcome) -> [Complex64; 2] {
        let s = FRAC_1_SQRT_2;
        match (self, outcome.is_plus()) {
            (Basis::Z, true) => [ONE, ZERO],
            (Basis::Z, false) => [ZERO, ONE],
            (Basis::X, true) => [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            (Basis::X, false) => [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
            (Basis::Y, true) => [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
            (Basis::Y, false) => [Complex64::new(s, 0.0), Complex64::new(0.0, -s)],
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        };
        f.write_str(c)
    }
}

/// A `±1` eigenvalue outcome; `bit = (1 - eigenvalue) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub struct MeasOutcome {
    eigenvalue: i8,
}

impl MeasOutcome {
    pub const PLUS: MeasOutcome = MeasOutcome { eigenvalue: 1 };
    pub const MINUS: MeasOutcome = MeasOutcome { eigenvalue: -1 };

    pub fn from_bit(bit: u8) -> MeasOutcome {
        if bit == 0 {
            Self::PLUS
        } else {
            Self::MINUS
        }
    }

    pub fn from_eigenvalue(eigenvalue: i8) -> Option<MeasOutcome> {
        match eigenvalue {
            1 => Some(Self::PLUS),
            -1 => Some(Self::MINUS),
            _ => None,
        }
    }

    pub fn eigenvalue(self) -> i8 {
        self.eigenvalue
    }

    pub fn bit(self) -> u8 {
        ((1 - self.eigenvalue) / 2) as u8
    }

    pub fn is_plus(self) -> bool {
        self.eigenvalue > 0
    }

    pub fn flipped(self) -> MeasOutcome {
        MeasOutcome {
            eigenvalue: -self.eigenvalue,
        }
    }
}

impl TryFrom<i8> for MeasOutcome {
    type Error = String;

    fn try_from(value: i8) -> Result<Self, Self::Error> {
        MeasOutcome::from_eigenvalue(value).ok_or_else(|| format!("eigenvalue {value} is not ±1"))
    }
}

impl From<MeasOutcome> for i8 {
    fn from(o: MeasOutcome) -> i8 {
        o.eigenvalue
    }
}

impl fmt::Display for MeasOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_plus() { "+1" } else { "-1" })
    }
}

/// Outcome of a two-qubit Bell-basis measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    /// Sampling order.
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    /// Amplitudes over `|00⟩, |01⟩, |10⟩, |11⟩` of the pair `(first, second)`.
    pub fn vector(self) -> [Complex64; 4] {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellOutcome::PhiPlus => [s, ZERO, ZERO, s],
            BellOutcome::PhiMinus => [s, ZERO, ZERO, -s],
            BellOutcome::PsiPlus => [ZERO, s, s, ZERO],
            BellOutcome::PsiMinus => [ZERO, s, -s, ZERO],
        }
    }

    /// Parity bit of `Z⊗Z` (0 for eigenvalue +1).
    pub fn zz_parity(self) -> u8 {
        match self {
            BellOutcome::PhiPlus | BellOutcome::PhiMinus => 0,
            BellOutcome::PsiPlus | BellOutcome::PsiMinus => 1,
        }
    }

    /// Parity bit of `X⊗X` (0 for eigenvalue +1).
    pub fn xx_parity(self) -> u8 {
        match self {
            BellOutcome::PhiPlus | BellOutcome::PsiPlus => 0,
            BellOutcome::PhiMinus | BellOutcome::PsiMinus => 1,
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Single-qubit Pauli operators, used for channel noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Exact amplitude vector over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis ket `|index⟩` on `num_qubits` qubits.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<StateVector, StateError> {
        check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(StateError::IndexOutOfRange { index, num_qubits });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<StateVector, StateError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(StateError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_size(num_qubits)?;
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Equality up to global phase.
    pub fn same_ray(&self, other: &StateVector) -> bool {
        self.num_qubits == other.num_qubits && (self.inner(other).norm() - 1.0).abs() < TOLERANCE
    }

    /// `self ⊗ other`, with `self` occupying the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, StateError> {
        check_size(self.num_qubits + other.num_qubits)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amplitudes,
        })
    }

    pub fn apply_pauli(&self, index: usize, pauli: Pauli) -> Result<StateVector, StateError> {
        let mask = self.mask(index)?;
        let mut out = self.amplitudes.clone();
        for i in (0..out.len()).filter(|i| i & mask == 0) {
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | mask]);
            let (b0, b1) = match pauli {
                Pauli::X => (a1, a0),
                Pauli::Y => (
                    Complex64::new(0.0, -1.0) * a1,
                    Complex64::new(0.0, 1.0) * a0,
                ),
                Pauli::Z => (a0, -a1),
            };
            out[i] = b0;
            out[i | mask] = b1;
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amplitudes: out,
        })
    }

    /// Physical reset of one qubit to `|0⟩`: measure in Z, flip on `-1`.
    pub fn reset_qubit(&self, index: usize, rand: f64) -> Result<StateVector, StateError> {
        let (outcome, collapsed) = measure_qubit(self, index, Basis::Z, rand)?;
        if outcome.is_plus() {
            Ok(collapsed)
        } else {
            collapsed.apply_pauli(index, Pauli::X)
        }
    }

    fn mask(&self, index: usize) -> Result<usize, StateError> {
        if index >= self.num_qubits {
            return Err(StateError::IndexOutOfRange {
                index,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1usize << (self.num_qubits - 1 - index))
    }

    /// Unnormalized projection of one qubit onto a basis eigenvector.
    fn project_single(&self, mask: usize, basis: Basis, outcome: MeasOutcome) -> Vec<Complex64> {
        let [e0, e1] = basis.eigenvector(outcome);
        let mut out = vec![ZERO; self.amplitudes.len()];
        for i in (0..out.len()).filter(|i| i & mask == 0) {
            let c = e0.conj() * self.amplitudes[i] + e1.conj() * self.amplitudes[i | mask];
            out[i] = e0 * c;
            out[i | mask] = e1 * c;
        }
        out
    }

    /// Unnormalized projection of a qubit pair onto a Bell vector.
    fn project_bell(&self, first: usize, second: usize, outcome: BellOutcome) -> Vec<Complex64> {
        let v = outcome.vector();
        let mut out = vec![ZERO; self.amplitudes.len()];
        for i in (0..out.len()).filter(|i| i & (first | second) == 0) {
            let idx = [i, i | second, i | first, i | first | second];
            let c: Complex64 = idx
                .iter()
                .zip(&v)
                .map(|(&k, vk)| vk.conj() * self.amplitudes[k])
                .sum();
            for (&k, vk) in idx.iter().zip(&v) {
                out[k] = vk * c;
            }
        }
        out
    }

    fn project(&self, step: &PlanStep, outcome: &Outcome) -> Vec<Complex64> {
        match (step, outcome) {
            (PlanStep::Single { index, basis }, Outcome::Single(o)) => {
                self.project_single(1 << (self.num_qubits - 1 - index), *basis, *o)
            }
            (PlanStep::Bell { first, second }, Outcome::Bell(o)) => self.project_bell(
                1 << (self.num_qubits - 1 - first),
                1 << (self.num_qubits - 1 - second),
                *o,
            ),
            _ => unreachable!("outcome kind does not match plan step"),
        }
    }

    fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> StateVector {
        StateVector {
            num_qubits: self.num_qubits,
            amplitudes,
        }
    }
}

fn check_size(num_qubits: usize) -> Result<(), StateError> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(StateError::QubitCount(num_qubits));
    }
    Ok(())
}

fn norm_sqr(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

fn normalized(mut amplitudes: Vec<Complex64>, prob: f64) -> Vec<Complex64> {
    let scale = 1.0 / prob.sqrt();
    for a in &mut amplitudes {
        *a *= scale;
    }
    amplitudes
}

/// Cumulative-rule selection; impossible outcomes are skipped.
fn select(probs: &[f64], rand: f64) -> usize {
    let mut cumulative = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        cumulative += p;
        if p >= SUPPORT_EPS && rand < cumulative {
            return k;
        }
    }
    // rand landed past the accumulated total through rounding
    probs
        .iter()
        .rposition(|&p| p >= SUPPORT_EPS)
        .expect("normalized state has at least one possible outcome")
}

/// Tensor product of `Z`/`X` eigenstates: `|bit⟩` for `Z`, `|±⟩` for `X`.
pub fn prep_product(labels: &[Basis], bits: &[u8]) -> Result<StateVector, StateError> {
    if labels.len() != bits.len() {
        return Err(StateError::LengthMismatch {
            labels: labels.len(),
            bits: bits.len(),
        });
    }
    check_size(labels.len())?;
    let mut amplitudes = vec![ONE];
    for (&basis, &bit) in labels.iter().zip(bits) {
        if basis == Basis::Y {
            return Err(StateError::UnsupportedBasis(basis));
        }
        if bit > 1 {
            return Err(StateError::InvalidBit(bit));
        }
        let [e0, e1] = basis.eigenvector(MeasOutcome::from_bit(bit));
        amplitudes = amplitudes.iter().flat_map(|a| [a * e0, a * e1]).collect();
    }
    Ok(StateVector {
        num_qubits: labels.len(),
        amplitudes,
    })
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn prep_ghz(n: usize) -> Result<StateVector, StateError> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(StateError::GhzSize(n));
    }
    let dim = 1usize << n;
    let mut amplitudes = vec![ZERO; dim];
    amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[dim - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(StateVector {
        num_qubits: n,
        amplitudes,
    })
}

/// Projective measurement of one qubit. The outcome is `+1` iff
/// `rand < P(+1)`; the returned state is the renormalized collapse.
pub fn measure_qubit(
    state: &StateVector,
    index: usize,
    basis: Basis,
    rand: f64,
) -> Result<(MeasOutcome, StateVector), StateError> {
    let mask = state.mask(index)?;
    let branches = [MeasOutcome::PLUS, MeasOutcome::MINUS].map(|o| {
        let amps = state.project_single(mask, basis, o);
        let p = norm_sqr(&amps);
        (o, amps, p)
    });
    let probs = [branches[0].2, branches[1].2];
    let k = select(&probs, rand);
    let [plus, minus] = branches;
    let (outcome, amps, p) = if k == 0 { plus } else { minus };
    Ok((outcome, state.with_amplitudes(normalized(amps, p))))
}

/// Bell-basis measurement of qubits `(first, second)`.
pub fn measure_bell(
    state: &StateVector,
    first: usize,
    second: usize,
    rand: f64,
) -> Result<(BellOutcome, StateVector), StateError> {
    let (mi, mj) = pair_masks(state, first, second)?;
    let mut branches: Vec<(BellOutcome, Vec<Complex64>, f64)> = BellOutcome::ALL
        .iter()
        .map(|&o| {
            let amps = state.project_bell(mi, mj, o);
            let p = norm_sqr(&amps);
            (o, amps, p)
        })
        .collect();
    let probs: Vec<f64> = branches.iter().map(|b| b.2).collect();
    let (outcome, amps, p) = branches.swap_remove(select(&probs, rand));
    Ok((outcome, state.with_amplitudes(normalized(amps, p))))
}

fn pair_masks(
    state: &StateVector,
    first: usize,
    second: usize,
) -> Result<(usize, usize), StateError> {
    if first == second {
        return Err(StateError::IndexCollision(first));
    }
    Ok((state.mask(first)?, state.mask(second)?))
}

/// One element of a measurement plan for [`outcome_distribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStep {
    Single { index: usize, basis: Basis },
    Bell { first: usize, second: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Single(MeasOutcome),
    Bell(BellOutcome),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Single(o) => o.fmt(f),
            Outcome::Bell(o) => o.fmt(f),
        }
    }
}

impl PlanStep {
    fn outcomes(&self) -> Vec<Outcome> {
        match self {
            PlanStep::Single { .. } => vec![
                Outcome::Single(MeasOutcome::PLUS),
                Outcome::Single(MeasOutcome::MINUS),
            ],
            PlanStep::Bell { .. } => BellOutcome::ALL.iter().map(|&b| Outcome::Bell(b)).collect(),
        }
    }

    fn qubits(&self) -> Vec<usize> {
        match *self {
            PlanStep::Single { index, .. } => vec![index],
            PlanStep::Bell { first, second } => vec![first, second],
        }
    }
}

/// Exact joint distribution of the outcomes of `plan`, without sampling and
/// without touching `state`. Outcome tuples below [`SUPPORT_EPS`] are omitted.
pub fn outcome_distribution(
    state: &StateVector,
    plan: &[PlanStep],
) -> Result<BTreeMap<Vec<Outcome>, f64>, StateError> {
    let mut seen = vec![false; state.num_qubits];
    for q in plan.iter().flat_map(PlanStep::qubits) {
        if q >= state.num_qubits {
            return Err(StateError::IndexOutOfRange {
                index: q,
                num_qubits: state.num_qubits,
            });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(StateError::IndexCollision(q));
        }
    }

    let mut dist = BTreeMap::new();
    let mut prefix = Vec::with_capacity(plan.len());
    expand(state.clone(), plan, &mut prefix, &mut dist);
    Ok(dist)
}

// Projectors on disjoint qubits commute, so projecting step by step without
// renormalizing leaves the joint probability as the final squared norm.
fn expand(
    branch: StateVector,
    plan: &[PlanStep],
    prefix: &mut Vec<Outcome>,
    dist: &mut BTreeMap<Vec<Outcome>, f64>,
) {
    let Some((step, rest)) = plan.split_first() else {
        dist.insert(prefix.clone(), branch.norm_sqr());
        return;
    };
    for outcome in step.outcomes() {
        let projected = branch.with_amplitudes(branch.project(step, &outcome));
        if projected.norm_sqr() < SUPPORT_EPS {
            continue;
        }
        prefix.push(outcome);
        expand(projected, rest, prefix, dist);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2 as S;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < TOLERANCE
    }

    #[test]
    fn prep_product_zz_is_ket_zero() {
        let s = prep_product(&[Basis::Z, Basis::Z], &[0, 0]).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!(close(a.re, e) && close(a.im, 0.0));
        }
    }

    #[test]
    fn prep_product_minus() {
        let s = prep_product(&[Basis::X], &[1]).unwrap();
        assert!(close(s.amplitudes()[0].re, S));
        assert!(close(s.amplitudes()[1].re, -S));
    }

    #[test]
    fn prep_product_plus_plus_is_uniform() {
        let s = prep_product(&[Basis::X, Basis::X], &[0, 0]).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|a| close(a.re, 0.5) && close(a.im, 0.0)));
    }

    #[test]
    fn prep_product_rejects_bad_input() {
        assert_eq!(
            prep_product(&[Basis::Z], &[0, 1]),
            Err(StateError::LengthMismatch { labels: 1, bits: 2 })
        );
        assert_eq!(
            prep_product(&[Basis::Y], &[0]),
            Err(StateError::UnsupportedBasis(Basis::Y))
        );
        assert_eq!(prep_product(&[], &[]), Err(StateError::QubitCount(0)));
        assert_eq!(
            prep_product(&[Basis::Z], &[2]),
            Err(StateError::InvalidBit(2))
        );
    }

    #[test]
    fn ghz_amplitudes() {
        let g = prep_ghz(3).unwrap();
        for (i, a) in g.amplitudes().iter().enumerate() {
            let want = if i == 0 || i == 7 { S } else { 0.0 };
            assert!(close(a.re, want));
        }
        assert!(matches!(prep_ghz(1), Err(StateError::GhzSize(1))));
        assert!(matches!(prep_ghz(17), Err(StateError::GhzSize(17))));
    }

    #[test]
    fn ghz2_is_phi_plus() {
        let g = prep_ghz(2).unwrap();
        let d = outcome_distribution(
            &g,
            &[PlanStep::Bell {
                first: 0,
                second: 1,
            }],
        )
        .unwrap();
        assert_eq!(d.len(), 1);
        assert!(close(d[&vec![Outcome::Bell(BellOutcome::PhiPlus)]], 1.0));
    }

    #[test]
    fn eigenstate_measurement_is_deterministic() {
        let plus = prep_product(&[Basis::X], &[0]).unwrap();
        for r in [0.0, 0.3, 0.999_999] {
            let (o, after) = measure_qubit(&plus, 0, Basis::X, r).unwrap();
            assert_eq!(o, MeasOutcome::PLUS);
            assert!(after.same_ray(&plus));
        }
    }

    #[test]
    fn zero_in_x_splits_at_half() {
        let zero = prep_product(&[Basis::Z], &[0]).unwrap();
        assert_eq!(
            measure_qubit(&zero, 0, Basis::X, 0.49).unwrap().0,
            MeasOutcome::PLUS
        );
        assert_eq!(
            measure_qubit(&zero, 0, Basis::X, 0.51).unwrap().0,
            MeasOutcome::MINUS
        );
    }

    #[test]
    fn ghz_yy_then_x_is_forced() {
        let g = prep_ghz(3).unwrap();
        // rand 0.0 always selects +1 when it is possible
        let (b, g) = measure_qubit(&g, 1, Basis::Y, 0.0).unwrap();
        let (c, g) = measure_qubit(&g, 2, Basis::Y, 0.0).unwrap();
        assert_eq!((b, c), (MeasOutcome::PLUS, MeasOutcome::PLUS));
        for r in [0.0, 0.5, 0.99] {
            assert_eq!(
                measure_qubit(&g, 0, Basis::X, r).unwrap().0,
                MeasOutcome::MINUS
            );
        }
    }

    #[test]
    fn bell_measurement_examples() {
        let zz = prep_product(&[Basis::Z, Basis::Z], &[0, 0]).unwrap();
        assert_eq!(
            measure_bell(&zz, 0, 1, 0.2).unwrap().0,
            BellOutcome::PhiPlus
        );
        assert_eq!(
            measure_bell(&zz, 0, 1, 0.7).unwrap().0,
            BellOutcome::PhiMinus
        );

        let pp = prep_product(&[Basis::X, Basis::X], &[0, 0]).unwrap();
        assert_eq!(
            measure_bell(&pp, 0, 1, 0.2).unwrap().0,
            BellOutcome::PhiPlus
        );
        assert_eq!(
            measure_bell(&pp, 0, 1, 0.7).unwrap().0,
            BellOutcome::PsiPlus
        );

        let phi_minus =
            StateVector::from_amplitudes(BellOutcome::PhiMinus.vector().to_vec()).unwrap();
        for r in [0.0, 0.4, 0.9] {
            let (o, after) = measure_bell(&phi_minus, 0, 1, r).unwrap();
            assert_eq!(o, BellOutcome::PhiMinus);
            assert!(after.same_ray(&phi_minus));
        }
    }

    #[test]
    fn bell_rejects_bad_pairs() {
        let zz = prep_product(&[Basis::Z, Basis::Z], &[0, 0]).unwrap();
        assert_eq!(
            measure_bell(&zz, 1, 1, 0.0).unwrap_err(),
            StateError::IndexCollision(1)
        );
        assert!(matches!(
            measure_bell(&zz, 0, 2, 0.0),
            Err(StateError::IndexOutOfRange { index: 2, .. })
        ));
        let one = prep_product(&[Basis::Z], &[0]).unwrap();
        assert!(measure_bell(&one, 0, 1, 0.0).is_err());
    }

    #[test]
    fn distribution_examples() {
        let zz = prep_product(&[Basis::Z, Basis::Z], &[0, 0]).unwrap();
        let d = outcome_distribution(
            &zz,
            &[PlanStep::Bell {
                first: 0,
                second: 1,
            }],
        )
        .unwrap();
        assert_eq!(d.len(), 2);
        assert!(close(d[&vec![Outcome::Bell(BellOutcome::PhiPlus)]], 0.5));
        assert!(close(d[&vec![Outcome::Bell(BellOutcome::PhiMinus)]], 0.5));

        let zero = prep_product(&[Basis::Z], &[0]).unwrap();
        let d = outcome_distribution(
            &zero,
            &[PlanStep::Single {
                index: 0,
                basis: Basis::Z,
            }],
        )
        .unwrap();
        assert_eq!(d.len(), 1);
        assert!(close(d[&vec![Outcome::Single(MeasOutcome::PLUS)]], 1.0));
    }

    #[test]
    fn distribution_rejects_overlapping_plan() {
        let g = prep_ghz(3).unwrap();
        let plan = [
            PlanStep::Single {
                index: 0,
                basis: Basis::X,
            },
            PlanStep::Bell {
                first: 1,
                second: 0,
            },
        ];
        assert_eq!(
            outcome_distribution(&g, &plan),
            Err(StateError::IndexCollision(0))
        );
    }

    #[test]
    fn pauli_flips() {
        let zero = prep_product(&[Basis::Z, Basis::X], &[0, 0]).unwrap();
        let flipped = zero
            .apply_pauli(0, Pauli::X)
            .unwrap()
            .apply_pauli(1, Pauli::Z)
            .unwrap();
        assert!(flipped.same_ray(&prep_product(&[Basis::Z, Basis::X], &[1, 1]).unwrap()));
        let y = zero.apply_pauli(0, Pauli::Y).unwrap();
        assert!(y.same_ray(&prep_product(&[Basis::Z, Basis::X], &[1, 0]).unwrap()));
    }

    #[test]
    fn reset_lands_on_zero() {
        let minus = prep_product(&[Basis::X, Basis::X], &[1, 1]).unwrap();
        let target = prep_product(&[Basis::X, Basis::Z], &[1, 0]).unwrap();
        for r in [0.1, 0.9] {
            assert!(minus.reset_qubit(1, r).unwrap().same_ray(&target));
        }
    }

    #[test]
    fn outcome_bits_match_eigenvalues() {
        for o in [MeasOutcome::PLUS, MeasOutcome::MINUS] {
            assert_eq!(o.bit() as i8, (1 - o.eigenvalue()) / 2);
            assert_eq!(MeasOutcome::from_bit(o.bit()), o);
        }
        assert_eq!(MeasOutcome::from_eigenvalue(0), None);
    }

    #[test]
    fn basis_symbols_round_trip() {
        assert_eq!(Basis::from_symbol('⊕'), Some(Basis::Z));
        assert_eq!(Basis::from_symbol('⊗'), Some(Basis::X));
        for b in Basis::ALL {
            assert_eq!(Basis::from_symbol(b.symbol()), Some(b));
        }
    }
}
