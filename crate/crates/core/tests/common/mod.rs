//! Dense-matrix reference model used as a test oracle. Shares no code with
//! the simulator: states are plain amplitude vectors, measurements are
//! explicit projectors built from hand-written eigenvectors.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum B {
    Z,
    X,
    Y,
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Eigenvector for eigenvalue `+1` (bit 0) or `-1` (bit 1).
pub fn ket(basis: B, bit: u8) -> Vec<C> {
    let s = if bit == 0 { 1.0 } else { -1.0 };
    match basis {
        B::Z if bit == 0 => vec![c(1.0, 0.0), c(0.0, 0.0)],
        B::Z => vec![c(0.0, 0.0), c(1.0, 0.0)],
        B::X => vec![c(H, 0.0), c(s * H, 0.0)],
        B::Y => vec![c(H, 0.0), c(0.0, s * H)],
    }
}

/// Φ+, Φ-, Ψ+, Ψ- in that order.
pub fn bell(k: usize) -> Vec<C> {
    let z = c(0.0, 0.0);
    let p = c(H, 0.0);
    let m = c(-H, 0.0);
    match k {
        0 => vec![p, z, z, p],
        1 => vec![p, z, z, m],
        2 => vec![z, p, p, z],
        3 => vec![z, p, m, z],
        _ => unreachable!(),
    }
}

pub fn kron(a: &[C], b: &[C]) -> Vec<C> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

pub fn product(kets: &[Vec<C>]) -> Vec<C> {
    kets.iter()
        .skip(1)
        .fold(kets[0].clone(), |acc, k| kron(&acc, k))
}

pub fn ghz(n: usize) -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(H, 0.0);
    v[(1 << n) - 1] = c(H, 0.0);
    v
}

/// Rank-one projector `|v⟩⟨v|` acting on `qubits` (qubit 0 most significant),
/// embedded in an `n`-qubit space.
#[derive(Clone, Debug)]
pub struct Proj {
    pub qubits: Vec<usize>,
    pub vector: Vec<C>,
}

impl Proj {
    pub fn single(q: usize, basis: B, bit: u8) -> Proj {
        Proj {
            qubits: vec![q],
            vector: ket(basis, bit),
        }
    }

    pub fn bell(i: usize, j: usize, k: usize) -> Proj {
        Proj {
            qubits: vec![i, j],
            vector: bell(k),
        }
    }
}

fn local_index(x: usize, n: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .fold(0, |acc, &q| (acc << 1) | ((x >> (n - 1 - q)) & 1))
}

/// Full `2^n × 2^n` matrix of a product of projectors on disjoint qubits.
pub fn matrix(n: usize, projs: &[Proj]) -> Vec<Vec<C>> {
    let dim = 1 << n;
    let touched: usize = projs
        .iter()
        .flat_map(|p| &p.qubits)
        .fold(0, |m, &q| m | (1 << (n - 1 - q)));
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for (x, row) in m.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            if (x & !touched) != (y & !touched) {
                continue;
            }
            *cell = projs.iter().fold(c(1.0, 0.0), |acc, p| {
                let i = local_index(x, n, &p.qubits);
                let j = local_index(y, n, &p.qubits);
                acc * p.vector[i] * p.vector[j].conj()
            });
        }
    }
    m
}

pub fn apply(m: &[Vec<C>], v: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn norm_sqr(v: &[C]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn num_qubits(v: &[C]) -> usize {
    v.len().trailing_zeros() as usize
}

/// `⟨ψ|P|ψ⟩` for the product of the given projectors.
pub fn prob(state: &[C], projs: &[Proj]) -> f64 {
    let n = num_qubits(state);
    norm_sqr(&apply(&matrix(n, projs), state))
}

/// Normalized post-measurement state.
pub fn collapse(state: &[C], projs: &[Proj]) -> Vec<C> {
    let n = num_qubits(state);
    let v = apply(&matrix(n, projs), state);
    let norm = norm_sqr(&v).sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

/// `|⟨a|b⟩|`.
pub fn overlap(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C>().norm()
}

/// Binomial standard deviation of a frequency estimated from `n` trials.
pub fn sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `|observed - expected| ≤ 4σ`, with a floor so exact expectations of 0
/// or 1 still demand exact agreement.
pub fn within_4_sigma(observed: f64, expected: f64, n: usize) -> bool {
    (observed - expected).abs() <= 4.0 * sigma(expected, n) + 1e-12
}

/// Probability that an intercept-resend attacker measuring a share
/// uniformly in Z or X causes the shareholder's bit to differ from the
/// prepared bit, averaged over preparation basis and bit.
pub fn intercept_resend_error() -> f64 {
    let mut total = 0.0;
    for prep in [B::Z, B::X] {
        for bit in 0..2u8 {
            let sent = ket(prep, bit);
            for eve in [B::Z, B::X] {
                for e in 0..2u8 {
                    let p_e = prob(&sent, &[Proj::single(0, eve, e)]);
                    let resent = ket(eve, e);
                    let wrong = prob(&resent, &[Proj::single(0, prep, 1 - bit)]);
                    total += 0.25 * 0.5 * p_e * wrong;
                }
            }
        }
    }
    total
}

/// Per-share and parity error probabilities after a Bell measurement of
/// both shares of the two-share parity code, averaged uniformly over basis,
/// secret and cell pattern.
pub fn bell_attack_errors() -> (f64, f64) {
    let mut share = 0.0;
    let mut parity = 0.0;
    for prep in [B::Z, B::X] {
        for pattern in 0..4u8 {
            let bits = [pattern >> 1, pattern & 1];
            let sent = product(&[ket(prep, bits[0]), ket(prep, bits[1])]);
            for k in 0..4 {
                let p_k = prob(&sent, &[Proj::bell(0, 1, k)]);
                if p_k < 1e-15 {
                    continue;
                }
                let after = bell(k);
                for o0 in 0..2u8 {
                    for o1 in 0..2u8 {
                        let p = prob(
                            &after,
                            &[Proj::single(0, prep, o0), Proj::single(1, prep, o1)],
                        );
                        let w = 0.5 * 0.25 * p_k * p;
                        if o0 != bits[0] {
                            share += w;
                        }
                        if o0 ^ o1 != bits[0] ^ bits[1] {
                            parity += w;
                        }
                    }
                }
            }
        }
    }
    (share, parity)
}

/// Check error rate over kept rounds of the GHZ cheat. Bob measures his
/// and Charlie's qubit in Y⊗Y, infers Alice's X value as `-βγ`, forwards
/// `|0⟩` to Charlie. When he speaks after Charlie he echoes Charlie's basis
/// and announces the value completing the correlator; when he speaks first
/// he says X, and `s·(-βγ)` as his value. `p_bob_last` is the probability
/// that Bob speaks last in each announcement phase, drawn independently.
pub fn ghz_cheat_qber(p_bob_last: f64) -> f64 {
    let g = ghz(3);
    let zero = ket(B::Z, 0);
    let (mut kept, mut errors) = (0.0, 0.0);
    for alice in [B::X, B::Y] {
        for charlie in [B::X, B::Y] {
            for (basis_last, p_b) in [(true, p_bob_last), (false, 1.0 - p_bob_last)] {
                for (check_last, p_c) in [(true, p_bob_last), (false, 1.0 - p_bob_last)] {
                    let bob = if basis_last { charlie } else { B::X };
                    let ys = [alice, bob, charlie].iter().filter(|&&b| b == B::Y).count();
                    if ys % 2 == 1 {
                        continue;
                    }
                    let sign = if ys == 0 { 1 } else { -1 };
                    for a in 0..2u8 {
                        for beta in 0..2u8 {
                            for gamma in 0..2u8 {
                                let p_abg = prob(
                                    &g,
                                    &[
                                        Proj::single(0, alice, a),
                                        Proj::single(1, B::Y, beta),
                                        Proj::single(2, B::Y, gamma),
                                    ],
                                );
                                for cv in 0..2u8 {
                                    let p_c_out = prob(&zero, &[Proj::single(0, charlie, cv)]);
                                    let w = 0.25 * p_b * p_c * p_abg * p_c_out;
                                    if w == 0.0 {
                                        continue;
                                    }
                                    let ev = |bit: u8| if bit == 0 { 1 } else { -1 };
                                    let inferred = -ev(beta) * ev(gamma);
                                    let bob_value = if check_last {
                                        sign * inferred * ev(cv)
                                    } else {
                                        sign * inferred
                                    };
                                    kept += w;
                                    if ev(a) * bob_value * ev(cv) != sign {
                                        errors += w;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    errors / kept
}
