//! Round engines for the product-state scheme, the GHZ scheme and the
//! two-BB84 baseline.
//!
//! Every round draws from its own random streams, derived from
//! `(master_seed, round index)`, so rounds can be evaluated in any order or in
//! parallel. Check selection, the abort decision and key assembly then run as
//! a sequential post-pass over the ordered records.

mod bb84;
mod ghz;
mod product;
mod record;

pub use ghz::correlation_sign;
pub use record::{
    Announcement, BitString, Content, Party, Phase, RoundRecord, Transcript, TransmissionRecord,
};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{self, Adversary, AdversaryRecord, Interception};
use crate::encoding::{validate, EncodingError, EncodingTable, Violation};
use crate::qcore::{Basis, Pauli, StateError, StateVector, MAX_QUBITS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("engine for {expected:?} given a {got:?} configuration")]
    WrongProtocol {
        expected: ProtocolKind,
        got: ProtocolKind,
    },
    #[error("table has {table} shares but the configuration has {config} shareholders")]
    TableMismatch { table: usize, config: usize },
    #[error("encoding table is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidTable(Vec<Violation>),
    #[error("attack not supported here: {0}")]
    UnsupportedAttack(String),
    #[error("joint two-share attacks need simultaneous transmission")]
    JointAttackNeedsSimultaneous,
    #[error("share {0} is not on the channel")]
    NotInFlight(usize),
    #[error("adversary gave a {got:?} announcement during the {phase:?} phase")]
    BadAnnouncement { phase: Phase, got: Content },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Product,
    Ghz,
    TwoBb84,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transmission {
    Simultaneous,
    Sequential,
}

/// Who announces first among the shareholders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingPolicy {
    /// Bob always announces after Charlie (shareholders in descending index).
    FixedBobLast,
    /// A fresh uniformly random order for each announcement phase.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub protocol: ProtocolKind,
    pub num_shareholders: usize,
    pub rounds: usize,
    pub quantum_memory: bool,
    pub transmission: Transmission,
    pub check_fraction: f64,
    pub abort_qber_threshold: f64,
    pub noise_flip_prob: f64,
    pub ordering_policy: OrderingPolicy,
    pub master_seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            protocol: ProtocolKind::Product,
            num_shareholders: 2,
            rounds: 1000,
            quantum_memory: true,
            transmission: Transmission::Simultaneous,
            check_fraction: 0.25,
            abort_qber_threshold: 0.02,
            noise_flip_prob: 0.0,
            ordering_policy: OrderingPolicy::Random,
            master_seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn new(protocol: ProtocolKind) -> ProtocolConfig {
        ProtocolConfig {
            protocol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::Config(m));
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return bad(format!(
                "check_fraction {} not in (0, 1)",
                self.check_fraction
            ));
        }
        if !(0.0..1.0).contains(&self.abort_qber_threshold) {
            return bad(format!(
                "abort_qber_threshold {} not in [0, 1)",
                self.abort_qber_threshold
            ));
        }
        if !(0.0..=1.0).contains(&self.noise_flip_prob) {
            return bad(format!(
                "noise_flip_prob {} not in [0, 1]",
                self.noise_flip_prob
            ));
        }
        match self.protocol {
            ProtocolKind::Product if !(2..=MAX_QUBITS).contains(&self.num_shareholders) => {
                bad(format!(
                    "product protocol needs 2..={MAX_QUBITS} shareholders, got {}",
                    self.num_shareholders
                ))
            }
            ProtocolKind::Ghz | ProtocolKind::TwoBb84 if self.num_shareholders != 2 => {
                bad(format!(
                    "{:?} protocol has exactly 2 shareholders, got {}",
                    self.protocol, self.num_shareholders
                ))
            }
            _ => Ok(()),
        }
    }

    /// Shares (transmitted qubits) per round.
    pub fn shares(&self) -> usize {
        match self.protocol {
            ProtocolKind::Product => self.num_shareholders,
            ProtocolKind::Ghz | ProtocolKind::TwoBb84 => 2,
        }
    }
}

/// Execution settings that do not affect the transcript.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// `None` runs rounds on the calling thread; `Some(0)` uses rayon's
    /// default pool size.
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn threads(n: usize) -> RunOptions {
        RunOptions { threads: Some(n) }
    }
}

#[derive(Debug, Clone, Copy)]
enum Lane {
    Honest = 1,
    Adversary = 2,
    Channel = 3,
}

fn round_rng(seed: u64, round: usize, lane: Lane) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3 * round as u64 + lane as u64);
    rng
}

fn post_pass_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// Per-round random streams.
pub(crate) struct RoundRng {
    pub honest: ChaCha8Rng,
    pub adversary: ChaCha8Rng,
    pub channel: ChaCha8Rng,
}

impl RoundRng {
    fn new(seed: u64, round: usize) -> RoundRng {
        RoundRng {
            honest: round_rng(seed, round, Lane::Honest),
            adversary: round_rng(seed, round, Lane::Adversary),
            channel: round_rng(seed, round, Lane::Channel),
        }
    }
}

fn random_zx<R: Rng>(rng: &mut R) -> Basis {
    if rng.gen::<bool>() {
        Basis::X
    } else {
        Basis::Z
    }
}

fn random_xy<R: Rng>(rng: &mut R) -> Basis {
    if rng.gen::<bool>() {
        Basis::Y
    } else {
        Basis::X
    }
}

fn announcement_order<R: Rng>(policy: OrderingPolicy, n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).rev().collect();
    if policy == OrderingPolicy::Random {
        order.shuffle(rng);
    }
    order
}

/// Moves the shares through the channel: adversary hook first, then noise.
/// With simultaneous transmission the adversary sees every share at once;
/// otherwise it is handed one share at a time.
#[allow(clippy::too_many_arguments)]
fn transmit<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    adv: &A,
    joint: bool,
    register: &mut StateVector,
    qubit_offset: usize,
    noise: &[Pauli],
    rng: &mut RoundRng,
    adv_rec: &mut AdversaryRecord,
    note: &mut String,
) -> Result<Vec<TransmissionRecord>, ProtocolError> {
    let shares = noise.len();
    let all: Vec<usize> = (0..shares).collect();
    let groups: Vec<&[usize]> = if joint {
        vec![&all[..]]
    } else {
        all.chunks(1).collect()
    };
    let mut flips = vec![false; shares];
    for group in groups {
        if adv_rec.attacked {
            let mut ctx = Interception::new(
                config.protocol,
                register,
                group,
                qubit_offset,
                &mut rng.adversary,
                adv_rec,
                note,
            );
            adv.intercept(&mut ctx)?;
        }
        for &k in group {
            flips[k] = rng.channel.gen::<f64>() < config.noise_flip_prob;
            if flips[k] {
                *register = register.apply_pauli(qubit_offset + k, noise[k])?;
            }
        }
    }
    Ok((0..shares)
        .map(|k| TransmissionRecord {
            share: k,
            intercepted: adv_rec.touched(k),
            noise_flip: flips[k],
        })
        .collect())
}

/// Bit flip in the basis the share was prepared in.
fn flip_for(basis: Basis) -> Pauli {
    match basis {
        Basis::Z => Pauli::X,
        Basis::X => Pauli::Z,
        Basis::Y => Pauli::X,
    }
}

fn map_rounds<F>(rounds: usize, opts: &RunOptions, f: F) -> Result<Vec<RoundRecord>, ProtocolError>
where
    F: Fn(usize) -> Result<RoundRecord, ProtocolError> + Sync + Send,
{
    match opts.threads {
        None | Some(1) => (0..rounds).map(f).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ProtocolError::ThreadPool(e.to_string()))?;
            pool.install(|| (0..rounds).into_par_iter().map(f).collect())
        }
    }
}

fn expect_protocol(config: &ProtocolConfig, expected: ProtocolKind) -> Result<(), ProtocolError> {
    if config.protocol != expected {
        return Err(ProtocolError::WrongProtocol {
            expected,
            got: config.protocol,
        });
    }
    config.validate()
}

/// Runs whichever protocol the configuration names.
pub fn run<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    table: Option<&EncodingTable>,
    adv: &A,
    opts: &RunOptions,
) -> Result<Transcript, ProtocolError> {
    match config.protocol {
        ProtocolKind::Product => {
            let default_table;
            let table = match table {
                Some(t) => t,
                None => {
                    default_table = crate::encoding::table1(config.num_shareholders)?;
                    &default_table
                }
            };
            run_product_with(config, table, adv, opts)
        }
        ProtocolKind::Ghz => run_ghz_with(config, adv, opts),
        ProtocolKind::TwoBb84 => run_two_bb84_with(config, adv, opts),
    }
}

/// Product-state secret sharing over `config.num_shareholders` shares.
pub fn run_product<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    table: &EncodingTable,
    adv: &A,
) -> Result<Transcript, ProtocolError> {
    run_product_with(config, table, adv, &RunOptions::default())
}

pub fn run_product_with<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    table: &EncodingTable,
    adv: &A,
    opts: &RunOptions,
) -> Result<Transcript, ProtocolError> {
    expect_protocol(config, ProtocolKind::Product)?;
    if table.num_shares() != config.num_shareholders {
        return Err(ProtocolError::TableMismatch {
            table: table.num_shares(),
            config: config.num_shareholders,
        });
    }
    let violations = validate(table);
    if !violations.is_empty() {
        return Err(ProtocolError::InvalidTable(violations));
    }
    adv.check_compatible(config)?;
    let records = map_rounds(config.rounds, opts, |i| {
        product::round(config, table, adv, i)
    })?;
    finish(config, Some(table.name()), adv, records)
}

/// GHZ-based secret sharing between Alice, Bob and Charlie.
pub fn run_ghz<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    adv: &A,
) -> Result<Transcript, ProtocolError> {
    run_ghz_with(config, adv, &RunOptions::default())
}

pub fn run_ghz_with<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    adv: &A,
    opts: &RunOptions,
) -> Result<Transcript, ProtocolError> {
    expect_protocol(config, ProtocolKind::Ghz)?;
    adv.check_compatible(config)?;
    let records = map_rounds(config.rounds, opts, |i| ghz::round(config, adv, i))?;
    finish(config, None, adv, records)
}

/// Two independent BB84 links with a classical pad-based split.
pub fn run_two_bb84<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    adv: &A,
) -> Result<Transcript, ProtocolError> {
    run_two_bb84_with(config, adv, &RunOptions::default())
}

pub fn run_two_bb84_with<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    adv: &A,
    opts: &RunOptions,
) -> Result<Transcript, ProtocolError> {
    expect_protocol(config, ProtocolKind::TwoBb84)?;
    adv.check_compatible(config)?;
    let records = map_rounds(config.rounds, opts, |i| bb84::round(config, adv, i))?;
    finish(config, None, adv, records)
}

/// Marks each record kept iff the protocol's basis rule holds.
pub fn sift(records: &mut [RoundRecord], protocol: ProtocolKind) {
    for r in records {
        r.kept = r.sifting_rule_holds(protocol);
    }
}

/// Chooses `floor(fraction * kept)` kept rounds uniformly without
/// replacement and marks them as check rounds.
pub fn select_check_bits<R: Rng>(records: &mut [RoundRecord], fraction: f64, rng: &mut R) {
    let kept: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.kept)
        .map(|(i, _)| i)
        .collect();
    for r in records.iter_mut() {
        r.is_check = false;
    }
    let count = (fraction * kept.len() as f64).floor() as usize;
    for i in rand::seq::index::sample(rng, kept.len(), count) {
        records[kept[i]].is_check = true;
    }
}

/// Fraction of check rounds with any mismatch; 0 without check rounds.
pub fn estimate_qber(records: &[RoundRecord]) -> f64 {
    let (checks, errors) = records
        .iter()
        .filter(|r| r.is_check)
        .fold((0usize, 0usize), |(c, e), r| {
            (c + 1, e + r.check_error as usize)
        });
    if checks == 0 {
        0.0
    } else {
        errors as f64 / checks as f64
    }
}

fn finish<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    table: Option<&str>,
    adv: &A,
    mut records: Vec<RoundRecord>,
) -> Result<Transcript, ProtocolError> {
    sift(&mut records, config.protocol);
    let mut post = post_pass_rng(config.master_seed);
    select_check_bits(&mut records, config.check_fraction, &mut post);
    for r in records.iter_mut().filter(|r| r.is_check) {
        match config.protocol {
            ProtocolKind::Product | ProtocolKind::TwoBb84 => product::check(r),
            ProtocolKind::Ghz => ghz::check(r, adv)?,
        }
    }
    let check_rounds = records.iter().filter(|r| r.is_check).count();
    let qber = estimate_qber(&records);
    let aborted = qber > config.abort_qber_threshold;

    let holders = config.num_shareholders;
    let mut alice_key = Vec::new();
    let mut shareholder_keys = vec![Vec::new(); holders];
    if !aborted {
        for r in records.iter().filter(|r| r.is_key_round()) {
            alice_key.push(r.alice_bit().expect("every round has a dealer bit"));
            let bits = match config.protocol {
                ProtocolKind::Product => r.shareholder_outcomes.clone(),
                ProtocolKind::Ghz => ghz::key_bits(r),
                ProtocolKind::TwoBb84 => bb84::key_bits(r),
            };
            for (key, b) in shareholder_keys.iter_mut().zip(bits) {
                key.push(b);
            }
        }
    }

    let attack_report = adv.is_active().then(|| adversary::report(&records));
    Ok(Transcript {
        config: config.clone(),
        table: table.map(str::to_string),
        attack: adv.label(),
        check_rounds,
        qber,
        aborted,
        alice_key: BitString(alice_key),
        shareholder_keys: shareholder_keys.into_iter().map(BitString).collect(),
        attack_report,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AttackStrategy;
    use crate::encoding::table1;

    fn ideal(rounds: usize) -> ProtocolConfig {
        ProtocolConfig {
            rounds,
            master_seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(ideal(10).validate().is_ok());
        let mut c = ideal(0);
        assert!(c.validate().is_err());
        c.rounds = 10;
        c.check_fraction = 1.0;
        assert!(c.validate().is_err());
        c.check_fraction = 0.0;
        assert!(c.validate().is_err());
        c.check_fraction = 0.5;
        c.abort_qber_threshold = 1.0;
        assert!(c.validate().is_err());
        c.abort_qber_threshold = 0.1;
        c.noise_flip_prob = 1.5;
        assert!(c.validate().is_err());
        c.noise_flip_prob = 0.0;
        c.num_shareholders = 1;
        assert!(c.validate().is_err());
        c.protocol = ProtocolKind::Ghz;
        c.num_shareholders = 3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn check_selection_counts() {
        let mut records: Vec<RoundRecord> = (0..100)
            .map(|i| {
                let mut r = RoundRecord::new(i);
                r.kept = true;
                r
            })
            .collect();
        let mut rng = post_pass_rng(1);
        select_check_bits(&mut records, 0.5, &mut rng);
        assert_eq!(records.iter().filter(|r| r.is_check).count(), 50);
        assert!(records.iter().all(|r| r.kept || !r.is_check));
    }

    #[test]
    fn qber_without_checks_is_zero() {
        assert_eq!(estimate_qber(&[RoundRecord::new(0)]), 0.0);
    }

    #[test]
    fn table_mismatch_is_rejected() {
        let c = ideal(5);
        let t = table1(3).unwrap();
        assert_eq!(
            run_product(&c, &t, &AttackStrategy::none()).unwrap_err(),
            ProtocolError::TableMismatch {
                table: 3,
                config: 2
            }
        );
    }

    #[test]
    fn wrong_engine_is_rejected() {
        let c = ideal(5);
        assert!(matches!(
            run_ghz(&c, &AttackStrategy::none()),
            Err(ProtocolError::WrongProtocol { .. })
        ));
    }

    #[test]
    fn ideal_product_keys_match() {
        let t = run_product(&ideal(400), &table1(2).unwrap(), &AttackStrategy::none()).unwrap();
        assert!(!t.aborted);
        assert_eq!(t.qber, 0.0);
        assert_eq!(t.alice_key.len(), 300);
        for i in 0..t.alice_key.len() {
            assert_eq!(
                t.alice_key.0[i],
                t.shareholder_keys[0].0[i] ^ t.shareholder_keys[1].0[i]
            );
        }
    }

    #[test]
    fn fixed_order_puts_bob_last() {
        let mut rng = post_pass_rng(3);
        assert_eq!(
            announcement_order(OrderingPolicy::FixedBobLast, 3, &mut rng),
            vec![2, 1, 0]
        );
    }
}
