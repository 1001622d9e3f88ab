//! Attack strategies and the hooks the round engines call them through.
//!
//! An [`Adversary`] acts at two points of each attacked round. During
//! transmission it receives an [`Interception`] that exposes only the shares
//! currently on the channel. During public discussion it may watch the
//! announcements and, if it impersonates a shareholder, choose what that
//! shareholder announces. Everything it learns lives in the round's
//! [`AdversaryRecord`], so strategies hold no state between rounds.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::protocol::{
    Announcement, Content, Party, Phase, ProtocolConfig, ProtocolError, ProtocolKind, RoundRecord,
    Transmission,
};
use crate::qcore::{measure_bell, measure_qubit, Basis, BellOutcome, MeasOutcome, StateVector};

/// Engine-facing interface of an attack.
pub trait Adversary: Sync {
    fn label(&self) -> String;

    /// Inactive adversaries draw no randomness and leave no record.
    fn is_active(&self) -> bool {
        true
    }

    fn attack_fraction(&self) -> f64 {
        1.0
    }

    fn check_compatible(&self, _config: &ProtocolConfig) -> Result<(), ProtocolError> {
        Ok(())
    }

    fn intercept(&self, _ctx: &mut Interception<'_>) -> Result<(), ProtocolError> {
        Ok(())
    }

    /// Called once the dealer's basis information is public.
    fn observe(&self, _public: &[Announcement], _memory: &mut AdversaryRecord) {}

    /// Shareholder index whose announcements this adversary makes. Honoured
    /// by the GHZ engine.
    fn impersonates(&self) -> Option<usize> {
        None
    }

    /// Announcement made on behalf of the impersonated shareholder.
    fn announce(
        &self,
        _party: usize,
        _phase: Phase,
        _public: &[Announcement],
        _memory: &AdversaryRecord,
    ) -> Content {
        Content::Receipt
    }
}

/// Running without any adversary at all.
impl Adversary for () {
    fn label(&self) -> String {
        "none".to_string()
    }

    fn is_active(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Observation {
    Measure {
        share: usize,
        basis: Basis,
        outcome: MeasOutcome,
    },
    Bell {
        first: usize,
        second: usize,
        outcome: BellOutcome,
    },
    /// The share was replaced by a fresh `|0⟩`.
    Replace { share: usize },
}

impl Observation {
    fn touches(&self, share: usize) -> bool {
        match *self {
            Observation::Measure { share: s, .. } | Observation::Replace { share: s } => s == share,
            Observation::Bell { first, second, .. } => first == share || second == share,
        }
    }
}

/// What the adversary did and concluded in one round.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryRecord {
    pub attacked: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub observations: Vec<Observation>,
    /// Guess of the dealer's key bit before any basis information is public.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guess_before_bases: Option<u8>,
    /// Final guess of the dealer's key bit.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guess: Option<u8>,
}

impl AdversaryRecord {
    pub fn new(attacked: bool) -> AdversaryRecord {
        AdversaryRecord {
            attacked,
            ..Default::default()
        }
    }

    pub fn touched(&self, share: usize) -> bool {
        self.observations.iter().any(|o| o.touches(share))
    }

    pub fn bell_outcome(&self) -> Option<BellOutcome> {
        self.observations.iter().find_map(|o| match o {
            Observation::Bell { outcome, .. } => Some(*outcome),
            _ => None,
        })
    }

    fn measured(&self, share: usize, basis: Basis) -> Option<MeasOutcome> {
        self.observations.iter().find_map(|o| match *o {
            Observation::Measure {
                share: s,
                basis: b,
                outcome,
            } if s == share && b == basis => Some(outcome),
            _ => None,
        })
    }
}

/// Access to the shares on the channel during one transmission step.
pub struct Interception<'a> {
    protocol: ProtocolKind,
    register: &'a mut StateVector,
    in_flight: &'a [usize],
    qubit_offset: usize,
    rng: &'a mut ChaCha8Rng,
    record: &'a mut AdversaryRecord,
    note: &'a mut String,
}

impl<'a> Interception<'a> {
    pub(crate) fn new(
        protocol: ProtocolKind,
        register: &'a mut StateVector,
        in_flight: &'a [usize],
        qubit_offset: usize,
        rng: &'a mut ChaCha8Rng,
        record: &'a mut AdversaryRecord,
        note: &'a mut String,
    ) -> Interception<'a> {
        Interception {
            protocol,
            register,
            in_flight,
            qubit_offset,
            rng,
            record,
            note,
        }
    }

    pub fn protocol(&self) -> ProtocolKind {
        self.protocol
    }

    /// Share indices the adversary can touch right now.
    pub fn in_flight(&self) -> &[usize] {
        self.in_flight
    }

    pub fn has(&self, share: usize) -> bool {
        self.in_flight.contains(&share)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }

    fn qubit(&self, share: usize) -> Result<usize, ProtocolError> {
        if self.has(share) {
            Ok(self.qubit_offset + share)
        } else {
            Err(ProtocolError::NotInFlight(share))
        }
    }

    /// Measures a share; the collapsed share travels on.
    pub fn measure(&mut self, share: usize, basis: Basis) -> Result<MeasOutcome, ProtocolError> {
        let q = self.qubit(share)?;
        let r = self.uniform();
        let (outcome, after) = measure_qubit(self.register, q, basis, r)?;
        *self.register = after;
        self.record.observations.push(Observation::Measure {
            share,
            basis,
            outcome,
        });
        Ok(outcome)
    }

    pub fn measure_bell(
        &mut self,
        first: usize,
        second: usize,
    ) -> Result<BellOutcome, ProtocolError> {
        let (qi, qj) = (self.qubit(first)?, self.qubit(second)?);
        let r = self.uniform();
        let (outcome, after) = measure_bell(self.register, qi, qj, r)?;
        *self.register = after;
        self.record.observations.push(Observation::Bell {
            first,
            second,
            outcome,
        });
        Ok(outcome)
    }

    /// Swaps a share for a freshly prepared `|0⟩`.
    pub fn replace_with_zero(&mut self, share: usize) -> Result<(), ProtocolError> {
        let q = self.qubit(share)?;
        let r = self.uniform();
        *self.register = self.register.reset_qubit(q, r)?;
        self.record
            .observations
            .push(Observation::Replace { share });
        Ok(())
    }

    pub fn record(&mut self) -> &mut AdversaryRecord {
        self.record
    }

    pub fn note(&mut self, text: &str) {
        if !self.note.is_empty() {
            self.note.push_str("; ");
        }
        self.note.push_str(text);
    }
}

/// How an intercept-resend attacker picks its measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisRule {
    /// `Z` or `X` with probability 1/2 each.
    Uniform,
    Always(Basis),
}

impl fmt::Display for BasisRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisRule::Uniform => f.write_str("uniform"),
            BasisRule::Always(b) => write!(f, "always {b}"),
        }
    }
}

/// Measures one channel and resends the collapsed share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterceptResend {
    pub channel: usize,
    pub basis_rule: BasisRule,
}

impl Adversary for InterceptResend {
    fn label(&self) -> String {
        format!(
            "intercept_resend(channel={}, basis={})",
            self.channel, self.basis_rule
        )
    }

    fn check_compatible(&self, config: &ProtocolConfig) -> Result<(), ProtocolError> {
        if config.protocol == ProtocolKind::Ghz {
            return Err(ProtocolError::UnsupportedAttack(
                "intercept-resend targets the product and two-BB84 protocols".into(),
            ));
        }
        if self.channel >= config.shares() {
            return Err(ProtocolError::UnsupportedAttack(format!(
                "channel {} does not exist ({} shares)",
                self.channel,
                config.shares()
            )));
        }
        if matches!(self.basis_rule, BasisRule::Always(Basis::Y)) {
            return Err(ProtocolError::UnsupportedAttack(
                "intercept-resend measures in Z or X".into(),
            ));
        }
        Ok(())
    }

    fn intercept(&self, ctx: &mut Interception<'_>) -> Result<(), ProtocolError> {
        if !ctx.has(self.channel) {
            return Ok(());
        }
        let basis = match self.basis_rule {
            BasisRule::Uniform => {
                if ctx.uniform() < 0.5 {
                    Basis::Z
                } else {
                    Basis::X
                }
            }
            BasisRule::Always(b) => b,
        };
        let outcome = ctx.measure(self.channel, basis)?;
        ctx.note(&format!(
            "share {} measured {basis} -> {outcome}",
            self.channel
        ));
        Ok(())
    }
}

/// Bell-basis measurement of both in-flight shares of the two-share product
/// protocol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellJoint;

impl BellJoint {
    /// Guess with no basis information: only `Φ+` and `Ψ-` fix the secret
    /// in both bases.
    pub fn guess_without_basis(outcome: BellOutcome) -> Option<u8> {
        match outcome {
            BellOutcome::PhiPlus => Some(0),
            BellOutcome::PsiMinus => Some(1),
            _ => None,
        }
    }

    /// Parity of the observed Bell state in the announced basis.
    pub fn guess_with_basis(outcome: BellOutcome, basis: Basis) -> u8 {
        match basis {
            Basis::X => outcome.xx_parity(),
            _ => outcome.zz_parity(),
        }
    }
}

impl Adversary for BellJoint {
    fn label(&self) -> String {
        "bell_joint".to_string()
    }

    fn check_compatible(&self, config: &ProtocolConfig) -> Result<(), ProtocolError> {
        if config.protocol != ProtocolKind::Product || config.num_shareholders != 2 {
            return Err(ProtocolError::UnsupportedAttack(
                "the Bell attack needs the two-share product protocol".into(),
            ));
        }
        if config.transmission != Transmission::Simultaneous {
            return Err(ProtocolError::JointAttackNeedsSimultaneous);
        }
        Ok(())
    }

    fn intercept(&self, ctx: &mut Interception<'_>) -> Result<(), ProtocolError> {
        if !(ctx.has(0) && ctx.has(1)) {
            return Ok(());
        }
        let outcome = ctx.measure_bell(0, 1)?;
        ctx.record().guess_before_bases = Self::guess_without_basis(outcome);
        ctx.note(&format!("bell {outcome}"));
        Ok(())
    }

    fn observe(&self, public: &[Announcement], memory: &mut AdversaryRecord) {
        let basis = public.iter().find_map(|a| match (a.party, a.content) {
            (Party::Alice, Content::BasisBit(b)) => Some(if b == 0 { Basis::Z } else { Basis::X }),
            _ => None,
        });
        if let (Some(basis), Some(outcome)) = (basis, memory.bell_outcome()) {
            memory.guess = Some(Self::guess_with_basis(outcome, basis));
        }
    }
}

/// Bob's product-basis cheat against the GHZ scheme: he measures his own
/// qubit and Charlie's in `Y⊗Y`, forwards `|0⟩` to Charlie, and tailors his
/// announcements to whatever Charlie has already said.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhzCheat;

const BOB: usize = 0;
const CHARLIE: usize = 1;

impl GhzCheat {
    /// Alice's X eigenvalue implied by `Y⊗Y` outcomes: `XYY = -1` gives
    /// `a = -βγ`.
    pub fn inferred_alice_x(memory: &AdversaryRecord) -> Option<MeasOutcome> {
        let beta = memory.measured(BOB, Basis::Y)?;
        let gamma = memory.measured(CHARLIE, Basis::Y)?;
        MeasOutcome::from_eigenvalue(-beta.eigenvalue() * gamma.eigenvalue())
    }

    fn announced_basis(public: &[Announcement], party: Party) -> Option<Basis> {
        public.iter().find_map(|a| match a.content {
            Content::Basis(b) if a.party == party => Some(b),
            _ => None,
        })
    }
}

impl Adversary for GhzCheat {
    fn label(&self) -> String {
        "ghz_cheat".to_string()
    }

    fn check_compatible(&self, config: &ProtocolConfig) -> Result<(), ProtocolError> {
        if config.protocol != ProtocolKind::Ghz {
            return Err(ProtocolError::UnsupportedAttack(
                "the GHZ cheat applies to the GHZ protocol only".into(),
            ));
        }
        Ok(())
    }

    fn intercept(&self, ctx: &mut Interception<'_>) -> Result<(), ProtocolError> {
        let beta = ctx.measure(BOB, Basis::Y)?;
        let gamma = ctx.measure(CHARLIE, Basis::Y)?;
        ctx.replace_with_zero(CHARLIE)?;
        ctx.note(&format!("YY -> ({beta}, {gamma}); forwarded |0>"));
        Ok(())
    }

    fn observe(&self, public: &[Announcement], memory: &mut AdversaryRecord) {
        if Self::announced_basis(public, Party::Alice) == Some(Basis::X) {
            memory.guess = Self::inferred_alice_x(memory).map(MeasOutcome::bit);
        }
    }

    fn impersonates(&self) -> Option<usize> {
        Some(BOB)
    }

    fn announce(
        &self,
        _party: usize,
        phase: Phase,
        public: &[Announcement],
        memory: &AdversaryRecord,
    ) -> Content {
        match phase {
            // Echoing Charlie keeps the round exactly when Alice chose X.
            Phase::Bases => {
                Content::Basis(Self::announced_basis(public, Party::CHARLIE).unwrap_or(Basis::X))
            }
            Phase::CheckValues => {
                let alice = Self::inferred_alice_x(memory).unwrap_or(MeasOutcome::PLUS);
                let bases: Vec<Basis> = [Party::Alice, Party::BOB, Party::CHARLIE]
                    .iter()
                    .filter_map(|&p| Self::announced_basis(public, p))
                    .collect();
                let sign = if bases.len() == 3 {
                    crate::protocol::correlation_sign(&bases)
                } else {
                    1
                };
                let charlie = public.iter().find_map(|a| match a.content {
                    Content::CheckEigenvalue(o) if a.party == Party::CHARLIE => Some(o),
                    _ => None,
                });
                let value = sign * alice.eigenvalue() * charlie.map_or(1, |c| c.eigenvalue());
                Content::CheckEigenvalue(
                    MeasOutcome::from_eigenvalue(value).expect("product of signs is ±1"),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackKind {
    None,
    InterceptResend(InterceptResend),
    BellJoint,
    GhzCheat,
}

/// Serializable attack description; dispatches to the concrete strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackStrategy {
    #[serde(flatten)]
    pub kind: AttackKind,
    pub attack_fraction: f64,
}

impl AttackStrategy {
    pub fn none() -> AttackStrategy {
        AttackStrategy {
            kind: AttackKind::None,
            attack_fraction: 1.0,
        }
    }

    pub fn with_fraction(mut self, fraction: f64) -> AttackStrategy {
        self.attack_fraction = fraction;
        self
    }

    fn inner(&self) -> &dyn Adversary {
        match &self.kind {
            AttackKind::None => &(),
            AttackKind::InterceptResend(s) => s,
            AttackKind::BellJoint => &BellJoint,
            AttackKind::GhzCheat => &GhzCheat,
        }
    }
}

impl Default for AttackStrategy {
    fn default() -> Self {
        AttackStrategy::none()
    }
}

pub fn intercept_resend(channel: usize, basis_rule: BasisRule) -> AttackStrategy {
    AttackStrategy {
        kind: AttackKind::InterceptResend(InterceptResend {
            channel,
            basis_rule,
        }),
        attack_fraction: 1.0,
    }
}

pub fn bell_joint() -> AttackStrategy {
    AttackStrategy {
        kind: AttackKind::BellJoint,
        attack_fraction: 1.0,
    }
}

pub fn ghz_cheat() -> AttackStrategy {
    AttackStrategy {
        kind: AttackKind::GhzCheat,
        attack_fraction: 1.0,
    }
}

impl Adversary for AttackStrategy {
    fn label(&self) -> String {
        let base = self.inner().label();
        if self.is_active() && self.attack_fraction < 1.0 {
            format!("{base} @ {}", self.attack_fraction)
        } else {
            base
        }
    }

    fn is_active(&self) -> bool {
        self.inner().is_active()
    }

    fn attack_fraction(&self) -> f64 {
        self.attack_fraction
    }

    fn check_compatible(&self, config: &ProtocolConfig) -> Result<(), ProtocolError> {
        if !(0.0..=1.0).contains(&self.attack_fraction) {
            return Err(ProtocolError::Config(format!(
                "attack_fraction {} not in [0, 1]",
                self.attack_fraction
            )));
        }
        self.inner().check_compatible(config)
    }

    fn intercept(&self, ctx: &mut Interception<'_>) -> Result<(), ProtocolError> {
        self.inner().intercept(ctx)
    }

    fn observe(&self, public: &[Announcement], memory: &mut AdversaryRecord) {
        self.inner().observe(public, memory)
    }

    fn impersonates(&self) -> Option<usize> {
        self.inner().impersonates()
    }

    fn announce(
        &self,
        party: usize,
        phase: Phase,
        public: &[Announcement],
        memory: &AdversaryRecord,
    ) -> Content {
        self.inner().announce(party, phase, public, memory)
    }
}

/// Per-round guesses rendered as `0`, `1` or `?`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Guesses(pub Vec<Option<u8>>);

impl Serialize for Guesses {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let s: String = self
            .0
            .iter()
            .map(|g| match g {
                Some(0) => '0',
                Some(_) => '1',
                None => '?',
            })
            .collect();
        serializer.serialize_str(&s)
    }
}

impl<'de> Deserialize<'de> for Guesses {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .chars()
            .map(|c| match c {
                '0' => Ok(Some(0)),
                '1' => Ok(Some(1)),
                '?' => Ok(None),
                _ => Err(serde::de::Error::custom(format!("bad guess {c:?}"))),
            })
            .collect::<Result<_, _>>()
            .map(Guesses)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub rounds_attacked: usize,
    pub eve_key_guesses: Guesses,
    pub key_rounds: usize,
    pub definite_guesses: usize,
    /// Over key rounds with a definite guess.
    pub leak_rate: Option<f64>,
    /// Same, using the guess made before any basis was announced.
    pub leak_rate_before_bases: Option<f64>,
    /// Check error rate over attacked check rounds.
    pub induced_check_qber: Option<f64>,
}

fn hit_rate<'a>(pairs: impl Iterator<Item = (u8, u8)> + 'a) -> (usize, Option<f64>) {
    let (n, hits) = pairs.fold((0usize, 0usize), |(n, h), (g, a)| {
        (n + 1, h + (g == a) as usize)
    });
    (n, (n > 0).then(|| hits as f64 / n as f64))
}

/// Summarizes the adversary's effect over a finished set of records.
pub fn report(records: &[RoundRecord]) -> AttackReport {
    let guesses = records
        .iter()
        .map(|r| r.adversary.as_ref().and_then(|a| a.guess))
        .collect();
    let key_rounds: Vec<&RoundRecord> = records.iter().filter(|r| r.is_key_round()).collect();
    let pairs = |pick: fn(&AdversaryRecord) -> Option<u8>| {
        key_rounds.iter().filter_map(move |r| {
            let g = r.adversary.as_ref().and_then(pick)?;
            Some((g, r.alice_bit()?))
        })
    };
    let (definite, leak_rate) = hit_rate(pairs(|a| a.guess));
    let (_, leak_rate_before_bases) = hit_rate(pairs(|a| a.guess_before_bases));

    let attacked_checks: Vec<&RoundRecord> = records
        .iter()
        .filter(|r| r.is_check && r.attacked())
        .collect();
    let induced_check_qber = (!attacked_checks.is_empty()).then(|| {
        attacked_checks.iter().filter(|r| r.check_error).count() as f64
            / attacked_checks.len() as f64
    });

    AttackReport {
        rounds_attacked: records.iter().filter(|r| r.attacked()).count(),
        eve_key_guesses: Guesses(guesses),
        key_rounds: key_rounds.len(),
        definite_guesses: definite,
        leak_rate,
        leak_rate_before_bases,
        induced_check_qber,
    }
}
