//! Per-round audit records, announcements and the finished transcript.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ProtocolConfig, ProtocolKind};
use crate::adversary::{AdversaryRecord, AttackReport};
use crate::encoding::SharePattern;
use crate::qcore::{Basis, MeasOutcome};

/// Protocol participant. Shareholder 0 is Bob, 1 is Charlie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Alice,
    Shareholder(usize),
}

impl Party {
    pub const BOB: Party = Party::Shareholder(0);
    pub const CHARLIE: Party = Party::Shareholder(1);
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => f.write_str("alice"),
            Party::Shareholder(0) => f.write_str("bob"),
            Party::Shareholder(1) => f.write_str("charlie"),
            Party::Shareholder(k) => write!(f, "shareholder{}", k + 1),
        }
    }
}

impl FromStr for Party {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alice" => Ok(Party::Alice),
            "bob" => Ok(Party::BOB),
            "charlie" => Ok(Party::CHARLIE),
            _ => s
                .strip_prefix("shareholder")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 3)
                .map(|n| Party::Shareholder(n - 1))
                .ok_or_else(|| format!("unknown party {s:?}")),
        }
    }
}

impl Serialize for Party {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Party {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// What an announcement carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Content {
    /// A shareholder acknowledges receipt of its share.
    Receipt,
    /// The dealer's basis bit for one share (0 = Z, 1 = X).
    BasisBit(u8),
    /// A measurement basis.
    Basis(Basis),
    /// A check-round measurement bit.
    CheckBit(u8),
    /// A check-round eigenvalue.
    CheckEigenvalue(MeasOutcome),
}

impl Content {
    /// Classical bits this announcement puts on the public channel.
    pub fn bits(&self) -> usize {
        match self {
            Content::Receipt => 0,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub party: Party,
    #[serde(flatten)]
    pub content: Content,
}

impl Announcement {
    pub fn new(party: Party, content: Content) -> Announcement {
        Announcement { party, content }
    }
}

/// Which public discussion step is being asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Bases,
    CheckValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionRecord {
    pub share: usize,
    pub intercepted: bool,
    pub noise_flip: bool,
}

/// Complete audit trail of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub index: usize,
    /// Dealer basis bit `L` (product protocol).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub basis_bit: Option<u8>,
    /// Dealer basis per channel (two-BB84 baseline).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub channel_bases: Option<Vec<Basis>>,
    /// Dealer secret bit `A` (product and two-BB84).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub secret_bit: Option<u8>,
    /// Share values as prepared by the dealer.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prepared_pattern: Option<SharePattern>,
    /// One-time-padded share sent to Charlie (two-BB84 baseline).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classical_message: Option<u8>,
    /// Announced bases in order Alice, Bob, Charlie (GHZ).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ghz_bases: Option<Vec<Basis>>,
    /// Eigenvalues in order Alice, Bob, Charlie (GHZ).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ghz_outcomes: Option<Vec<MeasOutcome>>,
    pub transmissions: Vec<TransmissionRecord>,
    pub announcements: Vec<Announcement>,
    pub shareholder_bases: Vec<Basis>,
    pub shareholder_outcomes: Vec<u8>,
    /// Shareholder order for the check-value announcements.
    pub check_order: Vec<usize>,
    pub kept: bool,
    pub is_check: bool,
    pub check_error: bool,
    /// Per-share mismatches on check rounds (product and two-BB84).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub share_errors: Vec<bool>,
    /// Announced parity differs from prepared parity (product check rounds).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parity_error: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub adversary: Option<AdversaryRecord>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub adversary_note: String,
}

impl RoundRecord {
    pub(crate) fn new(index: usize) -> RoundRecord {
        RoundRecord {
            index,
            basis_bit: None,
            channel_bases: None,
            secret_bit: None,
            prepared_pattern: None,
            classical_message: None,
            ghz_bases: None,
            ghz_outcomes: None,
            transmissions: Vec::new(),
            announcements: Vec::new(),
            shareholder_bases: Vec::new(),
            shareholder_outcomes: Vec::new(),
            check_order: Vec::new(),
            kept: false,
            is_check: false,
            check_error: false,
            share_errors: Vec::new(),
            parity_error: None,
            adversary: None,
            adversary_note: String::new(),
        }
    }

    /// The dealer's key bit for this round.
    pub fn alice_bit(&self) -> Option<u8> {
        match &self.ghz_outcomes {
            Some(o) => Some(o[0].bit()),
            None => self.secret_bit,
        }
    }

    pub fn is_key_round(&self) -> bool {
        self.kept && !self.is_check
    }

    pub fn attacked(&self) -> bool {
        self.adversary.as_ref().is_some_and(|a| a.attacked)
    }

    /// Compact basis label used in CSV export.
    pub fn basis_label(&self) -> String {
        if let Some(b) = self.basis_bit {
            return b.to_string();
        }
        let list = self.ghz_bases.as_ref().or(self.channel_bases.as_ref());
        list.map(|v| v.iter().map(|b| b.to_string()).collect())
            .unwrap_or_default()
    }

    /// Whether the protocol's keep rule holds, judged from the record alone.
    pub fn sifting_rule_holds(&self, protocol: ProtocolKind) -> bool {
        match protocol {
            ProtocolKind::Product => match self.basis_bit {
                Some(l) => {
                    let want = if l == 0 { Basis::Z } else { Basis::X };
                    self.shareholder_bases.iter().all(|&b| b == want)
                }
                None => false,
            },
            ProtocolKind::TwoBb84 => match &self.channel_bases {
                Some(dealer) => dealer == &self.shareholder_bases,
                None => false,
            },
            ProtocolKind::Ghz => match &self.ghz_bases {
                Some(b) => b.iter().filter(|&&x| x == Basis::Y).count() % 2 == 0,
                None => false,
            },
        }
    }
}

/// Bits rendered as a `0`/`1` string in JSON.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitString(pub Vec<u8>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(serde::de::Error::custom(format!("bad bit {c:?}"))),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(BitString)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: ProtocolConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table: Option<String>,
    pub attack: String,
    pub check_rounds: usize,
    pub qber: f64,
    pub aborted: bool,
    pub alice_key: BitString,
    pub shareholder_keys: Vec<BitString>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub attack_report: Option<AttackReport>,
    pub records: Vec<RoundRecord>,
}

impl Transcript {
    pub fn kept_rounds(&self) -> usize {
        self.records.iter().filter(|r| r.kept).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("transcript serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Transcript> {
        serde_json::from_str(text)
    }

    /// One row per round: `index,basis,kept,is_check,check_error`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "basis", "kept", "is_check", "check_error"])?;
        for r in &self.records {
            w.write_record([
                r.index.to_string(),
                r.basis_label(),
                r.kept.to_string(),
                r.is_check.to_string(),
                r.check_error.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
