//! Metrics over finished transcripts: efficiency, resource counts, check
//! error rates, and exact information leakage of encoding tables.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::encoding::{validate, BasisBit, EncodingTable, SecretBit, Violation};
use crate::protocol::{ProtocolKind, Transcript};
use crate::qcore::{outcome_distribution, prep_product, Outcome, PlanStep, StateError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("transcript has no rounds")]
    EmptyTranscript,
    #[error("transcript aborted; no key was retained")]
    Aborted,
    #[error("transcript has no check rounds")]
    NoCheckRounds,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("encoding table is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidTable(Vec<Violation>),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Kept rounds over total rounds.
pub fn efficiency(transcript: &Transcript) -> Result<f64, AnalysisError> {
    if transcript.records.is_empty() {
        return Err(AnalysisError::EmptyTranscript);
    }
    Ok(transcript.kept_rounds() as f64 / transcript.records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Key rounds only: sifting losses and check rounds are not charged.
    Ideal,
    /// Every round and every announcement, charged to the retained key.
    Actual,
}

fn ratio_str<S: Serializer>(r: &Ratio<u64>, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&r.to_string())
}

/// Qubits, classical bits and ebits per retained key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PerBit {
    #[serde(serialize_with = "ratio_str")]
    pub qubits: Ratio<u64>,
    #[serde(serialize_with = "ratio_str")]
    pub cbits: Ratio<u64>,
    #[serde(serialize_with = "ratio_str")]
    pub ebits: Ratio<u64>,
}

impl PerBit {
    pub const fn integers(qubits: u64, cbits: u64, ebits: u64) -> PerBit {
        PerBit {
            qubits: Ratio::new_raw(qubits, 1),
            cbits: Ratio::new_raw(cbits, 1),
            ebits: Ratio::new_raw(ebits, 1),
        }
    }
}

impl fmt::Display for PerBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.qubits, self.cbits, self.ebits)
    }
}

/// EPR-pair secret sharing, quoted for comparison and not simulated.
pub const EPR_REFERENCE: PerBit = PerBit::integers(4, 1, 2);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceLedger {
    pub protocol: ProtocolKind,
    pub accounting: Accounting,
    pub qubits_sent: u64,
    pub classical_announce_bits: u64,
    pub ebits_consumed: u64,
    pub retained_key_bits: u64,
    /// Classical bits sent to shareholders outside the announcement phase.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload_bits: Option<u64>,
    /// Entangled states prepared; reported raw, without an ebit conversion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ghz_states: Option<u64>,
    pub per_bit: Option<PerBit>,
}

/// Counts the quantum and classical traffic recorded in `transcript`.
pub fn resources(
    transcript: &Transcript,
    accounting: Accounting,
) -> Result<ResourceLedger, AnalysisError> {
    if transcript.aborted {
        return Err(AnalysisError::Aborted);
    }
    if transcript.records.is_empty() {
        return Err(AnalysisError::EmptyTranscript);
    }
    let protocol = transcript.config.protocol;
    let charged: Vec<_> = transcript
        .records
        .iter()
        .filter(|r| accounting == Accounting::Actual || r.is_key_round())
        .collect();

    let qubits_sent = charged.iter().map(|r| r.transmissions.len() as u64).sum();
    let classical_announce_bits = charged
        .iter()
        .flat_map(|r| &r.announcements)
        .map(|a| a.content.bits() as u64)
        .sum();
    let retained_key_bits = transcript.alice_key.len() as u64;
    let payload_bits = (protocol == ProtocolKind::TwoBb84).then(|| {
        charged
            .iter()
            .filter(|r| r.classical_message.is_some())
            .count() as u64
    });
    let ghz_states = (protocol == ProtocolKind::Ghz).then_some(charged.len() as u64);
    let per_bit = (retained_key_bits > 0).then(|| PerBit {
        qubits: Ratio::new(qubits_sent, retained_key_bits),
        cbits: Ratio::new(classical_announce_bits, retained_key_bits),
        ebits: Ratio::new(0, retained_key_bits),
    });
    Ok(ResourceLedger {
        protocol,
        accounting,
        qubits_sent,
        classical_announce_bits,
        ebits_consumed: 0,
        retained_key_bits,
        payload_bits,
        ghz_states,
        per_bit,
    })
}

/// One line of a side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub efficiency: Option<f64>,
    pub qber: Option<f64>,
    pub aborted: Option<bool>,
    pub per_bit: Option<PerBit>,
}

impl ComparisonRow {
    pub fn epr_reference() -> ComparisonRow {
        ComparisonRow {
            label: "epr reference (not simulated)".to_string(),
            efficiency: None,
            qber: None,
            aborted: None,
            per_bit: Some(EPR_REFERENCE),
        }
    }
}

/// Renders rows as an aligned plain-text table.
pub fn render_table(rows: &[ComparisonRow]) -> String {
    let header = [
        "scenario",
        "efficiency",
        "qber",
        "aborted",
        "qubits",
        "cbits",
        "ebits",
    ];
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".to_string());
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.label.clone(),
                opt(r.efficiency.map(|e| format!("{e:.4}"))),
                opt(r.qber.map(|q| format!("{q:.4}"))),
                opt(r.aborted.map(|a| a.to_string())),
                opt(r.per_bit.map(|p| p.qubits.to_string())),
                opt(r.per_bit.map(|p| p.cbits.to_string())),
                opt(r.per_bit.map(|p| p.ebits.to_string())),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&header.map(String::from));
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out += &line(&rule);
    for row in &body {
        out += &line(row);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QberSummary {
    pub check_rounds: usize,
    pub aggregate: f64,
    /// Per-share mismatch rates; empty for the GHZ protocol, whose checks
    /// compare a joint product.
    pub per_share: Vec<f64>,
    /// Rate of XOR mismatches; product protocol only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity: Option<f64>,
}

pub fn qber_summary(transcript: &Transcript) -> Result<QberSummary, AnalysisError> {
    let checks: Vec<_> = transcript.records.iter().filter(|r| r.is_check).collect();
    if checks.is_empty() {
        return Err(AnalysisError::NoCheckRounds);
    }
    let n = checks.len() as f64;
    let rate = |count: usize| count as f64 / n;
    let shares = checks
        .iter()
        .map(|r| r.share_errors.len())
        .max()
        .unwrap_or(0);
    let per_share = (0..shares)
        .map(|k| {
            rate(
                checks
                    .iter()
                    .filter(|r| r.share_errors.get(k) == Some(&true))
                    .count(),
            )
        })
        .collect();
    let parity = checks.iter().all(|r| r.parity_error.is_some()).then(|| {
        rate(
            checks
                .iter()
                .filter(|r| r.parity_error == Some(true))
                .count(),
        )
    });
    Ok(QberSummary {
        check_rounds: checks.len(),
        aggregate: rate(checks.iter().filter(|r| r.check_error).count()),
        per_share,
        parity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Joint Bell-basis measurement of both shares.
    BellBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    BasisKnown,
    BasisUnknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub table: String,
    pub observable: Observable,
    pub conditioning: Conditioning,
    pub mutual_information_bits: f64,
    /// `P(secret = 1 | observation)`; observations are keyed `basis/outcome`
    /// when the basis is known. Impossible observations are omitted.
    pub per_outcome_posterior: BTreeMap<String, f64>,
}

/// `I(X; Y)` in bits for a joint distribution. Zero-probability cells
/// contribute nothing.
pub fn mutual_information<X: Ord + Clone, Y: Ord + Clone>(joint: &BTreeMap<(X, Y), f64>) -> f64 {
    let mut px: BTreeMap<X, f64> = BTreeMap::new();
    let mut py: BTreeMap<Y, f64> = BTreeMap::new();
    for ((x, y), &p) in joint {
        *px.entry(x.clone()).or_default() += p;
        *py.entry(y.clone()).or_default() += p;
    }
    joint
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|((x, y), &p)| p * (p / (px[x] * py[y])).log2())
        .sum::<f64>()
        .max(0.0)
}

/// Exact leakage of the secret to an observer of `observable`, with a
/// uniform prior over basis, secret and cell pattern.
pub fn leakage(
    table: &EncodingTable,
    observable: Observable,
    conditioning: Conditioning,
) -> Result<LeakageReport, AnalysisError> {
    let violations = validate(table);
    if !violations.is_empty() {
        return Err(AnalysisError::InvalidTable(violations));
    }
    let plan = match observable {
        Observable::BellBasis if table.num_shares() == 2 => [PlanStep::Bell {
            first: 0,
            second: 1,
        }],
        Observable::BellBasis => {
            return Err(AnalysisError::Unsupported(format!(
                "Bell-basis leakage needs 2 shares, table has {}",
                table.num_shares()
            )))
        }
    };

    let mut joint: BTreeMap<(u8, String), f64> = BTreeMap::new();
    for basis in [BasisBit::Z, BasisBit::X] {
        for secret in [SecretBit::ZERO, SecretBit::ONE] {
            let cell = table.cell(basis, secret);
            let weight = 0.25 / cell.len() as f64;
            for pattern in cell {
                let labels = vec![basis.basis(); table.num_shares()];
                let state = prep_product(&labels, pattern.bits())?;
                for (outcome, p) in outcome_distribution(&state, &plan)? {
                    let key = observation_key(&outcome, basis, conditioning);
                    *joint.entry((secret.value(), key)).or_default() += weight * p;
                }
            }
        }
    }

    let mut evidence: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for ((s, key), &p) in &joint {
        let e = evidence.entry(key.clone()).or_default();
        e.0 += p;
        if *s == 1 {
            e.1 += p;
        }
    }
    let per_outcome_posterior = evidence
        .into_iter()
        .map(|(key, (total, ones))| (key, ones / total))
        .collect();

    Ok(LeakageReport {
        table: table.name().to_string(),
        observable,
        conditioning,
        mutual_information_bits: mutual_information(&joint),
        per_outcome_posterior,
    })
}

fn observation_key(outcome: &[Outcome], basis: BasisBit, conditioning: Conditioning) -> String {
    let o: Vec<String> = outcome.iter().map(Outcome::to_string).collect();
    match conditioning {
        Conditioning::BasisKnown => format!("{}/{}", basis.basis(), o.join(",")),
        Conditioning::BasisUnknown => o.join(","),
    }
}
