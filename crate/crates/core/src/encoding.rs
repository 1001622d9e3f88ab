//! Codebooks that encode one secret bit into a pattern of share bits.
//!
//! A table has four cells, one per `(basis, secret)` pair. The dealer draws a
//! pattern uniformly from the matching cell and prepares share `k` as the
//! eigenstate of the chosen basis selected by bit `k` of that pattern.
//! [`table1`] is the parity codebook: a pattern encodes the XOR of its bits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::qcore::Basis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodingError {
    #[error("a table needs at least 2 shares, got {0}")]
    TooFewShares(usize),
    #[error("cell {basis}{secret} is empty")]
    EmptyCell { basis: Basis, secret: u8 },
    #[error("pattern {pattern} is in neither {basis} cell of table {table:?}")]
    UnknownPattern {
        table: String,
        basis: Basis,
        pattern: SharePattern,
    },
    #[error("pattern {pattern} is in both {basis} cells")]
    AmbiguousPattern { basis: Basis, pattern: SharePattern },
    #[error("invalid bit pattern {0:?}")]
    BadPattern(String),
    #[error("unknown cell key {0:?} (expected Z0, Z1, X0 or X1)")]
    BadCellKey(String),
    #[error("table document: {0}")]
    Json(String),
}

/// One bit of the dealer's basis string; 0 selects `Z`, 1 selects `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisBit(bool);

impl BasisBit {
    pub const Z: BasisBit = BasisBit(false);
    pub const X: BasisBit = BasisBit(true);

    pub fn new(bit: u8) -> BasisBit {
        BasisBit(bit != 0)
    }

    pub fn from_basis(basis: Basis) -> Option<BasisBit> {
        match basis {
            Basis::Z => Some(Self::Z),
            Basis::X => Some(Self::X),
            Basis::Y => None,
        }
    }

    pub fn value(self) -> u8 {
        self.0 as u8
    }

    pub fn basis(self) -> Basis {
        if self.0 {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

/// One bit of the dealer's secret string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SecretBit(bool);

impl SecretBit {
    pub const ZERO: SecretBit = SecretBit(false);
    pub const ONE: SecretBit = SecretBit(true);

    pub fn new(bit: u8) -> SecretBit {
        SecretBit(bit != 0)
    }

    pub fn value(self) -> u8 {
        self.0 as u8
    }
}

/// Share bits, most significant share first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SharePattern(Vec<u8>);

impl SharePattern {
    pub fn new(bits: Vec<u8>) -> Result<SharePattern, EncodingError> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(EncodingError::BadPattern(format!("{bits:?}")));
        }
        Ok(SharePattern(bits))
    }

    /// The `len`-bit pattern whose binary value is `value`.
    pub fn from_index(value: usize, len: usize) -> SharePattern {
        SharePattern(
            (0..len)
                .map(|k| ((value >> (len - 1 - k)) & 1) as u8)
                .collect(),
        )
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parity(&self) -> u8 {
        self.0.iter().fold(0, |acc, b| acc ^ b)
    }

    /// Bits at the given share positions, in the order given.
    pub fn select(&self, shares: &[usize]) -> SharePattern {
        SharePattern(shares.iter().map(|&k| self.0[k]).collect())
    }
}

impl fmt::Display for SharePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for SharePattern {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(EncodingError::BadPattern(s.to_string())),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        SharePattern::new(bits).map_err(|_| EncodingError::BadPattern(s.to_string()))
    }
}

impl Serialize for SharePattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SharePattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TooFewShares(usize),
    EmptyCell {
        basis: Basis,
        secret: u8,
    },
    PatternLength {
        basis: Basis,
        secret: u8,
        pattern: SharePattern,
    },
    Duplicate {
        basis: Basis,
        secret: u8,
        pattern: SharePattern,
    },
    Overlap {
        basis: Basis,
        pattern: SharePattern,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewShares(n) => write!(f, "num_shares = {n}, need at least 2"),
            Violation::EmptyCell { basis, secret } => write!(f, "cell {basis}{secret} is empty"),
            Violation::PatternLength {
                basis,
                secret,
                pattern,
            } => write!(
                f,
                "cell {basis}{secret}: pattern {pattern} has the wrong length"
            ),
            Violation::Duplicate {
                basis,
                secret,
                pattern,
            } => write!(f, "cell {basis}{secret}: pattern {pattern} listed twice"),
            Violation::Overlap { basis, pattern } => {
                write!(f, "pattern {pattern} appears in both {basis} cells")
            }
        }
    }
}

/// Four-cell codebook over `num_shares` shares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingTable {
    name: String,
    num_shares: usize,
    // indexed [basis bit][secret bit]
    cells: [[Vec<SharePattern>; 2]; 2],
}

impl EncodingTable {
    /// Builds a table without checking it; run [`validate`] before use.
    pub fn new(
        name: impl Into<String>,
        num_shares: usize,
        cells: [[Vec<SharePattern>; 2]; 2],
    ) -> EncodingTable {
        EncodingTable {
            name: name.into(),
            num_shares,
            cells,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_shares(&self) -> usize {
        self.num_shares
    }

    pub fn cell(&self, basis: BasisBit, secret: SecretBit) -> &[SharePattern] {
        &self.cells[basis.value() as usize][secret.value() as usize]
    }

    pub fn from_json(text: &str) -> Result<EncodingTable, EncodingError> {
        let doc: TableDocument =
            serde_json::from_str(text).map_err(|e| EncodingError::Json(e.to_string()))?;
        let mut cells: [[Vec<SharePattern>; 2]; 2] = Default::default();
        for (key, patterns) in doc.cells {
            let (b, s) = match key.as_str() {
                "Z0" => (0, 0),
                "Z1" => (0, 1),
                "X0" => (1, 0),
                "X1" => (1, 1),
                _ => return Err(EncodingError::BadCellKey(key)),
            };
            cells[b][s] = patterns;
        }
        Ok(EncodingTable::new(doc.name, doc.num_shares, cells))
    }

    pub fn to_json(&self) -> String {
        let mut cells = BTreeMap::new();
        for (b, label) in ["Z", "X"].iter().enumerate() {
            for s in 0..2 {
                cells.insert(format!("{label}{s}"), self.cells[b][s].clone());
            }
        }
        let doc = TableDocument {
            name: self.name.clone(),
            num_shares: self.num_shares,
            cells,
        };
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct TableDocument {
    name: String,
    num_shares: usize,
    cells: BTreeMap<String, Vec<SharePattern>>,
}

const BASES: [BasisBit; 2] = [BasisBit::Z, BasisBit::X];
const SECRETS: [SecretBit; 2] = [SecretBit::ZERO, SecretBit::ONE];

/// Parity codebook: cell `(basis, s)` holds every pattern whose XOR is `s`,
/// in increasing binary order. Identical for both bases.
pub fn table1(num_shares: usize) -> Result<EncodingTable, EncodingError> {
    if num_shares < 2 {
        return Err(EncodingError::TooFewShares(num_shares));
    }
    if num_shares > crate::qcore::MAX_QUBITS {
        return Err(EncodingError::BadPattern(format!(
            "{num_shares} shares exceeds the register cap"
        )));
    }
    let mut by_parity: [Vec<SharePattern>; 2] = Default::default();
    for v in 0..(1usize << num_shares) {
        let p = SharePattern::from_index(v, num_shares);
        by_parity[p.parity() as usize].push(p);
    }
    Ok(EncodingTable::new(
        format!("table1/{num_shares}"),
        num_shares,
        [by_parity.clone(), by_parity],
    ))
}

/// Draws a pattern uniformly from the `(basis, secret)` cell.
pub fn encode(
    table: &EncodingTable,
    basis: BasisBit,
    secret: SecretBit,
    rand: f64,
) -> Result<SharePattern, EncodingError> {
    let cell = table.cell(basis, secret);
    if cell.is_empty() {
        return Err(EncodingError::EmptyCell {
            basis: basis.basis(),
            secret: secret.value(),
        });
    }
    let k = ((rand * cell.len() as f64) as usize).min(cell.len() - 1);
    Ok(cell[k].clone())
}

pub fn decode(
    table: &EncodingTable,
    basis: BasisBit,
    pattern: &SharePattern,
) -> Result<SecretBit, EncodingError> {
    let hits: Vec<SecretBit> = SECRETS
        .into_iter()
        .filter(|&s| table.cell(basis, s).contains(pattern))
        .collect();
    match hits.as_slice() {
        [s] => Ok(*s),
        [] => Err(EncodingError::UnknownPattern {
            table: table.name.clone(),
            basis: basis.basis(),
            pattern: pattern.clone(),
        }),
        _ => Err(EncodingError::AmbiguousPattern {
            basis: basis.basis(),
            pattern: pattern.clone(),
        }),
    }
}

/// Empty iff the table is a well-formed codebook.
pub fn validate(table: &EncodingTable) -> Vec<Violation> {
    let mut out = Vec::new();
    if table.num_shares < 2 {
        out.push(Violation::TooFewShares(table.num_shares));
    }
    for basis in BASES {
        for secret in SECRETS {
            let cell = table.cell(basis, secret);
            let (b, s) = (basis.basis(), secret.value());
            if cell.is_empty() {
                out.push(Violation::EmptyCell {
                    basis: b,
                    secret: s,
                });
            }
            let mut seen = BTreeSet::new();
            for p in cell {
                if p.len() != table.num_shares {
                    out.push(Violation::PatternLength {
                        basis: b,
                        secret: s,
                        pattern: p.clone(),
                    });
                }
                if !seen.insert(p) {
                    out.push(Violation::Duplicate {
                        basis: b,
                        secret: s,
                        pattern: p.clone(),
                    });
                }
            }
        }
        let zero: BTreeSet<_> = table.cell(basis, SecretBit::ZERO).iter().collect();
        let one: BTreeSet<_> = table.cell(basis, SecretBit::ONE).iter().collect();
        for p in zero.intersection(&one) {
            out.push(Violation::Overlap {
                basis: basis.basis(),
                pattern: (*p).clone(),
            });
        }
    }
    out
}

/// Distribution of the bits at `shares` when the pattern is drawn uniformly
/// from the `(basis, secret)` cell.
pub fn share_marginal(
    table: &EncodingTable,
    basis: BasisBit,
    secret: SecretBit,
    shares: &[usize],
) -> BTreeMap<SharePattern, f64> {
    let cell = table.cell(basis, secret);
    let w = 1.0 / cell.len() as f64;
    let mut out = BTreeMap::new();
    for p in cell {
        *out.entry(p.select(shares)).or_insert(0.0) += w;
    }
    out
}
