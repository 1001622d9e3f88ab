//! Simulation and analysis of entanglement-free quantum secret sharing,
//! the GHZ-based scheme it is compared against, and a two-BB84 baseline.

pub mod adversary;
pub mod analysis;
pub mod encoding;
pub mod protocol;
pub mod qcore;

pub use adversary::{
    bell_joint, ghz_cheat, intercept_resend, Adversary, AttackKind, AttackReport, AttackStrategy,
    BasisRule,
};
pub use analysis::{
    efficiency, leakage, qber_summary, resources, Accounting, AnalysisError, Conditioning,
    LeakageReport, Observable, PerBit, ResourceLedger, EPR_REFERENCE,
};
pub use encoding::{table1, BasisBit, EncodingTable, SecretBit, SharePattern};
pub use protocol::{
    run, run_ghz, run_product, run_two_bb84, OrderingPolicy, ProtocolConfig, ProtocolError,
    ProtocolKind, RoundRecord, RunOptions, Transcript, Transmission,
};
pub use qcore::{Basis, BellOutcome, MeasOutcome, StateVector};
