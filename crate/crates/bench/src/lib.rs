//! Fixed scenarios shared by the benchmarks.

use qss_core::{OrderingPolicy, ProtocolConfig, ProtocolKind};

/// An ideal configuration of `protocol` with `rounds` rounds.
pub fn scenario(protocol: ProtocolKind, rounds: usize) -> ProtocolConfig {
    ProtocolConfig {
        protocol,
        rounds,
        master_seed: 42,
        ordering_policy: OrderingPolicy::Random,
        ..ProtocolConfig::new(protocol)
    }
}

/// A product-protocol configuration with `parties` shareholders.
pub fn product_with_parties(parties: usize, rounds: usize) -> ProtocolConfig {
    ProtocolConfig {
        num_shareholders: parties,
        ..scenario(ProtocolKind::Product, rounds)
    }
}
