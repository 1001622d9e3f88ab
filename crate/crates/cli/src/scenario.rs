use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use qss_core::adversary::{bell_joint, ghz_cheat, intercept_resend, AttackStrategy, BasisRule};
use qss_core::encoding::{table1, EncodingTable};
use qss_core::protocol::{OrderingPolicy, ProtocolConfig, ProtocolKind, RunOptions, Transmission};
use qss_core::qcore::Basis;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolArg {
    Product,
    Ghz,
    #[value(alias = "two_bb84")]
    #[serde(alias = "two_bb84")]
    TwoBb84,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransmissionArg {
    Simultaneous,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingArg {
    Fixed,
    Random,
}

/// Scenario settings. Every field is optional so a config file and the
/// command line can be layered; unset fields fall back to engine defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioArgs {
    /// JSON file with any of these settings; flags override it
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Number of shareholders (product protocol)
    #[arg(long)]
    pub parties: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub memory: Option<Switch>,
    #[arg(long, value_enum)]
    pub transmission: Option<TransmissionArg>,
    /// none | intercept:<b|c|index>[:z|x] | bell-joint | ghz-cheat
    #[arg(long)]
    pub adversary: Option<String>,
    /// Fraction of rounds the adversary touches
    #[arg(long)]
    pub attack_fraction: Option<f64>,
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingArg>,
    #[arg(long)]
    pub check_fraction: Option<f64>,
    #[arg(long)]
    pub qber_threshold: Option<f64>,
    /// Bit-flip probability per transmitted qubit
    #[arg(long)]
    pub noise: Option<f64>,
    /// Built-in table name (table1) or path to a JSON table
    #[arg(long)]
    pub table: Option<String>,
    /// Worker threads for the round loop; output does not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
    /// Row label used by `compare`
    #[arg(long)]
    pub label: Option<String>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        ScenarioArgs { $($field: $top.$field.or($base.$field),)* }
    };
}

impl ScenarioArgs {
    /// Loads `--config` if given and lays the flags over it.
    pub fn layered(self) -> Result<ScenarioArgs> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base: ScenarioArgs = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(overlay!(
            base,
            self,
            config,
            protocol,
            parties,
            rounds,
            seed,
            memory,
            transmission,
            adversary,
            attack_fraction,
            ordering,
            check_fraction,
            qber_threshold,
            noise,
            table,
            threads,
            label
        ))
    }

    pub fn resolve(self) -> Result<Scenario> {
        let args = self.layered()?;
        let protocol = match args.protocol.unwrap_or(ProtocolArg::Product) {
            ProtocolArg::Product => ProtocolKind::Product,
            ProtocolArg::Ghz => ProtocolKind::Ghz,
            ProtocolArg::TwoBb84 => ProtocolKind::TwoBb84,
        };
        let defaults = ProtocolConfig::new(protocol);
        let config = ProtocolConfig {
            protocol,
            num_shareholders: args.parties.unwrap_or(defaults.num_shareholders),
            rounds: args.rounds.unwrap_or(defaults.rounds),
            quantum_memory: args
                .memory
                .map_or(defaults.quantum_memory, |m| m == Switch::On),
            transmission: match args.transmission {
                None => defaults.transmission,
                Some(TransmissionArg::Simultaneous) => Transmission::Simultaneous,
                Some(TransmissionArg::Sequential) => Transmission::Sequential,
            },
            check_fraction: args.check_fraction.unwrap_or(defaults.check_fraction),
            abort_qber_threshold: args.qber_threshold.unwrap_or(defaults.abort_qber_threshold),
            noise_flip_prob: args.noise.unwrap_or(defaults.noise_flip_prob),
            ordering_policy: match args.ordering {
                None => defaults.ordering_policy,
                Some(OrderingArg::Fixed) => OrderingPolicy::FixedBobLast,
                Some(OrderingArg::Random) => OrderingPolicy::Random,
            },
            master_seed: args.seed.unwrap_or(defaults.master_seed),
        };
        config.validate()?;

        let table = match (&args.table, protocol) {
            (None, _) => None,
            (Some(t), ProtocolKind::Product) => Some(load_table(t, config.num_shareholders)?),
            (Some(_), other) => {
                bail!("--table only applies to the product protocol, not {other:?}")
            }
        };

        let mut attack = parse_adversary(args.adversary.as_deref().unwrap_or("none"))?;
        if let Some(f) = args.attack_fraction {
            attack = attack.with_fraction(f);
        }
        qss_core::adversary::Adversary::check_compatible(&attack, &config)?;

        let label = args
            .label
            .unwrap_or_else(|| default_label(&config, &attack));
        Ok(Scenario {
            config,
            table,
            attack,
            options: RunOptions {
                threads: args.threads,
            },
            label,
        })
    }
}

/// A fully validated (config, table, attack) triple.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ProtocolConfig,
    pub table: Option<EncodingTable>,
    pub attack: AttackStrategy,
    pub options: RunOptions,
    pub label: String,
}

fn default_label(config: &ProtocolConfig, attack: &AttackStrategy) -> String {
    use qss_core::adversary::Adversary;
    let protocol = match config.protocol {
        ProtocolKind::Product => format!("product n={}", config.num_shareholders),
        ProtocolKind::Ghz => "ghz".to_string(),
        ProtocolKind::TwoBb84 => "two_bb84".to_string(),
    };
    let mut label = protocol;
    if config.protocol != ProtocolKind::Ghz {
        label += if config.quantum_memory {
            " memory=on"
        } else {
            " memory=off"
        };
    }
    if attack.is_active() {
        label += &format!(" attack={}", attack.label());
    }
    label
}

pub fn parse_adversary(spec: &str) -> Result<AttackStrategy> {
    let parts: Vec<&str> = spec.split(':').collect();
    Ok(match parts.as_slice() {
        ["none"] => AttackStrategy::none(),
        ["bell-joint"] => bell_joint(),
        ["ghz-cheat"] => ghz_cheat(),
        ["intercept", target, rest @ ..] => {
            let channel = match *target {
                "b" => 0,
                "c" => 1,
                n => n
                    .parse()
                    .with_context(|| format!("intercept target {n:?} is not b, c or an index"))?,
            };
            let rule = match rest {
                [] => BasisRule::Uniform,
                ["z"] => BasisRule::Always(Basis::Z),
                ["x"] => BasisRule::Always(Basis::X),
                _ => bail!("intercept basis must be z or x, got {:?}", rest.join(":")),
            };
            intercept_resend(channel, rule)
        }
        _ => bail!("unknown adversary {spec:?}"),
    })
}

pub fn load_table(reference: &str, parties: usize) -> Result<EncodingTable> {
    if reference == "table1" {
        return Ok(table1(parties)?);
    }
    let path = Path::new(reference);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("{reference:?} is not a built-in table or a readable file"))?;
    Ok(EncodingTable::from_json(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qss_core::adversary::AttackKind;

    #[test]
    fn adversary_specs() {
        let ir = |s| match parse_adversary(s).unwrap().kind {
            AttackKind::InterceptResend(i) => (i.channel, i.basis_rule),
            other => panic!("{other:?}"),
        };
        assert_eq!(ir("intercept:b"), (0, BasisRule::Uniform));
        assert_eq!(ir("intercept:c:z"), (1, BasisRule::Always(Basis::Z)));
        assert_eq!(ir("intercept:3:x"), (3, BasisRule::Always(Basis::X)));
        assert_eq!(parse_adversary("bell-joint").unwrap(), bell_joint());
        assert_eq!(parse_adversary("none").unwrap(), AttackStrategy::none());
        for bad in ["", "intercept", "intercept:d", "intercept:b:y", "ghz"] {
            assert!(parse_adversary(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"rounds": 40, "seed": 7, "memory": "off"}"#).unwrap();
        let s = ScenarioArgs {
            config: Some(path),
            seed: Some(8),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(s.config.rounds, 40);
        assert_eq!(s.config.master_seed, 8);
        assert!(!s.config.quantum_memory);
        assert_eq!(s.label, "product n=2 memory=off");
    }
}
