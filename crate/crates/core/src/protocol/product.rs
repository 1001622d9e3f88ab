use rand::Rng;

use super::{
    announcement_order, flip_for, random_zx, transmit, Announcement, Content, Party,
    ProtocolConfig, ProtocolError, RoundRecord, RoundRng, Transmission,
};
use crate::adversary::{Adversary, AdversaryRecord};
use crate::encoding::{encode, BasisBit, EncodingTable, SecretBit};
use crate::qcore::{measure_qubit, prep_product, Basis, StateVector};

pub(super) fn round<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    table: &EncodingTable,
    adv: &A,
    index: usize,
) -> Result<RoundRecord, ProtocolError> {
    let n = config.num_shareholders;
    let mut rng = RoundRng::new(config.master_seed, index);
    let honest = &mut rng.honest;

    let basis = BasisBit::new(honest.gen::<bool>() as u8);
    let secret = SecretBit::new(honest.gen::<bool>() as u8);
    let pattern = encode(table, basis, secret, honest.gen())?;
    let holder_bases: Vec<Basis> = (0..n)
        .map(|_| {
            if config.quantum_memory {
                basis.basis()
            } else {
                random_zx(honest)
            }
        })
        .collect();
    let meas_rand: Vec<f64> = (0..n).map(|_| honest.gen()).collect();
    let basis_order = announcement_order(config.ordering_policy, n, honest);
    let check_order = announcement_order(config.ordering_policy, n, honest);

    let mut rec = RoundRecord::new(index);
    rec.basis_bit = Some(basis.value());
    rec.secret_bit = Some(secret.value());
    rec.prepared_pattern = Some(pattern.clone());

    let mut register = prep_product(&vec![basis.basis(); n], pattern.bits())?;
    let attacked = adv.is_active() && rng.adversary.gen::<f64>() < adv.attack_fraction();
    let mut adv_rec = AdversaryRecord::new(attacked);
    let noise = vec![flip_for(basis.basis()); n];
    rec.transmissions = transmit(
        config,
        adv,
        config.transmission == Transmission::Simultaneous,
        &mut register,
        0,
        &noise,
        &mut rng,
        &mut adv_rec,
        &mut rec.adversary_note,
    )?;

    for k in 0..n {
        rec.announcements
            .push(Announcement::new(Party::Shareholder(k), Content::Receipt));
    }
    let mut outcomes = vec![0u8; n];
    if !config.quantum_memory {
        register = measure_all(register, &holder_bases, &meas_rand, &mut outcomes)?;
    }
    rec.announcements.push(Announcement::new(
        Party::Alice,
        Content::BasisBit(basis.value()),
    ));
    if attacked {
        adv.observe(&rec.announcements, &mut adv_rec);
    }
    if config.quantum_memory {
        measure_all(register, &holder_bases, &meas_rand, &mut outcomes)?;
    } else {
        for &k in &basis_order {
            rec.announcements.push(Announcement::new(
                Party::Shareholder(k),
                Content::Basis(holder_bases[k]),
            ));
        }
    }

    rec.shareholder_bases = holder_bases;
    rec.shareholder_outcomes = outcomes;
    rec.check_order = check_order;
    if adv.is_active() {
        rec.adversary = Some(adv_rec);
    }
    Ok(rec)
}

fn measure_all(
    mut register: StateVector,
    bases: &[Basis],
    rands: &[f64],
    outcomes: &mut [u8],
) -> Result<StateVector, ProtocolError> {
    for (k, (&basis, &r)) in bases.iter().zip(rands).enumerate() {
        let (o, after) = measure_qubit(&register, k, basis, r)?;
        outcomes[k] = o.bit();
        register = after;
    }
    Ok(register)
}

/// Shareholders announce their measured bits; the dealer compares each one
/// with the share value she prepared. Shared with the two-BB84 baseline.
pub(super) fn check(rec: &mut RoundRecord) {
    let prepared = rec
        .prepared_pattern
        .as_ref()
        .expect("check rounds carry the prepared pattern")
        .clone();
    for &k in &rec.check_order {
        rec.announcements.push(Announcement::new(
            Party::Shareholder(k),
            Content::CheckBit(rec.shareholder_outcomes[k]),
        ));
    }
    rec.share_errors = rec
        .shareholder_outcomes
        .iter()
        .zip(prepared.bits())
        .map(|(a, p)| a != p)
        .collect();
    rec.check_error = rec.share_errors.iter().any(|&e| e);
    if rec.basis_bit.is_some() {
        let announced = rec.shareholder_outcomes.iter().fold(0, |acc, b| acc ^ b);
        rec.parity_error = Some(announced != prepared.parity());
    }
}
