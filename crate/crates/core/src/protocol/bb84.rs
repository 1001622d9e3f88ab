use rand::Rng;

use super::{
    announcement_order, flip_for, random_zx, transmit, Announcement, Content, Party,
    ProtocolConfig, ProtocolError, RoundRecord, RoundRng, Transmission,
};
use crate::adversary::{Adversary, AdversaryRecord};
use crate::encoding::SharePattern;
use crate::qcore::{measure_qubit, prep_product, Basis, StateVector};

const LINKS: usize = 2;

/// One position of two parallel BB84 sessions, Alice→Bob and Alice→Charlie.
pub(super) fn round<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    adv: &A,
    index: usize,
) -> Result<RoundRecord, ProtocolError> {
    let mut rng = RoundRng::new(config.master_seed, index);
    let honest = &mut rng.honest;
    let dealer_bases: Vec<Basis> = (0..LINKS).map(|_| random_zx(honest)).collect();
    let link_bits: Vec<u8> = (0..LINKS).map(|_| honest.gen::<bool>() as u8).collect();
    let secret = honest.gen::<bool>() as u8;
    let holder_bases: Vec<Basis> = dealer_bases
        .iter()
        .map(|&b| {
            if config.quantum_memory {
                b
            } else {
                random_zx(honest)
            }
        })
        .collect();
    let meas_rand: Vec<f64> = (0..LINKS).map(|_| honest.gen()).collect();
    let basis_order = announcement_order(config.ordering_policy, LINKS, honest);
    let check_order = announcement_order(config.ordering_policy, LINKS, honest);

    let mut rec = RoundRecord::new(index);
    rec.channel_bases = Some(dealer_bases.clone());
    rec.secret_bit = Some(secret);
    rec.prepared_pattern = Some(SharePattern::new(link_bits.clone())?);
    // Bob's link key is his share; Charlie gets secret ⊕ Bob's share, padded
    // with his own link key.
    rec.classical_message = Some(secret ^ link_bits[0] ^ link_bits[1]);

    let mut register = prep_product(&dealer_bases, &link_bits)?;
    let attacked = adv.is_active() && rng.adversary.gen::<f64>() < adv.attack_fraction();
    let mut adv_rec = AdversaryRecord::new(attacked);
    let noise: Vec<_> = dealer_bases.iter().map(|&b| flip_for(b)).collect();
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
    for k in 0..LINKS {
        rec.announcements
            .push(Announcement::new(Party::Shareholder(k), Content::Receipt));
    }

    let mut outcomes = vec![0u8; LINKS];
    let mut measure = |register: &mut StateVector| -> Result<(), ProtocolError> {
        for k in 0..LINKS {
            let (o, after) = measure_qubit(register, k, holder_bases[k], meas_rand[k])?;
            outcomes[k] = o.bit();
            *register = after;
        }
        Ok(())
    };
    if !config.quantum_memory {
        measure(&mut register)?;
    }
    for &b in &dealer_bases {
        let bit = (b == Basis::X) as u8;
        rec.announcements
            .push(Announcement::new(Party::Alice, Content::BasisBit(bit)));
    }
    if attacked {
        adv.observe(&rec.announcements, &mut adv_rec);
    }
    if config.quantum_memory {
        measure(&mut register)?;
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

pub(super) fn key_bits(rec: &RoundRecord) -> Vec<u8> {
    let message = rec.classical_message.expect("two-BB84 record");
    vec![
        rec.shareholder_outcomes[0],
        message ^ rec.shareholder_outcomes[1],
    ]
}
