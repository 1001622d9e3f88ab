use rand::Rng;

use super::{
    random_xy, transmit, Announcement, Content, OrderingPolicy, Party, Phase, ProtocolConfig,
    ProtocolError, RoundRecord, RoundRng,
};
use crate::adversary::{Adversary, AdversaryRecord};
use crate::qcore::{measure_qubit, prep_ghz, Basis, MeasOutcome, Pauli};

const ALICE_QUBIT: usize = 0;
const BOB: usize = 0;
const CHARLIE: usize = 1;

/// Sign of the GHZ correlator for an announced basis triple: `+1` for XXX,
/// `-1` for the combinations with two `Y`s.
pub fn correlation_sign(bases: &[Basis]) -> i8 {
    let ys = bases.iter().filter(|&&b| b == Basis::Y).count();
    if ys % 4 == 0 {
        1
    } else {
        -1
    }
}

/// Whether Bob speaks after Charlie in this phase.
fn bob_last<R: Rng>(policy: OrderingPolicy, rng: &mut R) -> bool {
    match policy {
        OrderingPolicy::FixedBobLast => true,
        OrderingPolicy::Random => rng.gen::<bool>(),
    }
}

fn order(bob_last: bool) -> Vec<usize> {
    if bob_last {
        vec![CHARLIE, BOB]
    } else {
        vec![BOB, CHARLIE]
    }
}

pub(super) fn round<A: Adversary + ?Sized>(
    config: &ProtocolConfig,
    adv: &A,
    index: usize,
) -> Result<RoundRecord, ProtocolError> {
    let mut rng = RoundRng::new(config.master_seed, index);
    let honest = &mut rng.honest;
    let alice_basis = random_xy(honest);
    let holder_bases = [random_xy(honest), random_xy(honest)];
    let meas_rand: [f64; 3] = [honest.gen(), honest.gen(), honest.gen()];
    let basis_order = order(bob_last(config.ordering_policy, honest));
    let check_order = order(bob_last(config.ordering_policy, honest));

    let mut rec = RoundRecord::new(index);
    let mut register = prep_ghz(3)?;
    let attacked = adv.is_active() && rng.adversary.gen::<f64>() < adv.attack_fraction();
    let mut adv_rec = AdversaryRecord::new(attacked);
    // Bob keeps his own qubit, so an insider holds both shares jointly
    // whatever the transmission mode.
    rec.transmissions = transmit(
        config,
        adv,
        true,
        &mut register,
        1,
        &[Pauli::X, Pauli::X],
        &mut rng,
        &mut adv_rec,
        &mut rec.adversary_note,
    )?;
    for k in [BOB, CHARLIE] {
        rec.announcements
            .push(Announcement::new(Party::Shareholder(k), Content::Receipt));
    }

    let impostor = if attacked { adv.impersonates() } else { None };
    let mut outcomes = [MeasOutcome::PLUS; 2];
    for k in [BOB, CHARLIE] {
        if impostor == Some(k) {
            continue;
        }
        let (o, after) = measure_qubit(&register, 1 + k, holder_bases[k], meas_rand[1 + k])?;
        outcomes[k] = o;
        register = after;
    }
    let (alice_outcome, _) = measure_qubit(&register, ALICE_QUBIT, alice_basis, meas_rand[0])?;

    let mut announced = holder_bases;
    for &k in &basis_order {
        let content = if impostor == Some(k) {
            let c = adv.announce(k, Phase::Bases, &rec.announcements, &adv_rec);
            match c {
                Content::Basis(b) => b,
                got => {
                    return Err(ProtocolError::BadAnnouncement {
                        phase: Phase::Bases,
                        got,
                    })
                }
            }
        } else {
            holder_bases[k]
        };
        announced[k] = content;
        rec.announcements.push(Announcement::new(
            Party::Shareholder(k),
            Content::Basis(content),
        ));
    }
    rec.announcements
        .push(Announcement::new(Party::Alice, Content::Basis(alice_basis)));
    if attacked {
        adv.observe(&rec.announcements, &mut adv_rec);
    }
    if let Some(k) = impostor {
        // the impostor's recorded outcome is what it would claim unprompted
        outcomes[k] = claimed_value(adv, k, &rec.announcements, &adv_rec)?;
    }

    rec.ghz_bases = Some(vec![alice_basis, announced[BOB], announced[CHARLIE]]);
    rec.ghz_outcomes = Some(vec![alice_outcome, outcomes[BOB], outcomes[CHARLIE]]);
    rec.shareholder_bases = announced.to_vec();
    rec.shareholder_outcomes = outcomes.iter().map(|o| o.bit()).collect();
    rec.check_order = check_order;
    if adv.is_active() {
        rec.adversary = Some(adv_rec);
    }
    Ok(rec)
}

fn claimed_value<A: Adversary + ?Sized>(
    adv: &A,
    party: usize,
    announcements: &[Announcement],
    adv_rec: &AdversaryRecord,
) -> Result<MeasOutcome, ProtocolError> {
    match adv.announce(party, Phase::CheckValues, announcements, adv_rec) {
        Content::CheckEigenvalue(o) => Ok(o),
        got => Err(ProtocolError::BadAnnouncement {
            phase: Phase::CheckValues,
            got,
        }),
    }
}

/// Shareholders announce eigenvalues in `check_order`; Alice checks the
/// triple product against the correlator sign.
pub(super) fn check<A: Adversary + ?Sized>(
    rec: &mut RoundRecord,
    adv: &A,
) -> Result<(), ProtocolError> {
    let bases = rec.ghz_bases.clone().expect("GHZ record");
    let mut outcomes = rec.ghz_outcomes.clone().expect("GHZ record");
    let impostor = if rec.attacked() {
        adv.impersonates()
    } else {
        None
    };
    for &k in &rec.check_order.clone() {
        let value = match (impostor == Some(k), rec.adversary.as_ref()) {
            (true, Some(adv_rec)) => claimed_value(adv, k, &rec.announcements, adv_rec)?,
            _ => outcomes[1 + k],
        };
        outcomes[1 + k] = value;
        rec.announcements.push(Announcement::new(
            Party::Shareholder(k),
            Content::CheckEigenvalue(value),
        ));
    }
    let product: i8 = outcomes.iter().map(|o| o.eigenvalue()).product();
    rec.check_error = product != correlation_sign(&bases);
    Ok(())
}

/// Shareholder key bits. Charlie folds in the public correlator sign so that
/// Bob's bit XOR Charlie's bit equals Alice's bit.
pub(super) fn key_bits(rec: &RoundRecord) -> Vec<u8> {
    let bases = rec.ghz_bases.as_ref().expect("GHZ record");
    let sign_bit = (correlation_sign(bases) < 0) as u8;
    vec![
        rec.shareholder_outcomes[BOB],
        rec.shareholder_outcomes[CHARLIE] ^ sign_bit,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlator_signs() {
        use Basis::{X, Y};
        assert_eq!(correlation_sign(&[X, X, X]), 1);
        assert_eq!(correlation_sign(&[X, Y, Y]), -1);
        assert_eq!(correlation_sign(&[Y, X, Y]), -1);
        assert_eq!(correlation_sign(&[Y, Y, X]), -1);
    }
}
