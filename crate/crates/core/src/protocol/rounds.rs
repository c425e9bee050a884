//! One round of each protocol, driven slot by slot through the channel.

use super::schedule::RoundPlan;
use super::station::StationState;
use super::SimError;
use crate::channel::{ChannelModel, Message, Observation, SlotAction, SlotResolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundOutcome {
    /// Bookkeeping index of the elected station.
    Elected(usize),
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundReport {
    pub outcome: RoundOutcome,
    pub probabilistic_slots: u64,
    pub deterministic_slots: u64,
}

fn start_round(states: &mut [StationState]) -> Result<(), SimError> {
    for st in states.iter_mut() {
        if st.leader {
            return Err(SimError::SafetyViolation(
                "a round started after a leader was elected".into(),
            ));
        }
        st.start_round();
    }
    Ok(())
}

#[inline]
fn wake(st: &mut StationState) {
    st.awake_slots += 1;
    st.round_wakes += 1;
}

/// Runs one round of the strong-model protocol (Algorithm 1).
///
/// In every probabilistic slot the stations scheduled to wake broadcast a
/// claim and listen. One that hears its own claim becomes a candidate. In the
/// closing slot every station listens and candidates broadcast again; a lone
/// candidate hears itself and becomes leader, and everybody else learns that
/// the election is over.
pub fn run_candidate_round(
    states: &mut [StationState],
    plan: &RoundPlan,
    model: ChannelModel,
) -> Result<RoundReport, SimError> {
    start_round(states)?;
    let claim = SlotAction::BroadcastAndListen(Message::CandidateClaim);

    // Every wake is a claim here; the planned intent is ignored.
    for slot in plan.slots() {
        let mut resolver = SlotResolver::new(model);
        for &s in slot.transmit.iter().chain(&slot.listen) {
            resolver.register(s as usize, &claim)?;
            wake(&mut states[s as usize]);
        }
        let resolution = resolver.finish();
        if let Observation::Received(_) = resolution.observe(&claim) {
            for &s in slot.transmit.iter().chain(&slot.listen) {
                states[s as usize].candidate = true;
            }
        }
    }

    // Closing slot: everybody is awake.
    let action_of = |st: &StationState| {
        if st.candidate {
            claim
        } else {
            SlotAction::Listen
        }
    };
    let mut resolver = SlotResolver::new(model);
    for (s, st) in states.iter_mut().enumerate() {
        resolver.register(s, &action_of(st))?;
        st.awake_slots += 1;
    }
    let resolution = resolver.finish();

    let mut outcome = RoundOutcome::Failed;
    if resolution.unique_message().is_some() {
        let mut leaders = 0;
        for (s, st) in states.iter_mut().enumerate() {
            let action = action_of(st);
            if let Observation::Received(_) = resolution.observe(&action) {
                st.knows_terminated = true;
                if st.candidate {
                    st.leader = true;
                    leaders += 1;
                    outcome = RoundOutcome::Elected(s);
                }
            }
        }
        if leaders != 1 {
            return Err(SimError::SafetyViolation(format!(
                "{leaders} stations became leader in one slot"
            )));
        }
    }

    Ok(RoundReport {
        outcome,
        probabilistic_slots: plan.length(),
        deterministic_slots: 1,
    })
}

/// Runs one round of the weak-model protocol (Algorithm 2).
///
/// Awake stations either send `Ok` or listen, as planned. A listener that
/// hears a lone sender becomes a witness for that slot (the first such slot
/// if it hears several). In the first closing slot witnesses report the slot
/// they heard while stations that sent this round listen; a sender that hears
/// a lone report naming one of its own slots becomes leader. In the second
/// closing slot everyone listens and the leader, if any, announces itself.
///
/// A station that both sent and witnessed acts as a witness in the first
/// closing slot: it cannot send and listen at once.
pub fn run_witness_round(
    states: &mut [StationState],
    plan: &RoundPlan,
    model: ChannelModel,
) -> Result<RoundReport, SimError> {
    start_round(states)?;
    let probe = SlotAction::Broadcast(Message::Ok);

    for (idx, slot) in plan.slots().iter().enumerate() {
        let position = idx as u32 + 1;
        let mut resolver = SlotResolver::new(model);
        for &s in &slot.transmit {
            resolver.register(s as usize, &probe)?;
            let st = &mut states[s as usize];
            wake(st);
            st.broadcast_slots.insert(position);
        }
        for &s in &slot.listen {
            resolver.register(s as usize, &SlotAction::Listen)?;
            wake(&mut states[s as usize]);
        }
        let resolution = resolver.finish();
        if resolution.unique_message().is_some() {
            for &s in &slot.listen {
                let st = &mut states[s as usize];
                if let Observation::Received(Message::Ok) = resolution.observe(&SlotAction::Listen)
                {
                    st.witness_for.get_or_insert(position);
                }
            }
        }
    }

    // First closing slot: witnesses report, senders listen, others sleep.
    let report_action = |st: &StationState| match st.witness_for {
        Some(slot) => SlotAction::Broadcast(Message::WitnessReport { slot }),
        None if !st.broadcast_slots.is_empty() => SlotAction::Listen,
        None => SlotAction::Sleep,
    };
    let mut resolver = SlotResolver::new(model);
    for (s, st) in states.iter_mut().enumerate() {
        let action = report_action(st);
        if action.is_awake() {
            resolver.register(s, &action)?;
            st.awake_slots += 1;
        }
    }
    let resolution = resolver.finish();

    let mut leader = None;
    if resolution.unique_message().is_some() {
        let mut leaders = 0;
        for (s, st) in states.iter_mut().enumerate() {
            let action = report_action(st);
            if let Observation::Received(Message::WitnessReport { slot }) =
                resolution.observe(&action)
            {
                if st.broadcast_slots.contains(slot) {
                    st.leader = true;
                    leaders += 1;
                    leader = Some(s);
                }
            }
        }
        if leaders > 1 {
            return Err(SimError::SafetyViolation(format!(
                "{leaders} stations became leader in one slot"
            )));
        }
    }

    // Second closing slot: everyone listens, the leader announces.
    let announce_action = |st: &StationState| {
        if st.leader {
            SlotAction::Broadcast(Message::LeaderAnnounce)
        } else {
            SlotAction::Listen
        }
    };
    let mut resolver = SlotResolver::new(model);
    for (s, st) in states.iter_mut().enumerate() {
        resolver.register(s, &announce_action(st))?;
        st.awake_slots += 1;
    }
    let resolution = resolver.finish();
    if resolution.unique_message().is_some() {
        for st in states.iter_mut() {
            if st.leader {
                st.knows_terminated = true;
            } else if let Observation::Received(Message::LeaderAnnounce) =
                resolution.observe(&announce_action(st))
            {
                st.knows_terminated = true;
            }
        }
    }

    Ok(RoundReport {
        outcome: leader.map_or(RoundOutcome::Failed, RoundOutcome::Elected),
        probabilistic_slots: plan.length(),
        deterministic_slots: 2,
    })
}
