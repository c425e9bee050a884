use proptest::prelude::*;
use radio_elect::channel::{
    resolve_slot, ChannelError, ChannelModel, Message, Observation, SlotAction, SlotResolver,
};

fn action() -> impl Strategy<Value = SlotAction> {
    let msg = prop_oneof![
        Just(Message::Ok),
        Just(Message::CandidateClaim),
        Just(Message::LeaderAnnounce),
        (1u32..64).prop_map(|slot| Message::WitnessReport { slot }),
    ];
    prop_oneof![
        Just(SlotAction::Sleep),
        Just(SlotAction::Listen),
        msg.clone().prop_map(SlotAction::Broadcast),
        msg.prop_map(SlotAction::BroadcastAndListen),
    ]
}

#[test]
fn empty_slot_is_an_error() {
    assert_eq!(
        resolve_slot(&[], ChannelModel::StrongNoCd),
        Err(ChannelError::EmptySlot)
    );
}

#[test]
fn weak_model_rejects_broadcast_and_listen() {
    let actions = [
        SlotAction::Listen,
        SlotAction::BroadcastAndListen(Message::Ok),
    ];
    assert_eq!(
        resolve_slot(&actions, ChannelModel::WeakNoCd),
        Err(ChannelError::IllegalAction { station: 1 })
    );
}

proptest! {
    #[test]
    fn listeners_receive_iff_one_sender(actions in prop::collection::vec(action(), 1..12)) {
        let obs = resolve_slot(&actions, ChannelModel::StrongNoCd).unwrap();
        let senders: Vec<Message> = actions.iter().filter_map(SlotAction::broadcasts).collect();
        for (a, o) in actions.iter().zip(&obs) {
            let expected = match (a.listens(), senders.as_slice()) {
                (false, _) => Observation::NotListening,
                (true, [m]) => Observation::Received(*m),
                (true, _) => Observation::NoUniqueSignal,
            };
            prop_assert_eq!(*o, expected);
        }
    }

    #[test]
    fn models_agree_on_legal_slots(actions in prop::collection::vec(action(), 1..12)) {
        let weak = resolve_slot(&actions, ChannelModel::WeakNoCd);
        let illegal = actions.iter().any(|a| matches!(a, SlotAction::BroadcastAndListen(_)));
        prop_assert_eq!(weak.is_err(), illegal);
        if let Ok(weak) = weak {
            prop_assert_eq!(weak, resolve_slot(&actions, ChannelModel::StrongNoCd).unwrap());
        }
    }

    #[test]
    fn sleepers_do_not_matter(actions in prop::collection::vec(action(), 1..12)) {
        let mut resolver = SlotResolver::new(ChannelModel::StrongNoCd);
        for (i, a) in actions.iter().enumerate().filter(|(_, a)| a.is_awake()) {
            resolver.register(i, a).unwrap();
        }
        let sparse = resolver.finish();
        let full = resolve_slot(&actions, ChannelModel::StrongNoCd).unwrap();
        for (a, o) in actions.iter().zip(full) {
            prop_assert_eq!(sparse.observe(a), o);
        }
    }
}
