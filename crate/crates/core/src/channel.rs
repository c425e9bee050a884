//! The synchronous single-hop radio channel.
//!
//! Every station takes one [`SlotAction`] per slot. A listener learns only
//! whether exactly one station transmitted, and if so what it sent: silence
//! and collision look the same ([`Observation::NoUniqueSignal`]). Under the
//! strong model a station may transmit and listen in the same slot, so a lone
//! transmitter hears its own message. Under the weak model it cannot.
//!
//! Station indices passed to the resolver are only used in error reports.
//! Nothing the channel returns identifies who transmitted.

use thiserror::Error;

/// Which no-collision-detection variant the channel implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    /// A station may broadcast and listen in the same slot.
    StrongNoCd,
    /// Broadcasting and listening are mutually exclusive within a slot.
    WeakNoCd,
}

impl ChannelModel {
    pub fn allows_broadcast_and_listen(self) -> bool {
        matches!(self, ChannelModel::StrongNoCd)
    }
}

/// Payloads carried on the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Message {
    /// Probe sent during the probabilistic phase of the weak-model protocol.
    Ok,
    /// Sent by a witness at the end of a round: "I heard a lone sender in
    /// slot `slot`" (1-based position within the round).
    WitnessReport { slot: u32 },
    /// Sent by a (prospective) candidate under the strong model.
    CandidateClaim,
    /// Sent by the elected leader so every station learns the outcome.
    LeaderAnnounce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotAction {
    Sleep,
    Listen,
    Broadcast(Message),
    /// Only legal under [`ChannelModel::StrongNoCd`].
    BroadcastAndListen(Message),
}

impl SlotAction {
    pub fn is_awake(&self) -> bool {
        !matches!(self, SlotAction::Sleep)
    }

    pub fn broadcasts(&self) -> Option<Message> {
        match *self {
            SlotAction::Broadcast(m) | SlotAction::BroadcastAndListen(m) => Some(m),
            _ => None,
        }
    }

    pub fn listens(&self) -> bool {
        matches!(self, SlotAction::Listen | SlotAction::BroadcastAndListen(_))
    }
}

/// What a single station perceives at the end of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observation {
    Received(Message),
    /// Silence or collision; a no-CD receiver cannot tell which.
    NoUniqueSignal,
    NotListening,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error(
        "station {station} tried to broadcast and listen in one slot under the weak no-CD model"
    )]
    IllegalAction { station: usize },
    #[error("a slot needs at least one station")]
    EmptySlot,
}

/// Accumulates the actions taken in one slot.
///
/// Register every awake station (sleepers may be skipped, they cannot
/// affect the outcome), then call [`SlotResolver::finish`].
#[derive(Debug, Clone)]
pub struct SlotResolver {
    model: ChannelModel,
    broadcasters: u32,
    message: Option<Message>,
}

impl SlotResolver {
    pub fn new(model: ChannelModel) -> Self {
        Self {
            model,
            broadcasters: 0,
            message: None,
        }
    }

    pub fn register(&mut self, station: usize, action: &SlotAction) -> Result<(), ChannelError> {
        if let SlotAction::BroadcastAndListen(_) = action {
            if !self.model.allows_broadcast_and_listen() {
                return Err(ChannelError::IllegalAction { station });
            }
        }
        if let Some(m) = action.broadcasts() {
            // Saturate at 2: beyond "more than one" the count is never used.
            if self.broadcasters < 2 {
                self.broadcasters += 1;
            }
            self.message = Some(m);
        }
        Ok(())
    }

    pub fn finish(self) -> SlotResolution {
        SlotResolution {
            unique: if self.broadcasters == 1 {
                self.message
            } else {
                None
            },
        }
    }
}

/// Outcome of a slot: either one message got through, or nothing did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotResolution {
    unique: Option<Message>,
}

impl SlotResolution {
    /// The message heard by listeners, if exactly one station broadcast.
    pub fn unique_message(&self) -> Option<Message> {
        self.unique
    }

    pub fn observe(&self, action: &SlotAction) -> Observation {
        if !action.listens() {
            return Observation::NotListening;
        }
        match self.unique {
            Some(m) => Observation::Received(m),
            None => Observation::NoUniqueSignal,
        }
    }
}

/// Resolves one slot given every station's action, returning each station's
/// observation in the same order.
pub fn resolve_slot(
    actions: &[SlotAction],
    model: ChannelModel,
) -> Result<Vec<Observation>, ChannelError> {
    if actions.is_empty() {
        return Err(ChannelError::EmptySlot);
    }
    let mut resolver = SlotResolver::new(model);
    for (station, action) in actions.iter().enumerate() {
        resolver.register(station, action)?;
    }
    let resolution = resolver.finish();
    Ok(actions.iter().map(|a| resolution.observe(a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ChannelModel::*;
    use Message::*;
    use Observation::*;
    use SlotAction::*;

    #[test]
    fn strong_transmitter_hears_itself() {
        let obs = resolve_slot(&[BroadcastAndListen(Ok), Listen, Sleep], StrongNoCd).unwrap();
        assert_eq!(obs, vec![Received(Ok), Received(Ok), NotListening]);
    }

    #[test]
    fn collision_is_no_unique_signal() {
        for model in [StrongNoCd, WeakNoCd] {
            let obs = resolve_slot(&[Broadcast(Ok), Broadcast(Ok), Listen], model).unwrap();
            assert_eq!(obs, vec![NotListening, NotListening, NoUniqueSignal]);
        }
    }

    #[test]
    fn weak_sender_does_not_listen() {
        let obs = resolve_slot(&[Broadcast(Ok), Listen], WeakNoCd).unwrap();
        assert_eq!(obs, vec![NotListening, Received(Ok)]);
    }

    #[test]
    fn silence_matches_collision() {
        let silent = resolve_slot(&[Listen, Sleep, Listen], WeakNoCd).unwrap();
        assert_eq!(silent, vec![NoUniqueSignal, NotListening, NoUniqueSignal]);
    }

    #[test]
    fn weak_rejects_broadcast_and_listen() {
        let err =
            resolve_slot(&[Listen, BroadcastAndListen(CandidateClaim)], WeakNoCd).unwrap_err();
        assert_eq!(err, ChannelError::IllegalAction { station: 1 });
    }

    #[test]
    fn empty_slot_rejected() {
        assert_eq!(
            resolve_slot(&[], StrongNoCd).unwrap_err(),
            ChannelError::EmptySlot
        );
    }

    #[test]
    fn colliding_strong_transmitters_hear_nothing() {
        let obs = resolve_slot(
            &[
                BroadcastAndListen(CandidateClaim),
                BroadcastAndListen(CandidateClaim),
            ],
            StrongNoCd,
        )
        .unwrap();
        assert_eq!(obs, vec![NoUniqueSignal, NoUniqueSignal]);
    }
}
