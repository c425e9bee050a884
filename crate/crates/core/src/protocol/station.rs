/// Set of slot positions (1-based, within one round) in which a station
/// broadcast.
///
/// Positions are bounded by [`super::MAX_WAKE_EXPONENT`]: no station ever
/// wakes later than that in a round, so a 64-bit mask covers every position
/// that can be inserted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotSet(u64);

impl SlotSet {
    pub fn insert(&mut self, position: u32) {
        assert!(
            (1..=64).contains(&position),
            "slot position {position} outside 1..=64"
        );
        self.0 |= 1 << (position - 1);
    }

    pub fn contains(&self, position: u32) -> bool {
        (1..=64).contains(&position) && self.0 & (1 << (position - 1)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn clear(&mut self) {
        self.0 = 0;
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let tz = bits.trailing_zeros();
            bits &= bits - 1;
            Some(tz + 1)
        })
    }
}

/// Per-station protocol state.
///
/// The index of a station in the state vector is simulation bookkeeping.
/// Protocol decisions only ever look at a station's own fields and what it
/// observed on the channel.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StationState {
    /// Broadcast alone during this round's probabilistic phase (strong model).
    pub candidate: bool,
    /// First slot of this round in which the station heard a lone sender.
    pub witness_for: Option<u32>,
    /// Slots of this round in which the station sent `Ok`.
    pub broadcast_slots: SlotSet,
    pub leader: bool,
    pub knows_terminated: bool,
    /// Slots in which the station was awake, over the whole execution.
    pub awake_slots: u32,
    /// Probabilistic-phase slots in which the station woke this round.
    pub round_wakes: u32,
}

impl StationState {
    /// Clears the per-round flags. Leadership and counters persist.
    pub fn start_round(&mut self) {
        self.candidate = false;
        self.witness_for = None;
        self.broadcast_slots.clear();
        self.round_wakes = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_set_basics() {
        let mut s = SlotSet::default();
        assert!(s.is_empty());
        s.insert(1);
        s.insert(64);
        s.insert(7);
        assert!(s.contains(1) && s.contains(7) && s.contains(64));
        assert!(!s.contains(2) && !s.contains(0) && !s.contains(65));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 7, 64]);
        assert_eq!(s.len(), 3);
        s.clear();
        assert!(s.is_empty());
    }

    #[test]
    #[should_panic]
    fn slot_set_rejects_position_zero() {
        SlotSet::default().insert(0);
    }

    #[test]
    fn start_round_keeps_leadership() {
        let mut st = StationState {
            candidate: true,
            witness_for: Some(3),
            leader: true,
            knows_terminated: true,
            awake_slots: 9,
            round_wakes: 2,
            ..Default::default()
        };
        st.broadcast_slots.insert(2);
        st.start_round();
        assert!(!st.candidate && st.witness_for.is_none() && st.broadcast_slots.is_empty());
        assert_eq!(st.round_wakes, 0);
        assert!(st.leader && st.knows_terminated);
        assert_eq!(st.awake_slots, 9);
    }
}
