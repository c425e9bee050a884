//! Round lengths, wake probabilities and per-station random schedules.
//!
//! A station's behaviour during a round's probabilistic phase does not depend
//! on anything it observes, so each station draws its whole wake schedule at
//! the start of the round. Randomness is counter-based: the bits a station
//! uses in round `j` are a pure function of `(trial seed, station label, j)`,
//! which makes runs reproducible and lets tests relabel stations.

use super::SimError;
use crate::numeric::{combine, guarded_ceil, mix64, unit_f64};

/// Largest round length accepted: every integer up to `2^53` is exact in `f64`.
pub const MAX_ROUND_SLOTS: u64 = 1 << 53;

/// Slots whose wake probability is below `2^-64` are never woken, matching a
/// Bernoulli draw from a single 64-bit word.
pub const MAX_WAKE_EXPONENT: u32 = 64;

// Slots with wake probability 2^-1 .. 2^-6 ("head" slots) are decided with
// raw bits of the first word: e zero bits for probability 2^-e. Each slot's
// field is followed by a guard bit, so one addition tests every field at
// once. With k_start = 1 the fields and guards take 21 + 6 = 27 bits.
const HEAD_MAX_EXPONENT: u32 = 6;
const LISTEN_SHIFT: u32 = 27;
// The top 31 bits gate the rare wakes in later ("tail") slots.
const GATE_SHIFT: u32 = 33;
const GATE_BITS: i32 = 31;

/// Length `⌈alpha^round⌉` of a round's probabilistic phase.
///
/// # Panics
///
/// If `round == 0` or `alpha <= 1`.
pub fn round_length(round: u32, alpha: f64) -> Result<u64, SimError> {
    assert!(round >= 1, "rounds are numbered from 1");
    assert!(alpha > 1.0, "alpha must exceed 1");
    let len = guarded_ceil(alpha.powf(round as f64));
    // Also catches an infinite power.
    if len.is_nan() || len > MAX_ROUND_SLOTS as f64 {
        return Err(SimError::Overflow { round });
    }
    Ok(len as u64)
}

/// Wake probability `2^-(k_start + position - 1)` of the slot at 1-based
/// `position` in a round.
pub fn slot_probability(position: u64, k_start: u32) -> f64 {
    assert!(position >= 1 && k_start >= 1);
    let exponent = k_start as f64 + position as f64 - 1.0;
    (-exponent).exp2()
}

/// What an awake station does in a probabilistic slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    Transmit,
    Listen,
}

impl Intent {
    #[inline]
    fn from_bit(bit: u64) -> Self {
        if bit & 1 == 0 {
            Intent::Transmit
        } else {
            Intent::Listen
        }
    }
}

/// Maximum number of head slots.
pub const HEAD_SLOTS: usize = HEAD_MAX_EXPONENT as usize;

/// A station's wakes in the head slots of a round.
///
/// Slots are encoded as bits of a word at schedule-specific positions
/// ([`RoundSchedule::head_position`] maps them back), increasing with the
/// slot position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadDraw {
    word: u64,
    pub woken: u64,
    /// Subset of `woken` in which the station listens rather than transmits.
    pub listen: u64,
}

/// Precomputed sampling tables for one round.
#[derive(Debug, Clone)]
pub struct RoundSchedule {
    round: u32,
    length: u64,
    k_start: u32,
    head_len: usize,
    field_mask: u64,
    field_add: u64,
    guards: u64,
    /// Listen bits (one per head slot, low bits first) spread to guard positions.
    listen_spread: [u64; 1 << HEAD_SLOTS],
    /// Head slot index of each guard bit.
    guard_slot: [u8; 64],
    /// Multiplier hashing a woken mask into `wake_counts`.
    count_magic: u64,
    wake_counts: Box<[u8; 1 << COUNT_HASH_BITS]>,
    tail_probs: Vec<f64>,
    /// `tail_first[t]`: probability of at least one wake among tail slots `0..=t`.
    tail_first: Vec<f64>,
    tail_gate: u64,
    /// Row-major `tail_next[a][t]`: probability of a wake among tail slots `a+1..=t`.
    tail_next: Vec<f64>,
    first_word_key: u64,
}

impl RoundSchedule {
    pub fn new(round: u32, length: u64, k_start: u32) -> Self {
        assert!(k_start >= 1);
        let effective = if k_start > MAX_WAKE_EXPONENT {
            0
        } else {
            length.min((MAX_WAKE_EXPONENT - k_start + 1) as u64) as usize
        };
        let head_len = if k_start > HEAD_MAX_EXPONENT {
            0
        } else {
            effective.min((HEAD_MAX_EXPONENT - k_start + 1) as usize)
        };

        let mut field_mask = 0u64;
        let mut field_add = 0u64;
        let mut guards = 0u64;
        let mut guard_bit = [0u64; HEAD_SLOTS];
        let mut guard_slot = [0u8; 64];
        let mut offset = 0;
        for (h, bit) in guard_bit.iter_mut().enumerate().take(head_len) {
            let exponent = k_start + h as u32;
            let field = ((1u64 << exponent) - 1) << offset;
            field_mask |= field;
            field_add |= field;
            *bit = 1 << (offset + exponent);
            guards |= *bit;
            guard_slot[(offset + exponent) as usize] = h as u8;
            offset += exponent + 1;
        }
        debug_assert!(offset <= LISTEN_SHIFT);
        let mut listen_spread = [0u64; 1 << HEAD_SLOTS];
        for (bits, spread) in listen_spread.iter_mut().enumerate() {
            *spread = (0..head_len)
                .filter(|h| bits >> h & 1 == 1)
                .fold(0, |m, h| m | guard_bit[h]);
        }

        let (count_magic, wake_counts) = wake_count_hash(guards);

        let tail_probs: Vec<f64> = (head_len..effective)
            .map(|i| slot_probability(i as u64 + 1, k_start))
            .collect();
        let tail_len = tail_probs.len();
        let log_keep: Vec<f64> = tail_probs.iter().map(|p| (-p).ln_1p()).collect();

        let mut tail_first = Vec::with_capacity(tail_len);
        let mut acc = 0.0;
        for lk in &log_keep {
            acc += lk;
            tail_first.push(-acc.exp_m1());
        }
        let tail_gate = tail_first
            .last()
            .map(|&f| (f * (GATE_BITS as f64).exp2()).ceil() as u64)
            .unwrap_or(0);

        let mut tail_next = vec![0.0; tail_len * tail_len];
        for a in 0..tail_len {
            let mut acc = 0.0;
            for t in a + 1..tail_len {
                acc += log_keep[t];
                tail_next[a * tail_len + t] = -acc.exp_m1();
            }
        }

        Self {
            round,
            length,
            k_start,
            head_len,
            field_mask,
            field_add,
            guards,
            listen_spread,
            guard_slot,
            count_magic,
            wake_counts,
            tail_probs,
            tail_first,
            tail_gate,
            tail_next,
            first_word_key: combine(round as u64, 0),
        }
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    /// Number of leading slots in which a wake can actually occur.
    pub fn effective_len(&self) -> usize {
        self.head_len + self.tail_probs.len()
    }

    /// Wake probability used by the sampler at `position` (1-based); zero
    /// past [`Self::effective_len`].
    pub fn wake_probability(&self, position: u64) -> f64 {
        if position == 0 || position > self.effective_len() as u64 {
            0.0
        } else {
            slot_probability(position, self.k_start)
        }
    }

    /// Number of leading slots decided by [`Self::draw_head`] alone.
    pub fn head_len(&self) -> usize {
        self.head_len
    }

    /// 1-based slot position of a bit of [`HeadDraw::woken`].
    #[inline]
    pub fn head_position(&self, bit: u32) -> u32 {
        self.guard_slot[bit as usize] as u32 + 1
    }

    /// Number of head slots in a [`HeadDraw::woken`] mask.
    #[inline]
    pub fn head_count(&self, woken: u64) -> u32 {
        self.wake_counts[(woken.wrapping_mul(self.count_magic) >> (64 - COUNT_HASH_BITS)) as usize]
            as u32
    }

    /// Mask of all bits [`HeadDraw::woken`] can contain.
    pub fn head_bits(&self) -> u64 {
        self.guards
    }

    /// Draws a station's wakes in the head slots.
    #[inline]
    pub fn draw_head(&self, key: u64) -> HeadDraw {
        let word = mix64(key ^ self.first_word_key);
        // A guard bit stays clear exactly when its field is all zeros.
        let woken = !((word & self.field_mask) + self.field_add) & self.guards;
        let listen = self.listen_spread[(word >> LISTEN_SHIFT) as usize & ((1 << HEAD_SLOTS) - 1)];
        HeadDraw {
            word,
            woken,
            listen: listen & woken,
        }
    }

    /// Whether the station also wakes somewhere past the head slots.
    #[inline]
    pub fn has_tail(&self, draw: &HeadDraw) -> bool {
        draw.word >> GATE_SHIFT < self.tail_gate
    }

    /// Reports the station's wakes past the head slots, in increasing
    /// position order. Call only if [`Self::has_tail`] holds.
    pub fn draw_tail(&self, key: u64, draw: &HeadDraw, visit: impl FnMut(u32, Intent)) {
        self.sample_tail(key, draw.word >> GATE_SHIFT, visit);
    }

    /// Draws one station's schedule and reports each wake as
    /// `(position, intent)` in increasing position order.
    #[inline]
    pub fn sample_station(&self, key: u64, mut visit: impl FnMut(u32, Intent)) {
        let draw = self.draw_head(key);
        let mut woken = draw.woken;
        while woken != 0 {
            let bit = woken.trailing_zeros();
            woken &= woken - 1;
            let intent = if draw.listen >> bit & 1 == 1 {
                Intent::Listen
            } else {
                Intent::Transmit
            };
            visit(self.head_position(bit), intent);
        }
        if self.has_tail(&draw) {
            self.draw_tail(key, &draw, visit);
        }
    }

    #[cold]
    fn sample_tail(&self, key: u64, gate: u64, mut visit: impl FnMut(u32, Intent)) {
        let tail_len = self.tail_probs.len();
        let base = self.head_len as u32 + 1;
        let w1 = mix64(key ^ combine(self.round as u64, 1));
        // Uniform on [0, 2^-31 * tail_gate), refined with 53 fresh bits.
        let u = (gate as f64 + unit_f64(w1)) * (-GATE_BITS as f64).exp2();
        let Some(mut last) = self.tail_first.iter().position(|&f| u < f) else {
            return;
        };
        visit(base + last as u32, Intent::from_bit(w1));
        let mut draw = 2u64;
        while last + 1 < tail_len {
            let w = mix64(key ^ combine(self.round as u64, draw));
            draw += 1;
            let u = unit_f64(w);
            let row = &self.tail_next[last * tail_len..(last + 1) * tail_len];
            if u >= row[tail_len - 1] {
                return;
            }
            last = (last + 1..tail_len)
                .find(|&t| u < row[t])
                .expect("row is non-decreasing and ends above u");
            visit(base + last as u32, Intent::from_bit(w));
        }
    }
}

/// Source of per-station randomness for one execution.
///
/// Station `s` draws from the stream named by its label (by default `s`
/// itself). Running with permuted labels gives every station the random
/// choices another station had in the original run.
#[derive(Debug, Clone)]
pub struct StationCoins {
    seed: u64,
    labels: Option<Vec<u64>>,
}

impl StationCoins {
    pub fn new(seed: u64) -> Self {
        Self { seed, labels: None }
    }

    pub fn with_labels(seed: u64, labels: Vec<u64>) -> Self {
        Self {
            seed,
            labels: Some(labels),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self, station: usize) -> u64 {
        match &self.labels {
            Some(labels) => labels[station],
            None => station as u64,
        }
    }

    pub fn station_key(&self, station: usize) -> u64 {
        combine(self.seed, self.label(station))
    }

    pub(crate) fn fill_keys(&self, n: usize, keys: &mut Vec<u64>) {
        if let Some(labels) = &self.labels {
            assert_eq!(labels.len(), n, "one label per station");
        }
        keys.clear();
        keys.extend((0..n).map(|s| self.station_key(s)));
    }
}

const COUNT_HASH_BITS: u32 = 12;

// Finds a multiplier under which every subset of `guards` hashes to a table
// cell holding its size (the baseline x86-64 target has no popcount
// instruction). Checked exhaustively over all subsets.
fn wake_count_hash(guards: u64) -> (u64, Box<[u8; 1 << COUNT_HASH_BITS]>) {
    let bits: Vec<u64> = (0..64)
        .filter(|b| guards >> b & 1 == 1)
        .map(|b| 1 << b)
        .collect();
    'search: for i in 0u64.. {
        let magic = mix64(i) | 1;
        let mut table = Box::new([u8::MAX; 1 << COUNT_HASH_BITS]);
        for subset in 0u32..1 << bits.len() {
            let mask = (0..bits.len())
                .filter(|&h| subset >> h & 1 == 1)
                .fold(0, |m, h| m | bits[h]);
            let cell = &mut table[(mask.wrapping_mul(magic) >> (64 - COUNT_HASH_BITS)) as usize];
            let count = subset.count_ones() as u8;
            if *cell != u8::MAX && *cell != count {
                continue 'search;
            }
            *cell = count;
        }
        return (magic, table);
    }
    unreachable!()
}

/// Stations awake in one probabilistic slot, by intent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SlotWakes {
    pub transmit: Vec<u32>,
    pub listen: Vec<u32>,
}

/// Every station's wake schedule for one round, grouped by slot.
///
/// Only the first [`RoundSchedule::effective_len`] slots are stored; every
/// station sleeps through the rest.
#[derive(Debug, Clone, Default)]
pub struct RoundPlan {
    length: u64,
    slots: Vec<SlotWakes>,
}

impl RoundPlan {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a plan from explicit `(position, station, intent)` wakes.
    pub fn scripted(length: u64, wakes: impl IntoIterator<Item = (u32, u32, Intent)>) -> Self {
        let mut plan = Self {
            length,
            slots: Vec::new(),
        };
        for (position, station, intent) in wakes {
            assert!(
                position >= 1 && position as u64 <= length && position <= MAX_WAKE_EXPONENT,
                "position {position} outside the round"
            );
            let idx = position as usize - 1;
            if plan.slots.len() <= idx {
                plan.slots.resize_with(idx + 1, SlotWakes::default);
            }
            plan.push(idx, station, intent);
        }
        plan
    }

    /// Resamples the plan for `n = keys.len()` stations, reusing buffers.
    pub fn sample(&mut self, schedule: &RoundSchedule, keys: &[u64]) {
        self.length = schedule.length();
        let eff = schedule.effective_len();
        self.slots.resize_with(eff, SlotWakes::default);
        for slot in &mut self.slots {
            slot.transmit.clear();
            slot.listen.clear();
        }
        let slots = &mut self.slots;
        for (station, &key) in keys.iter().enumerate() {
            schedule.sample_station(key, |position, intent| {
                let slot = &mut slots[position as usize - 1];
                match intent {
                    Intent::Transmit => slot.transmit.push(station as u32),
                    Intent::Listen => slot.listen.push(station as u32),
                }
            });
        }
    }

    fn push(&mut self, idx: usize, station: u32, intent: Intent) {
        match intent {
            Intent::Transmit => self.slots[idx].transmit.push(station),
            Intent::Listen => self.slots[idx].listen.push(station),
        }
    }

    /// Full length of the probabilistic phase, including trailing slots in
    /// which nobody wakes.
    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn slots(&self) -> &[SlotWakes] {
        &self.slots
    }
}
