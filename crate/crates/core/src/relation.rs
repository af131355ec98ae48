//! Binary and ternary relations over events.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::program::EventId;

/// A set of ordered event pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation2(pub BTreeSet<(EventId, EventId)>);

impl Relation2 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: EventId, b: EventId) -> bool {
        self.0.insert((a, b))
    }

    pub fn contains(&self, a: EventId, b: EventId) -> bool {
        self.0.contains(&(a, b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventId, EventId)> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &Relation2) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_irreflexive(&self) -> bool {
        self.iter().all(|(a, b)| a != b)
    }

    pub fn is_transitive(&self) -> bool {
        self.iter().all(|(a, b)| {
            self.0
                .range((b, EventId(0))..=(b, EventId(usize::MAX)))
                .all(|&(_, c)| self.contains(a, c))
        })
    }

    /// Edges not implied by a longer path. Only meaningful on a strict partial order.
    pub fn transitive_reduction(&self) -> Relation2 {
        let mut out = Relation2::new();
        for (a, c) in self.iter() {
            let implied = self
                .0
                .range((a, EventId(0))..=(a, EventId(usize::MAX)))
                .any(|&(_, b)| b != c && self.contains(b, c));
            if !implied {
                out.insert(a, c);
            }
        }
        out
    }
}

impl FromIterator<(EventId, EventId)> for Relation2 {
    fn from_iter<T: IntoIterator<Item = (EventId, EventId)>>(iter: T) -> Self {
        Relation2(iter.into_iter().collect())
    }
}

/// One Reads-Bytes-From tuple: `read` observes byte `byte` (block-relative) written by `write`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ByteSource {
    pub read: EventId,
    pub write: EventId,
    pub byte: u32,
}

/// A set of (read, write, byte) triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation3(pub BTreeSet<ByteSource>);

impl Relation3 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, read: EventId, write: EventId, byte: u32) -> bool {
        self.0.insert(ByteSource { read, write, byte })
    }

    pub fn contains(&self, read: EventId, write: EventId, byte: u32) -> bool {
        self.0.contains(&ByteSource { read, write, byte })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ByteSource> + '_ {
        self.0.iter().copied()
    }

    /// Triples whose read is `read`, ordered by writer then byte.
    pub fn of_read(&self, read: EventId) -> impl Iterator<Item = ByteSource> + '_ {
        let lo = ByteSource {
            read,
            write: EventId(0),
            byte: 0,
        };
        let hi = ByteSource {
            read,
            write: EventId(usize::MAX),
            byte: u32::MAX,
        };
        self.0.range(lo..=hi).copied()
    }
}

impl FromIterator<(EventId, EventId, u32)> for Relation3 {
    fn from_iter<T: IntoIterator<Item = (EventId, EventId, u32)>>(iter: T) -> Self {
        Relation3(
            iter.into_iter()
                .map(|(read, write, byte)| ByteSource { read, write, byte })
                .collect(),
        )
    }
}

/// Dense relation over at most 64 events, one `u64` row per event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRel {
    rows: Vec<u64>,
}

impl BitRel {
    pub fn new(n: usize) -> Self {
        assert!(n <= 64, "bit relations hold at most 64 events");
        BitRel { rows: vec![0; n] }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize) {
        self.rows[a] |= 1 << b;
    }

    #[inline]
    pub fn row(&self, a: usize) -> u64 {
        self.rows[a]
    }

    /// Warshall closure in place.
    pub fn close(&mut self) {
        let n = self.rows.len();
        for k in 0..n {
            let rk = self.rows[k];
            for i in 0..n {
                if self.rows[i] >> k & 1 == 1 {
                    self.rows[i] |= rk;
                }
            }
        }
    }

    /// Adds `a -> b` to an already transitively closed relation and re-closes it.
    pub fn add_closed(&mut self, a: usize, b: usize) {
        if self.get(a, b) {
            return;
        }
        let gain = self.rows[b] | 1 << b;
        for x in 0..self.rows.len() {
            if x == a || self.get(x, a) {
                self.rows[x] |= gain;
            }
        }
    }

    pub fn has_self_loop(&self) -> bool {
        self.rows.iter().enumerate().any(|(i, r)| r >> i & 1 == 1)
    }

    pub fn to_relation(&self) -> Relation2 {
        let mut out = Relation2::new();
        for (a, &row) in self.rows.iter().enumerate() {
            let mut bits = row;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.insert(EventId(a), EventId(b));
                bits &= bits - 1;
            }
        }
        out
    }
}
