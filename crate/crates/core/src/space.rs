//! Finite sample spaces and their events.
//!
//! The event algebra of a finite space is the full power set, so an event is
//! just a bitset over point indices. Exhaustive loops over all `2^n` events
//! are the verification oracle of choice in this crate; they are gated to
//! spaces of at most [`MAX_BRUTE_FORCE_POINTS`] points.

use std::fmt;
use std::sync::Arc;

/// Exhaustive `2^n` event loops refuse to run above this size.
pub const MAX_BRUTE_FORCE_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("a finite space needs at least one point")]
    Empty,
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown point label {0:?}")]
    UnknownLabel(String),
}

/// An ordered finite set of labelled points; the σ-algebra is the power set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    points: Vec<String>,
}

impl FiniteSpace {
    pub fn new<I, T>(labels: I) -> Result<Arc<Self>, SpaceError>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let points: Vec<String> = labels.into_iter().map(Into::into).collect();
        if points.is_empty() {
            return Err(SpaceError::Empty);
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(SpaceError::DuplicateLabel(p.clone()));
            }
        }
        Ok(Arc::new(FiniteSpace { points }))
    }

    /// Space with points labelled `"0".."n-1"`.
    pub fn indexed(n: usize) -> Arc<Self> {
        Self::new((0..n).map(|i| i.to_string())).expect("n >= 1")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: size >= 1
    }

    pub fn labels(&self) -> &[String] {
        &self.points
    }

    pub fn label(&self, index: usize) -> &str {
        &self.points[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SpaceError> {
        self.points
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| SpaceError::UnknownLabel(label.to_string()))
    }

    /// The full event Ω.
    pub fn full_event(&self) -> Event {
        Event::full(self.len())
    }
}

/// A measurable event: a subset of point indices, stored as a bitset.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    bits: u64,
    universe: usize,
}

impl Event {
    pub fn empty(universe: usize) -> Self {
        assert!(universe <= 64, "event bitsets support at most 64 points");
        Event { bits: 0, universe }
    }

    pub fn full(universe: usize) -> Self {
        assert!(universe <= 64, "event bitsets support at most 64 points");
        let bits = if universe == 64 {
            u64::MAX
        } else {
            (1u64 << universe) - 1
        };
        Event { bits, universe }
    }

    pub fn singleton(universe: usize, index: usize) -> Self {
        let mut e = Self::empty(universe);
        e.insert(index);
        e
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut e = Self::empty(universe);
        for i in indices {
            e.insert(i);
        }
        e
    }

    /// Event with the given raw bit pattern; used by exhaustive loops.
    pub fn from_bits(universe: usize, bits: u64) -> Self {
        let full = Self::full(universe);
        assert!(bits & !full.bits == 0, "bits outside universe");
        Event { bits, universe }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.universe, "point index out of range");
        self.bits |= 1 << index;
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.universe && self.bits & (1 << index) != 0
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn union(&self, other: &Event) -> Event {
        assert_eq!(self.universe, other.universe);
        Event {
            bits: self.bits | other.bits,
            universe: self.universe,
        }
    }

    pub fn intersection(&self, other: &Event) -> Event {
        assert_eq!(self.universe, other.universe);
        Event {
            bits: self.bits & other.bits,
            universe: self.universe,
        }
    }

    pub fn complement(&self) -> Event {
        Event {
            bits: !self.bits & Event::full(self.universe).bits,
            universe: self.universe,
        }
    }

    pub fn is_subset_of(&self, other: &Event) -> bool {
        assert_eq!(self.universe, other.universe);
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint_from(&self, other: &Event) -> bool {
        assert_eq!(self.universe, other.universe);
        self.bits & other.bits == 0
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |i| self.contains(*i))
    }

    /// All `2^universe` events, for brute-force verification only.
    pub fn all_events(universe: usize) -> impl Iterator<Item = Event> {
        assert!(
            universe <= MAX_BRUTE_FORCE_POINTS,
            "brute-force event enumeration is gated to {MAX_BRUTE_FORCE_POINTS} points"
        );
        (0u64..(1u64 << universe)).map(move |bits| Event { bits, universe })
    }

    /// Render as `{a, b}` using the space's labels.
    pub fn describe(&self, space: &FiniteSpace) -> String {
        let mut names: Vec<&str> = Vec::new();
        for i in self.iter() {
            names.push(space.label(i));
        }
        format!("{{{}}}", names.join(", "))
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Event{{")?;
        let mut first = true;
        for i in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        write!(f, "}}")
    }
}
