//! Finite words over {0,1} and infinite binary sequences.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::budget::Meter;
use crate::error::{Error, Result};

/// A finite binary word. Bits are stored as `0`/`1` bytes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    bits: Vec<u8>,
}

impl Word {
    pub fn empty() -> Self {
        Word { bits: Vec::new() }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b));
        }
        Ok(Word { bits: bits.to_vec() })
    }

    pub(crate) fn from_vec_unchecked(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Word { bits }
    }

    pub fn repeat(bit: u8, n: usize) -> Self {
        assert!(bit <= 1, "bit must be 0 or 1");
        Word { bits: vec![bit; n] }
    }

    pub fn zeros(n: usize) -> Self {
        Word::repeat(0, n)
    }

    pub fn ones(n: usize) -> Self {
        Word::repeat(1, n)
    }

    /// The `idx`-th word of length `len` in lexicographic order.
    pub fn from_index(len: usize, idx: u64) -> Self {
        let bits = (0..len)
            .map(|i| {
                let shift = len - 1 - i;
                if shift >= 64 {
                    0
                } else {
                    ((idx >> shift) & 1) as u8
                }
            })
            .collect();
        Word { bits }
    }

    /// Position of this word inside its level (bits read most significant first).
    /// Only meaningful for words of length at most 64.
    pub fn index(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> Option<u8> {
        self.bits.get(i).copied()
    }

    pub fn child(&self, bit: u8) -> Word {
        assert!(bit <= 1, "bit must be 0 or 1");
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(bit);
        Word { bits }
    }

    pub fn parent(&self) -> Option<Word> {
        if self.is_empty() {
            None
        } else {
            Some(Word { bits: self.bits[..self.bits.len() - 1].to_vec() })
        }
    }

    pub fn restrict(&self, n: usize) -> Result<Word> {
        if n > self.len() {
            return Err(Error::OutOfRange { n, len: self.len() });
        }
        Ok(Word { bits: self.bits[..n].to_vec() })
    }

    /// Prefix of length `min(n, len)`.
    pub fn prefix(&self, n: usize) -> Word {
        Word { bits: self.bits[..n.min(self.len())].to_vec() }
    }

    /// All restrictions `u↾0, u↾1, …, u↾len`.
    pub fn prefixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.len()).map(move |k| self.prefix(k))
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.bits.starts_with(&self.bits)
    }

    /// `u < v`: equal lengths, and at the first difference `u` has 0, `v` has 1.
    pub fn lex_less(&self, other: &Word) -> bool {
        if self.len() != other.len() {
            return false;
        }
        match self.bits.iter().zip(&other.bits).position(|(a, b)| a != b) {
            Some(k) => self.bits[k] == 0 && other.bits[k] == 1,
            None => false,
        }
    }

    /// Membership in 𝒩: nonempty and all zeros.
    pub fn is_zero_block(&self) -> bool {
        !self.is_empty() && self.bits.iter().all(|&b| b == 0)
    }

    /// Membership in ℰ: nonempty and all ones.
    pub fn is_one_block(&self) -> bool {
        !self.is_empty() && self.bits.iter().all(|&b| b == 1)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Extends this word with zeros up to length `n` (no-op if already longer).
    pub fn pad_zeros(&self, n: usize) -> Word {
        let mut bits = self.bits.clone();
        if bits.len() < n {
            bits.resize(n, 0);
        }
        Word { bits }
    }

    /// `u∗𝟎`.
    pub fn then_zeros(&self) -> Seq {
        Seq::eventually(self.clone(), 0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("e");
        }
        for &b in &self.bits {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a binary word: {0:?}")]
pub struct ParseWordError(pub String);

impl FromStr for Word {
    type Err = ParseWordError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "e" || s == "ε" {
            return Ok(Word::empty());
        }
        if s.is_empty() {
            return Err(ParseWordError(s.to_string()));
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(ParseWordError(s.to_string())),
            })
            .collect::<std::result::Result<Vec<u8>, _>>()
            .map(|bits| Word { bits })
    }
}

/// Concatenation `u∗tail`; the result has the kind of `tail`.
pub trait Concat<Rhs: ?Sized> {
    type Output;
    fn concat(&self, tail: &Rhs) -> Self::Output;
}

impl Concat<Word> for Word {
    type Output = Word;
    fn concat(&self, tail: &Word) -> Word {
        let mut bits = Vec::with_capacity(self.len() + tail.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&tail.bits);
        Word { bits }
    }
}

impl Concat<Seq> for Word {
    type Output = Seq;
    fn concat(&self, tail: &Seq) -> Seq {
        Seq { prefix: self.concat(&tail.prefix), tail: tail.tail.clone() }
    }
}

/// All words of length `n` in lexicographic order, charged against `meter`.
pub fn level(n: usize, meter: &mut Meter) -> Result<Vec<Word>> {
    meter.charge_level(n)?;
    Ok(Level::new(n).collect())
}

/// Lazy iterator over a level; does not charge any budget.
#[derive(Debug, Clone)]
pub struct Level {
    len: usize,
    next: u64,
    end: u64,
}

impl Level {
    pub fn new(len: usize) -> Self {
        assert!(len < 64, "levels beyond 63 bits cannot be enumerated");
        Level { len, next: 0, end: 1u64 << len }
    }

    /// Level `len` restricted to extensions of `base` (words `base∗w`).
    pub fn under(base: &Word, len: usize) -> impl Iterator<Item = Word> + '_ {
        Level::new(len).map(move |w| base.concat(&w))
    }
}

impl Iterator for Level {
    type Item = Word;
    fn next(&mut self) -> Option<Word> {
        if self.next >= self.end {
            return None;
        }
        let w = Word::from_index(self.len, self.next);
        self.next += 1;
        Some(w)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Level {}

type Rule = Arc<dyn Fn(usize) -> u8 + Send + Sync>;

#[derive(Clone)]
enum Tail {
    Constant(u8),
    Cycle(Word),
    Rule(Rule),
}

/// An infinite binary sequence: a finite prefix followed by a tail.
///
/// Opaque tails are evaluated by a rule whose index is relative to the end
/// of the prefix; the rule must be deterministic.
#[derive(Clone)]
pub struct Seq {
    prefix: Word,
    tail: Tail,
}

/// Declared shape of a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqKind<'a> {
    EventuallyConstant { prefix: &'a Word, tail: u8 },
    Periodic { prefix: &'a Word, cycle: &'a Word },
    Opaque,
}

impl Seq {
    /// `𝟎 = (0,0,0,…)`.
    pub fn zeros() -> Self {
        Seq::eventually(Word::empty(), 0)
    }

    pub fn ones() -> Self {
        Seq::eventually(Word::empty(), 1)
    }

    pub fn eventually(prefix: Word, tail: u8) -> Self {
        assert!(tail <= 1, "bit must be 0 or 1");
        Seq { prefix, tail: Tail::Constant(tail) }
    }

    /// `prefix ∗ cycle ∗ cycle ∗ …`. An empty cycle is read as the constant 0 tail.
    pub fn periodic(prefix: Word, cycle: Word) -> Self {
        if cycle.is_empty() {
            return Seq::eventually(prefix, 0);
        }
        Seq { prefix, tail: Tail::Cycle(cycle) }
    }

    pub fn from_fn(rule: impl Fn(usize) -> u8 + Send + Sync + 'static) -> Self {
        Seq { prefix: Word::empty(), tail: Tail::Rule(Arc::new(rule)) }
    }

    /// Sequence with a single 1 at `index` (or `𝟎` when `None`).
    pub fn single_one(index: Option<usize>) -> Self {
        match index {
            Some(i) => Seq::eventually(Word::zeros(i).child(1), 0),
            None => Seq::zeros(),
        }
    }

    pub fn kind(&self) -> SeqKind<'_> {
        match &self.tail {
            Tail::Constant(b) => SeqKind::EventuallyConstant { prefix: &self.prefix, tail: *b },
            Tail::Cycle(c) => SeqKind::Periodic { prefix: &self.prefix, cycle: c },
            Tail::Rule(_) => SeqKind::Opaque,
        }
    }

    pub fn get(&self, i: usize) -> u8 {
        if let Some(b) = self.prefix.bit(i) {
            return b;
        }
        let j = i - self.prefix.len();
        match &self.tail {
            Tail::Constant(b) => *b,
            Tail::Cycle(c) => c.bits()[j % c.len()],
            Tail::Rule(r) => {
                let b = r(j);
                debug_assert!(b <= 1, "sequence rule produced a non-bit");
                b & 1
            }
        }
    }

    /// `α↾n`.
    pub fn restrict(&self, n: usize) -> Word {
        Word::from_vec_unchecked((0..n).map(|i| self.get(i)).collect())
    }

    /// Length of the declared non-repeating part, if the kind is not opaque.
    pub fn settled_after(&self) -> Option<usize> {
        match &self.tail {
            Tail::Rule(_) => None,
            _ => Some(self.prefix.len()),
        }
    }
}

impl fmt::Debug for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seq({self})")
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = if self.prefix.is_empty() { String::new() } else { self.prefix.to_string() };
        match &self.tail {
            Tail::Constant(b) => write!(f, "{head}({b})^ω"),
            Tail::Cycle(c) => write!(f, "{head}({c})^ω"),
            Tail::Rule(_) => write!(f, "{head}{}…", Word::from_vec_unchecked((0..8).map(|i| self.get(self.prefix.len() + i)).collect())),
        }
    }
}
