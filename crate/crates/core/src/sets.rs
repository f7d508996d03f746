//! Decidable sets of words, the operators `A°`, `Ā`, `A_u`, and the
//! bar / uniform-bar / convexity scans.
//!
//! A [`DSet`] is detachable by construction: it is a total membership
//! function. An optional stabilization depth `s` declares that membership
//! is invariant under extension for every word of length at least `s`,
//! which is what makes interiors and negative bar verdicts computable.

use std::fmt;
use std::sync::Arc;

use crate::budget::Meter;
use crate::error::{Error, Result};
use crate::words::{Concat, Level, Seq, Word};

/// Depth to which declared flags are validated on construction.
pub const FLAG_HORIZON: usize = 8;

type Member = Arc<dyn Fn(&Word) -> bool + Send + Sync>;

/// Claimed structural properties of a set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub extension_closed: bool,
    pub restriction_closed: bool,
    pub convex: bool,
    pub co_convex: bool,
}

impl Flags {
    pub const NONE: Flags =
        Flags { extension_closed: false, restriction_closed: false, convex: false, co_convex: false };

    pub fn extension_closed() -> Flags {
        Flags { extension_closed: true, ..Flags::NONE }
    }

    pub fn restriction_closed() -> Flags {
        Flags { restriction_closed: true, ..Flags::NONE }
    }

    pub fn union(self, other: Flags) -> Flags {
        Flags {
            extension_closed: self.extension_closed || other.extension_closed,
            restriction_closed: self.restriction_closed || other.restriction_closed,
            convex: self.convex || other.convex,
            co_convex: self.co_convex || other.co_convex,
        }
    }
}

/// A decidable subset of all finite words.
#[derive(Clone)]
pub struct DSet {
    member: Member,
    stab: Option<usize>,
    flags: Flags,
}

impl fmt::Debug for DSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DSet").field("stab", &self.stab).field("flags", &self.flags).finish()
    }
}

impl DSet {
    pub fn new(member: impl Fn(&Word) -> bool + Send + Sync + 'static) -> Self {
        DSet { member: Arc::new(member), stab: None, flags: Flags::NONE }
    }

    /// A set whose membership is fixed by the first `stab` bits:
    /// `u ∈ A ⇔ f(u↾min(|u|, stab))`.
    pub fn stabilized(stab: usize, f: impl Fn(&Word) -> bool + Send + Sync + 'static) -> Self {
        DSet::new(move |u: &Word| {
            if u.len() > stab {
                f(&u.prefix(stab))
            } else {
                f(u)
            }
        })
        .with_stab(stab)
    }

    pub fn empty() -> Self {
        DSet::new(|_| false).with_stab(0).trust_flags(Flags {
            extension_closed: true,
            restriction_closed: true,
            convex: true,
            co_convex: true,
        })
    }

    pub fn full() -> Self {
        DSet::new(|_| true).with_stab(0).trust_flags(Flags {
            extension_closed: true,
            restriction_closed: true,
            convex: true,
            co_convex: true,
        })
    }

    /// `{u | |u| ≥ k}`.
    pub fn len_ge(k: usize) -> Self {
        DSet::new(move |u| u.len() >= k).with_stab(k).trust_flags(Flags {
            extension_closed: true,
            convex: true,
            co_convex: true,
            ..Flags::NONE
        })
    }

    /// `{0,1}^n` as a set.
    pub fn level(n: usize) -> Self {
        DSet::new(move |u| u.len() == n).with_stab(n + 1).trust_flags(Flags {
            convex: true,
            co_convex: true,
            ..Flags::NONE
        })
    }

    /// `{u | |u| > i ∧ u_i = b}`.
    pub fn bit(i: usize, b: u8) -> Self {
        DSet::new(move |u| u.bit(i) == Some(b)).with_stab(i + 1).trust_flags(Flags::extension_closed())
    }

    /// Words extending `w`.
    pub fn prefix(w: Word) -> Self {
        let s = w.len();
        DSet::new(move |u| w.is_prefix_of(u)).with_stab(s).trust_flags(Flags {
            extension_closed: true,
            convex: true,
            ..Flags::NONE
        })
    }

    pub fn finite(words: impl IntoIterator<Item = Word>) -> Self {
        let mut words: Vec<Word> = words.into_iter().collect();
        words.sort();
        words.dedup();
        let stab = words.iter().map(|w| w.len() + 1).max().unwrap_or(0);
        DSet::new(move |u| words.binary_search(u).is_ok()).with_stab(stab)
    }

    /// `{u | u has at least k ones}`; no stabilization depth.
    pub fn count_ones_ge(k: usize) -> Self {
        DSet::new(move |u| u.count_ones() >= k).trust_flags(Flags::extension_closed())
    }

    /// `{ε} ∪ 𝒩`: the all-zero tree.
    pub fn zeros_tree() -> Self {
        DSet::new(|u| u.bits().iter().all(|&b| b == 0)).trust_flags(Flags {
            restriction_closed: true,
            convex: true,
            ..Flags::NONE
        })
    }

    /// `{ε} ∪ ℰ`: the all-one tree.
    pub fn ones_tree() -> Self {
        DSet::new(|u| u.bits().iter().all(|&b| b == 1)).trust_flags(Flags {
            restriction_closed: true,
            convex: true,
            ..Flags::NONE
        })
    }

    /// Declares a stabilization depth (not checked; see [`DSet::stab_violation`]).
    pub fn with_stab(mut self, stab: usize) -> Self {
        self.stab = Some(stab);
        self
    }

    pub fn without_stab(mut self) -> Self {
        self.stab = None;
        self
    }

    /// Declares flags after validating them up to [`FLAG_HORIZON`].
    pub fn with_flags(self, flags: Flags) -> Result<Self> {
        let merged = self.flags.union(flags);
        let candidate = DSet { flags: merged, ..self };
        candidate.validate_flags(flags, FLAG_HORIZON)?;
        Ok(candidate)
    }

    pub(crate) fn trust_flags(mut self, flags: Flags) -> Self {
        self.flags = self.flags.union(flags);
        self
    }

    pub fn contains(&self, u: &Word) -> bool {
        (self.member)(u)
    }

    pub fn stab(&self) -> Option<usize> {
        self.stab
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub(crate) fn require_stab(&self, what: &str) -> Result<usize> {
        self.stab.ok_or_else(|| Error::precondition(format!("{what} requires a declared stabilization depth")))
    }

    /// Checks the given flags on all words of length at most `horizon`.
    pub fn validate_flags(&self, flags: Flags, horizon: usize) -> Result<()> {
        for n in 0..=horizon {
            for u in Level::new(n) {
                let inside = self.contains(&u);
                if flags.extension_closed && inside && n < horizon {
                    for b in 0..2 {
                        if !self.contains(&u.child(b)) {
                            return Err(Error::FlagViolation { flag: "extension-closed", witness: u.child(b) });
                        }
                    }
                }
                if flags.restriction_closed && inside {
                    if let Some(p) = u.parent() {
                        if !self.contains(&p) {
                            return Err(Error::FlagViolation { flag: "restriction-closed", witness: u });
                        }
                    }
                }
            }
            if flags.convex {
                if let Some((_, mid, _)) = level_gap(n, |u| self.contains(u)) {
                    return Err(Error::FlagViolation { flag: "convex", witness: mid });
                }
            }
            if flags.co_convex {
                if let Some((_, mid, _)) = level_gap(n, |u| !self.contains(u)) {
                    return Err(Error::FlagViolation { flag: "co-convex", witness: mid });
                }
            }
        }
        Ok(())
    }

    /// First word `v` with `s ≤ |v| < depth` whose membership differs from a child's.
    pub fn stab_violation(&self, depth: usize) -> Option<Word> {
        let s = self.stab?;
        for n in s..depth {
            for v in Level::new(n) {
                let inside = self.contains(&v);
                for b in 0..2 {
                    if self.contains(&v.child(b)) != inside {
                        return Some(v.child(b));
                    }
                }
            }
        }
        None
    }

    pub fn complement(&self) -> DSet {
        let m = self.member.clone();
        let mut out = DSet::new(move |u| !m(u));
        out.stab = self.stab;
        out.flags = Flags {
            extension_closed: self.flags.restriction_closed,
            restriction_closed: self.flags.extension_closed,
            convex: self.flags.co_convex,
            co_convex: self.flags.convex,
        };
        out
    }

    pub fn union(&self, other: &DSet) -> DSet {
        let (a, b) = (self.member.clone(), other.member.clone());
        let mut out = DSet::new(move |u| a(u) || b(u));
        out.stab = max_stab(self.stab, other.stab);
        out.flags.extension_closed = self.flags.extension_closed && other.flags.extension_closed;
        out.flags.restriction_closed = self.flags.restriction_closed && other.flags.restriction_closed;
        out
    }

    pub fn intersect(&self, other: &DSet) -> DSet {
        let (a, b) = (self.member.clone(), other.member.clone());
        let mut out = DSet::new(move |u| a(u) && b(u));
        out.stab = max_stab(self.stab, other.stab);
        out.flags.extension_closed = self.flags.extension_closed && other.flags.extension_closed;
        out.flags.restriction_closed = self.flags.restriction_closed && other.flags.restriction_closed;
        out
    }

    /// `Ā = {u∗w | u ∈ A}`: words having some prefix in `A`.
    pub fn closure(&self) -> DSet {
        let m = self.member.clone();
        let mut out = DSet::new(move |u: &Word| u.prefixes().any(|p| m(&p)));
        out.stab = self.stab;
        out.flags = Flags { extension_closed: true, ..Flags::NONE };
        // closure preserves co-convexity
        out.flags.co_convex = self.flags.co_convex;
        out
    }

    /// `A_u = {w | u∗w ∈ A}`.
    pub fn restricted(&self, u: &Word) -> DSet {
        let m = self.member.clone();
        let base = u.clone();
        let mut out = DSet::new(move |w| m(&base.concat(w)));
        out.stab = self.stab.map(|s| s.saturating_sub(u.len()));
        out.flags.extension_closed = self.flags.extension_closed;
        out
    }

    /// `A° = {u | ∀w u∗w ∈ A}`, via `u ∈ A° ⇔ u ∈ A ∧ u0 ∈ A° ∧ u1 ∈ A°`
    /// bottoming out at the stabilization depth.
    ///
    /// The result is tabulated when the table fits the enumeration budget.
    pub fn interior(&self) -> Result<DSet> {
        let s = self.require_stab("interior")?;
        let mut meter = Meter::new();
        let flags = Flags { extension_closed: true, ..Flags::NONE };
        if s < 40 && meter.charge_level(s + 1).is_ok() {
            // bottom-up table over levels 0..=s
            let mut table: Vec<Vec<bool>> = vec![Vec::new(); s + 1];
            table[s] = Level::new(s).map(|u| self.contains(&u)).collect();
            for n in (0..s).rev() {
                let above = &table[n + 1];
                let this: Vec<bool> = Level::new(n)
                    .enumerate()
                    .map(|(i, u)| above[2 * i] && above[2 * i + 1] && self.contains(&u))
                    .collect();
                table[n] = this;
            }
            let table = Arc::new(table);
            return Ok(DSet::new(move |u: &Word| {
                let k = u.len().min(s);
                table[k][u.prefix(k).index() as usize]
            })
            .with_stab(s)
            .trust_flags(flags));
        }
        let m = self.member.clone();
        Ok(DSet::new(move |u| interior_rec(&m, u, s)).with_stab(s).trust_flags(flags))
    }

    /// A table-backed copy of a stabilized set, when the table fits the budget.
    pub fn tabulated(&self) -> DSet {
        let Some(s) = self.stab else { return self.clone() };
        let mut meter = Meter::new();
        if s >= 40 || meter.charge_level(s + 1).is_err() {
            return self.clone();
        }
        let table: Vec<Vec<bool>> =
            (0..=s).map(|n| Level::new(n).map(|u| self.contains(&u)).collect()).collect();
        let table = Arc::new(table);
        DSet { member: Arc::new(move |u: &Word| {
            let k = u.len().min(s);
            table[k][u.prefix(k).index() as usize]
        }), stab: self.stab, flags: self.flags }
    }
}

fn interior_rec(m: &Member, u: &Word, s: usize) -> bool {
    if !m(u) {
        return false;
    }
    if u.len() >= s {
        return true;
    }
    interior_rec(m, &u.child(0), s) && interior_rec(m, &u.child(1), s)
}

fn max_stab(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    Some(a?.max(b?))
}

/// On level `n`, a triple `lo < mid < hi` with `lo, hi` selected and `mid` not.
fn level_gap(n: usize, selected: impl Fn(&Word) -> bool) -> Option<(Word, Word, Word)> {
    let mut first: Option<Word> = None;
    let mut gap: Option<Word> = None;
    for u in Level::new(n) {
        if selected(&u) {
            if let (Some(lo), Some(mid)) = (&first, &gap) {
                return Some((lo.clone(), mid.clone(), u));
            }
            if first.is_none() {
                first = Some(u);
            }
        } else if first.is_some() && gap.is_none() {
            gap = Some(u);
        }
    }
    None
}

/// Payload of a verdict.
#[derive(Debug, Clone)]
pub enum Evidence {
    /// A least bound `N`.
    Bound(usize),
    /// Consistent with the claim up to this depth.
    Depth(usize),
    /// The first level at which the claim fails.
    Level(usize),
    Word(Word),
    /// A sequence avoiding the set forever.
    Escape(Seq),
    /// `low < mid < high` violating (co-)convexity.
    Between { low: Word, mid: Word, high: Word },
}

/// Three-valued outcome of a finite check.
#[derive(Debug, Clone)]
pub enum Verdict {
    Yes(Evidence),
    No(Evidence),
    Unknown { depth: usize },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    /// The bound of a `Yes(Bound(N))` verdict.
    pub fn bound(&self) -> Option<usize> {
        match self {
            Verdict::Yes(Evidence::Bound(n)) => Some(*n),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    CoConvex,
}

// Words of level n with no prefix in `set`, level by level.
fn avoiders_scan(set: &DSet, max: usize, stop_at_stab: bool) -> Result<Verdict> {
    let mut meter = Meter::new();
    meter.charge(1)?;
    let root = Word::empty();
    let mut alive: Vec<Word> = if set.contains(&root) { Vec::new() } else { vec![root] };
    for n in 0..=max {
        if alive.is_empty() {
            return Ok(Verdict::Yes(Evidence::Bound(n)));
        }
        if stop_at_stab && set.stab() == Some(n) {
            return Ok(Verdict::No(Evidence::Escape(alive[0].then_zeros())));
        }
        if n == max {
            break;
        }
        meter.charge(2 * alive.len() as u64)?;
        alive = alive
            .iter()
            .flat_map(|u| [u.child(0), u.child(1)])
            .filter(|v| !set.contains(v))
            .collect();
    }
    Ok(Verdict::Unknown { depth: max })
}

/// Is `B` a bar? `Yes(Bound(N))` with the least `N ≤ d`, `No(Escape(u∗𝟎))`
/// when the stabilization depth certifies an escape, else `Unknown(d)`.
pub fn bar_verdict(b: &DSet, d: usize) -> Result<Verdict> {
    avoiders_scan(b, d, true)
}

/// Least `N ≤ max_n` with every level-`N` word having a prefix in `B`.
pub fn uniform_bound(b: &DSet, max_n: usize) -> Result<Verdict> {
    avoiders_scan(b, max_n, false)
}

/// For extension-closed `B`: least `N` with `{0,1}^N ⊆ B`.
pub fn uniform_bound_ext_closed(b: &DSet, max_n: usize) -> Result<Verdict> {
    if !b.flags().extension_closed {
        return Err(Error::precondition("uniform_bound_ext_closed requires an extension-closed set"));
    }
    let mut meter = Meter::new();
    for n in 0..=max_n {
        meter.charge_level(n)?;
        if Level::new(n).all(|u| b.contains(&u)) {
            return Ok(Verdict::Yes(Evidence::Bound(n)));
        }
    }
    Ok(Verdict::Unknown { depth: max_n })
}

/// Per-level (co-)convexity check for all levels `≤ d`.
pub fn convexity_verdict(a: &DSet, d: usize, mode: Convexity) -> Result<Verdict> {
    let mut meter = Meter::new();
    for n in 0..=d {
        meter.charge_level(n)?;
        let gap = match mode {
            Convexity::Convex => level_gap(n, |u| a.contains(u)),
            Convexity::CoConvex => level_gap(n, |u| !a.contains(u)),
        };
        if let Some((low, mid, high)) = gap {
            return Ok(Verdict::No(Evidence::Between { low, mid, high }));
        }
    }
    Ok(Verdict::Yes(Evidence::Depth(d)))
}
