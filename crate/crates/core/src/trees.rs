//! Trees, infinity and path diagnostics, the completion `T′` with its
//! layer `L_T`, and lazily generated paths.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::budget::Meter;
use crate::error::{Error, Result};
use crate::sets::{DSet, Evidence, Flags, Verdict, FLAG_HORIZON};
use crate::witness::Witness;
use crate::words::{Level, Seq, Word};

/// A detachable set closed under restriction.
#[derive(Clone, Debug)]
pub struct Tree {
    carrier: DSet,
    horizon: usize,
}

impl Tree {
    /// Wraps a set as a tree, validating restriction-closure to [`FLAG_HORIZON`].
    pub fn new(carrier: DSet) -> Result<Self> {
        let carrier = carrier.with_flags(Flags::restriction_closed())?;
        Ok(Tree { carrier, horizon: FLAG_HORIZON })
    }

    pub(crate) fn trusted(carrier: DSet) -> Self {
        Tree { carrier: carrier.trust_flags(Flags::restriction_closed()), horizon: FLAG_HORIZON }
    }

    pub fn full() -> Self {
        Tree::trusted(DSet::full())
    }

    pub fn empty() -> Self {
        Tree::trusted(DSet::empty())
    }

    /// `{ε} ∪ 𝒩`.
    pub fn zeros() -> Self {
        Tree::trusted(DSet::zeros_tree())
    }

    /// `{ε} ∪ ℰ`.
    pub fn ones() -> Self {
        Tree::trusted(DSet::ones_tree())
    }

    pub fn carrier(&self) -> &DSet {
        &self.carrier
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn contains(&self, u: &Word) -> bool {
        self.carrier.contains(u)
    }

    pub fn stab(&self) -> Option<usize> {
        self.carrier.stab()
    }

    /// Largest `r ≤ cap` such that `u` has a descendant `u∗w ∈ T` with `|w| = r`;
    /// `None` if `u ∉ T`. Depth-first, leftmost first.
    pub fn reach(&self, u: &Word, cap: usize, meter: &mut Meter) -> Result<Option<usize>> {
        if !self.contains(u) {
            return Ok(None);
        }
        let stab = self.stab();
        let mut best = 0;
        let mut stack = vec![(u.clone(), 0usize)];
        while let Some((v, d)) = stack.pop() {
            meter.charge(1)?;
            best = best.max(d);
            // a member past the stabilization depth has every extension
            if best == cap || stab.is_some_and(|s| v.len() >= s) {
                return Ok(Some(cap));
            }
            for b in [1, 0] {
                let c = v.child(b);
                if self.contains(&c) {
                    stack.push((c, d + 1));
                }
            }
        }
        Ok(Some(best))
    }

    /// `YES(Depth(d))` if every level `≤ d` has a member, else `NO(Level(k))`
    /// for the least empty level `k`.
    pub fn is_infinite_to(&self, d: usize) -> Result<Verdict> {
        let mut meter = Meter::new();
        match self.reach(&Word::empty(), d, &mut meter)? {
            None => Ok(Verdict::No(Evidence::Level(0))),
            Some(r) if r < d => Ok(Verdict::No(Evidence::Level(r + 1))),
            Some(_) => Ok(Verdict::Yes(Evidence::Depth(d))),
        }
    }

    /// `ζ_T(u, m)`: some `w ∈ {0,1}^m` has `u∗w ∈ T`.
    pub fn zeta(&self, u: &Word, m: usize) -> Result<bool> {
        let mut meter = Meter::new();
        Ok(self.reach(u, m, &mut meter)? == Some(m))
    }

    /// Membership of `u` in `Z_T = {u | ∀m ζ_T(u,m)}` checked for `m ≤ d`.
    /// `NO(Level(m))` names the least failing `m`. A `YES` is exact when the
    /// tree is stabilized and `d ≥ stab`.
    pub fn z_member_to(&self, u: &Word, d: usize) -> Result<Verdict> {
        let mut meter = Meter::new();
        Ok(match self.reach(u, d, &mut meter)? {
            None => Verdict::No(Evidence::Level(0)),
            Some(r) if r < d => Verdict::No(Evidence::Level(r + 1)),
            Some(_) => Verdict::Yes(Evidence::Depth(d)),
        })
    }

    /// Number of level-`k` members with at least one level-`d` descendant.
    pub fn survivor_width(&self, k: usize, d: usize) -> Result<usize> {
        if k > d {
            return Err(Error::precondition(format!("survivor_width needs k ≤ d, got k={k}, d={d}")));
        }
        let mut meter = Meter::new();
        meter.charge_level(k)?;
        let mut count = 0;
        for u in Level::new(k) {
            if self.reach(&u, d - k, &mut meter)? == Some(d - k) {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Lexicographically greatest member on each level `0..=stab`.
    fn greatest_per_level(&self, s: usize) -> Result<Vec<Option<Word>>> {
        let mut meter = Meter::new();
        (0..=s)
            .map(|n| {
                meter.charge_level(n)?;
                Ok(Level::new(n).filter(|u| self.contains(u)).last())
            })
            .collect()
    }

    /// Membership in `L_T`.
    pub fn l_member(&self, u: &Word) -> Result<bool> {
        let s = self.carrier.require_stab("L_T membership")?;
        if u.is_empty() && !self.contains(u) {
            return Ok(true);
        }
        if !self.contains(u) {
            return Ok(false);
        }
        let greatest = self.greatest_per_level(s)?;
        Ok(l_first_clause(u, &greatest, s))
    }

    /// The elements of `L_T` (at most two: `ε` when `ε ∉ T`, and the greatest
    /// member of the highest nonempty level of a bounded tree).
    pub fn l_set(&self) -> Result<Vec<Word>> {
        let s = self.carrier.require_stab("L_T")?;
        let greatest = self.greatest_per_level(s)?;
        let mut out = Vec::new();
        if !self.contains(&Word::empty()) {
            out.push(Word::empty());
        }
        // only the greatest member of its level can qualify
        for cand in greatest.iter().flatten() {
            if l_first_clause(cand, &greatest, s) && !out.contains(cand) {
                out.push(cand.clone());
            }
        }
        Ok(out)
    }

    /// The completion `T′ = T ∪ {ε} ∪ {v∗w | v ∈ L_T, w ∈ 𝒩}`.
    ///
    /// `T′` is infinite. It keeps the stabilization depth of `T` when
    /// `L_T = ∅`; otherwise the zero tails are not extension-invariant and
    /// no depth is declared.
    pub fn complete(&self) -> Result<Tree> {
        let layer = self.l_set()?;
        let base = self.carrier.tabulated();
        let stab = if layer.is_empty() { self.stab() } else { None };
        let mut flags = Flags::restriction_closed();
        flags.convex = self.carrier.flags().convex;
        let layer_c = layer.clone();
        let member = DSet::new(move |u: &Word| {
            u.is_empty()
                || base.contains(u)
                || layer_c.iter().any(|v| {
                    v.is_prefix_of(u) && u.len() > v.len() && u.bits()[v.len()..].iter().all(|&b| b == 0)
                })
        });
        let member = match stab {
            Some(s) => member.with_stab(s),
            None => member,
        };
        Ok(Tree::trusted(member.trust_flags(flags)))
    }
}

fn l_first_clause(u: &Word, greatest: &[Option<Word>], s: usize) -> bool {
    // level s nonempty ⇒ members at every longer level
    if greatest[s].is_some() {
        return false;
    }
    let n = u.len();
    n < s
        && greatest[n].as_ref() == Some(u)
        && greatest[n + 1..=s].iter().all(Option::is_none)
}

/// One logged oracle or witness query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub node: Word,
    pub source: String,
    pub answer: String,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} -> {}", self.node, self.source, self.answer)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn push(&mut self, node: &Word, source: impl Into<String>, answer: impl fmt::Display) {
        self.entries.push(TraceEntry { node: node.clone(), source: source.into(), answer: answer.to_string() });
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn extend(&mut self, other: &Trace) {
        self.entries.extend(other.entries.iter().cloned());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub const DEFAULT_FUEL: usize = 64;

type Step = Box<dyn FnMut(&Word, &mut Trace) -> Result<u8> + Send>;

/// A lazily extended path: each [`PathGen::next`] call decides one more bit.
///
/// When a check set is attached, every emitted prefix is verified to be a
/// member of it.
pub struct PathGen {
    prefix: Word,
    check: Option<DSet>,
    step: Step,
    trace: Trace,
    fuel: usize,
}

impl fmt::Debug for PathGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathGen").field("prefix", &self.prefix).field("fuel", &self.fuel).finish()
    }
}

impl PathGen {
    pub fn new(
        check: Option<DSet>,
        fuel: usize,
        step: impl FnMut(&Word, &mut Trace) -> Result<u8> + Send + 'static,
    ) -> Self {
        PathGen { prefix: Word::empty(), check, step: Box::new(step), trace: Trace::default(), fuel }
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn next_bit(&mut self) -> Result<u8> {
        if self.prefix.len() >= self.fuel {
            return Err(Error::Fuel { fuel: self.fuel });
        }
        if let Some(check) = &self.check {
            if self.prefix.is_empty() && !check.contains(&self.prefix) {
                return Err(Error::certificate("path generator started outside its tree (ε is not a member)"));
            }
        }
        let bit = (self.step)(&self.prefix, &mut self.trace)?;
        let next = self.prefix.child(bit);
        if let Some(check) = &self.check {
            if !check.contains(&next) {
                return Err(Error::certificate(format!("emitted prefix {next} is not a member of the tree")));
            }
        }
        self.prefix = next;
        Ok(bit)
    }

    /// Extends to at least `k` bits and returns the first `k`.
    pub fn take(&mut self, k: usize) -> Result<Word> {
        while self.prefix.len() < k {
            self.next_bit()?;
        }
        Ok(self.prefix.prefix(k))
    }

    /// Shares the generator as a [`Seq`] whose bits are produced on demand.
    pub fn into_live(self) -> LivePath {
        LivePath { inner: Arc::new(Mutex::new((self, None))) }
    }
}

/// A [`PathGen`] viewed as a sequence. Generation errors are latched and
/// reported by [`LivePath::error`]; the failing bit reads as 0.
#[derive(Clone)]
pub struct LivePath {
    inner: Arc<Mutex<(PathGen, Option<Error>)>>,
}

impl LivePath {
    pub fn seq(&self) -> Seq {
        let inner = self.inner.clone();
        Seq::from_fn(move |i| {
            let mut guard = inner.lock().expect("path generator poisoned");
            let (gen, err) = &mut *guard;
            if err.is_some() {
                return 0;
            }
            match gen.take(i + 1) {
                Ok(w) => w.bits()[i],
                Err(e) => {
                    *err = Some(e);
                    0
                }
            }
        })
    }

    pub fn error(&self) -> Option<Error> {
        self.inner.lock().expect("path generator poisoned").1.clone()
    }

    pub fn check(&self) -> Result<()> {
        match self.error() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn prefix(&self) -> Word {
        self.inner.lock().expect("path generator poisoned").0.prefix().clone()
    }

    pub fn trace(&self) -> Trace {
        self.inner.lock().expect("path generator poisoned").0.trace().clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Descent {
    /// Infinite tree: descend into the child alive at the scan level.
    Path,
    /// Possibly finite tree: descend into the deeper child, ties to the
    /// right, and continue with zeros past the top.
    Longest,
}

fn extremal_escape(tree: &Tree, wit: &Witness, u: &Word, trace: &mut Trace) -> Result<usize> {
    let alpha = Seq::eventually(u.child(0), 1);
    let beta = Seq::eventually(u.child(1), 0);
    for (label, s) in [("wit(u01^ω)", &alpha), ("wit(u10^ω)", &beta)] {
        if let Some(n) = wit.apply(s) {
            if !tree.contains(&s.restrict(n)) {
                trace.push(u, format!("{label} {}", wit.name()), n);
                return Ok(n);
            }
        }
    }
    Err(Error::inconsistent(u, "the witness gives no escape for either extremal sequence"))
}

fn convex_step(tree: &Tree, wit: &Witness, u: &Word, mode: Descent, trace: &mut Trace) -> Result<u8> {
    if mode == Descent::Longest
        && (!tree.contains(u) || (!tree.contains(&u.child(0)) && !tree.contains(&u.child(1))))
    {
        return Ok(0);
    }
    let n = extremal_escape(tree, wit, u, trace)?.max(u.len() + 1);
    let rel = n - u.len() - 1;
    let mut meter = Meter::new();
    let left = tree.reach(&u.child(0), rel, &mut meter)?;
    let right = tree.reach(&u.child(1), rel, &mut meter)?;
    let alive = |r: Option<usize>| r == Some(rel);
    if alive(left) && alive(right) {
        return Err(Error::inconsistent(
            u,
            format!("both children have members at level {n}; convexity or the witness is violated"),
        ));
    }
    match mode {
        Descent::Path => match (alive(left), alive(right)) {
            (true, false) => Ok(0),
            (false, true) => Ok(1),
            _ => Err(Error::inconsistent(u, format!("both children are empty at level {n}"))),
        },
        Descent::Longest => {
            let depth = |r: Option<usize>| r.map_or(-1, |d| d as i64);
            Ok(if depth(left) > depth(right) { 0 } else { 1 })
        }
    }
}

/// A path of an infinite convex tree with at most one path.
///
/// At node `u` the witness is applied to `u∗(0,1,1,…)` (or `u∗(1,0,0,…)`)
/// to get a level `n` not containing that sequence's prefix. By convexity at
/// most one child of `u` has members at level `n`; a level scan finds it.
pub fn find_path_convex_unique(tree: &Tree, wit: Witness, fuel: usize) -> Result<PathGen> {
    if !tree.carrier().flags().convex {
        return Err(Error::precondition("find_path_convex_unique requires a tree flagged convex"));
    }
    let t = tree.clone();
    Ok(PathGen::new(Some(tree.carrier().clone()), fuel, move |u, trace| {
        convex_step(&t, &wit, u, Descent::Path, trace)
    }))
}

/// A longest path of a convex tree, driven by an escape witness. Emitted
/// bits follow the unique path of `T′`: the greatest member of the top level
/// of a bounded tree followed by zeros.
pub fn longest_path_convex(tree: &Tree, wit: Witness, fuel: usize) -> Result<PathGen> {
    if !tree.carrier().flags().convex {
        return Err(Error::precondition("longest_path_convex requires a tree flagged convex"));
    }
    let t = tree.clone();
    Ok(PathGen::new(None, fuel, move |u, trace| convex_step(&t, &wit, u, Descent::Longest, trace)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn finite_tree(words: &[&str]) -> Tree {
        Tree::new(DSet::finite(words.iter().map(|s| w(s)))).unwrap()
    }

    /// Longest-survivor oracle: level-`k` members with a level-`d` descendant.
    fn survivors(t: &Tree, k: usize, d: usize) -> Vec<Word> {
        let mut out: Vec<Word> = Level::new(d).filter(|v| t.contains(v)).map(|v| v.prefix(k)).collect();
        out.dedup();
        out
    }

    #[test]
    fn infinite_to_examples() {
        assert!(Tree::full().is_infinite_to(6).unwrap().is_yes());
        match finite_tree(&["e", "0"]).is_infinite_to(3).unwrap() {
            Verdict::No(Evidence::Level(2)) => {}
            other => panic!("{other:?}"),
        }
        assert!(Tree::zeros().is_infinite_to(8).unwrap().is_yes());
    }

    #[test]
    fn l_layer_examples() {
        assert_eq!(Tree::empty().l_set().unwrap(), vec![Word::empty()]);
        assert!(Tree::full().l_set().unwrap().is_empty());
        assert_eq!(finite_tree(&["e", "0"]).l_set().unwrap(), vec![w("0")]);
        assert_eq!(finite_tree(&["e", "0", "1"]).l_set().unwrap(), vec![w("1")]);
        let t = finite_tree(&["e", "0", "1"]);
        assert!(t.l_member(&w("1")).unwrap());
        assert!(!t.l_member(&w("0")).unwrap());
        assert!(Tree::zeros().l_member(&Word::empty()).is_err());
    }

    #[test]
    fn completion_examples() {
        let c = Tree::empty().complete().unwrap();
        for n in 0..6 {
            for u in Level::new(n) {
                assert_eq!(c.contains(&u), u.is_empty() || u.is_zero_block(), "{u}");
            }
        }
        let c = Tree::full().complete().unwrap();
        assert!(Level::new(5).all(|u| c.contains(&u)));
        assert_eq!(c.stab(), Some(0));

        let c = finite_tree(&["e", "0", "1"]).complete().unwrap();
        assert!(c.contains(&w("100")));
        assert!(!c.contains(&w("00")));
        assert!(c.contains(&w("0")));
        assert!(c.is_infinite_to(8).unwrap().is_yes());
        assert_eq!(c.stab(), None);
    }

    #[test]
    fn complete_requires_stab() {
        assert!(matches!(Tree::zeros().complete(), Err(Error::Precondition(_))));
    }

    #[test]
    fn zeta_examples() {
        assert!(Tree::full().zeta(&w("0"), 5).unwrap());
        assert!(!Tree::zeros().zeta(&w("1"), 1).unwrap());
        assert!(Tree::zeros().zeta(&w("0"), 4).unwrap());
    }

    #[test]
    fn zeta_matches_level_scan() {
        let t = Tree::new(DSet::stabilized(4, |u| u.count_ones() <= 1)).unwrap();
        for k in 0..4 {
            for u in Level::new(k) {
                for m in 0..6 {
                    let brute = Level::under(&u, m).any(|v| t.contains(&v));
                    assert_eq!(t.zeta(&u, m).unwrap(), brute, "u={u} m={m}");
                }
            }
        }
    }

    #[test]
    fn z_member_examples() {
        assert!(Tree::full().z_member_to(&Word::empty(), 5).unwrap().is_yes());
        match finite_tree(&["e", "0"]).z_member_to(&w("0"), 3).unwrap() {
            Verdict::No(Evidence::Level(1)) => {}
            other => panic!("{other:?}"),
        }
        assert!(Tree::zeros().z_member_to(&w("0"), 6).unwrap().is_yes());
    }

    #[test]
    fn survivor_width_examples() {
        assert_eq!(Tree::full().survivor_width(2, 5).unwrap(), 4);
        assert_eq!(Tree::zeros().survivor_width(3, 6).unwrap(), 1);
        assert_eq!(finite_tree(&["e", "0", "1"]).survivor_width(1, 2).unwrap(), 0);
    }

    fn escape(t: &Tree) -> Witness {
        Witness::least_outside(t.carrier().clone(), 32)
    }

    #[test]
    fn convex_unique_path_zeros() {
        let t = Tree::zeros();
        let mut g = find_path_convex_unique(&t, escape(&t), DEFAULT_FUEL).unwrap();
        let p = g.take(6).unwrap();
        assert_eq!(p, Word::zeros(6));
        assert_eq!(survivors(&t, 6, 6), vec![p]);
    }

    #[test]
    fn convex_unique_path_ones() {
        let t = Tree::ones();
        let mut g = find_path_convex_unique(&t, escape(&t), DEFAULT_FUEL).unwrap();
        assert_eq!(g.take(4).unwrap(), Word::ones(4));
    }

    #[test]
    fn convex_unique_path_right_branch() {
        let c = DSet::new(|u: &Word| {
            u.is_empty() || *u == "0".parse::<Word>().unwrap() || (u.bit(0) == Some(1) && u.count_ones() == 1)
        });
        let t = Tree::new(c).unwrap();
        let t = Tree { carrier: t.carrier.with_flags(Flags { convex: true, ..Flags::NONE }).unwrap(), ..t };
        let mut g = find_path_convex_unique(&t, escape(&t), DEFAULT_FUEL).unwrap();
        let p = g.take(3).unwrap();
        assert_eq!(p, w("100"));
        assert_eq!(survivors(&t, 3, 3), vec![p]);
        assert!(!g.trace().is_empty());
    }

    #[test]
    fn convex_path_needs_flag() {
        let t = finite_tree(&["e"]);
        assert!(find_path_convex_unique(&t, Witness::constant(1), 4).is_err());
    }

    #[test]
    fn convex_path_reports_dead_tree() {
        let t = Tree { carrier: DSet::finite([Word::empty()]).trust_flags(Flags { convex: true, ..Flags::NONE }), horizon: 8 };
        let mut g = find_path_convex_unique(&t, escape(&t), 8).unwrap();
        assert!(matches!(g.next_bit(), Err(Error::Inconsistent { .. })));
    }

    #[test]
    fn fuel_is_enforced() {
        let t = Tree::zeros();
        let mut g = find_path_convex_unique(&t, escape(&t), 3).unwrap();
        assert_eq!(g.take(3).unwrap(), Word::zeros(3));
        assert_eq!(g.next_bit(), Err(Error::Fuel { fuel: 3 }));
    }

    #[test]
    fn longest_path_of_finite_convex_tree() {
        let t = Tree::new(DSet::finite([w("e"), w("0"), w("1"), w("01"), w("10")]))
            .unwrap();
        let t = Tree { carrier: t.carrier.with_flags(Flags { convex: true, ..Flags::NONE }).unwrap(), ..t };
        let mut g = longest_path_convex(&t, escape(&t), 16).unwrap();
        assert_eq!(g.take(5).unwrap(), w("10000"));
    }

    #[test]
    fn live_path_reads_bits_on_demand() {
        let t = Tree::ones();
        let live = find_path_convex_unique(&t, escape(&t), 8).unwrap().into_live();
        let s = live.seq();
        assert_eq!(s.get(3), 1);
        assert_eq!(live.prefix(), Word::ones(4));
        assert_eq!(s.get(9), 0);
        assert!(matches!(live.error(), Some(Error::Fuel { fuel: 8 })));
    }
}
