//! Omniscience principles as oracle interfaces, and the reductions
//! LLPO ⇒ WKL ⇒ LPL and (infinite convex trees have paths) ⇒ LLPO.
//!
//! The bundled [`BoundedLlpo`] is an exhaustive search; it is exact on
//! sequences whose single 1 (if any) lies within its horizon.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::budget::Meter;
use crate::error::{Error, Result};
use crate::sets::{DSet, Flags};
use crate::trees::{PathGen, Tree, DEFAULT_FUEL};
use crate::words::{Seq, Word};

/// Which disjunct of LLPO holds: all even entries are zero, or all odd ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Evens,
    Odds,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Evens => "EVENS",
            Side::Odds => "ODDS",
        })
    }
}

pub trait LlpoOracle: Send + Sync {
    /// For `α` with at most one 1: `Evens` promises `∀n α_{2n} = 0`,
    /// `Odds` promises `∀n α_{2n+1} = 0`.
    fn decide(&self, alpha: &Seq) -> Result<Side>;

    fn tag(&self) -> String;
}

/// LLPO by scanning indices `0..=horizon`, preferring `Evens` when no 1 is seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundedLlpo {
    pub horizon: usize,
}

impl LlpoOracle for BoundedLlpo {
    fn decide(&self, alpha: &Seq) -> Result<Side> {
        llpo_bounded(alpha, self.horizon)
    }

    fn tag(&self) -> String {
        format!("llpo:{}", self.horizon)
    }
}

pub fn llpo_bounded(alpha: &Seq, h: usize) -> Result<Side> {
    let mut first: Option<usize> = None;
    for i in 0..=h {
        if alpha.get(i) == 1 {
            if let Some(j) = first {
                return Err(Error::precondition(format!(
                    "LLPO input has two 1s (indices {j} and {i})"
                )));
            }
            first = Some(i);
        }
    }
    Ok(match first {
        Some(i) if i % 2 == 0 => Side::Odds,
        _ => Side::Evens,
    })
}

type ExternalFn = Box<dyn FnMut(&Seq) -> Result<Side> + Send>;

/// Adapter for an externally supplied oracle; calls are serialized.
pub struct ExternalLlpo {
    name: String,
    f: Mutex<ExternalFn>,
}

impl ExternalLlpo {
    pub fn new(name: impl Into<String>, f: impl FnMut(&Seq) -> Result<Side> + Send + 'static) -> Self {
        ExternalLlpo { name: name.into(), f: Mutex::new(Box::new(f)) }
    }
}

impl LlpoOracle for ExternalLlpo {
    fn decide(&self, alpha: &Seq) -> Result<Side> {
        let mut f = self.f.lock().map_err(|_| Error::Oracle(format!("{} poisoned", self.name)))?;
        f(alpha)
    }

    fn tag(&self) -> String {
        format!("external:{}", self.name)
    }
}

pub trait WklOracle: Send + Sync {
    /// A path of a tree asserted to be infinite. Emitted prefixes are
    /// checked against the tree.
    fn solve(&self, tree: &Tree) -> Result<PathGen>;

    fn tag(&self) -> String;
}

/// WKL from an LLPO oracle by descent through `Z_T`.
#[derive(Clone)]
pub struct WklFromLlpo {
    pub llpo: Arc<dyn LlpoOracle>,
    /// Largest `m` for which `ζ_T(·, m)` may be evaluated at a node.
    pub scan_cap: usize,
    pub fuel: usize,
}

impl WklFromLlpo {
    pub fn new(llpo: Arc<dyn LlpoOracle>) -> Self {
        WklFromLlpo { llpo, scan_cap: 32, fuel: DEFAULT_FUEL }
    }

    pub fn bounded(horizon: usize) -> Self {
        WklFromLlpo::new(Arc::new(BoundedLlpo { horizon }))
    }
}

impl WklOracle for WklFromLlpo {
    fn solve(&self, tree: &Tree) -> Result<PathGen> {
        Ok(wkl_from_llpo_with(tree, self.llpo.clone(), self.scan_cap, self.fuel))
    }

    fn tag(&self) -> String {
        format!("wkl<-{}", self.llpo.tag())
    }
}

pub fn wkl_from_llpo(tree: &Tree, oracle: Arc<dyn LlpoOracle>) -> PathGen {
    wkl_from_llpo_with(tree, oracle, 32, DEFAULT_FUEL)
}

/// `ζ_T(c, n)` given `reach(c, cap)`; `None` when `n` lies past the cap
/// and the answer is not determined.
fn zeta_from_reach(reach: Option<usize>, cap: usize, n: usize) -> Option<bool> {
    match reach {
        None => Some(false),
        Some(r) if r < cap => Some(n <= r),
        Some(_) if n <= cap => Some(true),
        Some(_) => None,
    }
}

fn wkl_from_llpo_with(tree: &Tree, oracle: Arc<dyn LlpoOracle>, cap: usize, fuel: usize) -> PathGen {
    let t = tree.clone();
    PathGen::new(Some(tree.carrier().clone()), fuel, move |u, trace| {
        let mut meter = Meter::new();
        let r0 = t.reach(&u.child(0), cap, &mut meter)?;
        let r1 = t.reach(&u.child(1), cap, &mut meter)?;
        let latch: Arc<Mutex<Option<Error>>> = Arc::new(Mutex::new(None));

        // β_{2n} = 0 ⇔ ζ(u0, n),  β_{2n+1} = 0 ⇔ ζ(u1, n)
        let beta = {
            let latch = latch.clone();
            move |i: usize| -> u8 {
                let (r, n) = if i.is_multiple_of(2) { (r0, i / 2) } else { (r1, i / 2) };
                match zeta_from_reach(r, cap, n) {
                    Some(z) => (!z) as u8,
                    None => {
                        let mut slot = latch.lock().expect("latch poisoned");
                        slot.get_or_insert(Error::Budget { limit: cap as u64 });
                        0
                    }
                }
            }
        };
        // α_n = 1 ⇔ β_n = 1 ∧ ∀m < n β_m = 0
        let alpha = Seq::from_fn(move |n| (beta(n) == 1 && (0..n).all(|m| beta(m) == 0)) as u8);
        let side = oracle.decide(&alpha)?;
        if let Some(e) = latch.lock().expect("latch poisoned").take() {
            return Err(e);
        }
        trace.push(u, oracle.tag(), side);
        Ok(match side {
            Side::Evens => 0,
            Side::Odds => 1,
        })
    })
}

/// A longest path of a stabilized tree: a path of its completion `T′`.
pub fn lpl_from_wkl(tree: &Tree, oracle: &dyn WklOracle) -> Result<PathGen> {
    let completed = tree.complete()?;
    oracle.solve(&completed)
}

/// Longest paths through WKL applied to completions.
pub struct LplFromWkl<W> {
    pub wkl: W,
}

impl<W: WklOracle> LplFromWkl<W> {
    pub fn longest_path(&self, tree: &Tree) -> Result<PathGen> {
        lpl_from_wkl(tree, &self.wkl)
    }
}

/// The infinite convex tree `S = {ε,(0),(1)} ∪ S₀ ∪ S₁` built from `α`,
/// where `S₀` holds `(0)∗w` for `w ∈ ℰ` with `α_{2i} = 0` for all `i ≤ |w|`
/// and `S₁` holds `(1)∗w` for `w ∈ 𝒩` with `α_{2i+1} = 0` for all `i ≤ |w|`.
pub fn convex_llpo_tree(alpha: &Seq) -> Tree {
    let a = alpha.clone();
    let member = DSet::new(move |u: &Word| {
        if u.len() <= 1 {
            return true;
        }
        let tail = &u.bits()[1..];
        let k = tail.len();
        match u.bits()[0] {
            0 => tail.iter().all(|&b| b == 1) && (0..=k).all(|i| a.get(2 * i) == 0),
            _ => tail.iter().all(|&b| b == 0) && (0..=k).all(|i| a.get(2 * i + 1) == 0),
        }
    });
    Tree::trusted(member.trust_flags(Flags { convex: true, ..Flags::NONE }))
}

/// LLPO from any oracle producing paths of infinite convex trees.
///
/// The answer is read off the first bit of the path: paths through `S₀`
/// start with 0 and force the even entries to vanish.
pub fn llpo_from_path_oracle(alpha: &Seq, path_oracle: &dyn WklOracle, h: usize) -> Result<Side> {
    let s = convex_llpo_tree(alpha);
    let mut gen = path_oracle.solve(&s)?;
    let prefix = gen.take(h.max(1))?;
    if let Some(bad) = prefix.prefixes().find(|p| !s.contains(p)) {
        return Err(Error::certificate(format!("path prefix {bad} is not in the convex tree S")));
    }
    Ok(if prefix.bits()[0] == 0 { Side::Evens } else { Side::Odds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{convexity_verdict, Convexity};
    use crate::words::Level;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn bounded_llpo_examples() {
        assert_eq!(llpo_bounded(&Seq::zeros(), 8).unwrap(), Side::Evens);
        assert_eq!(llpo_bounded(&Seq::single_one(Some(3)), 8).unwrap(), Side::Evens);
        assert_eq!(llpo_bounded(&Seq::single_one(Some(4)), 8).unwrap(), Side::Odds);
        let two = Seq::eventually(w("0101"), 0);
        assert!(matches!(llpo_bounded(&two, 8), Err(Error::Precondition(_))));
    }

    #[test]
    fn wkl_full_tree_goes_left() {
        let mut g = WklFromLlpo::bounded(8).solve(&Tree::full()).unwrap();
        assert_eq!(g.take(5).unwrap(), Word::zeros(5));
        assert!(g.trace().entries().iter().all(|e| e.answer == "EVENS"));
    }

    #[test]
    fn wkl_ones_tree() {
        let mut g = WklFromLlpo::bounded(8).solve(&Tree::ones()).unwrap();
        assert_eq!(g.take(4).unwrap(), Word::ones(4));
    }

    #[test]
    fn wkl_right_branch() {
        let t = Tree::new(DSet::new(|u: &Word| {
            (u.len() <= 1 && u.bit(0) != Some(1)) || (u.bit(0) == Some(1) && u.count_ones() == 1)
        }))
        .unwrap();
        let mut g = WklFromLlpo::bounded(8).solve(&t).unwrap();
        assert_eq!(g.take(3).unwrap(), w("100"));
    }

    #[test]
    fn wkl_rejects_finite_tree_eventually() {
        let t = Tree::new(DSet::finite([w("e"), w("0")])).unwrap();
        let mut g = WklFromLlpo::bounded(8).solve(&t).unwrap();
        assert_eq!(g.next_bit().unwrap(), 0);
        assert!(matches!(g.next_bit(), Err(Error::Certificate(_))));
    }

    #[test]
    fn external_oracle_is_traced() {
        let ext = ExternalLlpo::new("always-odds", |_| Ok(Side::Odds));
        let mut g = wkl_from_llpo(&Tree::full(), Arc::new(ext));
        assert_eq!(g.take(2).unwrap(), Word::ones(2));
        assert_eq!(g.trace().entries()[0].source, "external:always-odds");
    }

    #[test]
    fn lpl_examples() {
        let wkl = WklFromLlpo::bounded(8);
        let t = Tree::new(DSet::finite([w("e"), w("0")])).unwrap();
        let p = lpl_from_wkl(&t, &wkl).unwrap().take(6).unwrap();
        assert_eq!(p, Word::zeros(6));

        let p = lpl_from_wkl(&Tree::empty(), &wkl).unwrap().take(6).unwrap();
        assert_eq!(p, Word::zeros(6));

        let p = lpl_from_wkl(&Tree::full(), &wkl).unwrap().take(6).unwrap();
        assert_eq!(p, Word::zeros(6));
    }

    #[test]
    fn lpl_right_top() {
        let wkl = WklFromLlpo::bounded(8);
        let t = Tree::new(DSet::finite([w("e"), w("0"), w("1"), w("10")])).unwrap();
        let p = lpl_from_wkl(&t, &wkl).unwrap().take(5).unwrap();
        assert_eq!(p, w("10000"));
    }

    #[test]
    fn convex_tree_s_is_convex_and_infinite() {
        for one in [None, Some(0), Some(3), Some(4), Some(7)] {
            let s = convex_llpo_tree(&Seq::single_one(one));
            assert!(convexity_verdict(s.carrier(), 8, Convexity::Convex).unwrap().is_yes());
            assert!(s.is_infinite_to(10).unwrap().is_yes(), "{one:?}");
            assert!(s.carrier().validate_flags(Flags::restriction_closed(), 8).is_ok());
        }
    }

    #[test]
    fn convex_tree_s_enumeration() {
        // single 1 at index 4: S₀ keeps (0)∗1^k only while 2i < 4
        let s = convex_llpo_tree(&Seq::single_one(Some(4)));
        let level = |n| Level::new(n).filter(|u| s.contains(u)).collect::<Vec<_>>();
        assert_eq!(level(2), vec![w("01"), w("10")]);
        assert_eq!(level(3), vec![w("100")]);
        assert_eq!(level(6), vec![w("100000")]);
    }

    #[test]
    fn llpo_from_paths_examples() {
        let wkl = WklFromLlpo::bounded(16);
        assert_eq!(llpo_from_path_oracle(&Seq::zeros(), &wkl, 8).unwrap(), Side::Evens);
        assert_eq!(llpo_from_path_oracle(&Seq::single_one(Some(4)), &wkl, 8).unwrap(), Side::Odds);
        assert_eq!(llpo_from_path_oracle(&Seq::single_one(Some(3)), &wkl, 8).unwrap(), Side::Evens);
    }
}
