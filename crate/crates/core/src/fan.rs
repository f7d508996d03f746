//! Bars with witnesses, fan oracles, and the reductions between the fan
//! theorem and unique-path WKL. The co-convex case needs no oracle at all.

use std::sync::{Arc, Mutex};

use crate::budget::Meter;
use crate::error::{Error, Result};
use crate::oracles::{lpl_from_wkl, WklOracle};
use crate::sets::{uniform_bound, DSet, Flags, Verdict};
use crate::trees::{longest_path_convex, PathGen, Trace, Tree};
use crate::witness::Witness;
use crate::words::{Concat, Level, Seq, Word};

/// A set together with an optional bar witness `α ↦ n`, `α↾n ∈ carrier`.
#[derive(Clone, Debug)]
pub struct Bar {
    carrier: DSet,
    wit: Option<Witness>,
}

impl Bar {
    pub fn new(carrier: DSet) -> Self {
        Bar { carrier, wit: None }
    }

    pub fn with_witness(carrier: DSet, wit: Witness) -> Self {
        Bar { carrier, wit: Some(wit) }
    }

    pub fn carrier(&self) -> &DSet {
        &self.carrier
    }

    pub fn wit(&self) -> Option<&Witness> {
        self.wit.as_ref()
    }

    /// Applies the witness and checks `α↾n ∈ carrier`.
    pub fn witness(&self, alpha: &Seq) -> Result<usize> {
        let wit = self.wit.as_ref().ok_or_else(|| Error::precondition("bar has no witness"))?;
        let n = wit
            .apply(alpha)
            .ok_or_else(|| Error::certificate(format!("witness {} has no answer for {alpha}", wit.name())))?;
        let p = alpha.restrict(n);
        if !self.carrier.contains(&p) {
            return Err(Error::certificate(format!("witness {} gave {n} but {p} is not in the bar", wit.name())));
        }
        Ok(n)
    }
}

/// The first word of level `n` (lexicographically) with no prefix in `set`.
/// `None` means every `α` meets `set` within `n` bits.
pub fn first_unbarred(set: &DSet, n: usize) -> Result<Option<Word>> {
    let mut meter = Meter::new();
    meter.charge_level(n)?;
    Ok(Level::new(n).find(|u| !u.prefixes().any(|p| set.contains(&p))))
}

pub trait FanOracle: Send + Sync {
    /// An unverified uniform bound for a bar.
    fn raw_bound(&self, bar: &Bar) -> Result<usize>;

    fn tag(&self) -> String;

    /// A uniform bound, released only after a level scan confirms it.
    fn bound(&self, bar: &Bar) -> Result<usize> {
        let n = self.raw_bound(bar)?;
        if let Some(u) = first_unbarred(bar.carrier(), n)? {
            return Err(Error::certificate(format!("{} returned bound {n} but {u} avoids the bar", self.tag())));
        }
        Ok(n)
    }
}

/// The desk-scale fan theorem: exhaustive search for the least bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceFan {
    pub max: usize,
}

pub fn fan_bruteforce(max: usize) -> BruteForceFan {
    BruteForceFan { max }
}

impl FanOracle for BruteForceFan {
    fn raw_bound(&self, bar: &Bar) -> Result<usize> {
        match uniform_bound(bar.carrier(), self.max)? {
            v @ Verdict::Yes(_) => Ok(v.bound().expect("yes carries a bound")),
            _ => Err(Error::Budget { limit: self.max as u64 }),
        }
    }

    fn tag(&self) -> String {
        format!("fan:bruteforce({})", self.max)
    }
}

/// Fan theorem obtained from longest paths (via WKL on completions).
pub struct FanViaLpl<W> {
    pub wkl: W,
}

impl<W: WklOracle> FanOracle for FanViaLpl<W> {
    fn raw_bound(&self, bar: &Bar) -> Result<usize> {
        fan_from_lpl(bar, &|t: &Tree| lpl_from_wkl(t, &self.wkl))
    }

    fn tag(&self) -> String {
        format!("fan<-lpl<-{}", self.wkl.tag())
    }
}

type ExternalFanFn = Box<dyn FnMut(&Bar) -> Result<usize> + Send>;

/// Adapter for an externally supplied fan oracle; calls are serialized.
pub struct ExternalFan {
    name: String,
    f: Mutex<ExternalFanFn>,
}

impl ExternalFan {
    pub fn new(name: impl Into<String>, f: impl FnMut(&Bar) -> Result<usize> + Send + 'static) -> Self {
        ExternalFan { name: name.into(), f: Mutex::new(Box::new(f)) }
    }
}

impl FanOracle for ExternalFan {
    fn raw_bound(&self, bar: &Bar) -> Result<usize> {
        let mut f = self.f.lock().map_err(|_| Error::Oracle(format!("{} poisoned", self.name)))?;
        f(bar)
    }

    fn tag(&self) -> String {
        format!("external:{}", self.name)
    }
}

/// Uniform bound of a bar from a longest-path oracle.
///
/// The complement of the (closure of the) carrier is a tree; along its
/// longest path the witness gives `n`, and then `{0,1}^n` lies in the closure.
pub fn fan_from_lpl(bar: &Bar, lpl: &dyn Fn(&Tree) -> Result<PathGen>) -> Result<usize> {
    if bar.wit().is_none() {
        return Err(Error::precondition("fan_from_lpl needs a bar witness"));
    }
    let closed = if bar.carrier().flags().extension_closed { bar.carrier().clone() } else { bar.carrier().closure() };
    let tree = Tree::trusted(closed.complement());
    let live = lpl(&tree)?.into_live();
    let n = bar.witness(&live.seq());
    live.check()?;
    let n = n?;
    if let Some(u) = Level::new(n).find(|u| !closed.contains(u)) {
        return Err(Error::certificate(format!("bound {n} from the longest path fails at {u}")));
    }
    Ok(n)
}

/// How the per-node bars of [`wkl_unique_from_fan`] obtain their witnesses.
#[derive(Clone)]
pub enum BarEvidence {
    /// Per-node witness supplied by the caller.
    Provided(Arc<dyn Fn(&Word) -> Witness + Send + Sync>),
    /// For `α`, the fan bound of the auxiliary bar `B_α`.
    ViaFan,
}

const UNIQUE_SCAN_CAP: usize = 32;

/// A path of an infinite tree with at most one path, from a fan oracle.
///
/// At node `u`, the set `B = {w | u0w ∉ T ∨ ∀v ∈ {0,1}^{|w|} u1v ∉ T}` is
/// an extension-closed bar; with its bound `N`, either every `u0w` with
/// `|w| = N` leaves `T` (go right) or every `u1w` does (go left).
pub fn wkl_unique_from_fan(tree: &Tree, fan: Arc<dyn FanOracle>, evidence: BarEvidence, fuel: usize) -> PathGen {
    let t = tree.clone();
    PathGen::new(Some(tree.carrier().clone()), fuel, move |u, trace| {
        let mut meter = Meter::new();
        let left = u.child(0);
        let right = u.child(1);
        let right_reach = t.reach(&right, UNIQUE_SCAN_CAP, &mut meter)?;
        let right_dead_at = move |k: usize| match right_reach {
            None => true,
            Some(r) => r < k,
        };

        let b = {
            let t = t.clone();
            let left = left.clone();
            DSet::new(move |w: &Word| !t.contains(&left.concat(w)) || right_dead_at(w.len()))
                .trust_flags(Flags::extension_closed())
        };
        let wit = match &evidence {
            BarEvidence::Provided(f) => f(u),
            BarEvidence::ViaFan => {
                let (t, fan, left, right) = (t.clone(), fan.clone(), left.clone(), right.clone());
                Witness::new("fan(B_α)", move |alpha: &Seq| {
                    let (t, alpha, left, right) = (t.clone(), alpha.clone(), left.clone(), right.clone());
                    let b_alpha = DSet::new(move |v: &Word| {
                        !t.contains(&left.concat(&alpha.restrict(v.len()))) || !t.contains(&right.concat(v))
                    })
                    .trust_flags(Flags::extension_closed());
                    fan.bound(&Bar::new(b_alpha)).ok()
                })
            }
        };
        let n = fan.bound(&Bar::with_witness(b, wit))?;
        trace.push(u, fan.tag(), n);

        meter.charge_level(n)?;
        let case_i = Level::under(&left, n).all(|v| !t.contains(&v));
        if case_i {
            if right_dead_at(n) {
                return Err(Error::inconsistent(u, format!("both children are dead at relative depth {}", n + 1)));
            }
            Ok(1)
        } else {
            Ok(0)
        }
    })
}

/// Result of the oracle-free co-convex bound.
#[derive(Debug, Clone)]
pub struct CoconvexBound {
    pub bound: usize,
    /// Prefix of the longest path used, through the witness query.
    pub path: Word,
    pub trace: Trace,
}

/// Uniform bound of a detachable co-convex bar, with no oracle.
///
/// The closure is still co-convex, so its complement is a convex tree. A
/// witness-driven descent yields a longest path `α` of that tree, and
/// `n = wit(α)` already bounds the bar.
pub fn coconvex_bound(bar: &Bar, fuel: usize) -> Result<CoconvexBound> {
    if !bar.carrier().flags().co_convex {
        return Err(Error::precondition("coconvex_bound requires a bar flagged co-convex"));
    }
    let wit = bar.wit().cloned().ok_or_else(|| Error::precondition("coconvex_bound needs a bar witness"))?;
    let closed = bar.carrier().closure();
    let tree = Tree::trusted(closed.complement());
    let live = longest_path_convex(&tree, wit, fuel)?.into_live();
    let n = bar.witness(&live.seq());
    live.check()?;
    let n = n?;
    if let Some(u) = Level::new(n).find(|u| !closed.contains(u)) {
        return Err(Error::certificate(format!("co-convex bound {n} fails at {u}")));
    }
    let mut trace = live.trace();
    trace.push(&live.prefix(), "wit(longest path)", n);
    Ok(CoconvexBound { bound: n, path: live.prefix(), trace })
}
