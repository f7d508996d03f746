//! Functionals `{0,1}^ℕ → ℕ`: finite decision trees and fueled query
//! programs, moduli, uniform continuity, and the decision problems on
//! constancy (DECO) and full sets (DEFU).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::budget::Meter;
use crate::error::{Error, Result};
use crate::fan::{Bar, FanOracle};
use crate::oracles::WklOracle;
use crate::sets::DSet;
use crate::trees::Tree;
use crate::witness::Witness;
use crate::words::{Level, Seq, Word};

/// A finite decision tree. Query indices are absolute positions in `α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Functional {
    Leaf(u64),
    Node { index: usize, zero: Box<Functional>, one: Box<Functional> },
}

/// Answer of [`is_constant`]: the common value, or two inputs (as words,
/// to be read `w∗𝟎`) with distinct values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constancy {
    Constant(u64),
    Differ(Word, Word),
}

impl Functional {
    pub fn leaf(v: u64) -> Self {
        Functional::Leaf(v)
    }

    pub fn node(index: usize, zero: Functional, one: Functional) -> Self {
        Functional::Node { index, zero: Box::new(zero), one: Box::new(one) }
    }

    /// `1 + max query index`, or 0 for a leaf.
    pub fn query_depth(&self) -> usize {
        match self {
            Functional::Leaf(_) => 0,
            Functional::Node { index, zero, one } => (index + 1).max(zero.query_depth()).max(one.query_depth()),
        }
    }

    pub fn eval(&self, alpha: &Seq) -> u64 {
        self.eval_logged(alpha).0
    }

    /// Value and queried indices, in query order.
    pub fn eval_logged(&self, alpha: &Seq) -> (u64, Vec<usize>) {
        let mut log = Vec::new();
        let mut f = self;
        loop {
            match f {
                Functional::Leaf(v) => return (*v, log),
                Functional::Node { index, zero, one } => {
                    log.push(*index);
                    f = if alpha.get(*index) == 0 { zero } else { one };
                }
            }
        }
    }

    /// `F(u) = F(u∗𝟎)`.
    pub fn eval_word(&self, u: &Word) -> u64 {
        self.eval(&u.then_zeros())
    }

    /// `F_u(α) = F(u∗α)`.
    pub fn residual(&self, u: &Word) -> Functional {
        match self {
            Functional::Leaf(v) => Functional::Leaf(*v),
            Functional::Node { index, zero, one } => match u.bit(*index) {
                Some(0) => zero.residual(u),
                Some(_) => one.residual(u),
                None => Functional::node(index - u.len(), zero.residual(u), one.residual(u)),
            },
        }
    }

    /// Drops repeated queries on a path and nodes with equal branches.
    pub fn simplify(&self) -> Functional {
        fn go(f: &Functional, fixed: &mut BTreeMap<usize, u8>) -> Functional {
            match f {
                Functional::Leaf(v) => Functional::Leaf(*v),
                Functional::Node { index, zero, one } => match fixed.get(index) {
                    Some(0) => go(zero, fixed),
                    Some(_) => go(one, fixed),
                    None => {
                        fixed.insert(*index, 0);
                        let z = go(zero, fixed);
                        fixed.insert(*index, 1);
                        let o = go(one, fixed);
                        fixed.remove(index);
                        if z == o {
                            z
                        } else {
                            Functional::node(*index, z, o)
                        }
                    }
                },
            }
        }
        go(self, &mut BTreeMap::new())
    }

    /// Leaves reachable by some input, left to right, each with the least
    /// input word (length `query_depth`) reaching it.
    pub fn reachable_leaves(&self) -> Vec<(u64, Word)> {
        fn go(f: &Functional, bits: &mut Vec<Option<u8>>, out: &mut Vec<(u64, Word)>) {
            match f {
                Functional::Leaf(v) => {
                    let w: Vec<u8> = bits.iter().map(|b| b.unwrap_or(0)).collect();
                    out.push((*v, Word::from_vec_unchecked(w)));
                }
                Functional::Node { index, zero, one } => match bits[*index] {
                    Some(0) => go(zero, bits, out),
                    Some(_) => go(one, bits, out),
                    None => {
                        bits[*index] = Some(0);
                        go(zero, bits, out);
                        bits[*index] = Some(1);
                        go(one, bits, out);
                        bits[*index] = None;
                    }
                },
            }
        }
        let mut out = Vec::new();
        go(self, &mut vec![None; self.query_depth()], &mut out);
        out
    }

    /// The decision tree of `α ↦ pointwise_modulus(F, α)`.
    pub fn modulus_tree(&self) -> Functional {
        fn go(f: &Functional, m: usize) -> Functional {
            match f {
                Functional::Leaf(_) => Functional::Leaf(m as u64),
                Functional::Node { index, zero, one } => {
                    let m = m.max(index + 1);
                    Functional::node(*index, go(zero, m), go(one, m))
                }
            }
        }
        go(self, 0)
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Leaf(v) => write!(f, "leaf({v})"),
            Functional::Node { index, zero, one } => write!(f, "node({index}, {zero}, {one})"),
        }
    }
}

pub fn is_constant(f: &Functional) -> Constancy {
    let leaves = f.reachable_leaves();
    let (v0, w0) = leaves[0].clone();
    match leaves.into_iter().find(|(v, _)| *v != v0) {
        Some((_, w1)) => Constancy::Differ(w0, w1),
        None => Constancy::Constant(v0),
    }
}

/// `1 + max queried index` while evaluating at `α`.
pub fn pointwise_modulus(f: &Functional, alpha: &Seq) -> usize {
    f.eval_logged(alpha).1.into_iter().map(|i| i + 1).max().unwrap_or(0)
}

/// Least `N` with every level-`N` residual constant.
pub fn uc_bound_bruteforce(f: &Functional) -> Result<usize> {
    let mut meter = Meter::new();
    for n in 0..=f.query_depth() {
        meter.charge_level(n)?;
        if Level::new(n).all(|u| matches!(is_constant(&f.residual(&u)), Constancy::Constant(_))) {
            return Ok(n);
        }
    }
    unreachable!("residuals at the query depth are leaves")
}

/// Largest leaf value: an upper bound of `F` on all inputs.
pub fn bound_of(f: &Functional) -> u64 {
    match f {
        Functional::Leaf(v) => *v,
        Functional::Node { zero, one, .. } => bound_of(zero).max(bound_of(one)),
    }
}

/// The bar `{u | F(u) ≤ |u|}` with witness `α ↦ max(modulus at α, F(α))`.
pub fn bar_from_pc(f: &Functional) -> Bar {
    let stab = f.query_depth().max(bound_of(f) as usize);
    let g = f.clone();
    let carrier = DSet::stabilized(stab, move |u: &Word| g.eval_word(u) <= u.len() as u64);
    let g = f.clone();
    let wit = Witness::new("max(modulus, F)", move |a: &Seq| {
        let (v, log) = g.eval_logged(a);
        let m = log.into_iter().map(|i| i + 1).max().unwrap_or(0);
        Some(m.max(v as usize))
    });
    Bar::with_witness(carrier, wit)
}

enum Source<'a> {
    Seq(&'a Seq),
    Partial(&'a BTreeMap<usize, u8>),
    Replay(&'a [(usize, u8)]),
}

/// Query handle passed to a program's rule.
pub struct Probe<'a> {
    source: Source<'a>,
    log: Vec<(usize, u8)>,
    fuel: usize,
    missing: Option<usize>,
}

impl Probe<'_> {
    pub fn bit(&mut self, i: usize) -> Result<u8> {
        if self.log.len() >= self.fuel {
            return Err(Error::Fuel { fuel: self.fuel });
        }
        let b = match &self.source {
            Source::Seq(a) => a.get(i),
            Source::Partial(m) => match m.get(&i) {
                Some(&b) => b,
                None => {
                    self.missing = Some(i);
                    return Err(Error::precondition(format!("bit {i} is unassigned")));
                }
            },
            Source::Replay(log) => match log.iter().find(|(j, _)| *j == i) {
                Some(&(_, b)) => b,
                None => return Err(Error::certificate(format!("replay queried bit {i}, which is not in the log"))),
            },
        };
        self.log.push((i, b));
        Ok(b)
    }

    /// `α↾n`, one query per bit.
    pub fn prefix(&mut self, n: usize) -> Result<Word> {
        let bits = (0..n).map(|i| self.bit(i)).collect::<Result<Vec<u8>>>()?;
        Ok(Word::from_vec_unchecked(bits))
    }
}

/// One evaluation: the value and the queries made, in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: u64,
    pub queries: Vec<(usize, u8)>,
}

impl Evaluation {
    pub fn modulus(&self) -> usize {
        self.queries.iter().map(|&(i, _)| i + 1).max().unwrap_or(0)
    }
}

type Rule = Arc<dyn Fn(&mut Probe<'_>) -> Result<u64> + Send + Sync>;

/// A functional given by a query program with a per-evaluation fuel limit.
#[derive(Clone)]
pub struct ProgramFunctional {
    name: String,
    fuel: usize,
    rule: Rule,
}

impl fmt::Debug for ProgramFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProgramFunctional({}, fuel {})", self.name, self.fuel)
    }
}

impl ProgramFunctional {
    pub fn new(
        name: impl Into<String>,
        fuel: usize,
        rule: impl Fn(&mut Probe<'_>) -> Result<u64> + Send + Sync + 'static,
    ) -> Self {
        ProgramFunctional { name: name.into(), fuel, rule: Arc::new(rule) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn run<'a>(&self, source: Source<'a>) -> (Result<u64>, Probe<'a>) {
        let mut probe = Probe { source, log: Vec::new(), fuel: self.fuel, missing: None };
        let r = (self.rule)(&mut probe);
        (r, probe)
    }

    pub fn eval(&self, alpha: &Seq) -> Result<Evaluation> {
        let (r, probe) = self.run(Source::Seq(alpha));
        Ok(Evaluation { value: r?, queries: probe.log })
    }

    pub fn eval_word(&self, u: &Word) -> Result<Evaluation> {
        self.eval(&u.then_zeros())
    }

    /// Reruns on the logged bits alone and checks the value.
    pub fn replay(&self, ev: &Evaluation) -> Result<()> {
        let (r, _) = self.run(Source::Replay(&ev.queries));
        let v = r?;
        if v != ev.value {
            return Err(Error::certificate(format!("{}: replay gave {v}, log says {}", self.name, ev.value)));
        }
        Ok(())
    }

    /// The decision tree of this program, by rerunning on partial inputs.
    pub fn to_decision_tree(&self) -> Result<Functional> {
        fn go(p: &ProgramFunctional, fixed: &mut BTreeMap<usize, u8>, meter: &mut Meter) -> Result<Functional> {
            meter.charge(1)?;
            let (r, probe) = p.run(Source::Partial(fixed));
            let Some(i) = probe.missing else {
                return Ok(Functional::Leaf(r?));
            };
            fixed.insert(i, 0);
            let zero = go(p, fixed, meter);
            fixed.insert(i, 1);
            let one = go(p, fixed, meter);
            fixed.remove(&i);
            Ok(Functional::node(i, zero?, one?))
        }
        go(self, &mut BTreeMap::new(), &mut Meter::new())
    }
}

/// `F(α) = min{n | α↾n ∈ B}`, a modulus of itself.
pub fn functional_from_bar(bar: &Bar, fuel: usize) -> ProgramFunctional {
    let b = bar.carrier().clone();
    ProgramFunctional::new("min{n | α↾n ∈ B}", fuel, move |q| {
        let mut u = Word::empty();
        loop {
            if b.contains(&u) {
                return Ok(u.len() as u64);
            }
            u = u.child(q.bit(u.len())?);
        }
    })
}

/// `F(α) = min{n | ∀m ≥ n α↾m ∈ D}`, with the tail cut at the stab.
pub fn functional_from_defu(d: &DSet, fuel: usize) -> Result<ProgramFunctional> {
    let s = d.require_stab("functional_from_defu")?;
    let d = d.clone();
    Ok(ProgramFunctional::new("min{n | ∀m ≥ n α↾m ∈ D}", fuel, move |q| {
        let mut n = 0;
        loop {
            let top = s.max(n);
            let u = q.prefix(top)?;
            if (n..=top).all(|m| d.contains(&u.prefix(m))) {
                return Ok(n as u64);
            }
            n += 1;
        }
    }))
}

/// Uniform modulus of `F` from a fan oracle, given a modulus `M` of `F`.
pub fn uc_via_fan(f: &Functional, m: &Functional, fan: &dyn FanOracle) -> Result<usize> {
    let depth = f.query_depth().max(m.query_depth());
    let mut meter = Meter::new();
    meter.charge_level(depth)?;
    for u in Level::new(depth) {
        let k = m.eval_word(&u) as usize;
        if let Constancy::Differ(a, b) = is_constant(&f.residual(&u.pad_zeros(k).prefix(k))) {
            return Err(Error::certificate(format!("{m} is not a modulus of {f}: at {u}, residual differs on {a} and {b}")));
        }
    }
    let n = fan.bound(&bar_from_pc(m))?;
    meter.charge_level(n)?;
    if let Some(u) = Level::new(n).find(|u| !matches!(is_constant(&f.residual(u)), Constancy::Constant(_))) {
        return Err(Error::certificate(format!("bound {n} fails: F_{u} is not constant")));
    }
    Ok(n)
}

/// As [`uc_via_fan`] for a program `F`, checked on the two extremal
/// extensions of each level-`N` word and by replay.
pub fn uc_via_fan_program(f: &ProgramFunctional, m: &Functional, fan: &dyn FanOracle) -> Result<usize> {
    let n = fan.bound(&bar_from_pc(m))?;
    let mut meter = Meter::new();
    meter.charge_level(n)?;
    for u in Level::new(n) {
        let lo = f.eval(&Seq::eventually(u.clone(), 0))?;
        let hi = f.eval(&Seq::eventually(u.clone(), 1))?;
        f.replay(&lo)?;
        f.replay(&hi)?;
        if lo.value != hi.value {
            return Err(Error::certificate(format!("bound {n} fails at {u}: {} ≠ {}", lo.value, hi.value)));
        }
    }
    Ok(n)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Deco {
    Exists(Word, Word),
    NotExists,
}

pub fn deco_decide(f: &Functional) -> Deco {
    match is_constant(f) {
        Constancy::Differ(a, b) => Deco::Exists(a, b),
        Constancy::Constant(_) => Deco::NotExists,
    }
}

/// `D = {u | F(u) = F(u∗(1))}`, stabilized at the query depth.
pub fn defu_set_from_functional(f: &Functional) -> DSet {
    let g = f.clone();
    DSet::stabilized(f.query_depth(), move |u: &Word| g.eval_word(u) == g.eval_word(&u.child(1)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Defu {
    Exists(Word),
    NotExists,
}

// Least length of a non-member of D, searched up to the stab.
fn least_nonmember_len(d: &DSet, s: usize) -> Result<Option<usize>> {
    let mut meter = Meter::new();
    for n in 0..=s {
        meter.charge_level(n)?;
        if Level::new(n).any(|w| !d.contains(&w)) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// The infinite tree of the DEFU reduction:
/// `u ∈ T ⇔ ∀w (|w| ≤ |u| ∧ w ∉ D ⇒ ∃k ≤ |w| u↾k ∉ D)`.
pub fn defu_tree(d: &DSet) -> Result<Tree> {
    let s = d.require_stab("defu_tree")?;
    let least = least_nonmember_len(d, s)?;
    let d = d.clone();
    let carrier = match least {
        None => DSet::full(),
        // the least non-member length is the only constraint that binds
        Some(e) => DSet::stabilized(e, move |u: &Word| {
            u.len() < e || (0..=e).any(|k| !d.contains(&u.prefix(k)))
        }),
    };
    Ok(Tree::trusted(carrier))
}

/// Decides `∃u ∉ D` through a WKL oracle path and a bar witness for `D°`.
pub fn defu_via_wkl(d: &DSet, wkl: &dyn WklOracle) -> Result<Defu> {
    let s = d.require_stab("defu_via_wkl")?;
    let tree = defu_tree(d)?;
    let interior = d.interior()?;
    let limit = interior.stab().unwrap_or(s).max(s) + 1;
    let wit = Witness::least_in(interior.clone(), limit);
    let live = wkl.solve(&tree)?.into_live();
    let alpha = live.seq();
    let n = wit.apply(&alpha);
    live.check()?;
    let n = n.ok_or_else(|| Error::certificate(format!("the interior is not met along the path within {limit}")))?;
    let top = n.max(s);
    let u = alpha.restrict(top);
    live.check()?;
    Ok(match (0..=top).map(|k| u.prefix(k)).find(|p| !d.contains(p)) {
        Some(p) => Defu::Exists(p),
        None => Defu::NotExists,
    })
}

/// Uniform bound of the interior of `D` (a c-set bar) from a fan oracle.
pub fn cfan_bound(d: &DSet, fan: &dyn FanOracle) -> Result<usize> {
    d.require_stab("cfan_bound")?;
    fan.bound(&Bar::new(d.interior()?))
}
