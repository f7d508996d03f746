//! Random instance generators and brute-force oracles shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use fankit::continuity::Functional;
use fankit::words::Level;
use fankit::{DSet, Flags, Tree, Word};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn slot(u: &Word) -> usize {
    (1usize << u.len()) - 1 + u.index() as usize
}

/// Membership table for all words of length `≤ stab`, extended by the
/// length-`stab` prefix.
#[derive(Clone, Debug)]
pub struct Table {
    pub stab: usize,
    bits: Vec<bool>,
}

impl Table {
    pub fn new(stab: usize, f: impl Fn(&Word) -> bool) -> Self {
        let mut bits = vec![false; (1 << (stab + 1)) - 1];
        for n in 0..=stab {
            for u in Level::new(n) {
                bits[slot(&u)] = f(&u);
            }
        }
        Table { stab, bits }
    }

    pub fn get(&self, u: &Word) -> bool {
        self.bits[slot(&u.prefix(self.stab.min(u.len())))]
    }

    pub fn set(&self) -> DSet {
        let t = Arc::new(self.clone());
        DSet::stabilized(self.stab, move |u| t.get(u))
    }
}

pub fn random_table(r: &mut ChaCha8Rng, max_stab: usize) -> Table {
    let s = r.gen_range(0..=max_stab);
    let p: f64 = r.gen_range(0.1..0.9);
    let coins: Vec<bool> = (0..(1 << (s + 1)) - 1).map(|_| r.gen_bool(p)).collect();
    Table::new(s, |u| coins[slot(u)])
}

pub fn random_set(r: &mut ChaCha8Rng, max_stab: usize) -> DSet {
    random_table(r, max_stab).set()
}

/// A random stabilized set that is a bar (its bound is at most its stab).
pub fn random_bar(r: &mut ChaCha8Rng, max_stab: usize) -> DSet {
    loop {
        let b = random_set(r, max_stab);
        let s = b.stab().unwrap();
        if brute_bound(&b, s).is_some() {
            return b;
        }
    }
}

/// Random stabilized tree, built top-down. With `infinite`, a random word
/// of length `stab` is forced in.
pub fn random_tree(r: &mut ChaCha8Rng, max_stab: usize, infinite: bool) -> Tree {
    let s = r.gen_range(0..=max_stab);
    let p: f64 = r.gen_range(0.4..0.95);
    let forced = Word::from_index(s, r.gen_range(0..1u64 << s));
    let mut inside = vec![false; (1 << (s + 1)) - 1];
    for n in 0..=s {
        for u in Level::new(n) {
            let parent_in = u.parent().is_none_or(|v| inside[slot(&v)]);
            let coin = if n == 0 { r.gen_bool(0.95) } else { r.gen_bool(p) };
            inside[slot(&u)] = (parent_in && coin) || (infinite && u.is_prefix_of(&forced));
        }
    }
    let t = Table::new(s, |u| inside[slot(u)]);
    Tree::new(t.set()).expect("top-down construction is restriction-closed")
}

/// Random convex stabilized tree: each level is an interval of the
/// children of the previous one.
pub fn random_convex_tree(r: &mut ChaCha8Rng, max_stab: usize, infinite: bool) -> Tree {
    let s = r.gen_range(0..=max_stab);
    let mut ranges: Vec<Option<(u64, u64)>> = Vec::new();
    let mut cur = if infinite || r.gen_bool(0.95) { Some((0, 0)) } else { None };
    ranges.push(cur);
    for _ in 0..s {
        cur = cur.and_then(|(lo, hi)| {
            if !infinite && r.gen_bool(0.15) {
                return None;
            }
            let (a, b) = (2 * lo, 2 * hi + 1);
            let x = r.gen_range(a..=b);
            let y = r.gen_range(a..=b);
            Some((x.min(y), x.max(y)))
        });
        ranges.push(cur);
    }
    let t = Table::new(s, |u| ranges[u.len()].is_some_and(|(lo, hi)| (lo..=hi).contains(&u.index())));
    let set = t.set().with_flags(Flags { convex: true, restriction_closed: true, ..Flags::NONE }).unwrap();
    Tree::new(set).unwrap()
}

/// Random co-convex stabilized bar: per-level complement intervals, either
/// nested (the complement is a finite convex tree) or independent.
pub fn random_coconvex_bar(r: &mut ChaCha8Rng, max_stab: usize) -> DSet {
    loop {
        let s = r.gen_range(0..=max_stab);
        let nested = r.gen_bool(0.5);
        let mut holes: Vec<Option<(u64, u64)>> = Vec::new();
        let mut prev: Option<(u64, u64)> = Some((0, 0));
        for n in 0..=s {
            let h = if n == s && r.gen_bool(0.5) {
                None
            } else if nested {
                prev.and_then(|(lo, hi)| {
                    let (a, b) = if n == 0 { (0, 0) } else { (2 * lo, 2 * hi + 1) };
                    if r.gen_bool(0.2) {
                        return None;
                    }
                    let x = r.gen_range(a..=b);
                    let y = r.gen_range(a..=b);
                    Some((x.min(y), x.max(y)))
                })
            } else if r.gen_bool(0.3) {
                None
            } else {
                let top = (1u64 << n) - 1;
                let x = r.gen_range(0..=top);
                let y = r.gen_range(0..=top);
                Some((x.min(y), x.max(y)))
            };
            holes.push(h);
            prev = h;
        }
        let t = Table::new(s, |u| !holes[u.len()].is_some_and(|(lo, hi)| (lo..=hi).contains(&u.index())));
        let b = t.set();
        if brute_bound(&b, s).is_some() {
            return b.with_flags(Flags { co_convex: true, ..Flags::NONE }).unwrap();
        }
    }
}

/// Random decision tree with query indices below `max_index`.
pub fn random_functional(r: &mut ChaCha8Rng, max_index: usize, nesting: usize) -> Functional {
    if nesting == 0 || r.gen_bool(0.3) {
        return Functional::leaf(r.gen_range(0..4));
    }
    let i = r.gen_range(0..max_index);
    let z = random_functional(r, max_index, nesting - 1);
    let o = random_functional(r, max_index, nesting - 1);
    Functional::node(i, z, o)
}

/// Random stabilized `D` whose interior is a bar (level `stab` inside `D`).
pub fn random_defu_set(r: &mut ChaCha8Rng, max_stab: usize) -> DSet {
    let s = r.gen_range(1..=max_stab);
    if r.gen_bool(0.25) {
        return DSet::stabilized(s, |_| true);
    }
    let p: f64 = r.gen_range(0.7..0.99);
    let coins: Vec<bool> = (0..(1 << (s + 1)) - 1).map(|_| r.gen_bool(p)).collect();
    Table::new(s, |u| u.len() == s || coins[slot(u)]).set()
}

/// Least `N ≤ max` such that every level-`N` word has a prefix in `b`.
pub fn brute_bound(b: &DSet, max: usize) -> Option<usize> {
    (0..=max).find(|&n| Level::new(n).all(|u| u.prefixes().any(|p| b.contains(&p))))
}

/// Members of level `k` with a member extension at level `d`.
pub fn survivors(t: &Tree, k: usize, d: usize) -> BTreeSet<Word> {
    Level::new(d).filter(|v| t.contains(v)).map(|v| v.prefix(k)).collect()
}

/// All words of length `≤ d`.
pub fn words_to(d: usize) -> impl Iterator<Item = Word> {
    (0..=d).flat_map(Level::new)
}

/// Does `F` take two distinct values? By evaluation on a full level.
pub fn brute_nonconstant(f: &Functional) -> bool {
    let d = f.query_depth();
    let v = f.eval_word(&Word::zeros(d));
    Level::new(d).any(|u| f.eval_word(&u) != v)
}

fn random_word_text(r: &mut ChaCha8Rng, max_len: usize) -> String {
    let n = r.gen_range(0..=max_len);
    if n == 0 {
        return "e".into();
    }
    (0..n).map(|_| if r.gen_bool(0.5) { '1' } else { '0' }).collect()
}

/// A random set expression in spec syntax; every leaf has a stab `≤ 4`.
pub fn random_set_text(r: &mut ChaCha8Rng, depth: usize) -> String {
    if depth > 0 && r.gen_bool(0.5) {
        let a = random_set_text(r, depth - 1);
        return match r.gen_range(0..5) {
            0 => format!("union({a}, {})", random_set_text(r, depth - 1)),
            1 => format!("intersect({a}, {})", random_set_text(r, depth - 1)),
            2 => format!("complement({a})"),
            3 => format!("closure({a})"),
            _ => format!("interior({a})"),
        };
    }
    match r.gen_range(0..7) {
        0 => format!("len_ge({})", r.gen_range(0..=4)),
        1 => format!("bit({}, {})", r.gen_range(0..=3), r.gen_range(0..=1)),
        2 => format!("prefix({})", random_word_text(r, 3)),
        3 => format!("level({})", r.gen_range(0..=3)),
        4 => {
            let ws: Vec<String> = (0..r.gen_range(0..=4)).map(|_| random_word_text(r, 3)).collect();
            format!("finite({{{}}})", ws.join(", "))
        }
        5 => "full".into(),
        _ => "empty".into(),
    }
}

pub fn random_functional_text(r: &mut ChaCha8Rng, nesting: usize) -> String {
    if nesting == 0 || r.gen_bool(0.3) {
        let v = r.gen_range(0..4);
        return if r.gen_bool(0.5) { format!("leaf {v}") } else { format!("leaf({v})") };
    }
    let i = r.gen_range(0..6);
    format!("node({i}, {}, {})", random_functional_text(r, nesting - 1), random_functional_text(r, nesting - 1))
}

/// A random spec document. Names: `s0..s3` sets, `t0, t1` trees, `b0` a
/// bar, `c0` a co-convex bar, `d0` a set with bar interior, `f0..f2`
/// functionals.
pub fn random_spec_text(r: &mut ChaCha8Rng) -> String {
    let mut out = String::from("# generated\n");
    for i in 0..4 {
        out += &format!("s{i} = {}\n", random_set_text(r, 2));
    }
    for i in 0..2 {
        out += &format!("t{i} = tree(complement(closure({})))\n", random_set_text(r, 2));
    }
    out += &format!("b0 = bar({}, least(8))\n", random_set_text(r, 2));
    let k = r.gen_range(0..=4);
    let c = match r.gen_range(0..4) {
        0 => format!("bar(len_ge({k}), const({k}))"),
        1 => format!("bar(union(bit(0, 1), len_ge({k})), least(8))"),
        2 => format!("bar(union(complement(prefix({})), len_ge({k})), least(8))", random_word_text(r, 3)),
        _ => format!("bar(union(level({}), len_ge({k})), least(8))", r.gen_range(0..=3)),
    };
    out += &format!("c0 = {c} coconvex\n");
    out += &format!("d0 = union(len_ge({}), {})\n", r.gen_range(4..=5), random_set_text(r, 2));
    for i in 0..3 {
        out += &format!("f{i} = {}\n", random_functional_text(r, 4));
    }
    out
}

/// A random subcommand line over the names of [`random_spec_text`].
pub fn random_command(r: &mut ChaCha8Rng) -> Vec<String> {
    let pick = |r: &mut ChaCha8Rng, names: &[&str]| names[r.gen_range(0..names.len())].to_string();
    let sets = ["s0", "s1", "s2", "s3", "b0", "c0", "d0", "t0"];
    let words: Vec<String> = match r.gen_range(0..8) {
        0 => vec!["bar-check".into(), "--set".into(), pick(r, &sets), "--depth".into(), r.gen_range(0..=8).to_string()],
        1 => vec!["uniform-bound".into(), "--set".into(), pick(r, &sets), "--max".into(), r.gen_range(0..=8).to_string()],
        2 => vec!["complete-tree".into(), "--tree".into(), pick(r, &["t0", "t1"]), "--depth".into(), r.gen_range(0..=6).to_string()],
        3 => vec![
            "find-path".into(),
            "--tree".into(),
            pick(r, &["t0", "t1"]),
            "--bits".into(),
            r.gen_range(0..=10).to_string(),
            "--oracle".into(),
            pick(r, &["llpo:8", "llpo:16"]),
        ],
        4 => vec!["coconvex-bound".into(), "--bar".into(), "c0".into()],
        5 => {
            let mut v = vec!["uc-bound".into(), "--fn".into(), pick(r, &["f0", "f1", "f2"])];
            if r.gen_bool(0.5) {
                v.push("--via-fan".into());
            }
            v
        }
        6 => vec!["deco".into(), "--fn".into(), pick(r, &["f0", "f1", "f2"])],
        _ => vec!["defu".into(), "--set".into(), "d0".into(), "--oracle".into(), "llpo:16".into()],
    };
    words
}
