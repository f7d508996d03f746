//! The spec file: one `name = expr` definition per line.
//!
//! ```text
//! # comments run to the end of the line
//! len2  = len_ge(2)
//! holes = finite({e, 01, 110}) stab 4
//! t     = tree(complement(closure(holes)))
//! b     = bar(union(bit(0, 1), len_ge(3)), least(8)) coconvex
//! q2    = node(2, leaf 0, leaf 1)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::continuity::Functional;
use crate::fan::Bar;
use crate::sets::{DSet, Flags, FLAG_HORIZON};
use crate::trees::Tree;
use crate::witness::Witness;
use crate::words::Word;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub line: usize,
    pub col: usize,
    pub name: Option<String>,
    pub msg: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}:{}: ", self.line, self.col)?;
        }
        if let Some(n) = &self.name {
            write!(f, "`{n}`: ")?;
        }
        f.write_str(&self.msg)
    }
}

impl std::error::Error for SpecError {}

type Pos = (usize, usize);

fn err(pos: Pos, msg: impl Into<String>) -> SpecError {
    SpecError { line: pos.0, col: pos.1, name: None, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Digits(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Eq,
}

fn lex(line: &str, lineno: usize) -> Result<Vec<(Tok, Pos)>, SpecError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = (lineno, i + 1);
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, pos));
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Digits(chars[start..i].iter().collect()), pos));
        } else if c.is_ascii_alphabetic() || c == '_' || c == 'ε' {
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            return Err(err(pos, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Expr {
    Atom(String, Pos),
    Ident(String, Pos),
    Call(String, Vec<Expr>, Pos),
    Braces(Vec<Expr>, Pos),
    Modified(Box<Expr>, Vec<(Modifier, Pos)>),
}

impl Expr {
    fn pos(&self) -> Pos {
        match self {
            Expr::Atom(_, p) | Expr::Ident(_, p) | Expr::Call(_, _, p) | Expr::Braces(_, p) => *p,
            Expr::Modified(e, _) => e.pos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Modifier {
    Stab(usize),
    Flag(&'static str),
}

const FLAG_WORDS: [&str; 4] = ["ext_closed", "restr_closed", "convex", "coconvex"];

fn reserved(name: &str) -> bool {
    matches!(name, "stab" | "e" | "ε") || FLAG_WORDS.contains(&name)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |t| t.1)
    }

    fn bump(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Pos, SpecError> {
        let pos = self.pos();
        match self.bump() {
            Some((t, p)) if t == want => Ok(p),
            _ => Err(err(pos, format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, SpecError> {
        let e = self.primary()?;
        let mut mods = Vec::new();
        while let Some(Tok::Ident(name)) = self.peek().cloned() {
            let pos = self.pos();
            if name == "stab" {
                self.bump();
                let p = self.pos();
                match self.bump() {
                    Some((Tok::Digits(d), _)) => {
                        let n = d.parse().map_err(|_| err(p, "stab depth out of range"))?;
                        mods.push((Modifier::Stab(n), pos));
                    }
                    _ => return Err(err(p, "expected a depth after `stab`")),
                }
            } else if let Some(f) = FLAG_WORDS.iter().find(|&&f| f == name) {
                self.bump();
                mods.push((Modifier::Flag(f), pos));
            } else {
                return Err(err(pos, format!("unexpected `{name}` after an expression")));
            }
        }
        Ok(if mods.is_empty() { e } else { Expr::Modified(Box::new(e), mods) })
    }

    fn primary(&mut self) -> Result<Expr, SpecError> {
        let pos = self.pos();
        match self.bump() {
            Some((Tok::Digits(d), p)) => Ok(Expr::Atom(d, p)),
            Some((Tok::LBrace, p)) => {
                let items = self.list(Tok::RBrace, "`}`")?;
                Ok(Expr::Braces(items, p))
            }
            Some((Tok::Ident(name), p)) => match self.peek() {
                Some(Tok::LParen) => {
                    self.bump();
                    let args = self.list(Tok::RParen, "`)`")?;
                    Ok(Expr::Call(name, args, p))
                }
                Some(Tok::Digits(_)) if name == "leaf" => {
                    let arg = self.primary()?;
                    Ok(Expr::Call(name, vec![arg], p))
                }
                _ => Ok(Expr::Ident(name, p)),
            },
            _ => Err(err(pos, "expected an expression")),
        }
    }

    fn list(&mut self, close: Tok, what: &str) -> Result<Vec<Expr>, SpecError> {
        let mut items = Vec::new();
        if self.peek() == Some(&close) {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            let pos = self.pos();
            match self.bump() {
                Some((Tok::Comma, _)) => continue,
                Some((t, _)) if t == close => return Ok(items),
                _ => return Err(err(pos, format!("expected `,` or {what}"))),
            }
        }
    }
}

/// A value defined in a spec file.
#[derive(Clone, Debug)]
pub enum Value {
    Set(DSet),
    Tree(Tree),
    Bar(Bar),
    Fn(Functional),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Set(_) => "a set",
            Value::Tree(_) => "a tree",
            Value::Bar(_) => "a bar",
            Value::Fn(_) => "a functional",
        }
    }
}

#[derive(Debug, Clone)]
struct Def {
    expr: Expr,
    pos: Pos,
}

/// A parsed and fully evaluated spec file.
#[derive(Debug, Clone, Default)]
pub struct SpecDoc {
    values: BTreeMap<String, (Value, Pos)>,
}

impl SpecDoc {
    pub fn parse(text: &str) -> Result<SpecDoc, SpecError> {
        let mut defs: BTreeMap<String, Def> = BTreeMap::new();
        let mut order = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let toks = lex(line, i + 1)?;
            if toks.is_empty() {
                continue;
            }
            let end = (i + 1, line.chars().count() + 1);
            let mut p = Parser { toks, at: 0, end };
            let (name, pos) = match p.bump() {
                Some((Tok::Ident(n), pos)) => (n, pos),
                Some((_, pos)) => return Err(err(pos, "expected a definition name")),
                None => unreachable!(),
            };
            let named = |e: SpecError| SpecError { name: Some(name.clone()), ..e };
            if reserved(&name) {
                return Err(named(err(pos, "is a reserved word")));
            }
            p.expect(Tok::Eq, "`=`").map_err(named)?;
            let expr = p.expr().map_err(named)?;
            if p.peek().is_some() {
                return Err(named(err(p.pos(), "unexpected input after the expression")));
            }
            if let Some(prev) = defs.get(&name) {
                return Err(named(err(pos, format!("already defined on line {}", prev.pos.0))));
            }
            order.push(name.clone());
            defs.insert(name, Def { expr, pos });
        }
        let mut ev = Evaluator { defs: &defs, done: BTreeMap::new(), active: BTreeSet::new() };
        for name in &order {
            ev.resolve(name, defs[name].pos)?;
        }
        let values = ev.done.into_iter().map(|(k, v)| { let pos = defs[&k].pos; (k, (v, pos)) }).collect();
        Ok(SpecDoc { values })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn value(&self, name: &str) -> Result<&Value, SpecError> {
        self.values.get(name).map(|(v, _)| v).ok_or_else(|| SpecError {
            line: 0,
            col: 0,
            name: Some(name.to_string()),
            msg: "not defined in the spec".into(),
        })
    }

    fn wrong(&self, name: &str, want: &str, v: &Value) -> SpecError {
        let (line, col) = self.values[name].1;
        SpecError { line, col, name: Some(name.to_string()), msg: format!("expected {want}, found {}", v.kind()) }
    }

    pub fn set(&self, name: &str) -> Result<DSet, SpecError> {
        match self.value(name)? {
            Value::Set(s) => Ok(s.clone()),
            Value::Tree(t) => Ok(t.carrier().clone()),
            Value::Bar(b) => Ok(b.carrier().clone()),
            v => Err(self.wrong(name, "a set", v)),
        }
    }

    pub fn tree(&self, name: &str) -> Result<Tree, SpecError> {
        match self.value(name)? {
            Value::Tree(t) => Ok(t.clone()),
            Value::Set(s) => Tree::new(s.clone()).map_err(|e| {
                let (line, col) = self.values[name].1;
                SpecError { line, col, name: Some(name.to_string()), msg: e.to_string() }
            }),
            v => Err(self.wrong(name, "a tree", v)),
        }
    }

    pub fn bar(&self, name: &str) -> Result<Bar, SpecError> {
        match self.value(name)? {
            Value::Bar(b) => Ok(b.clone()),
            Value::Set(s) => Ok(Bar::new(s.clone())),
            v => Err(self.wrong(name, "a bar", v)),
        }
    }

    pub fn functional(&self, name: &str) -> Result<Functional, SpecError> {
        match self.value(name)? {
            Value::Fn(f) => Ok(f.clone()),
            v => Err(self.wrong(name, "a functional", v)),
        }
    }
}

struct Evaluator<'a> {
    defs: &'a BTreeMap<String, Def>,
    done: BTreeMap<String, Value>,
    active: BTreeSet<String>,
}

impl Evaluator<'_> {
    fn resolve(&mut self, name: &str, at: Pos) -> Result<Value, SpecError> {
        if let Some(v) = self.done.get(name) {
            return Ok(v.clone());
        }
        let Some(def) = self.defs.get(name) else {
            return Err(SpecError { name: Some(name.into()), ..err(at, "not defined") });
        };
        if !self.active.insert(name.to_string()) {
            return Err(SpecError { name: Some(name.into()), ..err(at, "definition refers to itself") });
        }
        let v = self.eval(&def.expr).map_err(|e| SpecError { name: e.name.or(Some(name.into())), ..e })?;
        self.active.remove(name);
        self.done.insert(name.to_string(), v.clone());
        Ok(v)
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, SpecError> {
        match e {
            Expr::Atom(_, p) => Err(err(*p, "a number or word is not a value here")),
            Expr::Braces(_, p) => Err(err(*p, "a word list is only allowed inside finite(…)")),
            Expr::Ident(name, p) if self.defs.contains_key(name) => self.resolve(name, *p),
            Expr::Ident(name, p) => match name.as_str() {
                "zeros" | "ones" | "full" | "empty" => self.call(name, &[], *p),
                "e" | "ε" => Err(err(*p, "a word is not a value here")),
                n => self.resolve(n, *p),
            },
            Expr::Call(name, args, p) => self.call(name, args, *p),
            Expr::Modified(inner, mods) => {
                let v = self.eval(inner)?;
                apply_mods(v, mods)
            }
        }
    }

    fn set(&mut self, e: &Expr) -> Result<DSet, SpecError> {
        match self.eval(e)? {
            Value::Set(s) => Ok(s),
            Value::Tree(t) => Ok(t.carrier().clone()),
            Value::Bar(b) => Ok(b.carrier().clone()),
            Value::Fn(_) => Err(err(e.pos(), "expected a set, found a functional")),
        }
    }

    fn functional(&mut self, e: &Expr) -> Result<Functional, SpecError> {
        match self.eval(e)? {
            Value::Fn(f) => Ok(f),
            v => Err(err(e.pos(), format!("expected a functional, found {}", v.kind()))),
        }
    }

    fn call(&mut self, name: &str, args: &[Expr], pos: Pos) -> Result<Value, SpecError> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(pos, format!("`{name}` takes {n} argument(s), got {}", args.len())))
            }
        };
        let set = |s: DSet| Ok(Value::Set(s));
        match name {
            "len_ge" => {
                arity(1)?;
                set(DSet::len_ge(number(&args[0])?))
            }
            "level" => {
                arity(1)?;
                set(DSet::level(number(&args[0])?))
            }
            "count_ones_ge" => {
                arity(1)?;
                set(DSet::count_ones_ge(number(&args[0])?))
            }
            "bit" => {
                arity(2)?;
                let b = number(&args[1])?;
                if b > 1 {
                    return Err(err(args[1].pos(), "a bit is 0 or 1"));
                }
                set(DSet::bit(number(&args[0])?, b as u8))
            }
            "prefix" => {
                arity(1)?;
                set(DSet::prefix(word(&args[0])?))
            }
            "finite" => {
                arity(1)?;
                let Expr::Braces(items, _) = &args[0] else {
                    return Err(err(args[0].pos(), "expected a word list `{…}`"));
                };
                set(DSet::finite(items.iter().map(word).collect::<Result<Vec<_>, _>>()?))
            }
            "zeros" | "ones" | "full" | "empty" => {
                arity(0)?;
                set(match name {
                    "zeros" => DSet::zeros_tree(),
                    "ones" => DSet::ones_tree(),
                    "full" => DSet::full(),
                    _ => DSet::empty(),
                })
            }
            "union" | "intersect" => {
                if args.is_empty() {
                    return Err(err(pos, format!("`{name}` needs at least one argument")));
                }
                let mut acc = self.set(&args[0])?;
                for a in &args[1..] {
                    let s = self.set(a)?;
                    acc = if name == "union" { acc.union(&s) } else { acc.intersect(&s) };
                }
                set(acc)
            }
            "complement" | "closure" | "interior" => {
                arity(1)?;
                let s = self.set(&args[0])?;
                match name {
                    "complement" => set(s.complement()),
                    "closure" => set(s.closure()),
                    _ => set(s.interior().map_err(|e| err(pos, e.to_string()))?),
                }
            }
            "tree" => {
                arity(1)?;
                let s = self.set(&args[0])?;
                Ok(Value::Tree(Tree::new(s).map_err(|e| err(pos, e.to_string()))?))
            }
            "bar" => {
                arity(2)?;
                let s = self.set(&args[0])?;
                let wit = witness(&args[1], &s)?;
                Ok(Value::Bar(Bar::with_witness(s, wit)))
            }
            "leaf" => {
                arity(1)?;
                Ok(Value::Fn(Functional::leaf(number64(&args[0])?)))
            }
            "node" => {
                arity(3)?;
                let i = number(&args[0])?;
                let z = self.functional(&args[1])?;
                let o = self.functional(&args[2])?;
                Ok(Value::Fn(Functional::node(i, z, o)))
            }
            "const" | "first_one_plus" | "least" => Err(err(pos, format!("`{name}` is only allowed as a bar witness"))),
            _ => Err(err(pos, format!("unknown function `{name}`"))),
        }
    }
}

fn number64(e: &Expr) -> Result<u64, SpecError> {
    match e {
        Expr::Atom(d, p) => d.parse().map_err(|_| err(*p, "number out of range")),
        _ => Err(err(e.pos(), "expected a number")),
    }
}

fn number(e: &Expr) -> Result<usize, SpecError> {
    let n = number64(e)?;
    usize::try_from(n).ok().filter(|&n| n <= 1 << 20).ok_or_else(|| err(e.pos(), "number out of range"))
}

fn word(e: &Expr) -> Result<Word, SpecError> {
    match e {
        Expr::Ident(s, _) if s == "e" || s == "ε" => Ok(Word::empty()),
        Expr::Atom(d, p) => d.parse().map_err(|_| err(*p, format!("`{d}` is not a binary word"))),
        _ => Err(err(e.pos(), "expected a binary word")),
    }
}

fn witness(e: &Expr, carrier: &DSet) -> Result<Witness, SpecError> {
    match e {
        Expr::Call(name, args, pos) if args.len() == 1 => {
            let k = number(&args[0])?;
            match name.as_str() {
                "const" => Ok(Witness::constant(k)),
                "first_one_plus" => Ok(Witness::first_one_plus(k)),
                "least" => Ok(Witness::least_in(carrier.clone(), k)),
                _ => Err(err(*pos, format!("unknown witness `{name}`"))),
            }
        }
        _ => Err(err(e.pos(), "expected a witness: const(k), first_one_plus(k) or least(k)")),
    }
}

fn apply_mods(v: Value, mods: &[(Modifier, Pos)]) -> Result<Value, SpecError> {
    let modify = |mut s: DSet| -> Result<DSet, SpecError> {
        for &(m, pos) in mods {
            s = match m {
                Modifier::Stab(n) => {
                    let s = s.with_stab(n);
                    if let Some(w) = s.stab_violation(FLAG_HORIZON.max(n + 2)) {
                        return Err(err(pos, format!("stab {n} is violated at {w}")));
                    }
                    s
                }
                Modifier::Flag(f) => {
                    let flags = match f {
                        "ext_closed" => Flags::extension_closed(),
                        "restr_closed" => Flags::restriction_closed(),
                        "convex" => Flags { convex: true, ..Flags::NONE },
                        _ => Flags { co_convex: true, ..Flags::NONE },
                    };
                    s.with_flags(flags).map_err(|e| err(pos, e.to_string()))?
                }
            };
        }
        Ok(s)
    };
    match v {
        Value::Set(s) => Ok(Value::Set(modify(s)?)),
        Value::Tree(t) => {
            let s = modify(t.carrier().clone())?;
            Ok(Value::Tree(Tree::new(s).map_err(|e| err(mods[0].1, e.to_string()))?))
        }
        Value::Bar(b) => {
            let s = modify(b.carrier().clone())?;
            Ok(Value::Bar(match b.wit() {
                Some(w) => Bar::with_witness(s, w.clone()),
                None => Bar::new(s),
            }))
        }
        Value::Fn(_) => Err(err(mods[0].1, "modifiers apply to sets, trees and bars")),
    }
}
