//! Command-line driver: runs checks and reductions against a spec file and
//! emits certificates that `verify` re-checks by level scans alone.

pub mod cert;
pub mod spec;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use crate::budget::Meter;
use crate::continuity::{deco_decide, defu_via_wkl, is_constant, uc_bound_bruteforce, uc_via_fan, Constancy, Deco, Defu};
use crate::error::Error;
use crate::fan::{coconvex_bound, fan_bruteforce, first_unbarred};
use crate::oracles::{WklFromLlpo, WklOracle};
use crate::sets::{bar_verdict, uniform_bound, DSet, Evidence, Verdict};
use crate::trees::{Trace, DEFAULT_FUEL};
use crate::words::{Level, Word};

pub use cert::Certificate;
pub use spec::{SpecDoc, SpecError, Value};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Largest level the fan used by `uc-bound --via-fan` will scan.
pub const FAN_MAX: usize = 24;

#[derive(Parser, Debug)]
#[command(name = "fankit", version, about = "Bars, trees and functionals on Cantor space, with certificates")]
pub struct Cli {
    /// Spec file with the named sets, trees, bars and functionals.
    #[arg(long, global = true, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// `llpo:H`: the bounded LLPO oracle scanning indices `0..=H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleArg(pub usize);

impl FromStr for OracleArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.strip_prefix("llpo:")
            .and_then(|h| h.parse().ok())
            .map(OracleArg)
            .ok_or_else(|| format!("expected llpo:H, got {s:?}"))
    }
}

impl fmt::Display for OracleArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "llpo:{}", self.0)
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Decide whether a set is a bar, up to a depth.
    BarCheck {
        #[arg(long)]
        set: String,
        #[arg(long)]
        depth: usize,
    },
    /// Least uniform bound of a set, up to a maximum.
    UniformBound {
        #[arg(long)]
        set: String,
        #[arg(long)]
        max: usize,
    },
    /// Print the levels of the completion of a stabilized tree.
    CompleteTree {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        depth: usize,
    },
    /// Path prefix of an infinite tree from an LLPO oracle.
    FindPath {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        bits: usize,
        #[arg(long, default_value = "llpo:16")]
        oracle: OracleArg,
    },
    /// Uniform bound of a co-convex bar, without oracles.
    CoconvexBound {
        #[arg(long)]
        bar: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Uniform modulus of a decision-tree functional.
    UcBound {
        #[arg(long = "fn", value_name = "NAME")]
        func: String,
        /// Obtain the bound through a fan oracle and a pointwise modulus.
        #[arg(long)]
        via_fan: bool,
        /// Modulus to use with --via-fan (default: the pointwise modulus).
        #[arg(long, value_name = "NAME")]
        modulus: Option<String>,
    },
    /// Decide whether a functional takes two distinct values.
    Deco {
        #[arg(long = "fn", value_name = "NAME")]
        func: String,
    },
    /// Decide whether a stabilized set with bar interior misses a word.
    Defu {
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "llpo:16")]
        oracle: OracleArg,
    },
    /// Re-check a certificate against the spec.
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
}

impl Command {
    /// Canonical command line, as recorded in certificates.
    pub fn echo(&self) -> String {
        match self {
            Command::BarCheck { set, depth } => format!("bar-check --set {set} --depth {depth}"),
            Command::UniformBound { set, max } => format!("uniform-bound --set {set} --max {max}"),
            Command::CompleteTree { tree, depth } => format!("complete-tree --tree {tree} --depth {depth}"),
            Command::FindPath { tree, bits, oracle } => format!("find-path --tree {tree} --bits {bits} --oracle {oracle}"),
            Command::CoconvexBound { bar, fuel } => format!("coconvex-bound --bar {bar} --fuel {fuel}"),
            Command::UcBound { func, via_fan, modulus } => {
                let mut s = format!("uc-bound --fn {func}");
                if *via_fan {
                    s.push_str(" --via-fan");
                }
                if let Some(m) = modulus {
                    s.push_str(&format!(" --modulus {m}"));
                }
                s
            }
            Command::Deco { func } => format!("deco --fn {func}"),
            Command::Defu { set, oracle } => format!("defu --set {set} --oracle {oracle}"),
            Command::Verify { cert } => format!("verify --cert {}", cert.display()),
        }
    }
}

/// Exit code and output streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl fmt::Display) -> Self {
        Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }

    fn cert(code: i32, c: &Certificate) -> Self {
        Outcome { code, stdout: c.render(), stderr: String::new() }
    }
}

/// Runs a full command line (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_YES, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let Some(path) = cli.spec else {
        return Outcome::usage("--spec FILE is required");
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return Outcome::usage(format!("{}: {e}", path.display())),
    };
    let doc = match SpecDoc::parse(&text) {
        Ok(d) => d,
        Err(e) => return Outcome::usage(format!("{}: {e}", path.display())),
    };
    execute(&doc, &cli.command)
}

/// Runs a subcommand given as words (without program name or `--spec`).
pub fn run_with(doc: &SpecDoc, args: &[&str]) -> Outcome {
    match Cli::try_parse_from(std::iter::once("fankit").chain(args.iter().copied())) {
        Ok(cli) => execute(doc, &cli.command),
        Err(e) => Outcome::usage(e.render()),
    }
}

pub fn execute(doc: &SpecDoc, cmd: &Command) -> Outcome {
    if let Command::Verify { cert } = cmd {
        let text = match std::fs::read_to_string(cert) {
            Ok(t) => t,
            Err(e) => return Outcome::usage(format!("{}: {e}", cert.display())),
        };
        return match verify_text(&text, doc) {
            Ok(()) => Outcome { code: EXIT_YES, stdout: "VERIFIED\n".into(), stderr: String::new() },
            Err(problems) => Outcome {
                code: EXIT_NO,
                stdout: problems.iter().map(|p| format!("MISMATCH {p}\n")).collect(),
                stderr: String::new(),
            },
        };
    }
    match produce(doc, cmd) {
        Ok((code, c)) => Outcome::cert(code, &c),
        Err(Failure::Spec(e)) => Outcome::usage(e),
        Err(Failure::Run(e)) if e.is_resource() => {
            let mut c = Certificate::new(&cmd.echo(), "UNKNOWN");
            c.push("REASON", e.to_string());
            Outcome::cert(EXIT_UNKNOWN, &c)
        }
        Err(Failure::Run(e @ (Error::Precondition(_) | Error::FlagViolation { .. }))) => {
            Outcome::usage(format!("{}: {e}", cmd.echo()))
        }
        Err(Failure::Run(e)) => {
            Outcome { code: EXIT_NO, stdout: String::new(), stderr: format!("error: {}: {e}\n", cmd.echo()) }
        }
    }
}

enum Failure {
    Spec(SpecError),
    Run(Error),
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::Spec(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn push_trace(c: &mut Certificate, t: &Trace) {
    c.trace.extend(t.entries().iter().map(|e| e.to_string()));
}

fn level_line(n: usize, words: &[Word]) -> String {
    let list: Vec<String> = words.iter().map(Word::to_string).collect();
    format!("{n}:{}", list.join(","))
}

fn produce(doc: &SpecDoc, cmd: &Command) -> Result<(i32, Certificate), Failure> {
    let echo = cmd.echo();
    match cmd {
        Command::BarCheck { set, depth } => {
            let s = doc.set(set)?;
            Ok(match bar_verdict(&s, *depth)? {
                Verdict::No(Evidence::Escape(seq)) => {
                    let stab = s.stab().unwrap_or(0);
                    let mut c = Certificate::new(&echo, "NO");
                    c.push("ESCAPE", seq.restrict(stab.max(*depth)).to_string());
                    (EXIT_NO, c)
                }
                v => scan_certificate(&echo, &s, v, *depth)?,
            })
        }
        Command::UniformBound { set, max } => {
            let s = doc.set(set)?;
            let v = uniform_bound(&s, *max)?;
            Ok(scan_certificate(&echo, &s, v, *max)?)
        }
        Command::CompleteTree { tree, depth } => {
            let t = doc.tree(tree)?.complete()?;
            let mut c = Certificate::new(&echo, "YES");
            let mut meter = Meter::new();
            for n in 0..=*depth {
                meter.charge_level(n)?;
                let members: Vec<Word> = Level::new(n).filter(|u| t.contains(u)).collect();
                c.push("LEVEL", level_line(n, &members));
            }
            Ok((EXIT_YES, c))
        }
        Command::FindPath { tree, bits, oracle } => {
            let t = doc.tree(tree)?;
            let wkl = WklFromLlpo::bounded(oracle.0);
            let mut gen = wkl.solve(&t)?;
            let taken = if t.contains(&Word::empty()) {
                gen.take(*bits)
            } else {
                Err(Error::inconsistent(&Word::empty(), "the tree is empty"))
            };
            match taken {
                Ok(path) => {
                    let mut c = Certificate::new(&echo, "YES");
                    c.push("PATH", path.to_string());
                    push_trace(&mut c, gen.trace());
                    Ok((EXIT_YES, c))
                }
                Err(e) => match t.is_infinite_to(wkl.scan_cap)? {
                    Verdict::No(Evidence::Level(d)) => {
                        let mut c = Certificate::new(&echo, "NO");
                        c.push("DEPTH", d.to_string());
                        c.push("REASON", e.to_string());
                        Ok((EXIT_NO, c))
                    }
                    _ => Err(e.into()),
                },
            }
        }
        Command::CoconvexBound { bar, fuel } => {
            let b = doc.bar(bar)?;
            let out = coconvex_bound(&b, *fuel)?;
            let mut c = Certificate::new(&echo, "YES");
            c.push("BOUND", out.bound.to_string());
            c.push("PATH", out.path.to_string());
            push_trace(&mut c, &out.trace);
            Ok((EXIT_YES, c))
        }
        Command::UcBound { func, via_fan, modulus } => {
            let f = doc.functional(func)?;
            let mut c = Certificate::new(&echo, "YES");
            let n = if *via_fan {
                let m = match modulus {
                    Some(name) => doc.functional(name)?,
                    None => f.modulus_tree(),
                };
                let fan = fan_bruteforce(FAN_MAX);
                let n = uc_via_fan(&f, &m, &fan)?;
                c.trace.push(format!("e {} -> {n}", crate::fan::FanOracle::tag(&fan)));
                n
            } else {
                uc_bound_bruteforce(&f)?
            };
            c.push("BOUND", n.to_string());
            Ok((EXIT_YES, c))
        }
        Command::Deco { func } => {
            let f = doc.functional(func)?;
            Ok(match deco_decide(&f) {
                Deco::Exists(a, b) => {
                    let mut c = Certificate::new(&echo, "EXISTS");
                    c.push("WITNESS", a.to_string());
                    c.push("WITNESS", b.to_string());
                    (EXIT_YES, c)
                }
                Deco::NotExists => (EXIT_YES, Certificate::new(&echo, "NOT_EXISTS")),
            })
        }
        Command::Defu { set, oracle } => {
            let d = doc.set(set)?;
            Ok(match defu_via_wkl(&d, &WklFromLlpo::bounded(oracle.0))? {
                Defu::Exists(u) => {
                    let mut c = Certificate::new(&echo, "EXISTS");
                    c.push("WITNESS", u.to_string());
                    (EXIT_YES, c)
                }
                Defu::NotExists => (EXIT_YES, Certificate::new(&echo, "NOT_EXISTS")),
            })
        }
        Command::Verify { .. } => unreachable!("handled by execute"),
    }
}

// YES(Bound) or UNKNOWN with a level-`depth` word that avoids the set.
fn scan_certificate(echo: &str, s: &DSet, v: Verdict, depth: usize) -> crate::Result<(i32, Certificate)> {
    match v {
        Verdict::Yes(Evidence::Bound(n)) => {
            let mut c = Certificate::new(echo, "YES");
            c.push("BOUND", n.to_string());
            Ok((EXIT_YES, c))
        }
        _ => {
            let mut c = Certificate::new(echo, "UNKNOWN");
            c.push("DEPTH", depth.to_string());
            if let Some(w) = first_unbarred(s, depth)? {
                c.push("WITNESS", w.to_string());
            }
            Ok((EXIT_UNKNOWN, c))
        }
    }
}

/// Re-checks a certificate against the spec by level scans. `Err` lists
/// every mismatch found.
pub fn verify_text(text: &str, doc: &SpecDoc) -> Result<(), Vec<String>> {
    let c = Certificate::parse(text).map_err(|e| vec![format!("certificate: {e}")])?;
    let command = c.get("COMMAND").unwrap_or_default();
    let cli = Cli::try_parse_from(std::iter::once("fankit").chain(command.split_whitespace()))
        .map_err(|e| vec![format!("COMMAND: {}", e.kind())])?;
    if cli.command.echo() != command {
        return Err(vec![format!("COMMAND: not in canonical form (expected {:?})", cli.command.echo())]);
    }
    let mut problems = Vec::new();
    if let Err(e) = check(&c, doc, &cli.command, &mut problems) {
        problems.push(e);
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

fn parse_field<T: FromStr>(c: &Certificate, key: &str) -> Result<T, String> {
    let v = c.get(key).ok_or_else(|| format!("{key}: missing"))?;
    v.parse().map_err(|_| format!("{key}={v}: malformed"))
}

fn word_field(c: &Certificate, key: &str) -> Result<Word, String> {
    parse_field::<Word>(c, key)
}

fn sx(e: impl fmt::Display) -> String {
    e.to_string()
}

// No level-`n` word avoids `s`, i.e. `n` is a uniform bound.
fn check_bound(s: &DSet, n: usize, name: &str, problems: &mut Vec<String>) -> Result<(), String> {
    if let Some(u) = first_unbarred(s, n).map_err(sx)? {
        problems.push(format!("BOUND={n}: {u} has no prefix in `{name}`"));
    }
    Ok(())
}

fn check_minimal(s: &DSet, n: usize, name: &str, problems: &mut Vec<String>) -> Result<(), String> {
    if n > 0 && first_unbarred(s, n - 1).map_err(sx)?.is_none() {
        problems.push(format!("BOUND={n}: not least, {} already bounds `{name}`", n - 1));
    }
    Ok(())
}

fn expect_verdict(c: &Certificate, allowed: &[&str]) -> Result<(), String> {
    if allowed.contains(&c.verdict()) {
        Ok(())
    } else {
        Err(format!("VERDICT={}: not a verdict of this command", c.verdict()))
    }
}

fn check(c: &Certificate, doc: &SpecDoc, cmd: &Command, problems: &mut Vec<String>) -> Result<(), String> {
    if c.verdict() == "UNKNOWN" && c.get("REASON").is_some() {
        // a resource verdict claims nothing
        return Ok(());
    }
    match cmd {
        Command::BarCheck { set, depth } | Command::UniformBound { set, max: depth } => {
            let bar_check = matches!(cmd, Command::BarCheck { .. });
            let s = doc.set(set).map_err(sx)?;
            expect_verdict(c, if bar_check { &["YES", "NO", "UNKNOWN"] } else { &["YES", "UNKNOWN"] })?;
            match c.verdict() {
                "YES" => {
                    let n: usize = parse_field(c, "BOUND")?;
                    if n > *depth {
                        problems.push(format!("BOUND={n}: exceeds the scan limit {depth}"));
                    }
                    check_bound(&s, n, set, problems)?;
                    check_minimal(&s, n, set, problems)?;
                }
                "NO" => {
                    let w = word_field(c, "ESCAPE")?;
                    match s.stab() {
                        None => problems.push(format!("ESCAPE={w}: `{set}` declares no stabilization depth")),
                        Some(st) if w.len() < st => {
                            problems.push(format!("ESCAPE={w}: shorter than the stabilization depth {st}"))
                        }
                        _ => {}
                    }
                    if let Some(p) = w.prefixes().find(|p| s.contains(p)) {
                        problems.push(format!("ESCAPE={w}: prefix {p} is in `{set}`"));
                    };
                }
                _ => {
                    let d: usize = parse_field(c, "DEPTH")?;
                    let w = word_field(c, "WITNESS")?;
                    if d != *depth || w.len() != d {
                        problems.push(format!("WITNESS={w}: expected a word of length {depth}"));
                    }
                    if let Some(p) = w.prefixes().find(|p| s.contains(p)) {
                        problems.push(format!("WITNESS={w}: prefix {p} is in `{set}`"));
                    };
                }
            }
        }
        Command::CompleteTree { tree, depth } => {
            expect_verdict(c, &["YES"])?;
            let t = doc.tree(tree).map_err(sx)?;
            let lines: Vec<&str> = c.all("LEVEL").collect();
            if lines.len() != depth + 1 {
                problems.push(format!("LEVEL: {} lines for depth {depth}", lines.len()));
            }
            let mut meter = Meter::new();
            let mut top: Option<Word> = None;
            for (n, line) in lines.iter().enumerate().take(depth + 1) {
                meter.charge_level(n).map_err(sx)?;
                let members: Vec<Word> = Level::new(n).filter(|u| t.contains(u)).collect();
                let expected = if let Some(g) = members.last() {
                    top = Some(g.clone());
                    members
                } else {
                    let g = top.clone().unwrap_or_default();
                    vec![g.pad_zeros(n)]
                };
                let want = level_line(n, &expected);
                if *line != want {
                    problems.push(format!("LEVEL={line}: expected {want}"));
                }
            }
        }
        Command::FindPath { tree, bits, .. } => {
            expect_verdict(c, &["YES", "NO"])?;
            let t = doc.tree(tree).map_err(sx)?;
            if c.verdict() == "YES" {
                let p = word_field(c, "PATH")?;
                if p.len() != *bits {
                    problems.push(format!("PATH={p}: expected {bits} bits"));
                }
                if let Some(q) = p.prefixes().find(|q| !t.contains(q)) {
                    problems.push(format!("PATH={p}: prefix {q} is not in `{tree}`"));
                };
            } else {
                let d: usize = parse_field(c, "DEPTH")?;
                let mut meter = Meter::new();
                meter.charge_level(d).map_err(sx)?;
                if let Some(u) = Level::new(d).find(|u| t.contains(u)) {
                    problems.push(format!("DEPTH={d}: {u} is in `{tree}`"));
                }
            }
        }
        Command::CoconvexBound { bar, .. } => {
            expect_verdict(c, &["YES"])?;
            let b = doc.bar(bar).map_err(sx)?;
            let n: usize = parse_field(c, "BOUND")?;
            check_bound(b.carrier(), n, bar, problems)?;
        }
        Command::UcBound { func, via_fan, .. } => {
            expect_verdict(c, &["YES"])?;
            let f = doc.functional(func).map_err(sx)?;
            let n: usize = parse_field(c, "BOUND")?;
            let constant_at = |k: usize| -> Result<Option<Word>, String> {
                let mut meter = Meter::new();
                meter.charge_level(k).map_err(sx)?;
                Ok(Level::new(k).find(|u| !matches!(is_constant(&f.residual(u)), Constancy::Constant(_))))
            };
            if let Some(u) = constant_at(n)? {
                problems.push(format!("BOUND={n}: `{func}` is not constant above {u}"));
            }
            if !via_fan && n > 0 && constant_at(n - 1)?.is_none() {
                problems.push(format!("BOUND={n}: not least, {} already works", n - 1));
            }
        }
        Command::Deco { func } => {
            expect_verdict(c, &["EXISTS", "NOT_EXISTS"])?;
            let f = doc.functional(func).map_err(sx)?;
            if c.verdict() == "EXISTS" {
                let ws = c.all("WITNESS").map(Word::from_str).collect::<Result<Vec<_>, _>>().map_err(sx)?;
                match ws.as_slice() {
                    [a, b] if f.eval_word(a) != f.eval_word(b) => {}
                    [a, b] => problems.push(format!("WITNESS: {a} and {b} give the same value")),
                    _ => problems.push("WITNESS: expected two words".into()),
                }
            } else {
                let d = f.query_depth();
                let mut meter = Meter::new();
                meter.charge_level(d).map_err(sx)?;
                let v = f.eval_word(&Word::zeros(d));
                if let Some(u) = Level::new(d).find(|u| f.eval_word(u) != v) {
                    problems.push(format!("VERDICT=NOT_EXISTS: `{func}` differs at {u} and {}", Word::zeros(d)));
                }
            }
        }
        Command::Defu { set, .. } => {
            expect_verdict(c, &["EXISTS", "NOT_EXISTS"])?;
            let d = doc.set(set).map_err(sx)?;
            if c.verdict() == "EXISTS" {
                let w = word_field(c, "WITNESS")?;
                if d.contains(&w) {
                    problems.push(format!("WITNESS={w}: is in `{set}`"));
                }
            } else {
                let s = d.stab().ok_or_else(|| format!("`{set}` declares no stabilization depth"))?;
                let mut meter = Meter::new();
                for n in 0..=s {
                    meter.charge_level(n).map_err(sx)?;
                    if let Some(u) = Level::new(n).find(|u| !d.contains(u)) {
                        problems.push(format!("VERDICT=NOT_EXISTS: {u} is not in `{set}`"));
                        break;
                    }
                }
            }
        }
        Command::Verify { .. } => return Err("COMMAND: verify does not produce certificates".into()),
    }
    Ok(())
}
