//! Certificate text: `KEY=VALUE` lines. Every line before the first
//! `TRACE=` line is the checked region; trace lines are advisory.

use std::fmt::Write as _;

pub const KEYS: [&str; 10] =
    ["VERSION", "COMMAND", "VERDICT", "BOUND", "WITNESS", "ESCAPE", "PATH", "DEPTH", "LEVEL", "REASON"];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificate {
    /// Checked region, in emission order.
    pub fields: Vec<(String, String)>,
    /// Advisory region.
    pub trace: Vec<String>,
}

impl Certificate {
    pub fn new(command: &str, verdict: &str) -> Self {
        let mut c = Certificate::default();
        c.push("VERSION", format!("fankit {}", env!("CARGO_PKG_VERSION")));
        c.push("COMMAND", command);
        c.push("VERDICT", verdict);
        c
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.fields.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.fields.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn verdict(&self) -> &str {
        self.get("VERDICT").unwrap_or("")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k}={v}");
        }
        for t in &self.trace {
            let _ = writeln!(out, "TRACE={t}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Certificate, String> {
        let mut c = Certificate::default();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected KEY=VALUE", i + 1))?;
            if k == "TRACE" {
                c.trace.push(v.to_string());
            } else if !c.trace.is_empty() {
                return Err(format!("line {}: {k} after the trace region", i + 1));
            } else if KEYS.contains(&k) {
                c.fields.push((k.to_string(), v.to_string()));
            } else {
                return Err(format!("line {}: unknown key {k}", i + 1));
            }
        }
        for key in ["VERSION", "COMMAND", "VERDICT"] {
            if c.get(key).is_none() {
                return Err(format!("missing {key}"));
            }
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = Certificate::new("uniform-bound --set a --max 3", "YES");
        c.push("BOUND", "2");
        c.trace.push("e wit -> 1".into());
        let back = Certificate::parse(&c.render()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.get("BOUND"), Some("2"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(Certificate::parse("VERDICT=YES\n").is_err());
        assert!(Certificate::parse("VERSION=x\nCOMMAND=y\nVERDICT=YES\nFOO=1\n").is_err());
        assert!(Certificate::parse("VERSION=x\nCOMMAND=y\nVERDICT=YES\nTRACE=t\nBOUND=1\n").is_err());
        assert!(Certificate::parse("VERSION=x\nnonsense\n").is_err());
    }
}
