//! Text format for sequences.
//!
//! ```text
//! [meta]
//! d = 2
//! kind = explicit
//! tail_bound = 1/8
//!
//! [k=1]
//! m = 2
//! R = 4 -2 ; 0 2
//! B = (0,0);(1,0);(0,1);(1,1)
//! L = (0,0);(2,1);(0,-1);(2,0)
//! ```
//!
//! or `kind = family` with a `[family]` section holding `name` (one of
//! `quarter`, `compact`, `noncompact`, `counterexample`) and the rationals
//! `alpha`, `beta`, `d`. `#` starts a comment.

use std::collections::BTreeMap;

use crate::constructions::TargetDims;
use crate::digits::DigitSet;
use crate::error::{Error, Result};
use crate::exact_linalg::{fmt_rat, parse_rat, MatD, Rat, VecD};
use crate::sequence::{Family, SequenceKind, SequenceSpec, Stage};

struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn require(&self, key: &str) -> Result<(usize, &str)> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: self.line,
            msg: format!("[{}] is missing `{key}`", self.name),
        })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self
            .entries
            .iter()
            .find(|(k, _)| !allowed.contains(&k.as_str()))
        {
            Some((k, (line, _))) => Err(Error::Parse {
                line: *line,
                msg: format!("unknown key `{k}` in [{}]", self.name),
            }),
            None => Ok(()),
        }
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| perr(line, "unterminated section header"))?
                .trim();
            if out.iter().any(|s| s.name == name) {
                return Err(perr(line, format!("section [{name}] repeated")));
            }
            out.push(Section {
                name: name.to_string(),
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let section = out
            .last_mut()
            .ok_or_else(|| perr(line, "entry before any section"))?;
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| perr(line, "expected `key = value`"))?;
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(perr(line, format!("key `{key}` repeated")));
        }
        section
            .entries
            .insert(key, (line, value.trim().to_string()));
    }
    Ok(out)
}

fn parse_usize(line: usize, s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(|| {
        perr(
            line,
            format!("{what} must be a positive integer, got `{s}`"),
        )
    })
}

fn parse_rat_at(line: usize, s: &str, what: &str) -> Result<Rat> {
    parse_rat(s).ok_or_else(|| perr(line, format!("{what} must be a rational p/q, got `{s}`")))
}

/// `(x,..);(x,..)`.
pub fn parse_points(line: usize, s: &str, d: usize) -> Result<DigitSet> {
    let mut points = Vec::new();
    for tuple in s.split(';') {
        let t = tuple.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| perr(line, format!("expected a tuple `(x,..)`, got `{t}`")))?;
        let coords: Vec<Rat> = inner
            .split(',')
            .map(|c| parse_rat_at(line, c.trim(), "coordinate"))
            .collect::<Result<_>>()?;
        if coords.len() != d {
            return Err(perr(
                line,
                format!("tuple `{t}` has {} coordinates, expected {d}", coords.len()),
            ));
        }
        points.push(VecD(coords));
    }
    DigitSet::new(points).map_err(|e| perr(line, e.to_string()))
}

fn parse_stage(sec: &Section, d: usize) -> Result<Stage> {
    sec.check_keys(&["m", "R", "B", "L"])?;
    let m = match sec.get("m") {
        Some((line, v)) => Some(
            v.parse::<u64>()
                .map_err(|_| perr(line, format!("m must be a nonnegative integer, got `{v}`")))?,
        ),
        None => None,
    };
    let (rl, rv) = sec.require("R")?;
    let r = MatD::parse(rv).ok_or_else(|| perr(rl, format!("bad matrix `{rv}`")))?;
    if r.dim() != d {
        return Err(perr(
            rl,
            format!("matrix is {0}x{0}, expected {d}x{d}", r.dim()),
        ));
    }
    let (bl, bv) = sec.require("B")?;
    let b = parse_points(bl, bv, d)?;
    let l = match sec.get("L") {
        Some((ll, lv)) => Some(parse_points(ll, lv, d)?),
        None => None,
    };
    Stage::new(m, r, b, l).map_err(|e| perr(rl, e.to_string()))
}

fn parse_family(sec: &Section, meta_d: usize) -> Result<SequenceSpec> {
    sec.check_keys(&["name", "alpha", "beta", "d"])?;
    let (nl, name) = sec.require("name")?;
    let d = match sec.get("d") {
        Some((line, v)) => {
            let r = parse_rat_at(line, v, "d")?;
            if !r.is_integer() || r <= Rat::from_integer(0.into()) {
                return Err(perr(line, "d must be a positive integer"));
            }
            let d = parse_usize(line, &r.numer().to_string(), "d")?;
            if d != meta_d {
                return Err(perr(
                    line,
                    format!("d = {d} disagrees with [meta] d = {meta_d}"),
                ));
            }
            d
        }
        None => meta_d,
    };
    let target = || -> Result<TargetDims> {
        let (al, av) = sec.require("alpha")?;
        let (_, bv) = sec.require("beta")?;
        let alpha = parse_rat_at(al, av, "alpha")?;
        let beta = parse_rat_at(al, bv, "beta")?;
        TargetDims::new(d, alpha, beta).map_err(|e| perr(al, e.to_string()))
    };
    let family = match name {
        "quarter" => Family::Quarter,
        "compact" => Family::Compact(target()?),
        "noncompact" => Family::Noncompact(target()?),
        "counterexample" => {
            if d != 1 {
                return Err(perr(nl, "the counterexample family lives in d = 1"));
            }
            Family::Counterexample
        }
        other => return Err(perr(nl, format!("unknown family `{other}`"))),
    };
    Ok(SequenceSpec::family(d, family))
}

pub fn parse_spec(text: &str) -> Result<SequenceSpec> {
    let secs = sections(text)?;
    let meta = secs
        .iter()
        .find(|s| s.name == "meta")
        .ok_or_else(|| perr(1, "missing [meta] section"))?;
    meta.check_keys(&["d", "kind", "tail_bound"])?;
    let (dl, dv) = meta.require("d")?;
    let d = parse_usize(dl, dv, "d")?;
    let (kl, kind) = meta.require("kind")?;
    let tail = match meta.get("tail_bound") {
        Some((line, v)) => {
            let t = parse_rat_at(line, v, "tail_bound")?;
            if t < Rat::from_integer(0.into()) {
                return Err(perr(line, "tail_bound must be nonnegative"));
            }
            Some(t)
        }
        None => None,
    };
    let others: Vec<&Section> = secs.iter().filter(|s| s.name != "meta").collect();
    match kind {
        "explicit" => {
            let mut stages = Vec::new();
            for (i, sec) in others.iter().enumerate() {
                let expected = format!("k={}", i + 1);
                if sec.name.replace(' ', "") != expected {
                    return Err(perr(
                        sec.line,
                        format!("expected section [{expected}], found [{}]", sec.name),
                    ));
                }
                stages.push(parse_stage(sec, d)?);
            }
            if stages.is_empty() {
                return Err(perr(kl, "explicit sequence without [k=1]"));
            }
            SequenceSpec::explicit(d, stages, tail).map_err(|e| perr(kl, e.to_string()))
        }
        "family" => {
            let fam = others
                .iter()
                .find(|s| s.name == "family")
                .ok_or_else(|| perr(kl, "kind = family needs a [family] section"))?;
            if let Some(extra) = others.iter().find(|s| s.name != "family") {
                return Err(perr(
                    extra.line,
                    format!("unexpected section [{}]", extra.name),
                ));
            }
            Ok(parse_family(fam, d)?.with_declared_tail(tail))
        }
        other => Err(perr(
            kl,
            format!("kind must be explicit or family, got `{other}`"),
        )),
    }
}

fn fmt_points(s: &DigitSet) -> String {
    s.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Canonical text; `parse_spec` reads it back to the same sequence.
pub fn print_spec(spec: &SequenceSpec) -> String {
    let mut out = format!("[meta]\nd = {}\n", spec.d());
    let kind = match spec.kind() {
        SequenceKind::Explicit(_) => "explicit",
        SequenceKind::Family(_) => "family",
    };
    out.push_str(&format!("kind = {kind}\n"));
    if let Some(t) = spec.declared_tail() {
        out.push_str(&format!("tail_bound = {}\n", fmt_rat(t)));
    }
    match spec.kind() {
        SequenceKind::Explicit(stages) => {
            for (i, s) in stages.iter().enumerate() {
                out.push_str(&format!("\n[k={}]\n", i + 1));
                if let Some(m) = s.m {
                    out.push_str(&format!("m = {m}\n"));
                }
                out.push_str(&format!("R = {}\n", s.r));
                out.push_str(&format!("B = {}\n", fmt_points(&s.digits)));
                if let Some(l) = &s.dual {
                    out.push_str(&format!("L = {}\n", fmt_points(l)));
                }
            }
        }
        SequenceKind::Family(f) => {
            out.push_str(&format!("\n[family]\nname = {}\n", f.name()));
            if let Some(t) = f.target() {
                out.push_str(&format!(
                    "alpha = {}\nbeta = {}\n",
                    fmt_rat(t.alpha()),
                    fmt_rat(t.beta())
                ));
            }
            out.push_str(&format!("d = {}\n", spec.d()));
        }
    }
    out
}
