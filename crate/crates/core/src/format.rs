//! Net text format, prefix documents and DOT export.
//!
//! The net format is line-oriented. Tokens are whitespace-separated; `#`
//! starts a comment running to the end of the line. A document holds one
//! `places` line, any number of `transition` lines, one `initial` line and an
//! optional `goal` line:
//!
//! ```text
//! places p0 p1 p2
//! transition t : p0 -> p1 p2
//! transition u : p1 p2 ->
//! initial p0
//! goal p2 subset
//! ```
//!
//! Identifiers are free-form strings without whitespace or `#`; `:` and `->`
//! are reserved. Parsing a canonical document and emitting it again
//! reproduces it byte for byte.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{Goal, GoalMode, Net, NetError};
use crate::occurrence::Prefix;
use crate::unfolder::PrefixStats;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error(transparent)]
    Semantic(#[from] NetError),
    #[error("prefix document: {0}")]
    Document(String),
}

/// A parsed net document: the net plus its optional goal line.
#[derive(Debug, Clone)]
pub struct NetDocument {
    pub net: Net,
    pub goal: Option<Goal>,
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch == '#' {
            break;
        }
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    line: line_no,
                    col: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        let end = line.find('#').unwrap_or(line.len());
        out.push(Token {
            text: line[s..end].trim_end(),
            line: line_no,
            col: s + 1,
        });
    }
    out
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn check_ident(tok: &Token<'_>) -> Result<String, FormatError> {
    if tok.text == ":" || tok.text == "->" {
        return Err(syntax(
            tok.line,
            tok.col,
            format!("`{}` is reserved and cannot be an identifier", tok.text),
        ));
    }
    Ok(tok.text.to_string())
}

/// Parses a net document and validates it into a [`Net`] plus optional goal.
pub fn parse_net(text: &str) -> Result<NetDocument, FormatError> {
    let mut places: Option<Vec<String>> = None;
    let mut transitions: Vec<(String, Vec<String>, Vec<String>)> = Vec::new();
    let mut initial: Option<Vec<String>> = None;
    let mut goal_line: Option<(Vec<String>, GoalMode)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(raw, line_no);
        let Some(head) = tokens.first() else { continue };
        match head.text {
            "places" => {
                if places.is_some() {
                    return Err(syntax(line_no, head.col, "duplicate `places` line"));
                }
                places = Some(
                    tokens[1..]
                        .iter()
                        .map(check_ident)
                        .collect::<Result<_, _>>()?,
                );
            }
            "transition" => {
                let name = tokens
                    .get(1)
                    .ok_or_else(|| syntax(line_no, head.col, "missing transition name"))?;
                let name = check_ident(name)?;
                let colon = tokens
                    .get(2)
                    .filter(|t| t.text == ":")
                    .ok_or_else(|| syntax(line_no, 1, "expected `:` after the transition name"))?;
                let arrow_pos = tokens
                    .iter()
                    .position(|t| t.text == "->")
                    .ok_or_else(|| syntax(line_no, colon.col, "expected `->` in transition"))?;
                let pre = tokens[3..arrow_pos]
                    .iter()
                    .map(check_ident)
                    .collect::<Result<_, _>>()?;
                let post = tokens[arrow_pos + 1..]
                    .iter()
                    .map(check_ident)
                    .collect::<Result<_, _>>()?;
                transitions.push((name, pre, post));
            }
            "initial" => {
                if initial.is_some() {
                    return Err(syntax(line_no, head.col, "duplicate `initial` line"));
                }
                initial = Some(
                    tokens[1..]
                        .iter()
                        .map(check_ident)
                        .collect::<Result<_, _>>()?,
                );
            }
            "goal" => {
                if goal_line.is_some() {
                    return Err(syntax(line_no, head.col, "duplicate `goal` line"));
                }
                if tokens.len() < 3 {
                    return Err(syntax(line_no, head.col, "goal needs places and a mode"));
                }
                let last = tokens.last().unwrap();
                let mode = match last.text {
                    "exact" => GoalMode::Exact,
                    "subset" => GoalMode::Subset,
                    other => {
                        return Err(syntax(
                            last.line,
                            last.col,
                            format!("goal mode must be `exact` or `subset`, got `{other}`"),
                        ))
                    }
                };
                let names = tokens[1..tokens.len() - 1]
                    .iter()
                    .map(check_ident)
                    .collect::<Result<_, _>>()?;
                goal_line = Some((names, mode));
            }
            other => {
                return Err(syntax(
                    line_no,
                    head.col,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    let places = places.ok_or_else(|| syntax(1, 1, "missing `places` line"))?;
    let net = Net::new(places, transitions, initial.unwrap_or_default())?;
    let goal = match goal_line {
        None => None,
        Some((names, mode)) => {
            let ids = names
                .iter()
                .map(|n| net.place(n))
                .collect::<Result<Vec<_>, _>>()?;
            Some(Goal::new(&net, ids, mode)?)
        }
    };
    Ok(NetDocument { net, goal })
}

/// Emits the canonical form of a net document.
pub fn emit_net(net: &Net, goal: Option<&Goal>) -> String {
    let mut out = String::new();
    out.push_str("places");
    for p in net.places() {
        out.push(' ');
        out.push_str(net.place_name(p));
    }
    out.push('\n');
    for t in net.transitions() {
        out.push_str("transition ");
        out.push_str(net.transition_name(t));
        out.push_str(" :");
        for &p in net.pre(t) {
            out.push(' ');
            out.push_str(net.place_name(p));
        }
        out.push_str(" ->");
        for &p in net.post(t) {
            out.push(' ');
            out.push_str(net.place_name(p));
        }
        out.push('\n');
    }
    out.push_str("initial");
    for p in net.initial_marking().iter() {
        out.push(' ');
        out.push_str(net.place_name(p));
    }
    out.push('\n');
    if let Some(goal) = goal {
        out.push_str("goal");
        for &p in goal.places() {
            out.push(' ');
            out.push_str(net.place_name(p));
        }
        out.push(' ');
        out.push_str(&goal.mode().to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionDoc {
    pub id: u32,
    pub parent: Option<u32>,
    pub place: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDoc {
    pub id: u32,
    pub transition: String,
    pub preset: Vec<u32>,
    pub cutoff: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaDoc {
    pub condition: u32,
    pub ignored: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsDoc {
    pub non_cutoff_events: usize,
    pub cutoff_events: usize,
    pub conditions: usize,
    pub reducer_calls: usize,
    pub iterations: usize,
}

/// Serializable form of a prefix; postsets are recoverable from the parent
/// links. Only non-empty Δ entries are emitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixDocument {
    pub conditions: Vec<ConditionDoc>,
    pub events: Vec<EventDoc>,
    pub initial: Vec<u32>,
    pub delta: Vec<DeltaDoc>,
    pub stats: StatsDoc,
}

pub fn prefix_document(prefix: &Prefix, stats: &PrefixStats) -> PrefixDocument {
    let net = prefix.net();
    PrefixDocument {
        conditions: prefix
            .conditions()
            .map(|c| {
                let cond = prefix.condition(c);
                ConditionDoc {
                    id: c.0,
                    parent: cond.parent.map(|e| e.0),
                    place: net.place_name(cond.place).to_string(),
                }
            })
            .collect(),
        events: prefix
            .events()
            .map(|e| {
                let ev = prefix.event(e);
                EventDoc {
                    id: e.0,
                    transition: net.transition_name(ev.transition).to_string(),
                    preset: ev.preset.iter().map(|c| c.0).collect(),
                    cutoff: ev.cutoff,
                }
            })
            .collect(),
        initial: prefix.initial_conditions().iter().map(|c| c.0).collect(),
        delta: prefix
            .conditions()
            .filter(|&c| !prefix.delta_of(c).is_empty())
            .map(|c| DeltaDoc {
                condition: c.0,
                ignored: prefix
                    .delta_of(c)
                    .iter()
                    .map(|&t| net.transition_name(t).to_string())
                    .collect(),
            })
            .collect(),
        stats: StatsDoc {
            non_cutoff_events: stats.non_cutoff_events,
            cutoff_events: stats.cutoff_events,
            conditions: stats.conditions,
            reducer_calls: stats.reducer_calls,
            iterations: stats.iterations,
        },
    }
}

impl PrefixDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<PrefixDocument, FormatError> {
        let doc: PrefixDocument =
            serde_json::from_str(text).map_err(|e| FormatError::Document(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    /// Index consistency, so reloaded documents are safe to query offline.
    pub fn validate(&self) -> Result<(), FormatError> {
        let n_conds = self.conditions.len() as u32;
        let n_events = self.events.len() as u32;
        let err = |m: String| Err(FormatError::Document(m));
        for (i, c) in self.conditions.iter().enumerate() {
            if c.id != i as u32 {
                return err(format!("condition {} out of order", c.id));
            }
            if let Some(p) = c.parent {
                if p >= n_events {
                    return err(format!("condition {} has unknown parent {p}", c.id));
                }
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            if e.id != i as u32 {
                return err(format!("event {} out of order", e.id));
            }
            for &c in &e.preset {
                if c >= n_conds {
                    return err(format!("event {} has unknown precondition {c}", e.id));
                }
            }
        }
        for &c in &self.initial {
            if c >= n_conds || self.conditions[c as usize].parent.is_some() {
                return err(format!("initial condition {c} is invalid"));
            }
        }
        for d in &self.delta {
            if d.condition >= n_conds {
                return err(format!("delta entry for unknown condition {}", d.condition));
            }
        }
        Ok(())
    }
}

/// DOT rendering: conditions as circles, events as boxes, cut-offs dashed,
/// the initial marking fed from a point node. Node order follows the ids, so
/// output is byte-identical across runs.
pub fn emit_dot(prefix: &Prefix) -> String {
    let net = prefix.net();
    let mut out = String::from("digraph prefix {\n");
    if !prefix.initial_conditions().is_empty() {
        out.push_str("  init [shape=point];\n");
    }
    for c in prefix.conditions() {
        out.push_str(&format!(
            "  c{} [shape=circle, label=\"{}\"];\n",
            c.0,
            net.place_name(prefix.condition(c).place)
        ));
    }
    for e in prefix.events() {
        let ev = prefix.event(e);
        let style = if ev.cutoff { ", style=dashed" } else { "" };
        out.push_str(&format!(
            "  e{} [shape=box, label=\"{}\"{}];\n",
            e.0,
            net.transition_name(ev.transition),
            style
        ));
    }
    for &c in prefix.initial_conditions() {
        out.push_str(&format!("  init -> c{};\n", c.0));
    }
    for e in prefix.events() {
        let ev = prefix.event(e);
        for &c in &ev.preset {
            out.push_str(&format!("  c{} -> e{};\n", c.0, e.0));
        }
        for &c in &ev.postset {
            out.push_str(&format!("  e{} -> c{};\n", e.0, c.0));
        }
    }
    out.push_str("}\n");
    out
}
