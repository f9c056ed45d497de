//! Line-oriented text format for goal-directed MDPs.
//!
//! ```text
//! mdp <num_states> <num_actions> <discount>
//! goal <state>
//! done <state>
//! t <s> <a> <s'> <p>      # zero or more transition entries
//! r <s> <a> <value>       # zero or more nonzero rewards
//! ```
//!
//! `#` starts a comment. The writer emits reals with 17 significant digits,
//! which round-trips `f64` exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use super::goal_directed::GoalDirectedMdp;
use crate::mdp::{MdpBuilder, MdpError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{what} index {index} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("probabilities for (s{state}, a{action}) sum to {sum}, expected 1")]
    ProbabilitySum {
        state: usize,
        action: usize,
        sum: f64,
    },
    #[error("duplicate entry")]
    Duplicate,
    #[error(transparent)]
    Invalid(MdpError),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    err(line, ParseErrorKind::Syntax(msg.into()))
}

/// Serializes a problem. Only nonzero rewards are listed.
pub fn write_mdp_file<T: Scalar>(problem: &GoalDirectedMdp<T>) -> String {
    let m = problem.mdp();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "mdp {} {} {:.16e}",
        m.num_states(),
        m.num_actions(),
        m.discount()
    );
    let _ = writeln!(out, "goal {}", problem.goal());
    let _ = writeln!(out, "done {}", problem.done());
    for s in 0..m.num_states() {
        for a in 0..m.num_actions() {
            let (succ, prob) = m.transitions(s, a);
            for (t, p) in succ.iter().zip(prob) {
                let _ = writeln!(out, "t {s} {a} {t} {p:.16e}");
            }
        }
    }
    for s in 0..m.num_states() {
        for a in 0..m.num_actions() {
            let r = m.reward(s, a);
            if r != T::zero() {
                let _ = writeln!(out, "r {s} {a} {r:.16e}");
            }
        }
    }
    out
}

struct Fields<'a> {
    line: usize,
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn next<V: FromStr>(&mut self, what: &str) -> Result<V, ParseError> {
        let tok = self
            .it
            .next()
            .ok_or_else(|| syntax(self.line, format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| syntax(self.line, format!("cannot parse {what} from {tok:?}")))
    }

    fn index(&mut self, what: &'static str, limit: usize) -> Result<usize, ParseError> {
        let index: usize = self.next(what)?;
        if index >= limit {
            return Err(err(
                self.line,
                ParseErrorKind::OutOfRange { what, index, limit },
            ));
        }
        Ok(index)
    }

    fn finish(mut self) -> Result<(), ParseError> {
        match self.it.next() {
            Some(tok) => Err(syntax(
                self.line,
                format!("unexpected trailing token {tok:?}"),
            )),
            None => Ok(()),
        }
    }
}

/// Parses and validates a problem, reporting the offending line on error.
pub fn parse_mdp_file<T: Scalar>(text: &str) -> Result<GoalDirectedMdp<T>, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty());

    let mut header = |keyword: &str| -> Result<Fields<'_>, ParseError> {
        let (line, body) = lines
            .next()
            .ok_or_else(|| syntax(0, format!("missing `{keyword}` line")))?;
        let mut it = body.split_whitespace();
        match it.next() {
            Some(k) if k == keyword => Ok(Fields { line, it }),
            other => Err(syntax(
                line,
                format!("expected `{keyword}`, found {:?}", other.unwrap_or("")),
            )),
        }
    };

    let mut f = header("mdp")?;
    let header_line = f.line;
    let num_states: usize = f.next("num_states")?;
    let num_actions: usize = f.next("num_actions")?;
    let discount: T = f.next("discount")?;
    f.finish()?;
    let mut f = header("goal")?;
    let goal = f.index("goal state", num_states)?;
    f.finish()?;
    let mut f = header("done")?;
    let done = f.index("done state", num_states)?;
    f.finish()?;

    let mut builder = MdpBuilder::new(num_states, num_actions, discount);
    let mut first_line: HashMap<(usize, usize), usize> = HashMap::new();
    let mut seen_t = std::collections::HashSet::new();
    let mut seen_r = std::collections::HashSet::new();
    for (line, body) in lines {
        let mut it = body.split_whitespace();
        let keyword = it.next().unwrap_or("");
        let mut f = Fields { line, it };
        match keyword {
            "t" => {
                let s = f.index("state", num_states)?;
                let a = f.index("action", num_actions)?;
                let t = f.index("successor state", num_states)?;
                let p: T = f.next("probability")?;
                f.finish()?;
                if !seen_t.insert((s, a, t)) {
                    return Err(err(line, ParseErrorKind::Duplicate));
                }
                first_line.entry((s, a)).or_insert(line);
                builder
                    .transition(s, a, t, p)
                    .map_err(|e| err(line, ParseErrorKind::Invalid(e)))?;
            }
            "r" => {
                let s = f.index("state", num_states)?;
                let a = f.index("action", num_actions)?;
                let r: T = f.next("reward")?;
                f.finish()?;
                if !seen_r.insert((s, a)) {
                    return Err(err(line, ParseErrorKind::Duplicate));
                }
                builder
                    .reward(s, a, r)
                    .map_err(|e| err(line, ParseErrorKind::Invalid(e)))?;
            }
            other => return Err(syntax(line, format!("unknown record {other:?}"))),
        }
    }

    let mdp = builder.build().map_err(|e| match e {
        MdpError::ProbabilitySum { state, action, sum } => err(
            first_line
                .get(&(state, action))
                .copied()
                .unwrap_or(header_line),
            ParseErrorKind::ProbabilitySum { state, action, sum },
        ),
        other => err(header_line, ParseErrorKind::Invalid(other)),
    })?;
    GoalDirectedMdp::from_parts(mdp, goal, done).map_err(|e| syntax(header_line, e.to_string()))
}
