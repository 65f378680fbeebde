//! Aldebaran `.aut` automaton interchange.
//!
//! ```text
//! des (0, 3, 4)
//! (0,"b",1)
//! (1,"c",2)
//! (2,"d",3)
//! ```

use std::fmt::Write as _;

use crate::label::Label;
use crate::lts::{Lts, LtsBuilder};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header declares {declared} transitions but {found} were read")]
    TransitionCount { declared: usize, found: usize },
    #[error("nondeterministic automaton: {0}")]
    Invalid(String),
}

/// Writes the LTS in `.aut` form: states keep their ids, transitions are
/// listed in source then label order.
pub fn write_aut(lts: &Lts) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "des ({}, {}, {})",
        lts.initial(),
        lts.num_transitions(),
        lts.num_states()
    );
    for (s, l, t) in lts.iter_transitions() {
        let _ = writeln!(out, "({s},\"{l}\",{t})");
    }
    out
}

/// Reads an `.aut` file. The alphabet is the set of labels that occur on
/// transitions; label text must be in canonical `name.i.j` form.
pub fn read_aut(name: &str, text: &str) -> Result<Lts, AutError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(AutError::Syntax {
        line: 1,
        message: "missing `des` header".into(),
    })?;
    let syntax = |line: usize, message: &str| AutError::Syntax {
        line,
        message: message.to_string(),
    };
    let inner = header
        .strip_prefix("des")
        .map(str::trim)
        .and_then(|h| h.strip_prefix('('))
        .and_then(|h| h.strip_suffix(')'))
        .ok_or_else(|| syntax(hline, "expected `des (initial, transitions, states)`"))?;
    let nums = inner
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| syntax(hline, "header fields must be non-negative integers"))?;
    let [initial, declared, states] = nums[..] else {
        return Err(syntax(hline, "header needs exactly three fields"));
    };
    if states == 0 || initial >= states {
        return Err(syntax(hline, "initial state out of range"));
    }
    let mut b = LtsBuilder::new(name).with_states(states);
    b.set_initial(initial);
    let mut found = 0;
    for (line, text) in lines {
        let body = text
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| syntax(line, "expected `(from,\"label\",to)`"))?;
        let first = body
            .find(',')
            .ok_or_else(|| syntax(line, "missing label"))?;
        let last = body
            .rfind(',')
            .filter(|&p| p > first)
            .ok_or_else(|| syntax(line, "missing target"))?;
        let from = body[..first]
            .trim()
            .parse::<usize>()
            .map_err(|_| syntax(line, "bad source state"))?;
        let to = body[last + 1..]
            .trim()
            .parse::<usize>()
            .map_err(|_| syntax(line, "bad target state"))?;
        let raw = body[first + 1..last].trim();
        let raw = raw
            .strip_prefix('"')
            .and_then(|r| r.strip_suffix('"'))
            .unwrap_or(raw);
        let label: Label = raw
            .parse()
            .map_err(|_| syntax(line, &format!("bad label `{raw}`")))?;
        if from >= states || to >= states {
            return Err(syntax(line, "state out of range"));
        }
        b.add_transition(from, label, to);
        found += 1;
    }
    if found != declared {
        return Err(AutError::TransitionCount { declared, found });
    }
    b.build().map_err(|e| AutError::Invalid(e.to_string()))
}
