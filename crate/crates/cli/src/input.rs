use std::fmt;
use std::io::Read;

use knotwork::knot::{parse_braid, parse_pd, BraidWord, LinkDiagram};
use knotwork::Error;

use crate::{EXIT_CAP, EXIT_INPUT};

#[derive(Debug)]
pub enum CliError {
    /// Bad input text, with the position of the offending token.
    Input {
        source: String,
        line: usize,
        column: usize,
        token: String,
        msg: String,
    },
    /// A configured cap was exceeded.
    Cap(String),
    /// Any other invalid input.
    Invalid { source: String, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Cap(_) => EXIT_CAP,
            _ => EXIT_INPUT,
        }
    }

    pub fn invalid(source: &str, msg: impl Into<String>) -> Self {
        CliError::Invalid {
            source: source.into(),
            msg: msg.into(),
        }
    }

    /// Attach a core error to the named input, locating parse errors in `text`.
    pub fn from_core(source: &str, text: &str, e: Error) -> Self {
        if e.is_cap_overflow() {
            return CliError::Cap(e.to_string());
        }
        match e {
            Error::Parse { pos, msg } => {
                let pos = pos.min(text.len());
                let before = &text[..pos];
                let line = before.matches('\n').count() + 1;
                let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
                let token: String = text[pos..]
                    .chars()
                    .take_while(|c| !c.is_whitespace())
                    .take(24)
                    .collect();
                CliError::Input {
                    source: source.into(),
                    line,
                    column,
                    token,
                    msg,
                }
            }
            other => CliError::invalid(source, other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input {
                source,
                line,
                column,
                token,
                msg,
            } => {
                write!(f, "{source}:{line}:{column}: {msg}")?;
                if token.is_empty() {
                    write!(f, " (at end of input)")
                } else {
                    write!(f, " (at `{token}`)")
                }
            }
            CliError::Cap(msg) => write!(f, "{msg}"),
            CliError::Invalid { source, msg } => write!(f, "{source}: {msg}"),
        }
    }
}

/// Read a named input; `-` is standard input.
pub fn read(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::invalid("<stdin>", e.to_string()))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::invalid(path, format!("cannot read: {e}")))
}

/// Map a core result onto the named input.
pub fn at<T>(source: &str, text: &str, r: knotwork::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_core(source, text, e))
}

fn is_braid_text(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with("n=") || l.starts_with("n ="))
}

/// A diagram file, or a braid word file which is closed.
pub fn diagram(path: &str) -> Result<LinkDiagram, CliError> {
    let text = read(path)?;
    if is_braid_text(&text) {
        Ok(at(path, &text, parse_braid(&text))?.closure())
    } else {
        at(path, &text, parse_pd(&text))
    }
}

/// A braid word given inline or as a file name.
pub fn braid(arg: &str) -> Result<BraidWord, CliError> {
    if is_braid_text(arg) {
        return at("<braid>", arg, parse_braid(arg));
    }
    let text = read(arg)?;
    at(arg, &text, parse_braid(&text))
}
