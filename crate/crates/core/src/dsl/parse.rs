//! Concrete syntax:
//!
//! ```text
//! if ExIdlePot and HoldOnion: # comment
//!     GoIntIdlePot
//! RandomAct
//! ```
//!
//! `#` starts a comment. The trailing `RandomAct` line is optional on input
//! and always emitted on output.

use super::{
    validate_conjunction, ActionPrimitive, Condition, ConditionBase, DslError, ItModule, Program,
};

const FALLBACK: &str = "RandomAct";

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start().len()
}

pub fn parse_program(text: &str) -> Result<Program, DslError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim_end()))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();

    let mut modules = Vec::new();
    let mut i = 0;
    let mut saw_fallback = false;
    while i < lines.len() {
        let (line_no, raw) = lines[i];
        let line = raw.trim();
        if saw_fallback {
            return Err(DslError::Syntax {
                line: line_no,
                msg: format!("unexpected {line:?} after {FALLBACK}"),
            });
        }
        if line == FALLBACK {
            saw_fallback = true;
            i += 1;
            continue;
        }
        let Some(rest) = line.strip_prefix("if") else {
            if ActionPrimitive::from_name(line).is_some() {
                return Err(DslError::Syntax {
                    line: line_no,
                    msg: format!("action {line} outside an if"),
                });
            }
            return Err(DslError::UnknownPrimitive {
                line: line_no,
                name: line.to_string(),
            });
        };
        if !(rest.is_empty() || rest.starts_with(char::is_whitespace) || rest.starts_with(':')) {
            return Err(DslError::Syntax {
                line: line_no,
                msg: format!("expected 'if', found {line:?}"),
            });
        }
        let Some(cond_text) = rest.trim().strip_suffix(':') else {
            return Err(DslError::Syntax {
                line: line_no,
                msg: "missing ':' after condition".into(),
            });
        };
        let conditions = parse_conjunction(cond_text, line_no)?;

        let Some(&(action_line, action_raw)) = lines.get(i + 1) else {
            return Err(DslError::Syntax {
                line: line_no,
                msg: "if without an action".into(),
            });
        };
        let action_text = action_raw.trim();
        if action_text.starts_with("if ") || action_text == "if" {
            if indent_of(action_raw) > indent_of(raw) {
                return Err(DslError::NestedIf { line: action_line });
            }
            return Err(DslError::Syntax {
                line: line_no,
                msg: "if without an action".into(),
            });
        }
        if indent_of(action_raw) <= indent_of(raw) {
            return Err(DslError::Syntax {
                line: action_line,
                msg: "action must be indented under its if".into(),
            });
        }
        let action =
            ActionPrimitive::from_name(action_text).ok_or_else(|| DslError::UnknownPrimitive {
                line: action_line,
                name: action_text.to_string(),
            })?;
        modules.push(ItModule { conditions, action });
        i += 2;
    }
    Ok(Program { modules })
}

fn parse_conjunction(text: &str, line: usize) -> Result<Vec<Condition>, DslError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(DslError::EmptyConjunction { line });
    }
    let mut conds = Vec::new();
    for part in text.split(" and ") {
        let part = part.trim();
        if part.is_empty() {
            return Err(DslError::EmptyConjunction { line });
        }
        let (negated, name) = match part.strip_prefix("not ") {
            Some(n) => (true, n.trim()),
            None => (false, part),
        };
        let base = ConditionBase::from_name(name).ok_or_else(|| DslError::UnknownPrimitive {
            line,
            name: name.to_string(),
        })?;
        conds.push(Condition { base, negated });
    }
    validate_conjunction(&conds, line)?;
    Ok(conds)
}

pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    for m in &p.modules {
        out.push_str("if ");
        let conds: Vec<String> = m.conditions.iter().map(ToString::to_string).collect();
        out.push_str(&conds.join(" and "));
        out.push_str(":\n\t");
        out.push_str(&m.action.name());
        out.push('\n');
    }
    out.push_str(FALLBACK);
    out.push('\n');
    out
}
