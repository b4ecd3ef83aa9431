//! CPLEX LP text for [`MilpModel`], plus a reader that recovers its shape.

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use super::{MilpModel, ModelKind, RowSense, Sense};

const TERMS_PER_LINE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpNaming {
    /// Row names exactly as built (`1b_2`, `cap_1_1`, ...).
    #[default]
    Model,
    /// Every row name prefixed with `c_`; strict LP readers reject names
    /// starting with a digit.
    SolverSafe,
}

fn num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        // keep the row well formed when no variable takes part
        if let Some(v) = model.variables.first() {
            let _ = write!(out, " 0 {}", v.name);
        }
        return;
    }
    for (i, &(j, c)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.variables[j].name;
        let sign = if c < 0.0 { '-' } else { '+' };
        let mag = c.abs();
        if mag == 1.0 {
            let _ = write!(out, " {sign} {name}");
        } else {
            let _ = write!(out, " {sign} {} {name}", num(mag));
        }
    }
}

/// Model as LP text with row names left unchanged.
pub fn export_lp(model: &MilpModel) -> String {
    export_lp_with(model, LpNaming::Model)
}

pub fn export_lp_with(model: &MilpModel, naming: LpNaming) -> String {
    let mut out = String::new();
    let kind = match model.kind {
        ModelKind::Optimization => "optimization".to_string(),
        ModelKind::Decision { capacity_rows: true } => "decision".to_string(),
        ModelKind::Decision { capacity_rows: false } => "decision-without-capacity".to_string(),
        ModelKind::Makespan => "makespan".to_string(),
    };
    let relaxed = model.is_relaxed();
    let _ = writeln!(
        out,
        "\\ {kind} model, horizon {}{}",
        model.horizon,
        if relaxed { ", relaxed" } else { "" }
    );
    out.push_str(match model.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, model, &model.objective);
    out.push_str("\nSubject To\n");
    for row in &model.constraints {
        let prefix = match naming {
            LpNaming::Model => "",
            LpNaming::SolverSafe => "c_",
        };
        let _ = write!(out, " {prefix}{}:", row.name);
        write_terms(&mut out, model, &row.terms);
        let op = match row.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, num(v.lower));
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", num(v.lower), v.name, num(v.upper));
        }
    }
    if !relaxed {
        let binary = |v: &&super::Variable| v.integer && v.lower >= 0.0 && v.upper <= 1.0;
        let bins: Vec<_> = model.variables.iter().filter(binary).collect();
        let gens: Vec<_> = model.variables.iter().filter(|v| v.integer && !binary(v)).collect();
        if !bins.is_empty() {
            out.push_str("Binaries\n");
            for v in bins {
                let _ = writeln!(out, " {}", v.name);
            }
        }
        if !gens.is_empty() {
            out.push_str("Generals\n");
            for v in gens {
                let _ = writeln!(out, " {}", v.name);
            }
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("LP line {line}: {msg}")]
pub struct LpParseError {
    pub line: usize,
    pub msg: String,
}

/// Shape of an LP file: its sense, named rows and the variables it mentions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LpSummary {
    pub sense: Option<Sense>,
    pub variables: BTreeSet<String>,
    pub rows: Vec<String>,
    pub bounded: usize,
    pub binaries: usize,
    pub generals: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Head,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
    Done,
}

fn is_name(tok: &str) -> bool {
    tok.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok() || matches!(tok.to_ascii_lowercase().as_str(), "inf" | "+inf" | "-inf" | "infinity")
}

/// Reads LP text written by [`export_lp`] (a subset of the CPLEX LP grammar).
pub fn parse_lp(text: &str) -> Result<LpSummary, LpParseError> {
    let mut s = LpSummary::default();
    let mut section = Section::Head;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| LpParseError { line: line_no, msg };
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let header = match line.to_ascii_lowercase().as_str() {
            "minimize" | "minimise" | "min" => Some((Section::Objective, Some(Sense::Minimize))),
            "maximize" | "maximise" | "max" => Some((Section::Objective, Some(Sense::Maximize))),
            "subject to" | "such that" | "st" | "s.t." => Some((Section::Rows, None)),
            "bounds" => Some((Section::Bounds, None)),
            "binaries" | "binary" | "bin" => Some((Section::Binaries, None)),
            "generals" | "general" | "gen" => Some((Section::Generals, None)),
            "end" => Some((Section::Done, None)),
            _ => None,
        };
        if let Some((next, sense)) = header {
            if sense.is_some() {
                s.sense = sense;
            }
            section = next;
            continue;
        }
        let mut body = line;
        match section {
            Section::Head | Section::Done => return Err(err(format!("unexpected text `{line}`"))),
            Section::Objective | Section::Rows => {
                if let Some((name, rest)) = line.split_once(':') {
                    if section == Section::Rows {
                        s.rows.push(name.trim().to_string());
                    }
                    body = rest;
                }
            }
            Section::Bounds => s.bounded += 1,
            Section::Binaries | Section::Generals => {
                for tok in line.split_whitespace() {
                    if !is_name(tok) {
                        return Err(err(format!("`{tok}` is not a variable name")));
                    }
                    s.variables.insert(tok.to_string());
                    if section == Section::Binaries {
                        s.binaries += 1;
                    } else {
                        s.generals += 1;
                    }
                }
                continue;
            }
        }
        for tok in body.split_whitespace() {
            if matches!(tok, "+" | "-" | "<=" | ">=" | "=" | "<" | ">" | "=<" | "=>") || is_number(tok) {
                continue;
            }
            if !is_name(tok) {
                return Err(err(format!("unexpected token `{tok}`")));
            }
            s.variables.insert(tok.to_string());
        }
    }
    if section != Section::Done {
        return Err(LpParseError { line: text.lines().count(), msg: "missing End".into() });
    }
    Ok(s)
}
