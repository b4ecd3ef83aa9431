//! SteinLib STP reader/writer and the plain edge-list format.
//!
//! Edge-list layout (whitespace separated, 1-based ids, `#` starts a comment):
//!
//! ```text
//! n m sigma
//! s_1 ... s_sigma
//! u_1 v_1
//! ...
//! u_m v_m
//! ```

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{Graph, GraphError, Instance, NodeId};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Structure {
        line: usize,
        #[source]
        source: GraphError,
    },
    #[error(transparent)]
    Invalid(#[from] GraphError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, FormatError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("expected {what}, found `{tok}`")))
}

const STP_MAGIC: &str = "33D32945";

/// Parses SteinLib STP text; sources default to `[1]`.
///
/// Edge weights are read and discarded, the Terminals section and any other
/// section besides Graph are skipped.
pub fn parse_stp(text: &str) -> Result<Instance, FormatError> {
    parse_stp_with_sources(text, None)
}

pub fn parse_stp_with_sources(
    text: &str,
    sources: Option<Vec<NodeId>>,
) -> Result<Instance, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, l)) if l.to_ascii_uppercase().starts_with(STP_MAGIC) => {}
        Some((no, _)) => return Err(syntax(no, "missing STP header `33D32945 STP File`")),
        None => return Err(syntax(0, "empty input")),
    }

    let mut name = None;
    let mut nodes: Option<usize> = None;
    let mut declared_edges: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut edge_lines = Vec::new();
    let mut section: Option<String> = None;
    let mut saw_graph = false;
    let mut last_line = 0;

    for (no, line) in lines {
        last_line = no;
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default().to_ascii_lowercase();
        match (section.as_deref(), key.as_str()) {
            (None, "section") => {
                let sec = toks
                    .next()
                    .ok_or_else(|| syntax(no, "SECTION without a name"))?
                    .to_ascii_lowercase();
                saw_graph |= sec == "graph";
                section = Some(sec);
            }
            (None, "eof") => break,
            (None, _) => return Err(syntax(no, format!("unexpected `{line}` outside a section"))),
            (Some(_), "end") => section = None,
            (Some("graph"), "nodes") => {
                let tok = toks.next().ok_or_else(|| syntax(no, "Nodes without a count"))?;
                nodes = Some(parse_num(tok, no, "node count")?);
            }
            (Some("graph"), "edges") => {
                let tok = toks.next().ok_or_else(|| syntax(no, "Edges without a count"))?;
                declared_edges = Some((parse_num(tok, no, "edge count")?, no));
            }
            (Some("graph"), "e") => {
                if nodes.is_none() {
                    return Err(syntax(no, "edge listed before `Nodes`"));
                }
                let rest: Vec<&str> = toks.collect();
                if !(2..=3).contains(&rest.len()) {
                    return Err(syntax(no, "expected `E <u> <v> <w>`"));
                }
                let u: NodeId = parse_num(rest[0], no, "node id")?;
                let v: NodeId = parse_num(rest[1], no, "node id")?;
                if let Some(w) = rest.get(2) {
                    parse_num::<f64>(w, no, "edge weight")?;
                }
                edges.push((u, v));
                edge_lines.push(no);
            }
            (Some("graph"), "a") | (Some("graph"), "arcs") => {
                return Err(syntax(no, "directed arcs are not supported"));
            }
            (Some("graph"), _) => {
                return Err(syntax(no, format!("unknown Graph keyword `{key}`")));
            }
            (Some("comment"), "name") => {
                let rest = line[4..].trim().trim_matches('"');
                name = Some(rest.to_string());
            }
            (Some(_), _) => {}
        }
    }
    if section.is_some() {
        return Err(syntax(last_line, "section not closed by END"));
    }
    if !saw_graph {
        return Err(syntax(last_line, "no Graph section"));
    }
    let n = nodes.ok_or_else(|| syntax(last_line, "Graph section lacks `Nodes`"))?;
    if let Some((m, no)) = declared_edges {
        if m != edges.len() {
            return Err(syntax(
                no,
                format!("declared {m} edges but found {}", edges.len()),
            ));
        }
    }
    // Report structural problems against the offending line.
    for (i, &(u, v)) in edges.iter().enumerate() {
        if let Err(source) = Graph::from_edges(n.max(1), [(u, v)]) {
            return Err(FormatError::Structure {
                line: edge_lines[i],
                source,
            });
        }
    }
    let graph = Graph::from_edges(n, edges).map_err(|source| FormatError::Structure {
        line: last_line,
        source,
    })?;
    let sources = sources.unwrap_or_else(|| vec![1]);
    Ok(Instance::checked(
        graph,
        sources,
        name.unwrap_or_else(|| "stp".to_string()),
    )?)
}

/// Minimal STP text carrying what the solver needs (unit weights, no
/// terminals).
pub fn write_stp(inst: &Instance) -> String {
    let g = &inst.graph;
    let mut out = String::new();
    writeln!(out, "{STP_MAGIC} STP File, STP Format Version 1.0").unwrap();
    writeln!(out, "\nSECTION Comment\nName \"{}\"\nEND\n", inst.name).unwrap();
    writeln!(out, "SECTION Graph").unwrap();
    writeln!(out, "Nodes {}", g.node_count()).unwrap();
    writeln!(out, "Edges {}", g.edge_count()).unwrap();
    for &(u, v) in g.edges() {
        writeln!(out, "E {u} {v} 1").unwrap();
    }
    writeln!(out, "END\n\nEOF").unwrap();
    out
}

struct Tokens<'a, I: Iterator<Item = (usize, &'a str)>> {
    inner: I,
    line: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Tokens<'a, I> {
    fn next(&mut self, what: &str) -> Result<(usize, usize), FormatError> {
        match self.inner.next() {
            Some((no, t)) => {
                self.line = no;
                Ok((no, parse_num(t, no, what)?))
            }
            None => Err(syntax(
                self.line,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }
}

/// Parses the plain edge-list format.
pub fn parse_edge_list(text: &str, name: &str) -> Result<Instance, FormatError> {
    let mut toks = Tokens {
        inner: text.lines().enumerate().flat_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or_default();
            l.split_whitespace().map(move |t| (i + 1, t))
        }),
        line: 0,
    };
    let (_, n) = toks.next("node count")?;
    let (_, m) = toks.next("edge count")?;
    let (sigma_line, sigma) = toks.next("source count")?;
    if n == 0 {
        return Err(syntax(sigma_line, "node count must be positive"));
    }
    let mut sources = Vec::with_capacity(sigma);
    for _ in 0..sigma {
        sources.push(toks.next("source id")?.1);
    }
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, u) = toks.next("node id")?;
        let (_, v) = toks.next("node id")?;
        Graph::from_edges(n, [(u, v)])
            .map_err(|source| FormatError::Structure { line: no, source })?;
        edges.push((u, v));
    }
    if let Some((no, t)) = toks.inner.next() {
        return Err(syntax(no, format!("trailing token `{t}`")));
    }
    let graph = Graph::from_edges(n, edges)?;
    Ok(Instance::checked(graph, sources, name)?)
}

pub fn write_edge_list(inst: &Instance) -> String {
    let g = &inst.graph;
    let mut out = String::new();
    writeln!(out, "{} {} {}", g.node_count(), g.edge_count(), inst.source_count()).unwrap();
    let srcs: Vec<String> = inst.sources.iter().map(|s| s.to_string()).collect();
    writeln!(out, "{}", srcs.join(" ")).unwrap();
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

/// Reads an instance file, choosing the format by extension (`.stp` is
/// SteinLib, anything else the edge-list format). `sources` overrides the
/// file's sources when given.
pub fn read_instance(path: &Path, sources: Option<Vec<NodeId>>) -> Result<Instance, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    let is_stp = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("stp"));
    let mut inst = if is_stp {
        parse_stp_with_sources(&text, sources.clone())?
    } else {
        parse_edge_list(&text, &stem)?
    };
    inst.name = stem;
    match sources {
        Some(s) if !is_stp => Ok(Instance::checked(inst.graph, s, inst.name)?),
        _ => Ok(inst),
    }
}
