//! Text formats for graphs and spanners.
//!
//! Graph files start with `directed <n>` or `undirected <n>`, followed by one
//! `tail head length cost` line per edge. Spanner files start with a
//! `k r seed` line, followed by one edge id per line. In both, `#` starts a
//! comment and blank lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ftspan_core::{Edge, EdgeId, Graph, GraphError, Spanner, SpannerMeta};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error("missing header line")]
    MissingHeader,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn number<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, ParseError> {
    s.parse().map_err(|_| syntax(line, format!("bad {what} '{s}'")))
}

pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let directed = match header.as_slice() {
        ["directed", _] => true,
        ["undirected", _] => false,
        _ => return Err(syntax(hline, "expected 'directed <n>' or 'undirected <n>'")),
    };
    let n: usize = number(hline, "vertex count", header[1])?;
    let mut edges = Vec::new();
    let mut line_of = Vec::new();
    for (line, f) in lines {
        if f.len() != 4 {
            return Err(syntax(line, format!("expected 'tail head length cost', got {} fields", f.len())));
        }
        let e = Edge::new(
            number(line, "tail", f[0])?,
            number(line, "head", f[1])?,
            number(line, "length", f[2])?,
            number(line, "cost", f[3])?,
        );
        edges.push(e);
        line_of.push(line);
    }
    Graph::new(n, directed, edges).map_err(|source| {
        let index = match source {
            GraphError::SelfLoop { index, .. }
            | GraphError::DuplicateEdge { index, .. }
            | GraphError::BadWeight { index, .. } => Some(index),
            _ => None,
        };
        // out-of-range vertices carry no index; find the first offending line
        let line = index.map(|i| line_of[i]).unwrap_or_else(|| {
            match source {
                GraphError::InvalidVertex { vertex, .. } => text
                    .lines()
                    .enumerate()
                    .skip(hline)
                    .find(|(_, l)| {
                        l.split('#').next().unwrap_or("").split_whitespace().take(2).any(|t| t.parse() == Ok(vertex))
                    })
                    .map(|(i, _)| i + 1)
                    .unwrap_or(hline),
                _ => hline,
            }
        });
        ParseError::Graph { line, source }
    })
}

pub fn format_graph(g: &Graph) -> String {
    let mut s = format!("{} {}\n", if g.directed() { "directed" } else { "undirected" }, g.n());
    for e in g.edges() {
        writeln!(s, "{} {} {} {}", e.tail, e.head, e.length, e.cost).unwrap();
    }
    s
}

pub fn read_graph(path: &Path) -> Result<Graph, ParseError> {
    parse_graph(&read(path)?)
}

pub fn write_graph(path: &Path, g: &Graph, comment: Option<&str>) -> std::io::Result<()> {
    fs::write(path, with_comment(comment, format_graph(g)))
}

pub fn parse_spanner(text: &str) -> Result<Spanner, ParseError> {
    parse_spanner_named(text, "file")
}

fn parse_spanner_named(text: &str, algorithm: &str) -> Result<Spanner, ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(ParseError::MissingHeader)?;
    let [k, r, seed] = header.as_slice() else {
        return Err(syntax(hline, "expected header 'k r seed'"));
    };
    let meta = SpannerMeta::new(algorithm, number(hline, "k", k)?, number(hline, "r", r)?, number(hline, "seed", seed)?);
    let mut ids = Vec::new();
    for (line, f) in lines {
        let [id] = f.as_slice() else {
            return Err(syntax(line, "expected one edge id per line"));
        };
        ids.push(EdgeId(number(line, "edge id", id)?));
    }
    Ok(Spanner::new(ids, meta))
}

pub fn format_spanner(h: &Spanner) -> String {
    let mut s = format!("{} {} {}\n", h.meta.k, h.meta.r, h.meta.seed);
    for e in h.edges() {
        writeln!(s, "{}", e.0).unwrap();
    }
    s
}

/// Reads a spanner file; the algorithm name comes from an `# algorithm`
/// comment when present.
pub fn read_spanner(path: &Path) -> Result<Spanner, ParseError> {
    let text = read(path)?;
    let algorithm = text
        .lines()
        .find_map(|l| l.strip_prefix("# algorithm "))
        .map(str::trim)
        .unwrap_or("file")
        .to_string();
    parse_spanner_named(&text, &algorithm)
}

pub fn write_spanner(path: &Path, h: &Spanner, comment: Option<&str>) -> std::io::Result<()> {
    let tagged = format!("algorithm {}{}", h.meta.algorithm, comment.map(|c| format!("\n{c}")).unwrap_or_default());
    fs::write(path, with_comment(Some(&tagged), format_spanner(h)))
}

fn read(path: &Path) -> Result<String, ParseError> {
    fs::read_to_string(path).map_err(|source| ParseError::Io { path: path.display().to_string(), source })
}

fn with_comment(comment: Option<&str>, body: String) -> String {
    match comment {
        Some(c) => {
            let mut s: String = c.lines().map(|l| format!("# {l}\n")).collect();
            s.push_str(&body);
            s
        }
        None => body,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_one_edge() {
        let g = parse_graph("directed 3\n0 1 1 1\n").unwrap();
        assert_eq!((g.n(), g.num_edges(), g.directed()), (3, 1, true));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_graph("# made by hand\n\nundirected 4 # four\n0 1 1 2.5\n\n2 3 1 0 # free\n").unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.edge(EdgeId(0)).cost, 2.5);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_graph("directed 3\n0 1 1 1\n0 0 1 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Graph { line: 3, source: GraphError::SelfLoop { .. } }), "{err}");
        let err = parse_graph("directed 3\n0 1 1 1\n\n0 1 1 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Graph { line: 4, source: GraphError::DuplicateEdge { .. } }));
        let err = parse_graph("directed 3\n0 1 1 -1\n").unwrap_err();
        assert!(matches!(err, ParseError::Graph { line: 2, .. }));
        let err = parse_graph("directed 3\n0 1 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
        let err = parse_graph("directed 3\n0 1 1 1\n1 7 1 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Graph { line: 3, source: GraphError::InvalidVertex { .. } }));
        assert!(matches!(parse_graph("sideways 3\n"), Err(ParseError::Syntax { line: 1, .. })));
        assert!(matches!(parse_graph("# nothing\n"), Err(ParseError::MissingHeader)));
    }

    #[test]
    fn spanner_round_trip() {
        let h = Spanner::new([EdgeId(4), EdgeId(1)], SpannerMeta::new("file", 3, 1, 9));
        let text = format_spanner(&h);
        assert_eq!(text, "3 1 9\n1\n4\n");
        assert_eq!(parse_spanner(&text).unwrap(), h);
    }
}
