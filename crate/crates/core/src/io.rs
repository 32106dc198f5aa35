//! Graph files: a canonical JSON layout and a subset of Graphviz DOT.
//!
//! JSON documents look like
//!
//! ```json
//! {
//!   "name": "loop",
//!   "source": "v",
//!   "vertices": ["t", "v", "w"],
//!   "edges": [
//!     ["v", "t"],
//!     ["v", "w"],
//!     ["w", "v"]
//!   ]
//! }
//! ```
//!
//! with an optional `"metadata"` object of string values. The DOT reader
//! accepts `digraph [name] { ... }` with node statements, edge chains
//! (`a -> b -> c;`), attribute lists and `key = value;` graph attributes,
//! which become metadata. Exactly one node must carry `source=true`.
//!
//! Serialization is canonical (sorted vertices and edges, fixed key order), so
//! parsing and re-serializing a serialized document reproduces it byte for
//! byte.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::graph::{FlowGraph, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Format {
    #[default]
    Json,
    Dot,
}

impl Format {
    /// Guesses the format from a file extension (`.dot`/`.gv` or `.json`).
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(Format::Json),
            "dot" | "gv" => Some(Format::Dot),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Dot => "dot",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "dot" | "gv" => Ok(Format::Dot),
            other => Err(format!("unknown format `{other}` (expected json or dot)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    MissingSource(String),
    #[error("{}{error}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Graph { line: Option<usize>, error: GraphError },
}

impl IoError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// A named graph with free-form metadata, as stored in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDocument {
    pub name: String,
    pub graph: FlowGraph,
    pub metadata: BTreeMap<String, String>,
}

impl GraphDocument {
    pub fn new(name: impl Into<String>, graph: FlowGraph) -> Self {
        GraphDocument {
            name: name.into(),
            graph,
            metadata: BTreeMap::new(),
        }
    }

    pub fn serialize(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Dot => self.to_dot(),
        }
    }

    pub fn to_json(&self) -> String {
        let q = |s: &str| serde_json::to_string(s).expect("strings always serialize");
        let g = &self.graph;
        let mut out = String::from("{\n");
        writeln!(out, "  \"name\": {},", q(&self.name)).unwrap();
        writeln!(out, "  \"source\": {},", q(g.name(g.source()))).unwrap();
        let vertices: Vec<String> = g.vertices().map(|v| q(g.name(v))).collect();
        writeln!(out, "  \"vertices\": [{}],", vertices.join(", ")).unwrap();
        let edges: Vec<String> = g
            .named_edges()
            .map(|(a, b)| format!("    [{}, {}]", q(a), q(b)))
            .collect();
        if edges.is_empty() {
            out.push_str("  \"edges\": []");
        } else {
            write!(out, "  \"edges\": [\n{}\n  ]", edges.join(",\n")).unwrap();
        }
        if !self.metadata.is_empty() {
            let entries: Vec<String> = self
                .metadata
                .iter()
                .map(|(k, v)| format!("    {}: {}", q(k), q(v)))
                .collect();
            write!(out, ",\n  \"metadata\": {{\n{}\n  }}", entries.join(",\n")).unwrap();
        }
        out.push_str("\n}\n");
        out
    }

    pub fn to_dot(&self) -> String {
        let g = &self.graph;
        let mut out = String::from("digraph ");
        if !self.name.is_empty() {
            out.push_str(&dot_id(&self.name));
            out.push(' ');
        }
        out.push_str("{\n");
        for (k, v) in &self.metadata {
            writeln!(out, "  {} = {};", dot_id(k), dot_quoted(v)).unwrap();
        }
        for v in g.vertices() {
            if v == g.source() {
                writeln!(out, "  {} [source=true];", dot_id(g.name(v))).unwrap();
            } else {
                writeln!(out, "  {};", dot_id(g.name(v))).unwrap();
            }
        }
        for (a, b) in g.named_edges() {
            writeln!(out, "  {} -> {};", dot_id(a), dot_id(b)).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Parses a graph document; all structural validation is done by
/// [`FlowGraph::build`].
pub fn parse_graph(bytes: &[u8], format: Format) -> Result<GraphDocument, IoError> {
    match format {
        Format::Json => parse_json(bytes),
        Format::Dot => {
            let text = std::str::from_utf8(bytes).map_err(|e| {
                let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
                IoError::parse(line, "input is not valid UTF-8")
            })?;
            DotParser::new(text)?.document()
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGraph {
    name: String,
    source: String,
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

fn parse_json(bytes: &[u8]) -> Result<GraphDocument, IoError> {
    let raw: JsonGraph = serde_json::from_slice(bytes).map_err(|e| IoError::parse(e.line(), e.to_string()))?;
    let graph =
        FlowGraph::build(raw.vertices, raw.edges, &raw.source).map_err(|error| IoError::Graph { line: None, error })?;
    Ok(GraphDocument {
        name: raw.name,
        graph,
        metadata: raw.metadata,
    })
}

const DOT_KEYWORDS: [&str; 6] = ["digraph", "graph", "node", "edge", "strict", "subgraph"];

fn dot_quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn dot_id(s: &str) -> String {
    let plain = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !DOT_KEYWORDS.contains(&s.to_ascii_lowercase().as_str());
    let numeral = !s.is_empty() && s.chars().all(|c| c.is_ascii_digit());
    if plain || numeral {
        s.to_string()
    } else {
        dot_quoted(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id { text: String, quoted: bool },
    Arrow,
    UndirectedArrow,
    Open,
    Close,
    OpenAttr,
    CloseAttr,
    Equals,
    Semi,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Id { text, .. } => format!("`{text}`"),
            Tok::Arrow => "`->`".into(),
            Tok::UndirectedArrow => "`--`".into(),
            Tok::Open => "`{`".into(),
            Tok::Close => "`}`".into(),
            Tok::OpenAttr => "`[`".into(),
            Tok::CloseAttr => "`]`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self, Tok::Id { text, quoted: false } if text.eq_ignore_ascii_case(kw))
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, IoError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    let mut at_line_start = true;
    while let Some(c) = chars.next() {
        let start_of_line = at_line_start;
        at_line_start = c == '\n';
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => at_line_start = start_of_line,
            '#' if start_of_line => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        at_line_start = true;
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'/') => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        at_line_start = true;
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                let start = line;
                chars.next();
                let mut prev = '\0';
                loop {
                    match chars.next() {
                        None => return Err(IoError::parse(start, "unterminated comment")),
                        Some('/') if prev == '*' => break,
                        Some(c) => {
                            if c == '\n' {
                                line += 1;
                            }
                            prev = c;
                        }
                    }
                }
            }
            '{' => toks.push((Tok::Open, line)),
            '}' => toks.push((Tok::Close, line)),
            '[' => toks.push((Tok::OpenAttr, line)),
            ']' => toks.push((Tok::CloseAttr, line)),
            '=' => toks.push((Tok::Equals, line)),
            ';' => toks.push((Tok::Semi, line)),
            ',' => toks.push((Tok::Comma, line)),
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                toks.push((Tok::Arrow, line));
            }
            '-' if chars.peek() == Some(&'-') => {
                chars.next();
                toks.push((Tok::UndirectedArrow, line));
            }
            '"' => {
                let start = line;
                let mut text = String::new();
                loop {
                    match chars.next() {
                        None => return Err(IoError::parse(start, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('"') => text.push('"'),
                            Some('\\') => text.push('\\'),
                            Some('n') => text.push('\n'),
                            Some('\n') => line += 1,
                            Some(other) => {
                                text.push('\\');
                                text.push(other);
                            }
                            None => return Err(IoError::parse(start, "unterminated string")),
                        },
                        Some(c) => {
                            if c == '\n' {
                                line += 1;
                            }
                            text.push(c);
                        }
                    }
                }
                toks.push((Tok::Id { text, quoted: true }, start));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let mut text = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_alphanumeric() || n == '_' || n == '.' {
                        text.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Id { text, quoted: false }, line));
            }
            other => return Err(IoError::parse(line, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct DotParser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    last_line: usize,
    vertices: Vec<String>,
    /// Edges with the line they were written on.
    edges: Vec<(String, String, usize)>,
    sources: Vec<(String, usize)>,
    metadata: BTreeMap<String, String>,
}

impl DotParser {
    fn new(text: &str) -> Result<Self, IoError> {
        Ok(DotParser {
            toks: tokenize(text)?,
            pos: 0,
            last_line: text.lines().count().max(1),
            vertices: Vec::new(),
            edges: Vec::new(),
            sources: Vec::new(),
            metadata: BTreeMap::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |&(_, l)| l)
    }

    fn next(&mut self) -> Result<Tok, IoError> {
        let tok = self
            .toks
            .get(self.pos)
            .map(|(t, _)| t.clone())
            .ok_or_else(|| IoError::parse(self.last_line, "unexpected end of input"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, want: Tok) -> Result<(), IoError> {
        let line = self.line();
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            Err(IoError::parse(
                line,
                format!("expected {}, found {}", want.describe(), got.describe()),
            ))
        }
    }

    fn id(&mut self) -> Result<String, IoError> {
        let line = self.line();
        match self.next()? {
            Tok::Id { text, .. } => Ok(text),
            other => Err(IoError::parse(
                line,
                format!("expected an identifier, found {}", other.describe()),
            )),
        }
    }

    fn document(mut self) -> Result<GraphDocument, IoError> {
        if self.peek().is_some_and(|t| t.is_keyword("strict")) {
            self.pos += 1;
        }
        let line = self.line();
        match self.next()? {
            t if t.is_keyword("digraph") => {}
            t if t.is_keyword("graph") => {
                return Err(IoError::parse(
                    line,
                    "undirected graphs are not supported; use `digraph`",
                ))
            }
            other => {
                return Err(IoError::parse(
                    line,
                    format!("expected `digraph`, found {}", other.describe()),
                ))
            }
        }
        let name = match self.peek() {
            Some(Tok::Id { .. }) => self.id()?,
            _ => String::new(),
        };
        self.expect(Tok::Open)?;
        while self.peek() != Some(&Tok::Close) {
            if self.peek().is_none() {
                return Err(IoError::parse(self.last_line, "missing closing `}`"));
            }
            self.statement()?;
        }
        self.pos += 1;
        if let Some((tok, line)) = self.toks.get(self.pos) {
            return Err(IoError::parse(
                *line,
                format!("unexpected {} after the graph", tok.describe()),
            ));
        }
        self.finish(name)
    }

    fn statement(&mut self) -> Result<(), IoError> {
        let line = self.line();
        match self.peek() {
            Some(Tok::Semi) => {
                self.pos += 1;
                return Ok(());
            }
            Some(t) if t.is_keyword("subgraph") => {
                return Err(IoError::parse(line, "subgraphs are not supported"));
            }
            Some(t) if t.is_keyword("graph") || t.is_keyword("node") || t.is_keyword("edge") => {
                self.pos += 1;
                self.attributes()?;
                return self.end_statement();
            }
            _ => {}
        }
        let first = self.id()?;
        match self.peek() {
            Some(Tok::Equals) => {
                self.pos += 1;
                let value = self.id()?;
                self.metadata.insert(first, value);
            }
            Some(Tok::Arrow) => {
                let mut chain = vec![first];
                while self.peek() == Some(&Tok::Arrow) {
                    self.pos += 1;
                    chain.push(self.id()?);
                }
                let attrs = self.attributes()?;
                if attrs.iter().any(|(k, _)| k == "source") {
                    return Err(IoError::parse(line, "`source` must be set on a node statement"));
                }
                for name in &chain {
                    self.declare(name);
                }
                for pair in chain.windows(2) {
                    self.edges.push((pair[0].clone(), pair[1].clone(), line));
                }
            }
            Some(Tok::UndirectedArrow) => {
                return Err(IoError::parse(line, "undirected edge `--` in a digraph"));
            }
            _ => {
                let attrs = self.attributes()?;
                self.declare(&first);
                for (key, value) in attrs {
                    if key == "source" {
                        match value.as_str() {
                            "true" => self.sources.push((first.clone(), line)),
                            "false" => {}
                            other => {
                                return Err(IoError::parse(
                                    line,
                                    format!("`source` must be true or false, found `{other}`"),
                                ))
                            }
                        }
                    }
                }
            }
        }
        self.end_statement()
    }

    fn end_statement(&mut self) -> Result<(), IoError> {
        if self.peek() == Some(&Tok::Semi) {
            self.pos += 1;
        }
        Ok(())
    }

    /// Zero or more `[k=v, ...]` lists.
    fn attributes(&mut self) -> Result<Vec<(String, String)>, IoError> {
        let mut attrs = Vec::new();
        while self.peek() == Some(&Tok::OpenAttr) {
            self.pos += 1;
            loop {
                match self.peek() {
                    Some(Tok::CloseAttr) => {
                        self.pos += 1;
                        break;
                    }
                    Some(Tok::Comma) | Some(Tok::Semi) => self.pos += 1,
                    _ => {
                        let key = self.id()?;
                        self.expect(Tok::Equals)?;
                        let value = self.id()?;
                        attrs.push((key, value));
                    }
                }
            }
        }
        Ok(attrs)
    }

    fn declare(&mut self, name: &str) {
        self.vertices.push(name.to_string());
    }

    fn finish(mut self, name: String) -> Result<GraphDocument, IoError> {
        self.sources.sort();
        self.sources.dedup_by(|a, b| a.0 == b.0);
        let source = match self.sources.as_slice() {
            [] => return Err(IoError::MissingSource("no node is marked `source=true`".into())),
            [(only, _)] => only.clone(),
            [(a, _), (b, line), ..] => {
                return Err(IoError::MissingSource(format!(
                    "line {line}: more than one node is marked `source=true` (`{a}` and `{b}`)"
                )))
            }
        };
        self.vertices.sort();
        self.vertices.dedup();
        let located = |error: GraphError, edges: &[(String, String, usize)]| {
            let line = match &error {
                GraphError::SelfLoop(v) => edges.iter().find(|(a, b, _)| a == v && b == v).map(|e| e.2),
                GraphError::ParallelEdge(u, w) => edges.iter().filter(|(a, b, _)| a == u && b == w).nth(1).map(|e| e.2),
                _ => None,
            };
            IoError::Graph { line, error }
        };
        let pairs = self.edges.iter().map(|(a, b, _)| (a.clone(), b.clone()));
        let graph = FlowGraph::build(self.vertices.clone(), pairs, &source).map_err(|e| located(e, &self.edges))?;
        Ok(GraphDocument {
            name,
            graph,
            metadata: self.metadata,
        })
    }
}
