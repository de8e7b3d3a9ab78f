//! Line-delimited graph file reader and writer.
//!
//! Two record kinds, one per line:
//!
//! ```text
//! E <entity-key> <type-name> <text...>
//! A <source-key> <attr-name> @<target-key>
//! A <source-key> <attr-name> "literal text"
//! ```
//!
//! A line starting with `{` is read as the JSON form of the same records:
//! `{"version":1,"kind":"entity","key":..,"type":..,"text":..}` or
//! `{"version":1,"kind":"edge","source":..,"attr":..,"target":..}` with
//! `"literal"` in place of `"target"` for plain-text values. Blank lines and
//! lines starting with `#` are skipped.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{GraphBuilder, KnowledgeGraph};
use crate::error::GraphError;
use crate::text::Tokenizer;

pub const JSON_RECORD_VERSION: u32 = 1;

/// One parsed graph record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphRecord {
    Entity { key: String, type_name: String, text: String },
    Edge { source: String, attr: String, target: EdgeTarget },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeTarget {
    Entity(String),
    Literal(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum JsonRecord {
    Entity {
        #[serde(default = "default_version")]
        version: u32,
        key: String,
        #[serde(rename = "type")]
        type_name: String,
        #[serde(default)]
        text: String,
    },
    Edge {
        #[serde(default = "default_version")]
        version: u32,
        source: String,
        attr: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        literal: Option<String>,
    },
}

fn default_version() -> u32 {
    JSON_RECORD_VERSION
}

impl GraphRecord {
    /// Renders the record in the plain-text line format (no trailing newline).
    pub fn to_line(&self) -> String {
        match self {
            GraphRecord::Entity { key, type_name, text } => {
                if text.is_empty() {
                    format!("E {key} {type_name}")
                } else {
                    format!("E {key} {type_name} {text}")
                }
            }
            GraphRecord::Edge { source, attr, target: EdgeTarget::Entity(t) } => {
                format!("A {source} {attr} @{t}")
            }
            GraphRecord::Edge { source, attr, target: EdgeTarget::Literal(text) } => {
                let escaped = text.replace('\\', "\\\\").replace('"', "\\\"");
                format!("A {source} {attr} \"{escaped}\"")
            }
        }
    }

    /// Renders the record as a JSON line.
    pub fn to_json_line(&self) -> String {
        let rec = match self.clone() {
            GraphRecord::Entity { key, type_name, text } => {
                JsonRecord::Entity { version: JSON_RECORD_VERSION, key, type_name, text }
            }
            GraphRecord::Edge { source, attr, target } => {
                let (target, literal) = match target {
                    EdgeTarget::Entity(t) => (Some(t), None),
                    EdgeTarget::Literal(l) => (None, Some(l)),
                };
                JsonRecord::Edge { version: JSON_RECORD_VERSION, source, attr, target, literal }
            }
        };
        serde_json::to_string(&rec).expect("record serializes")
    }

    /// Parses one non-blank, non-comment line.
    pub fn parse(line: &str, lineno: usize) -> Result<Self, GraphError> {
        let err = |message: String| GraphError::Parse { line: lineno, message };
        let trimmed = line.trim();
        if trimmed.starts_with('{') {
            return Self::parse_json(trimmed, lineno);
        }
        let (kind, rest) = split_field(trimmed);
        match kind {
            "E" => {
                let (key, rest) = split_field(rest);
                let (type_name, text) = split_field(rest);
                check_key(key).map_err(err)?;
                if type_name.is_empty() {
                    return Err(err("entity record is missing its type name".into()));
                }
                Ok(GraphRecord::Entity { key: key.to_owned(), type_name: type_name.to_owned(), text: text.to_owned() })
            }
            "A" => {
                let (source, rest) = split_field(rest);
                let (attr, value) = split_field(rest);
                check_key(source).map_err(err)?;
                if attr.is_empty() {
                    return Err(err("attribute record is missing its attribute name".into()));
                }
                let target = if let Some(t) = value.strip_prefix('@') {
                    check_key(t).map_err(err)?;
                    EdgeTarget::Entity(t.to_owned())
                } else if value.starts_with('"') {
                    EdgeTarget::Literal(parse_quoted(value).map_err(err)?)
                } else {
                    return Err(err(format!("attribute value must be @<key> or a quoted literal, got `{value}`")));
                };
                Ok(GraphRecord::Edge { source: source.to_owned(), attr: attr.to_owned(), target })
            }
            other => Err(err(format!("unknown record kind `{other}`"))),
        }
    }

    fn parse_json(line: &str, lineno: usize) -> Result<Self, GraphError> {
        let err = |message: String| GraphError::Parse { line: lineno, message };
        let rec: JsonRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let check_version = |v: u32| {
            if v == JSON_RECORD_VERSION {
                Ok(())
            } else {
                Err(err(format!("unsupported record version {v}")))
            }
        };
        match rec {
            JsonRecord::Entity { version, key, type_name, text } => {
                check_version(version)?;
                check_key(&key).map_err(err)?;
                if type_name.is_empty() || type_name.contains(char::is_whitespace) {
                    return Err(err(format!("invalid type name `{type_name}`")));
                }
                Ok(GraphRecord::Entity { key, type_name, text })
            }
            JsonRecord::Edge { version, source, attr, target, literal } => {
                check_version(version)?;
                check_key(&source).map_err(err)?;
                if attr.is_empty() || attr.contains(char::is_whitespace) {
                    return Err(err(format!("invalid attribute name `{attr}`")));
                }
                let target = match (target, literal) {
                    (Some(t), None) => {
                        check_key(&t).map_err(err)?;
                        EdgeTarget::Entity(t)
                    }
                    (None, Some(l)) => EdgeTarget::Literal(l),
                    _ => return Err(err("edge needs exactly one of `target` or `literal`".into())),
                };
                Ok(GraphRecord::Edge { source, attr, target })
            }
        }
    }
}

fn split_field(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim()),
        None => (s, ""),
    }
}

fn check_key(key: &str) -> Result<(), String> {
    if key.is_empty() {
        return Err("missing entity key".into());
    }
    if key.starts_with(['#', '@', '"']) || key.contains(char::is_whitespace) {
        return Err(format!("invalid entity key `{key}`"));
    }
    Ok(())
}

fn parse_quoted(value: &str) -> Result<String, String> {
    let mut out = String::new();
    let mut chars = value.chars();
    chars.next();
    let mut closed = false;
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(e @ ('\\' | '"')) => out.push(e),
                Some(e) => return Err(format!("unknown escape `\\{e}`")),
                None => return Err("unterminated escape".into()),
            },
            '"' => {
                closed = true;
                break;
            }
            c => out.push(c),
        }
    }
    if !closed {
        return Err("unterminated literal".into());
    }
    if !chars.as_str().trim().is_empty() {
        return Err("trailing characters after literal".into());
    }
    Ok(out)
}

/// Reads a graph with the default tokenizer.
pub fn load_graph<R: BufRead>(reader: R) -> Result<KnowledgeGraph, GraphError> {
    load_graph_with(reader, Tokenizer::new())
}

/// Reads a graph, tokenizing all text with `tokenizer`.
///
/// Ids are assigned in order of first appearance. Each plain-text attribute
/// value becomes a new dummy entity of the reserved `TEXT` type.
pub fn load_graph_with<R: BufRead>(reader: R, tokenizer: Tokenizer) -> Result<KnowledgeGraph, GraphError> {
    let mut builder = GraphBuilder::new(tokenizer);
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match GraphRecord::parse(trimmed, lineno)? {
            GraphRecord::Entity { key, type_name, text } => {
                if builder.entity(&key, &type_name, &text).is_none() {
                    return Err(GraphError::Parse { line: lineno, message: format!("entity `{key}` declared twice") });
                }
            }
            GraphRecord::Edge { source, attr, target } => {
                let src = builder.lookup(&source).ok_or(GraphError::Link { line: lineno, key: source })?;
                match target {
                    EdgeTarget::Entity(t) => {
                        let dst = builder.lookup(&t).ok_or(GraphError::Link { line: lineno, key: t })?;
                        builder.edge(src, &attr, dst);
                    }
                    EdgeTarget::Literal(text) => {
                        builder.literal_edge(src, &attr, &text);
                    }
                }
            }
        }
    }
    Ok(builder.finish())
}
