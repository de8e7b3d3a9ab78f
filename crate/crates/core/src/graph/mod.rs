//! Knowledge-graph data model.
//!
//! Entities, entity types and attribute types each get dense ids starting at
//! 0. Entity type 0 is the reserved `TEXT` type carried by dummy entities that
//! stand in for plain-text attribute values; its text is empty so such nodes
//! only match keywords through their own text.

mod load;
mod pagerank;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::{token_set, Tokenizer};

pub use load::{load_graph, load_graph_with, EdgeTarget, GraphRecord, JSON_RECORD_VERSION};
pub use pagerank::{compute_pagerank, PageRankVector, DEFAULT_DAMPING, DEFAULT_TOLERANCE};

macro_rules! dense_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

dense_id!(
    /// Entity (node) id.
    EntityId
);
dense_id!(
    /// Entity type id. `EntityTypeId::TEXT` is reserved.
    EntityTypeId
);
dense_id!(
    /// Attribute (edge) type id.
    AttrTypeId
);

impl EntityTypeId {
    pub const TEXT: EntityTypeId = EntityTypeId(0);
}

/// Display name of the reserved type.
pub const TEXT_TYPE_NAME: &str = "TEXT";

/// A name with its token list. Types and attributes carry their own text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub name: String,
    pub tokens: Vec<String>,
    /// Sorted distinct tokens.
    pub token_set: Vec<String>,
}

impl Label {
    fn new(name: &str, tokens: Vec<String>) -> Self {
        let token_set = token_set(&tokens);
        Self { name: name.to_owned(), tokens, token_set }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub key: String,
    pub ty: EntityTypeId,
    pub text: String,
    pub tokens: Vec<String>,
    pub token_set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: EntityId,
    pub attr: AttrTypeId,
    pub target: EntityId,
}

/// An immutable typed, attributed directed graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    edges: Vec<Edge>,
    types: Vec<Label>,
    attrs: Vec<Label>,
    out_edges: Vec<Vec<u32>>,
    in_edges: Vec<Vec<u32>>,
    keys: HashMap<String, EntityId>,
    tokenizer: Tokenizer,
}

impl KnowledgeGraph {
    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn attr_count(&self) -> usize {
        self.attrs.len()
    }

    pub fn entity(&self, id: EntityId) -> &Entity {
        &self.entities[id.index()]
    }

    pub fn entities(&self) -> impl ExactSizeIterator<Item = (EntityId, &Entity)> {
        self.entities.iter().enumerate().map(|(i, e)| (EntityId(i as u32), e))
    }

    pub fn entity_type(&self, id: EntityId) -> EntityTypeId {
        self.entities[id.index()].ty
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: u32) -> Edge {
        self.edges[idx as usize]
    }

    /// Outgoing edge indices of `v`, in insertion order.
    pub fn out_edges(&self, v: EntityId) -> &[u32] {
        &self.out_edges[v.index()]
    }

    /// Incoming edge indices of `v`, in insertion order.
    pub fn in_edges(&self, v: EntityId) -> &[u32] {
        &self.in_edges[v.index()]
    }

    pub fn out_degree(&self, v: EntityId) -> usize {
        self.out_edges[v.index()].len()
    }

    pub fn type_label(&self, ty: EntityTypeId) -> &Label {
        &self.types[ty.index()]
    }

    pub fn attr_label(&self, attr: AttrTypeId) -> &Label {
        &self.attrs[attr.index()]
    }

    pub fn type_names(&self) -> Vec<String> {
        self.types.iter().map(|l| l.name.clone()).collect()
    }

    pub fn attr_names(&self) -> Vec<String> {
        self.attrs.iter().map(|l| l.name.clone()).collect()
    }

    pub fn lookup(&self, key: &str) -> Option<EntityId> {
        self.keys.get(key).copied()
    }

    pub fn lookup_type(&self, name: &str) -> Option<EntityTypeId> {
        self.types.iter().skip(1).position(|l| l.name == name).map(|i| EntityTypeId(i as u32 + 1))
    }

    pub fn lookup_attr(&self, name: &str) -> Option<AttrTypeId> {
        self.attrs.iter().position(|l| l.name == name).map(|i| AttrTypeId(i as u32))
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    /// Text shown for an entity in tables: its raw text, or its key when empty.
    pub fn display_text(&self, id: EntityId) -> &str {
        let e = &self.entities[id.index()];
        if e.text.trim().is_empty() {
            &e.key
        } else {
            &e.text
        }
    }

    /// Every distinct token appearing on an entity, type, or attribute.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut words: Vec<String> = self
            .entities
            .iter()
            .flat_map(|e| e.token_set.iter())
            .chain(self.types.iter().flat_map(|l| l.token_set.iter()))
            .chain(self.attrs.iter().flat_map(|l| l.token_set.iter()))
            .cloned()
            .collect();
        words.sort_unstable();
        words.dedup();
        words
    }
}

/// Incremental constructor used by the loader and by tests.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    graph: KnowledgeGraph,
    type_ids: HashMap<String, EntityTypeId>,
    attr_ids: HashMap<String, AttrTypeId>,
    edge_set: std::collections::HashSet<Edge>,
    literals: usize,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new(Tokenizer::new())
    }
}

impl GraphBuilder {
    pub fn new(tokenizer: Tokenizer) -> Self {
        let graph = KnowledgeGraph {
            entities: Vec::new(),
            edges: Vec::new(),
            types: vec![Label::new(TEXT_TYPE_NAME, Vec::new())],
            attrs: Vec::new(),
            out_edges: Vec::new(),
            in_edges: Vec::new(),
            keys: HashMap::new(),
            tokenizer,
        };
        Self { graph, type_ids: HashMap::new(), attr_ids: HashMap::new(), edge_set: Default::default(), literals: 0 }
    }

    pub fn type_id(&mut self, name: &str) -> EntityTypeId {
        if let Some(&id) = self.type_ids.get(name) {
            return id;
        }
        let id = EntityTypeId(self.graph.types.len() as u32);
        let tokens = self.graph.tokenizer.tokenize(name);
        self.graph.types.push(Label::new(name, tokens));
        self.type_ids.insert(name.to_owned(), id);
        id
    }

    pub fn attr_id(&mut self, name: &str) -> AttrTypeId {
        if let Some(&id) = self.attr_ids.get(name) {
            return id;
        }
        let id = AttrTypeId(self.graph.attrs.len() as u32);
        let tokens = self.graph.tokenizer.tokenize(name);
        self.graph.attrs.push(Label::new(name, tokens));
        self.attr_ids.insert(name.to_owned(), id);
        id
    }

    pub fn lookup(&self, key: &str) -> Option<EntityId> {
        self.graph.keys.get(key).copied()
    }

    fn push_entity(&mut self, key: String, ty: EntityTypeId, text: &str) -> EntityId {
        let id = EntityId(self.graph.entities.len() as u32);
        let tokens = self.graph.tokenizer.tokenize(text);
        let token_set = token_set(&tokens);
        self.graph.keys.insert(key.clone(), id);
        self.graph.entities.push(Entity { key, ty, text: text.to_owned(), tokens, token_set });
        self.graph.out_edges.push(Vec::new());
        self.graph.in_edges.push(Vec::new());
        id
    }

    /// Declares an entity. Returns `None` when the key is already taken.
    pub fn entity(&mut self, key: &str, type_name: &str, text: &str) -> Option<EntityId> {
        if self.graph.keys.contains_key(key) {
            return None;
        }
        let ty = self.type_id(type_name);
        Some(self.push_entity(key.to_owned(), ty, text))
    }

    /// Creates a fresh dummy `TEXT` entity holding `text`.
    pub fn literal(&mut self, text: &str) -> EntityId {
        loop {
            let key = format!("#{}", self.literals);
            self.literals += 1;
            if !self.graph.keys.contains_key(&key) {
                return self.push_entity(key, EntityTypeId::TEXT, text);
            }
        }
    }

    /// Adds an edge. Exact duplicates of an existing edge are dropped.
    pub fn edge(&mut self, source: EntityId, attr_name: &str, target: EntityId) {
        let attr = self.attr_id(attr_name);
        let edge = Edge { source, attr, target };
        if !self.edge_set.insert(edge) {
            return;
        }
        let idx = self.graph.edges.len() as u32;
        self.graph.edges.push(edge);
        self.graph.out_edges[source.index()].push(idx);
        self.graph.in_edges[target.index()].push(idx);
    }

    /// Adds an edge to a new dummy entity holding `text`.
    pub fn literal_edge(&mut self, source: EntityId, attr_name: &str, text: &str) -> EntityId {
        let attr = self.attr_id(attr_name);
        let target = self.literal(text);
        let idx = self.graph.edges.len() as u32;
        let edge = Edge { source, attr, target };
        self.edge_set.insert(edge);
        self.graph.edges.push(edge);
        self.graph.out_edges[source.index()].push(idx);
        self.graph.in_edges[target.index()].push(idx);
        target
    }

    pub fn finish(self) -> KnowledgeGraph {
        self.graph
    }
}
