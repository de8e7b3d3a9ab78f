//! Binary index file.
//!
//! Little-endian throughout, 64-bit offsets and counts:
//!
//! ```text
//! "KGPX" | version u32 | d u32 | #entities u64 | #types u64 | #attrs u64
//! type names, attr names          (u32 length + UTF-8 each)
//! entity types                    (u32 each)
//! pagerank                        damping f64 | tolerance f64 | iterations u32 | f64 each
//! #words u64 | words              (u32 length + UTF-8 each)
//! block offsets                   (#words + 1) absolute u64 offsets
//! per word block:
//!   #patterns u64 | patterns      (u32 element count, then tag u8 + id u32 each)
//!   pattern → root spans          (start u64, end u64) per pattern
//!   #pf roots u64 | (root u32, start u64, end u64) each
//!   #pf paths u64 | paths
//!   #roots u64    | (root u32, start u64, end u64) each
//!   #rf runs u64  | (pattern id u32, start u64, end u64) each
//!   #rf paths u64 | paths
//! path: node count u32 | nodes u32… | attrs u32… | locus u8 | pr f64 | sim f64
//! ```

use smallvec::SmallVec;

use super::{IndexedPath, MatchLocus, PathIndex, PathPattern, PatternElem, Span, WordBlock};
use crate::error::IndexFormatError;
use crate::graph::{AttrTypeId, EntityId, EntityTypeId, PageRankVector};

pub const MAGIC: [u8; 4] = *b"KGPX";
pub const FORMAT_VERSION: u32 = 1;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn span(&mut self, s: Span) {
        self.u64(s.start as u64);
        self.u64(s.end as u64);
    }
    fn pattern(&mut self, p: &PathPattern) {
        self.u32(p.elems().len() as u32);
        for e in p.elems() {
            match *e {
                PatternElem::Node(t) => {
                    self.u8(0);
                    self.u32(t.0);
                }
                PatternElem::Attr(a) => {
                    self.u8(1);
                    self.u32(a.0);
                }
            }
        }
    }
    fn path(&mut self, p: &IndexedPath) {
        self.u32(p.nodes.len() as u32);
        for v in &p.nodes {
            self.u32(v.0);
        }
        for a in &p.attrs {
            self.u32(a.0);
        }
        self.u8(p.locus as u8);
        self.f64(p.pr_term);
        self.f64(p.sim_term);
    }
    fn block(&mut self, b: &WordBlock) {
        self.u64(b.patterns.len() as u64);
        for p in &b.patterns {
            self.pattern(p);
        }
        for &s in &b.pattern_roots {
            self.span(s);
        }
        self.u64(b.pf_roots.len() as u64);
        for &(r, s) in &b.pf_roots {
            self.u32(r.0);
            self.span(s);
        }
        self.u64(b.pf_paths.len() as u64);
        for p in &b.pf_paths {
            self.path(p);
        }
        self.u64(b.roots.len() as u64);
        for &(r, s) in &b.roots {
            self.u32(r.0);
            self.span(s);
        }
        self.u64(b.rf_patterns.len() as u64);
        for &(pid, s) in &b.rf_patterns {
            self.u32(pid);
            self.span(s);
        }
        self.u64(b.rf_paths.len() as u64);
        for p in &b.rf_paths {
            self.path(p);
        }
    }
}

/// Encodes the index into the `KGPX` binary format.
pub fn serialize(idx: &PathIndex) -> Vec<u8> {
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(&MAGIC);
    w.u32(FORMAT_VERSION);
    w.u32(idx.d);
    w.u64(idx.entity_types.len() as u64);
    w.u64(idx.type_names.len() as u64);
    w.u64(idx.attr_names.len() as u64);
    for s in idx.type_names.iter().chain(&idx.attr_names) {
        w.str(s);
    }
    for t in &idx.entity_types {
        w.u32(t.0);
    }
    w.f64(idx.pagerank.damping);
    w.f64(idx.pagerank.tolerance);
    w.u32(idx.pagerank.iterations);
    for &s in &idx.pagerank.scores {
        w.f64(s);
    }
    w.u64(idx.words.len() as u64);
    for s in &idx.words {
        w.str(s);
    }
    let table_at = w.buf.len();
    w.buf.resize(table_at + 8 * (idx.words.len() + 1), 0);
    let mut offsets = Vec::with_capacity(idx.words.len() + 1);
    for b in &idx.blocks {
        offsets.push(w.buf.len() as u64);
        w.block(b);
    }
    offsets.push(w.buf.len() as u64);
    for (i, off) in offsets.into_iter().enumerate() {
        let at = table_at + 8 * i;
        w.buf[at..at + 8].copy_from_slice(&off.to_le_bytes());
    }
    w.buf
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    entities: u64,
    types: u64,
    attrs: u64,
}

fn corrupt(msg: impl Into<String>) -> IndexFormatError {
    IndexFormatError::Corrupt(msg.into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexFormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(IndexFormatError::Truncated(self.buf.len())),
        }
    }
    fn u8(&mut self) -> Result<u8, IndexFormatError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, IndexFormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, IndexFormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, IndexFormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    /// A count whose elements need at least `min_size` bytes each.
    fn count(&mut self, min_size: usize) -> Result<usize, IndexFormatError> {
        let n = self.u64()?;
        let remaining = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(min_size as u64) > remaining {
            return Err(IndexFormatError::Truncated(self.buf.len()));
        }
        Ok(n as usize)
    }
    fn str(&mut self) -> Result<String, IndexFormatError> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| corrupt("string is not UTF-8"))
    }
    fn entity(&mut self) -> Result<EntityId, IndexFormatError> {
        let v = self.u32()?;
        if v as u64 >= self.entities {
            return Err(corrupt(format!("entity id {v} out of range")));
        }
        Ok(EntityId(v))
    }
    fn pattern(&mut self) -> Result<PathPattern, IndexFormatError> {
        let n = self.u32()? as usize;
        let mut elems = Vec::with_capacity(n.min(64));
        for _ in 0..n {
            let tag = self.u8()?;
            let id = self.u32()?;
            elems.push(match tag {
                0 if (id as u64) < self.types => PatternElem::Node(EntityTypeId(id)),
                1 if (id as u64) < self.attrs => PatternElem::Attr(AttrTypeId(id)),
                _ => return Err(corrupt(format!("bad pattern element ({tag}, {id})"))),
            });
        }
        PathPattern::new(elems).ok_or_else(|| corrupt("malformed pattern"))
    }
    fn path(&mut self) -> Result<IndexedPath, IndexFormatError> {
        let n = self.u32()? as usize;
        if n == 0 {
            return Err(corrupt("empty path"));
        }
        let mut nodes = SmallVec::with_capacity(n.min(64));
        for _ in 0..n {
            nodes.push(self.entity()?);
        }
        let mut attrs = SmallVec::with_capacity(n.min(64));
        for _ in 1..n {
            let a = self.u32()?;
            if a as u64 >= self.attrs {
                return Err(corrupt(format!("attribute id {a} out of range")));
            }
            attrs.push(AttrTypeId(a));
        }
        let locus = MatchLocus::from_u8(self.u8()?).ok_or_else(|| corrupt("bad match locus"))?;
        if locus.is_edge() && n < 2 {
            return Err(corrupt("edge match on a single-node path"));
        }
        Ok(IndexedPath { nodes, attrs, locus, pr_term: self.f64()?, sim_term: self.f64()? })
    }
    fn paths(&mut self) -> Result<Vec<IndexedPath>, IndexFormatError> {
        let n = self.count(4 + 1 + 16)?;
        (0..n).map(|_| self.path()).collect()
    }
    fn block(&mut self) -> Result<WordBlock, IndexFormatError> {
        let n_patterns = self.count(4)?;
        let patterns: Vec<PathPattern> = (0..n_patterns).map(|_| self.pattern()).collect::<Result<_, _>>()?;
        if patterns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(corrupt("patterns are not in canonical order"));
        }
        let mut raw_pattern_roots = Vec::with_capacity(n_patterns);
        for _ in 0..n_patterns {
            raw_pattern_roots.push((self.u64()?, self.u64()?));
        }
        let n_pf_roots = self.count(20)?;
        let pattern_roots = raw_pattern_roots
            .into_iter()
            .map(|(s, e)| {
                if s > e || e > n_pf_roots as u64 {
                    Err(corrupt("pattern span out of range"))
                } else {
                    Ok(Span { start: s as u32, end: e as u32 })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut raw_pf_roots = Vec::with_capacity(n_pf_roots);
        for _ in 0..n_pf_roots {
            raw_pf_roots.push((self.entity()?, self.u64()?, self.u64()?));
        }
        let pf_paths = self.paths()?;
        let pf_roots = raw_pf_roots
            .into_iter()
            .map(|(r, s, e)| {
                if s > e || e > pf_paths.len() as u64 {
                    Err(corrupt("root span out of range"))
                } else {
                    Ok((r, Span { start: s as u32, end: e as u32 }))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n_roots = self.count(20)?;
        let mut raw_roots = Vec::with_capacity(n_roots);
        for _ in 0..n_roots {
            raw_roots.push((self.entity()?, self.u64()?, self.u64()?));
        }
        let n_rf = self.count(20)?;
        let roots = raw_roots
            .into_iter()
            .map(|(r, s, e)| {
                if s > e || e > n_rf as u64 {
                    Err(corrupt("root run out of range"))
                } else {
                    Ok((r, Span { start: s as u32, end: e as u32 }))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut raw_rf = Vec::with_capacity(n_rf);
        for _ in 0..n_rf {
            let pid = self.u32()?;
            if pid as usize >= n_patterns {
                return Err(corrupt(format!("pattern id {pid} out of range")));
            }
            raw_rf.push((pid, self.u64()?, self.u64()?));
        }
        let rf_paths = self.paths()?;
        let rf_patterns = raw_rf
            .into_iter()
            .map(|(p, s, e)| {
                if s > e || e > rf_paths.len() as u64 {
                    Err(corrupt("pattern run out of range"))
                } else {
                    Ok((p, Span { start: s as u32, end: e as u32 }))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if pf_paths.len() != rf_paths.len() {
            return Err(corrupt("layouts hold different path counts"));
        }
        Ok(WordBlock { patterns, pattern_roots, pf_roots, pf_paths, roots, rf_patterns, rf_paths })
    }
}

/// Decodes a `KGPX` index.
pub fn deserialize(bytes: &[u8]) -> Result<PathIndex, IndexFormatError> {
    let mut r = Reader { buf: bytes, pos: 0, entities: 0, types: 0, attrs: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
    if magic != MAGIC {
        return Err(IndexFormatError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(IndexFormatError::UnsupportedVersion(version));
    }
    let d = r.u32()?;
    if d == 0 {
        return Err(corrupt("height threshold is zero"));
    }
    let n_entities = r.u64()?;
    let n_types = r.u64()?;
    let n_attrs = r.u64()?;
    let remaining = (bytes.len() - r.pos) as u64;
    if n_types.saturating_add(n_attrs).saturating_mul(4) > remaining || n_entities.saturating_mul(12) > remaining {
        return Err(IndexFormatError::Truncated(bytes.len()));
    }
    r.entities = n_entities;
    r.types = n_types;
    r.attrs = n_attrs;
    let type_names = (0..n_types).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
    let attr_names = (0..n_attrs).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
    let mut entity_types = Vec::with_capacity(n_entities as usize);
    for _ in 0..n_entities {
        let t = r.u32()?;
        if t as u64 >= n_types {
            return Err(corrupt(format!("entity type {t} out of range")));
        }
        entity_types.push(EntityTypeId(t));
    }
    let damping = r.f64()?;
    let tolerance = r.f64()?;
    let iterations = r.u32()?;
    let scores = (0..n_entities).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let pagerank = PageRankVector { scores, damping, tolerance, iterations };

    let n_words = r.count(4)?;
    let words = (0..n_words).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
    if words.windows(2).any(|w| w[0] >= w[1]) {
        return Err(corrupt("words are not sorted"));
    }
    let offsets = (0..=n_words).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
    let mut blocks = Vec::with_capacity(n_words);
    for &offset in &offsets[..n_words] {
        if offset != r.pos as u64 {
            return Err(corrupt(format!("block offset {offset} does not match position {}", r.pos)));
        }
        blocks.push(r.block()?);
    }
    if offsets[n_words] != r.pos as u64 {
        return Err(corrupt("final block offset mismatch"));
    }
    if r.pos != bytes.len() {
        return Err(corrupt("trailing bytes after the last block"));
    }
    Ok(PathIndex { d, type_names, attr_names, entity_types, pagerank, words, blocks })
}
