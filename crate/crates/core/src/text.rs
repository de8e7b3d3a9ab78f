//! Tokenization and keyword/text similarity.
//!
//! Text is lowercased and split on every non-alphanumeric character. There is
//! no stemming. An optional synonym table maps individual tokens onto a
//! canonical token after splitting.

use std::collections::HashMap;

/// Lowercase, split on non-alphanumerics, drop empty tokens.
pub fn tokenize(s: &str) -> Vec<String> {
    s.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_owned).collect()
}

/// Jaccard similarity between the single keyword `w` and the token set of `text`.
///
/// `|{w} ∩ set(text)| / |{w} ∪ set(text)|`, and 0 for empty text.
pub fn jaccard_sim(w: &str, text: &[String]) -> f64 {
    let mut distinct: Vec<&str> = text.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    jaccard_sorted(w, &distinct)
}

/// Same as [`jaccard_sim`] over an already sorted, de-duplicated token set.
pub fn jaccard_sorted<S: AsRef<str>>(w: &str, distinct: &[S]) -> f64 {
    if distinct.is_empty() {
        return 0.0;
    }
    if distinct.binary_search_by(|t| t.as_ref().cmp(w)).is_ok() {
        1.0 / distinct.len() as f64
    } else {
        0.0
    }
}

/// Sorted, de-duplicated copy of a token list.
pub fn token_set(tokens: &[String]) -> Vec<String> {
    let mut set = tokens.to_vec();
    set.sort_unstable();
    set.dedup();
    set
}

/// Tokenizer with an optional word → canonical-word table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tokenizer {
    synonyms: HashMap<String, String>,
}

impl Tokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a tokenizer from `(word, canonical)` pairs. Both sides are
    /// normalized with [`tokenize`]; pairs that do not normalize to a single
    /// token each are ignored.
    pub fn with_synonyms<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut synonyms = HashMap::new();
        for (word, canonical) in pairs {
            let (w, c) = (tokenize(word.as_ref()), tokenize(canonical.as_ref()));
            if let ([w], [c]) = (w.as_slice(), c.as_slice()) {
                if w != c {
                    synonyms.insert(w.clone(), c.clone());
                }
            }
        }
        Self { synonyms }
    }

    /// Parses a synonym file: one `word canonical` pair per line, `#` comments.
    pub fn parse_synonyms(src: &str) -> Self {
        let pairs = src
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                let mut it = l.split_whitespace();
                Some((it.next()?.to_owned(), it.next()?.to_owned()))
            })
            .collect::<Vec<_>>();
        Self::with_synonyms(pairs)
    }

    pub fn is_plain(&self) -> bool {
        self.synonyms.is_empty()
    }

    pub fn tokenize(&self, s: &str) -> Vec<String> {
        let mut tokens = tokenize(s);
        if !self.synonyms.is_empty() {
            for t in &mut tokens {
                if let Some(c) = self.synonyms.get(t.as_str()) {
                    t.clone_from(c);
                }
            }
        }
        tokens
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Relational Database"), ["relational", "database"]);
        assert_eq!(tokenize("US$ 77 billion"), ["us", "77", "billion"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("  --  $$ ").is_empty());
        assert_eq!(tokenize("Written_in"), ["written", "in"]);
    }

    #[test]
    fn jaccard_examples() {
        let text = tokenize("Relational database");
        assert_eq!(jaccard_sim("database", &text), 0.5);
        assert_eq!(jaccard_sim("software", &tokenize("Software")), 1.0);
        let six = tokenize("inside sql server database software design");
        assert_eq!(jaccard_sim("database", &six), 1.0 / 6.0);
        assert_eq!(jaccard_sim("database", &[]), 0.0);
        assert_eq!(jaccard_sim("missing", &text), 0.0);
    }

    #[test]
    fn repeated_tokens_count_once() {
        let text = tokenize("database database model");
        assert_eq!(jaccard_sim("database", &text), 0.5);
    }

    #[test]
    fn synonyms_map_to_canonical() {
        let t = Tokenizer::parse_synonyms("# comment\nDB database\nfilm movie\nbad pair extra\n");
        assert_eq!(t.tokenize("Oracle DB film"), ["oracle", "database", "movie"]);
        assert!(Tokenizer::new().is_plain());
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(s in "\\PC{0,40}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn jaccard_is_one_iff_singleton(w in "[a-z]{1,4}", text in proptest::collection::vec("[a-z]{1,4}", 0..5)) {
            let sim = jaccard_sim(&w, &text);
            let set = token_set(&text);
            prop_assert!((0.0..=1.0).contains(&sim));
            prop_assert_eq!(sim == 1.0, set.len() == 1 && set[0] == w);
        }
    }
}
