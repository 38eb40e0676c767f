//! Summary text normalization: lowercase, tokenize, drop stopwords, stem.

mod porter;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use porter::stem;

const BUNDLED_STOPWORDS: &str = include_str!("../../resources/stopwords_en.txt");

/// Identifier of the bundled stopword list.
pub const BUNDLED_STOPWORDS_ID: &str = "english-v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopwordList {
    words: BTreeSet<String>,
    source: String,
}

impl StopwordList {
    /// The list shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS, BUNDLED_STOPWORDS_ID)
    }

    /// One word per line; blank lines and `#` comments are skipped and
    /// entries are lowercased.
    pub fn parse(text: &str, source: impl Into<String>) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopwordList {
            words,
            source: source.into(),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text, path.display().to_string()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

impl Default for StopwordList {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Lowercase ASCII stems, in summary order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence(pub Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Space-joined tokens.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

pub fn normalize_case(text: &str) -> String {
    text.to_lowercase()
}

/// Replaces punctuation (anything neither alphabetic, numeric nor whitespace)
/// with spaces, deletes numeric characters, and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .filter(|c| !c.is_numeric())
        .map(|c| if c.is_alphabetic() || c.is_whitespace() { c } else { ' ' })
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

pub fn remove_stopwords(tokens: Vec<String>, list: &StopwordList) -> Vec<String> {
    tokens.into_iter().filter(|t| !list.contains(t)).collect()
}

/// The full summary pipeline with a fixed stopword list.
#[derive(Debug, Clone, Default)]
pub struct Preprocessor {
    stopwords: StopwordList,
}

impl Preprocessor {
    pub fn new(stopwords: StopwordList) -> Self {
        Preprocessor { stopwords }
    }

    pub fn stopwords(&self) -> &StopwordList {
        &self.stopwords
    }

    /// Lowercase, tokenize, remove stopwords, stem.
    ///
    /// Tokens with non-ASCII letters are dropped before stemming. A stem that
    /// happens to coincide with a stopword (`ones` -> `on`) is dropped too.
    pub fn preprocess(&self, text: &str) -> TokenSequence {
        let tokens = tokenize(&normalize_case(text))
            .into_iter()
            .filter(|t| t.bytes().all(|b| b.is_ascii_lowercase()))
            .collect();
        let stems = remove_stopwords(tokens, &self.stopwords)
            .iter()
            .map(|t| stem(t))
            .collect();
        TokenSequence(remove_stopwords(stems, &self.stopwords))
    }
}

/// [`Preprocessor::preprocess`] with the bundled stopword list.
pub fn preprocess(text: &str) -> TokenSequence {
    Preprocessor::default().preprocess(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lowercases() {
        assert_eq!(normalize_case("Copy XML"), "copy xml");
        assert_eq!(normalize_case(""), "");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("bug 62478!"), strings(&["bug"]));
        assert_eq!(tokenize("#document nodes"), strings(&["document", "nodes"]));
        assert!(tokenize("123 456").is_empty());
        assert_eq!(tokenize("doesn't"), strings(&["doesn", "t"]));
        assert_eq!(tokenize("v2beta"), strings(&["vbeta"]));
    }

    #[test]
    fn stopword_removal() {
        let list = StopwordList::bundled();
        let tokens = strings(&["does", "not", "find", "its", "firmware"]);
        assert_eq!(remove_stopwords(tokens, &list), strings(&["find", "firmware"]));
        assert!(remove_stopwords(vec![], &list).is_empty());
        let plain = strings(&["kernel", "module"]);
        assert_eq!(remove_stopwords(plain.clone(), &list), plain);
    }

    #[test]
    fn bundled_list_is_lowercase_words() {
        let list = StopwordList::bundled();
        assert!(list.len() > 100);
        assert_eq!(list.source(), BUNDLED_STOPWORDS_ID);
        for w in list.words() {
            assert!(!w.is_empty() && w.bytes().all(|b| b.is_ascii_lowercase()), "{w}");
        }
    }

    #[test]
    fn eclipse_summary() {
        let expected: Vec<String> = ["logical", "structures", "table", "sort", "name"]
            .iter()
            .map(|w| stem(w))
            .collect();
        assert_eq!(preprocess("logical structures table should sort on name").0, expected);
        assert_eq!(expected, strings(&["logic", "structur", "tabl", "sort", "name"]));
    }

    #[test]
    fn mozilla_summary() {
        assert_eq!(
            preprocess("Copy XML doesn't work on #document nodes").0,
            strings(&["copi", "xml", "work", "document", "node"])
        );
    }

    #[test]
    fn empty_and_repeatable() {
        assert!(preprocess("").is_empty());
        let s = "Regression in JMeter 5.0 due to fix of Bug 62478";
        assert_eq!(preprocess(s), preprocess(s));
    }

    #[test]
    fn stem_landing_on_stopword_is_dropped() {
        assert!(preprocess("ones").is_empty());
    }

    #[test]
    fn non_ascii_words_are_dropped() {
        assert_eq!(preprocess("naïve café crash").0, strings(&["crash"]));
    }

    proptest! {
        #[test]
        fn pipeline_output_invariants(s in any::<String>()) {
            let list = StopwordList::bundled();
            for t in preprocess(&s).0 {
                prop_assert!(!t.is_empty() && t.bytes().all(|b| b.is_ascii_lowercase()));
                prop_assert!(!list.contains(&t));
            }
        }

        #[test]
        fn normalize_is_idempotent(s in any::<String>()) {
            let once = normalize_case(&s);
            prop_assert_eq!(normalize_case(&once), once);
        }

        #[test]
        fn stopword_removal_is_idempotent(s in "[a-z ]{0,60}") {
            let list = StopwordList::bundled();
            let once = remove_stopwords(tokenize(&s), &list);
            prop_assert_eq!(remove_stopwords(once.clone(), &list), once);
        }

        #[test]
        fn tokens_have_no_digits_or_space(s in any::<String>()) {
            for t in tokenize(&s) {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(|c| c.is_numeric() || c.is_whitespace()));
            }
        }
    }
}
