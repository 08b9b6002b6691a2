//! Word-level vocabulary with a reserved special-token block and a
//! dedicated id for every tree-marker symbol seen at build time.
//!
//! Id layout: specials first (fixed list, ids `0..special_count()`),
//! then marker tokens sorted by surface form, then plain words ranked by
//! corpus frequency with lexicographic tie-breaking, capped at
//! `max_size`. The vocabulary file is one token per line; the line
//! number is the id.

use crate::ast::{FlatToken, TokenKind};
use crate::textio::render_token;
use std::collections::HashMap;
use thiserror::Error;

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const MASK: &str = "[MASK]";
pub const ENC: &str = "[Enc]";
pub const DEC: &str = "[Dec]";
pub const E2D: &str = "[E2D]";
pub const SEP: &str = "[SEP]";

/// Sentinel tokens `[MASK_0]..[MASK_63]` bound the number of corrupted
/// spans a single denoising example can carry.
pub const NUM_SPAN_SENTINELS: usize = 64;

pub fn span_sentinel(k: usize) -> String {
    format!("[MASK_{k}]")
}

fn special_tokens() -> Vec<String> {
    let mut specials: Vec<String> = [PAD, UNK, MASK, ENC, DEC, E2D, SEP]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for k in 0..NUM_SPAN_SENTINELS {
        specials.push(span_sentinel(k));
    }
    specials
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VocabError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("max_size {max_size} does not exceed the {specials} reserved special tokens")]
    CapacityTooSmall { max_size: usize, specials: usize },
    #[error("unknown id {0} (vocabulary size {1})")]
    UnknownId(u32, usize),
    #[error("vocabulary file is malformed: {0}")]
    MalformedFile(String),
}

/// Immutable token/id bijection. Unknown surface forms encode to the
/// `[UNK]` id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    id_to_token: Vec<String>,
    token_to_id: HashMap<String, u32>,
    specials: usize,
    markers: usize,
}

impl Vocabulary {
    /// Builds a vocabulary from a token stream. Every marker token gets a
    /// dedicated id; plain words are kept most-frequent-first up to
    /// `max_size` total entries, ties broken lexicographically.
    pub fn build<I>(stream: I, max_size: usize) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = FlatToken>,
    {
        let specials = special_tokens();
        if max_size <= specials.len() {
            return Err(VocabError::CapacityTooSmall {
                max_size,
                specials: specials.len(),
            });
        }
        let mut marker_set = std::collections::BTreeSet::new();
        let mut word_counts: HashMap<String, u64> = HashMap::new();
        let mut saw_any = false;
        for tok in stream {
            saw_any = true;
            let surface = render_token(&tok);
            match tok.kind {
                TokenKind::NontermLeft | TokenKind::NontermRight => {
                    marker_set.insert(surface);
                }
                TokenKind::Special => {
                    // Control tokens never enter frequency counting.
                }
                TokenKind::Leaf | TokenKind::Word => {
                    *word_counts.entry(surface).or_insert(0) += 1;
                }
            }
        }
        if !saw_any {
            return Err(VocabError::EmptyCorpus);
        }
        let mut id_to_token = specials.clone();
        let marker_count = marker_set.len();
        id_to_token.extend(marker_set);

        let mut words: Vec<(String, u64)> = word_counts.into_iter().collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let word_budget = max_size.saturating_sub(id_to_token.len());
        id_to_token.extend(words.into_iter().take(word_budget).map(|(w, _)| w));

        Ok(Self::from_tokens(id_to_token, specials.len(), marker_count))
    }

    fn from_tokens(id_to_token: Vec<String>, specials: usize, markers: usize) -> Self {
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            id_to_token,
            token_to_id,
            specials,
            markers,
        }
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    /// Number of reserved special tokens; ids below this are never
    /// selected for masking.
    pub fn special_count(&self) -> usize {
        self.specials
    }

    pub fn marker_count(&self) -> usize {
        self.markers
    }

    pub fn pad_id(&self) -> u32 {
        self.id_of(PAD).unwrap()
    }

    pub fn unk_id(&self) -> u32 {
        self.id_of(UNK).unwrap()
    }

    pub fn mask_id(&self) -> u32 {
        self.id_of(MASK).unwrap()
    }

    pub fn sep_id(&self) -> u32 {
        self.id_of(SEP).unwrap()
    }

    pub fn sentinel_id(&self, k: usize) -> Option<u32> {
        if k >= NUM_SPAN_SENTINELS {
            return None;
        }
        self.id_of(&span_sentinel(k))
    }

    pub fn id_of(&self, surface: &str) -> Option<u32> {
        self.token_to_id.get(surface).copied()
    }

    pub fn token_of(&self, id: u32) -> Result<&str, VocabError> {
        self.id_to_token
            .get(id as usize)
            .map(String::as_str)
            .ok_or(VocabError::UnknownId(id, self.len()))
    }

    /// Encodes surface strings; out-of-vocabulary strings map to `[UNK]`.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        let unk = self.unk_id();
        tokens
            .iter()
            .map(|t| self.id_of(t.as_ref()).unwrap_or(unk))
            .collect()
    }

    /// Encodes structured tokens via their canonical surface form.
    pub fn encode_tokens(&self, tokens: &[FlatToken]) -> Vec<u32> {
        let unk = self.unk_id();
        tokens
            .iter()
            .map(|t| self.id_of(&render_token(t)).unwrap_or(unk))
            .collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Result<Vec<String>, VocabError> {
        ids.iter()
            .map(|&id| self.token_of(id).map(str::to_string))
            .collect()
    }

    pub fn is_special(&self, id: u32) -> bool {
        (id as usize) < self.specials
    }

    /// Serializes as one token per line (line number = id).
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for tok in &self.id_to_token {
            out.push_str(tok);
            out.push('\n');
        }
        out
    }

    /// Parses the one-token-per-line format written by
    /// [`Vocabulary::to_file_string`].
    pub fn from_file_string(contents: &str) -> Result<Self, VocabError> {
        let tokens: Vec<String> = contents.lines().map(str::to_string).collect();
        let specials = special_tokens();
        if tokens.len() < specials.len() {
            return Err(VocabError::MalformedFile(
                "file shorter than the reserved special block".into(),
            ));
        }
        for (i, s) in specials.iter().enumerate() {
            if &tokens[i] != s {
                return Err(VocabError::MalformedFile(format!(
                    "expected special {s:?} at line {} but found {:?}",
                    i + 1,
                    tokens[i]
                )));
            }
        }
        let markers = tokens[specials.len()..]
            .iter()
            .take_while(|t| t.starts_with('<') && (t.ends_with(",left>") || t.ends_with(",right>")))
            .count();
        let mut seen = std::collections::HashSet::new();
        for t in &tokens {
            if !seen.insert(t) {
                return Err(VocabError::MalformedFile(format!("duplicate token {t:?}")));
            }
        }
        Ok(Self::from_tokens(tokens, specials.len(), markers))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::FlatToken;

    fn words(ws: &[&str]) -> Vec<FlatToken> {
        ws.iter().map(|w| FlatToken::word(*w)).collect()
    }

    #[test]
    fn keeps_everything_under_capacity() {
        let s = special_tokens().len();
        let v = Vocabulary::build(words(&["a", "a", "b"]), s + 2).unwrap();
        assert!(v.id_of("a").is_some());
        assert!(v.id_of("b").is_some());
        assert_eq!(v.len(), s + 2);
    }

    #[test]
    fn frequency_cutoff_drops_rare_words() {
        let s = special_tokens().len();
        let v = Vocabulary::build(words(&["a", "a", "a", "b", "b", "c"]), s + 2).unwrap();
        assert!(v.id_of("a").is_some());
        assert!(v.id_of("b").is_some());
        assert!(v.id_of("c").is_none());
    }

    #[test]
    fn ties_break_lexicographically() {
        let s = special_tokens().len();
        let v = Vocabulary::build(words(&["zed", "ant", "mid"]), s + 2).unwrap();
        assert!(v.id_of("ant").is_some());
        assert!(v.id_of("mid").is_some());
        assert!(v.id_of("zed").is_none());
    }

    #[test]
    fn empty_corpus_rejected() {
        assert_eq!(
            Vocabulary::build(Vec::new(), 1000).unwrap_err(),
            VocabError::EmptyCorpus
        );
    }

    #[test]
    fn capacity_must_exceed_specials() {
        let s = special_tokens().len();
        assert!(matches!(
            Vocabulary::build(words(&["a"]), s),
            Err(VocabError::CapacityTooSmall { .. })
        ));
    }

    #[test]
    fn markers_always_have_ids() {
        let s = special_tokens().len();
        let mut stream = words(&["w"]);
        stream.push(FlatToken::left("parameters"));
        stream.push(FlatToken::right("parameters"));
        // Capacity so tight no word survives, markers still get ids.
        let v = Vocabulary::build(stream, s + 2).unwrap();
        assert!(v.id_of("<parameters,left>").is_some());
        assert!(v.id_of("<parameters,right>").is_some());
        assert!(v.id_of("w").is_none());
        assert_eq!(v.marker_count(), 2);
    }

    #[test]
    fn encode_decode_roundtrip_and_oov() {
        let v = Vocabulary::build(words(&["a", "b", "c"]), 1000).unwrap();
        assert_eq!(v.encode::<&str>(&[]), Vec::<u32>::new());
        let ids = v.encode(&["a", "b", "c"]);
        assert_eq!(v.decode(&ids).unwrap(), vec!["a", "b", "c"]);
        assert_eq!(v.encode(&["nope"]), vec![v.unk_id()]);
        assert!(matches!(
            v.decode(&[v.len() as u32]),
            Err(VocabError::UnknownId(..))
        ));
    }

    #[test]
    fn roundtrip_many_random_lines() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let alphabet = ["fee", "fi", "fo", "fum", "x", "y1", "sum", "loop"];
        let mut corpus = Vec::new();
        let mut lines = Vec::new();
        for _ in 0..1000 {
            let len = rng.gen_range(1..12);
            let line: Vec<&str> = (0..len)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
                .collect();
            corpus.extend(line.iter().map(|w| FlatToken::word(*w)));
            lines.push(line);
        }
        let v = Vocabulary::build(corpus, 4096).unwrap();
        for line in lines {
            let ids = v.encode(&line);
            assert_eq!(v.decode(&ids).unwrap(), line);
        }
    }

    #[test]
    fn file_roundtrip_preserves_layout() {
        let mut stream = words(&["beta", "alpha", "alpha"]);
        stream.push(FlatToken::left("call"));
        stream.push(FlatToken::right("call"));
        let v = Vocabulary::build(stream, 500).unwrap();
        let text = v.to_file_string();
        let loaded = Vocabulary::from_file_string(&text).unwrap();
        assert_eq!(loaded, v);
        // Specials occupy the first lines in declaration order.
        assert_eq!(text.lines().next().unwrap(), PAD);
        assert_eq!(v.pad_id(), 0);
        assert!(v.is_special(v.sep_id()));
        assert!(!v.is_special(v.id_of("alpha").unwrap()));
    }

    #[test]
    fn sentinels_are_reserved() {
        let v = Vocabulary::build(words(&["a"]), 500).unwrap();
        assert!(v.sentinel_id(0).is_some());
        assert!(v.sentinel_id(63).is_some());
        assert!(v.sentinel_id(64).is_none());
        assert!(v.is_special(v.sentinel_id(63).unwrap()));
    }
}
