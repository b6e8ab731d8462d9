use std::collections::HashMap;

pub const UNK: &str = "[UNK]";

/// Lowercase and split on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Token table; id 0 is reserved for unknown tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Ids are assigned by descending frequency, ties broken alphabetically.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, max_size: usize) -> Self {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for t in texts {
            for tok in tokenize(t) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        let mut by_freq: Vec<(String, usize)> = counts.into_iter().collect();
        by_freq.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        by_freq.truncate(max_size.saturating_sub(1));
        Self::from_tokens(
            std::iter::once(UNK.to_owned())
                .chain(by_freq.into_iter().map(|(t, _)| t))
                .collect(),
        )
    }

    pub(crate) fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Token ids of `text`, keeping only the first `max_len`.
    pub fn encode(&self, text: &str, max_len: usize) -> Vec<u32> {
        tokenize(text)
            .into_iter()
            .take(max_len)
            .map(|t| self.index.get(&t).copied().unwrap_or(0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_examples() {
        assert_eq!(
            tokenize("Hello, WORLD! it's 2024"),
            ["hello", "world", "it", "s", "2024"]
        );
        assert_eq!(tokenize("Größe–Über"), ["größe", "über"]);
        assert!(tokenize("  ...  ").is_empty());
    }

    #[test]
    fn ordering_and_truncation() {
        let v = Vocab::build(["b a a", "c b a"], 100);
        assert_eq!(v.tokens(), [UNK, "a", "b", "c"]);
        assert_eq!(v.encode("a zzz c", 10), [1, 0, 3]);
        assert_eq!(v.encode("a b c a b c", 2), [1, 2]);
        let v = Vocab::build(["b a a", "c b a"], 3);
        assert_eq!(v.tokens(), [UNK, "a", "b"]);
    }
}
