use super::Dataset;

fn is_retweet_marker(token: &str) -> bool {
    token == "RT" || token == "RT:"
}

fn is_url(token: &str) -> bool {
    token.starts_with("http://") || token.starts_with("https://") || token.starts_with("www.")
}

/// `@name` with optional trailing punctuation such as `@name:`.
fn is_handle(token: &str) -> bool {
    let Some(rest) = token.strip_prefix('@') else {
        return false;
    };
    let name_len = rest
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(rest.len());
    name_len > 0 && rest[name_len..].chars().all(|c| c.is_ascii_punctuation())
}

/// Strip retweet markers, URLs and @-handles from social media text, then
/// collapse whitespace.
///
/// Rules are applied token-wise (whitespace-delimited) in a fixed order:
/// `RT` markers, then URLs, then handles. Removing a token never creates a new
/// one, so the function is idempotent.
pub fn clean_social_text(text: &str) -> String {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let tokens = tokens.into_iter().filter(|t| !is_retweet_marker(t));
    let tokens = tokens.filter(|t| !is_url(t));
    let tokens = tokens.filter(|t| !is_handle(t));
    tokens.collect::<Vec<_>>().join(" ")
}

/// Apply `clean` to every text and drop records left empty.
///
/// Returns the cleaned dataset and the number of dropped records.
pub fn clean_dataset(ds: &Dataset, clean: impl Fn(&str) -> String) -> (Dataset, usize) {
    let mut dropped = 0;
    let records = ds
        .records
        .iter()
        .filter_map(|r| {
            let text = clean(&r.text);
            if text.trim().is_empty() {
                dropped += 1;
                None
            } else {
                let mut r = r.clone();
                r.text = text;
                Some(r)
            }
        })
        .collect();
    if dropped > 0 {
        log::info!("dropped {dropped} record(s) with empty text after cleaning");
    }
    (ds.with_records(records), dropped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelSchema, TextRecord};
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        assert_eq!(
            clean_social_text("RT @user Check https://t.co/x great!"),
            "Check great!"
        );
        assert_eq!(clean_social_text("no handles here"), "no handles here");
        assert_eq!(clean_social_text("@a @b hello"), "hello");
    }

    #[test]
    fn edge_cases() {
        assert_eq!(
            clean_social_text("RT @someone: Confirm him  now\n\twww.example.org"),
            "Confirm him now"
        );
        assert_eq!(clean_social_text("RT"), "");
        assert_eq!(clean_social_text("email me a@b.com"), "email me a@b.com");
        assert_eq!(clean_social_text("@ alone"), "@ alone");
        assert_eq!(clean_social_text("ART and RTs stay"), "ART and RTs stay");
        assert_eq!(clean_social_text("RT @a RT @b text"), "text");
    }

    #[test]
    fn empty_texts_dropped() {
        let schema = LabelSchema::new(["0", "1"]).unwrap();
        let ds = Dataset::new(
            schema,
            vec![
                TextRecord::new("1", "RT @x https://t.co/a", Some(0)),
                TextRecord::new("2", "RT @x keep me", Some(1)),
            ],
            "",
        )
        .unwrap();
        let (out, dropped) = clean_dataset(&ds, clean_social_text);
        assert_eq!(dropped, 1);
        assert_eq!(out.records[0].text, "keep me");
        assert_eq!(out.records[0].record_id, "2");
    }

    proptest! {
        #[test]
        fn idempotent(s in "(RT|RT:|@[a-z_]{0,4}:?|https?://[a-z./]{0,6}|www\\.[a-z]{1,3}|[a-zA-Z!?.,]{1,6}|[ \t\n]{1,3}){0,12}") {
            let once = clean_social_text(&s);
            prop_assert_eq!(clean_social_text(&once), once.clone());
            prop_assert!(!once.contains("  "));
            prop_assert_eq!(once.trim(), once.as_str());
        }

        #[test]
        fn idempotent_arbitrary(s in any::<String>()) {
            let once = clean_social_text(&s);
            prop_assert_eq!(clean_social_text(&once), once);
        }
    }
}
