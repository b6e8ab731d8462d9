use crate::corpus::LabelId;

fn strip_quotes(s: &str) -> &str {
    const PAIRS: [(char, char); 4] = [('\'', '\''), ('"', '"'), ('‘', '’'), ('“', '”')];
    for (open, close) in PAIRS {
        if let Some(inner) = s.strip_prefix(open).and_then(|r| r.strip_suffix(close)) {
            return inner.trim();
        }
    }
    s
}

/// Canonical form used to compare model output with label surface forms:
/// trimmed, surrounding quotes and one trailing period removed, lowercased.
pub fn normalize_output(raw: &str) -> String {
    let s = strip_quotes(raw.trim());
    let s = s.strip_suffix('.').unwrap_or(s).trim_end();
    strip_quotes(s).to_lowercase()
}

/// Label id whose surface form equals `raw` after normalization.
pub fn match_label(raw: &str, surface_forms: &[String]) -> Option<LabelId> {
    let out = normalize_output(raw);
    surface_forms.iter().position(|f| normalize_output(f) == out)
}
