#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench::zeroshot::{match_label, normalize_output};

fuzz_target!(|raw: &str| {
    let forms = vec!["Negative Sentiment".to_string(), "Positive Sentiment".to_string()];
    if let Some(id) = match_label(raw, &forms) {
        assert_eq!(normalize_output(raw), normalize_output(&forms[id]));
    }
});
