#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench::corpus::clean_social_text;

fuzz_target!(|text: &str| {
    let cleaned = clean_social_text(text);
    assert!(cleaned.len() <= text.len());
    assert_eq!(clean_social_text(&cleaned), cleaned);
});
