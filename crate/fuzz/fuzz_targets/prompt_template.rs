#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench::zeroshot::{parse_label_line, PromptTemplate};

fuzz_target!(|text: &str| {
    let _ = parse_label_line(text);
    if let Ok(t) = PromptTemplate::from_text("fuzz", text, None) {
        let rendered = t.render("sample");
        assert!(rendered.contains("sample"));
    }
});
