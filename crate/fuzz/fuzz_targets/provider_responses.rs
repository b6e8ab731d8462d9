#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench::mtclient::parse_deepl_response;
use tcbench::zeroshot::{parse_anthropic_response, parse_nli_response, parse_openai_response};

fuzz_target!(|body: &str| {
    let _ = parse_openai_response(body);
    let _ = parse_anthropic_response(body);
    let _ = parse_deepl_response(body);
    let hyps = vec!["Negative Sentiment".to_string(), "Positive Sentiment".to_string()];
    if let Ok(scores) = parse_nli_response(body, &hyps) {
        assert_eq!(scores.len(), hyps.len());
    }
});
