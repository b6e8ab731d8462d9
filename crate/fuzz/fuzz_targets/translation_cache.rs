#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench::mtclient::TranslationCache;

fuzz_target!(|data: &[u8]| {
    if let Ok(cache) = TranslationCache::read_jsonl(data) {
        let mut out = Vec::new();
        cache.write_jsonl(&mut out).unwrap();
        let again = TranslationCache::read_jsonl(out.as_slice()).expect("written cache reloads");
        assert_eq!(again.len(), cache.len());
    }
});
