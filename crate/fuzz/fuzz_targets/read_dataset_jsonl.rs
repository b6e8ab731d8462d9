#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench::corpus::{read_dataset_jsonl, write_dataset_jsonl, LabelSchema};

fuzz_target!(|data: &[u8]| {
    let schema = LabelSchema::new(["negative", "positive", "neutral"]).unwrap();
    if let Ok(ds) = read_dataset_jsonl(data, &schema) {
        let mut out = Vec::new();
        write_dataset_jsonl(&ds, &mut out).unwrap();
        let again = read_dataset_jsonl(out.as_slice(), &schema).expect("written dump reloads");
        assert_eq!(again.records, ds.records);
    }
});
