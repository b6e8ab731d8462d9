#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench::corpus::{read_table, LoadOptions, MissingTextPolicy, TableFormat};

fuzz_target!(|data: &[u8]| {
    let Some((&flags, body)) = data.split_first() else {
        return;
    };
    let format = if flags & 1 == 0 {
        TableFormat::Csv
    } else {
        TableFormat::Jsonl
    };
    let mut opts = LoadOptions::new(format, "text", "label");
    if flags & 2 != 0 {
        opts.id_column = Some("id".into());
    }
    if flags & 4 != 0 {
        opts.missing_text = MissingTextPolicy::Skip;
    }
    if let Ok(ds) = read_table(body, &opts, None) {
        ds.validate().expect("loaded dataset is consistent");
    }
});
