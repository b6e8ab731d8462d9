#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench::ablation::LearningCurve;
use tcbench::report::RunRecord;

fuzz_target!(|data: &[u8]| {
    if let Ok(rec) = serde_json::from_slice::<RunRecord>(data) {
        let bytes = serde_json::to_vec(&rec).unwrap();
        let _: RunRecord = serde_json::from_slice(&bytes).expect("serialized record reloads");
    }
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = LearningCurve::from_json(text);
    }
});
