#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbench_cli::config::ExperimentConfig;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let _ = cfg.validate();
        let _ = cfg.train_config();
    }
});
