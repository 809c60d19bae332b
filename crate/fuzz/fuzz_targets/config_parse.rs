#![no_main]

use lab_cli::config::{apply_override, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

// First line: `;`-separated overrides. Rest: TOML body.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (head, body) = text.split_once('\n').unwrap_or((text, ""));
    let overrides: Vec<String> = head.split(';').filter(|s| !s.is_empty()).map(String::from).collect();

    let mut table = toml::Table::new();
    for o in &overrides {
        let _ = apply_override(&mut table, o);
    }

    if let Ok(cfg) = ExperimentConfig::from_toml_with(body, &overrides) {
        // anything accepted must survive a write/parse cycle and hash consistently
        let again = ExperimentConfig::from_toml_with(&cfg.to_toml(), &[]).expect("re-parse of own output");
        assert_eq!(cfg.hash(), again.hash());
    }
});
