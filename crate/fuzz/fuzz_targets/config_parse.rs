#![no_main]

use libfuzzer_sys::fuzz_target;
use osp_thermo_cli::config::{apply_config_text, parse_config_text, Command, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pairs) = parse_config_text(text) {
        let mut cfg = RunConfig::new(Command::Solve);
        for (k, v) in &pairs {
            let _ = cfg.apply(k, v);
        }
        let _ = cfg.validate();
    }
    let mut cfg = RunConfig::new(Command::Sweep);
    if apply_config_text(&mut cfg, text).is_ok() {
        let _ = cfg.validate();
    }
});
