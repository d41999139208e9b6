#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;
use osp_thermo_cli::{resolve, Cli};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("osp-thermo").chain(text.split_whitespace());
    if let Ok(mut cli) = Cli::try_parse_from(args) {
        // no file system access
        cli.opts.config = None;
        let _ = resolve(&cli);
    }
});
