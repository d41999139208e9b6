#![no_main]

use libfuzzer_sys::fuzz_target;
use osp_thermo::rational::{parse, to_f64, to_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(q) = parse(text) {
        assert_eq!(parse(&to_string(&q)).unwrap(), q);
        let _ = to_f64(&q);
    }
});
