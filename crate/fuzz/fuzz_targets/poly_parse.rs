#![no_main]

use libfuzzer_sys::fuzz_target;
use mfkit::exactalg::{poly_parse, Ring};

// First byte picks the cyclotomic order, the rest is the expression.
fuzz_target!(|data: &[u8]| {
    let Some((&k, rest)) = data.split_first() else {
        return;
    };
    if let Ok(s) = std::str::from_utf8(rest) {
        let ring = Ring::new(&["x", "y", "z", "u", "v"]);
        let order = u32::from(k % 13);
        if let Ok(p) = poly_parse(s, &ring, order) {
            let again = poly_parse(&p.to_string(), &ring, order).expect("printed form parses");
            assert_eq!(again, p);
        }
    }
});
