#![no_main]

use leftcorner::grammar::text::{read_wcfg, write_wcfg};
use leftcorner::{Grammar, Real};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = read_wcfg::<Real>(text) {
        let written = write_wcfg(&g);
        let back: Grammar<Real> = read_wcfg(&written).expect("written grammar re-parses");
        assert_eq!(write_wcfg(&back), written);
    }
});
