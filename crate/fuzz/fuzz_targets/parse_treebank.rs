#![no_main]

use leftcorner::ingest::{extract_grammar, parse_treebank, ExtractOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tb) = parse_treebank(text) {
        let written: String = tb.trees.iter().map(|t| format!("{t}\n")).collect();
        let back = parse_treebank(&written).expect("written treebank re-parses");
        assert_eq!(back, tb);
        let _ = extract_grammar(&tb, &ExtractOptions::stripping());
    }
});
