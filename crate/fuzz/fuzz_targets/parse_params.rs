#![no_main]

use leftcorner::grammar::text::read_wcfg;
use leftcorner::{Boolean, Grammar};
use leftcorner_cli::params::ParamsFile;
use libfuzzer_sys::fuzz_target;

const GRAMMAR: &str = "start: S\nS -> NP VP\nNP -> NP PP\nNP -> 'n'\nPP -> 'p' NP\nVP -> 'v'\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = ParamsFile::parse(text) {
        assert_eq!(ParamsFile::parse(&file.to_json()).unwrap(), file);
        let g: Grammar<Boolean> = read_wcfg(GRAMMAR).unwrap();
        if let Ok(params) = file.resolve(&g) {
            assert!(params.p().iter().all(|&i| i < g.rule_count()));
        }
    }
});
