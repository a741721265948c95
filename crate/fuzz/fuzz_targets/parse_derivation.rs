#![no_main]

use leftcorner::grammar::text::{derivation_to_string, read_derivation, read_wcfg};
use leftcorner::transform::{glct, TransformParams};
use leftcorner::{Boolean, Grammar, Symbol};
use libfuzzer_sys::fuzz_target;

const GRAMMAR: &str = r"start: S
S -> NP VP
NP -> PossP NN
PossP -> NP '\'s'
NP -> 'my-sister'
NN -> 'diploma'
VP -> 'arrived'
";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let g: Grammar<Boolean> = read_wcfg(GRAMMAR).unwrap();
    let params = TransformParams::new(&g, [0, 1, 2], [Symbol::nt("NP")]).unwrap();
    let lc = glct(&g, &params).unwrap();
    for grammar in [&g, &lc] {
        if let Ok(t) = read_derivation(text, grammar) {
            let written = derivation_to_string(&t, false);
            let back = read_derivation(&written, grammar).expect("written derivation re-parses");
            assert_eq!(back, t);
        }
    }
});
