//! JSON parameter files: `{"rules": [0, 2], "symbols": ["NP"], "id": 1}`.
//!
//! `rules` are indices into the grammar file's rule order, `symbols` use the
//! `.wcfg` symbol syntax, and `id` fixes the transform id of new symbols.

use leftcorner::grammar::text::{parse_symbol, symbol_to_string, transform_ids};
use leftcorner::transform::TransformParams;
use leftcorner::{Error, Grammar, Result, Semiring, TransformId};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default)]
    pub rules: Vec<usize>,
    #[serde(default)]
    pub symbols: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u32>,
}

impl ParamsFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("params serialize");
        s.push('\n');
        s
    }

    pub fn from_params(params: &TransformParams) -> Self {
        ParamsFile {
            rules: params.p().iter().copied().collect(),
            symbols: params.x().iter().map(|s| symbol_to_string(s, true)).collect(),
            id: Some(params.id().0),
        }
    }

    /// Resolve against `g`: indices must be in range and symbols must occur
    /// in `g`. The id must not already occur in `g`.
    pub fn resolve<W: Semiring>(&self, g: &Grammar<W>) -> Result<TransformParams> {
        let ids = transform_ids(g);
        let default_id = ids.first().copied().unwrap_or(TransformId(0));
        let x = self
            .symbols
            .iter()
            .map(|s| parse_symbol(s, default_id))
            .collect::<Result<Vec<_>>>()?;
        match self.id {
            None => TransformParams::new(g, self.rules.iter().copied(), x),
            Some(id) if ids.contains(&TransformId(id)) => Err(Error::InvalidParams(format!(
                "transform id {id} already occurs in the grammar"
            ))),
            Some(id) => TransformParams::with_id(g, self.rules.iter().copied(), x, TransformId(id)),
        }
    }
}
