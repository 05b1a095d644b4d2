//! JSON model files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "variables": [
//!     {"name": "X1", "cardinality": 4, "role": "observed"},
//!     {"name": "S", "cardinality": 2, "role": "selection", "selection_value": 1}
//!   ],
//!   "edges": [["X1", "S"]],
//!   "cpts": [[0.1, 0.2, 0.3, 0.4], [0.5, 0.5, 0.9, 0.1, ...]]
//! }
//! ```
//!
//! `cpts` is optional; when present it lists one row-major table per
//! variable, in variable order.

use serde::{Deserialize, Serialize};

use super::{GoldStandard, Role};
use crate::error::{Error, Result};
use crate::graph::{Dag, VariableSpec};

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    variables: Vec<ModelVariable>,
    edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cpts: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelVariable {
    name: String,
    cardinality: usize,
    role: RoleName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selection_value: Option<u8>,
}

#[derive(Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RoleName {
    Observed,
    Hidden,
    Selection,
}

pub fn parse_model(text: &str) -> Result<GoldStandard> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.version != MODEL_VERSION {
        return Err(Error::Spec(format!(
            "unsupported model version {}",
            file.version
        )));
    }
    let mut names = Vec::with_capacity(file.variables.len());
    let mut cards = Vec::with_capacity(file.variables.len());
    let mut roles = Vec::with_capacity(file.variables.len());
    for var in file.variables {
        let role = match (var.role, var.selection_value) {
            (RoleName::Observed, None) => Role::Observed,
            (RoleName::Hidden, None) => Role::Hidden,
            (RoleName::Selection, Some(s)) => Role::Selection(s),
            (RoleName::Selection, None) => {
                return Err(Error::Spec(format!(
                    "selection variable {} lacks a value",
                    var.name
                )))
            }
            (_, Some(_)) => {
                return Err(Error::Spec(format!(
                    "selection_value given for non-selection variable {}",
                    var.name
                )))
            }
        };
        names.push(var.name);
        cards.push(var.cardinality);
        roles.push(role);
    }
    let spec = VariableSpec::new(names, cards)?;
    let mut edges = Vec::with_capacity(file.edges.len());
    for (from, to) in &file.edges {
        let lookup = |name: &str| {
            spec.index_of(name)
                .ok_or_else(|| Error::Spec(format!("edge mentions unknown variable {name:?}")))
        };
        edges.push((lookup(from)?, lookup(to)?));
    }
    let mut pairs: Vec<_> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    pairs.sort_unstable();
    if pairs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Structure("edge listed twice".into()));
    }
    let structure = Dag::from_edges(spec.len(), &edges)?;
    GoldStandard::new(spec, structure, roles, file.cpts)
}

pub fn write_model(gold: &GoldStandard) -> String {
    let spec = gold.spec();
    let file = ModelFile {
        version: MODEL_VERSION,
        variables: (0..spec.len())
            .map(|v| {
                let (role, selection_value) = match gold.roles()[v] {
                    Role::Observed => (RoleName::Observed, None),
                    Role::Hidden => (RoleName::Hidden, None),
                    Role::Selection(s) => (RoleName::Selection, Some(s)),
                };
                ModelVariable {
                    name: spec.name(v).to_owned(),
                    cardinality: spec.card(v),
                    role,
                    selection_value,
                }
            })
            .collect(),
        edges: gold
            .structure()
            .edges()
            .into_iter()
            .map(|(u, v)| (spec.name(u).to_owned(), spec.name(v).to_owned()))
            .collect(),
        cpts: gold.cpts().map(<[_]>::to_vec),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}
