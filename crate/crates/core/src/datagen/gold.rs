use super::{sample_parameters, ParametricBn, RngSeed};
use crate::error::{Error, Result};
use crate::graph::{Dag, NodeSet, VariableSpec};
use crate::oracle::{condition_and_marginalize, joint_from_bn, JointTable};

/// Role a variable plays in a generative model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Observed,
    Hidden,
    /// Only records with the variable in this state are kept.
    Selection(u8),
}

/// A generative model over observed, hidden and selection variables,
/// optionally with parameters attached.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldStandard {
    spec: VariableSpec,
    structure: Dag,
    roles: Vec<Role>,
    cpts: Option<Vec<Vec<f64>>>,
}

impl GoldStandard {
    pub fn new(
        spec: VariableSpec,
        structure: Dag,
        roles: Vec<Role>,
        cpts: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if structure.n() != spec.len() || roles.len() != spec.len() {
            return Err(Error::Spec(
                "structure, spec and roles disagree in size".into(),
            ));
        }
        for (v, role) in roles.iter().enumerate() {
            if let Role::Selection(s) = *role {
                if s as usize >= spec.card(v) {
                    return Err(Error::Spec(format!(
                        "selection value {s} out of range for {}",
                        spec.name(v)
                    )));
                }
            }
        }
        let gold = GoldStandard {
            spec,
            structure,
            roles,
            cpts,
        };
        if gold.cpts.is_some() {
            gold.bn()?;
        }
        Ok(gold)
    }

    /// A fully observed model.
    pub fn observed_only(bn: &ParametricBn) -> Self {
        GoldStandard {
            spec: bn.spec().clone(),
            structure: bn.structure().clone(),
            roles: vec![Role::Observed; bn.spec().len()],
            cpts: Some(bn.cpts().to_vec()),
        }
    }

    pub fn spec(&self) -> &VariableSpec {
        &self.spec
    }

    pub fn structure(&self) -> &Dag {
        &self.structure
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn cpts(&self) -> Option<&[Vec<f64>]> {
        self.cpts.as_deref()
    }

    pub fn has_parameters(&self) -> bool {
        self.cpts.is_some()
    }

    fn with_role(&self, pred: impl Fn(Role) -> bool) -> NodeSet {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, &r)| pred(r))
            .map(|(v, _)| v)
            .collect()
    }

    pub fn observed(&self) -> NodeSet {
        self.with_role(|r| r == Role::Observed)
    }

    pub fn hidden(&self) -> NodeSet {
        self.with_role(|r| r == Role::Hidden)
    }

    pub fn selection(&self) -> NodeSet {
        self.with_role(|r| matches!(r, Role::Selection(_)))
    }

    /// `(variable, required state)` for every selection variable.
    pub fn selection_values(&self) -> Vec<(usize, u8)> {
        self.roles
            .iter()
            .enumerate()
            .filter_map(|(v, r)| match r {
                Role::Selection(s) => Some((v, *s)),
                _ => None,
            })
            .collect()
    }

    pub fn observed_spec(&self) -> VariableSpec {
        self.spec.restrict(self.observed())
    }

    /// Copy with CPTs drawn by the shifted-Dirichlet sampler.
    pub fn with_parameters(&self, ess: f64, seed: RngSeed) -> Result<GoldStandard> {
        let bn = sample_parameters(&self.structure, &self.spec, ess, seed)?;
        Ok(GoldStandard {
            cpts: Some(bn.cpts().to_vec()),
            ..self.clone()
        })
    }

    pub fn bn(&self) -> Result<ParametricBn> {
        let cpts = self
            .cpts
            .clone()
            .ok_or_else(|| Error::Config("model has no parameters".into()))?;
        ParametricBn::with_tolerance(self.structure.clone(), self.spec.clone(), cpts, 1e-9)
    }

    /// Exact distribution of the observed variables given the selection event.
    pub fn exact_margin(&self) -> Result<JointTable> {
        let joint = joint_from_bn(&self.bn()?)?;
        let drop = self.hidden().union(self.selection());
        condition_and_marginalize(&joint, &self.selection_values(), drop)
    }
}

/// Hidden common cause of two colliders:
/// `X1 -> X2 <- H -> X3 <- X4`, `X2` ternary, everything else binary.
pub fn gold_w() -> GoldStandard {
    let spec = VariableSpec::new(
        ["X1", "X2", "X3", "X4", "H"].map(String::from).to_vec(),
        vec![2, 3, 2, 2, 2],
    )
    .expect("valid spec");
    let structure = Dag::from_edges(5, &[(0, 1), (4, 1), (4, 2), (3, 2)]).expect("acyclic");
    let roles = vec![
        Role::Observed,
        Role::Observed,
        Role::Observed,
        Role::Observed,
        Role::Hidden,
    ];
    GoldStandard::new(spec, structure, roles, None).expect("valid gold standard")
}

/// Chain `X1 -> X2 -> X3 -> X4` whose ends both feed a selection variable
/// `S` kept at state 1; `X1` has four states, everything else is binary.
pub fn gold_four_cycle() -> GoldStandard {
    let spec = VariableSpec::new(
        ["X1", "X2", "X3", "X4", "S"].map(String::from).to_vec(),
        vec![4, 2, 2, 2, 2],
    )
    .expect("valid spec");
    let structure = Dag::from_edges(5, &[(0, 1), (1, 2), (2, 3), (0, 4), (3, 4)]).expect("acyclic");
    let roles = vec![
        Role::Observed,
        Role::Observed,
        Role::Observed,
        Role::Observed,
        Role::Selection(1),
    ];
    GoldStandard::new(spec, structure, roles, None).expect("valid gold standard")
}
