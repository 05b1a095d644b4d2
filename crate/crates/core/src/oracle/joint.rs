use std::io::Write;

use crate::datagen::ParametricBn;
use crate::error::{Error, Result};
use crate::graph::{NodeSet, SeparationTable, VariableSpec};

/// Largest joint table the oracle will materialise.
pub const MAX_CELLS: usize = 10_000_000;

/// Default absolute tolerance on the factorization residual in [`ci_holds`].
pub const CI_TOL: f64 = 1e-10;

/// Exact joint distribution over a small set of categorical variables.
///
/// Cells are indexed mixed-radix with variable 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    spec: VariableSpec,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(spec: VariableSpec, probs: Vec<f64>) -> Result<Self> {
        let cells = checked_cells(spec.cards())?;
        if probs.len() != cells {
            return Err(Error::Spec(format!(
                "joint table has {} cells, expected {cells}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::Spec("joint table has invalid entries".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Spec(format!("joint table sums to {total}")));
        }
        Ok(JointTable { spec, probs })
    }

    pub fn spec(&self) -> &VariableSpec {
        &self.spec
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n(&self) -> usize {
        self.spec.len()
    }

    /// Probability of a full assignment.
    pub fn prob(&self, states: &[u8]) -> f64 {
        let idx = states
            .iter()
            .zip(self.spec.cards())
            .fold(0, |i, (&s, &c)| i * c + s as usize);
        self.probs[idx]
    }

    /// Marginal over `vars` in the given order (first most significant).
    pub fn marginal_ordered(&self, vars: &[usize]) -> Vec<f64> {
        let cards = self.spec.cards();
        let size: usize = vars.iter().map(|&v| cards[v]).product();
        let mut out = vec![0.0; size];
        let n = self.n();
        let mut states = vec![0usize; n];
        for &p in &self.probs {
            let idx = vars.iter().fold(0, |i, &v| i * cards[v] + states[v]);
            out[idx] += p;
            // Increment the mixed-radix counter, last variable fastest.
            for v in (0..n).rev() {
                states[v] += 1;
                if states[v] < cards[v] {
                    break;
                }
                states[v] = 0;
            }
        }
        out
    }

    /// Marginal over `vars` in ascending index order.
    pub fn marginal(&self, vars: NodeSet) -> Vec<f64> {
        self.marginal_ordered(&vars.iter().collect::<Vec<_>>())
    }

    /// Singleton independence statements `x ⫫ y | z` that hold in the table.
    pub fn independencies(&self, tol: f64) -> SeparationTable {
        SeparationTable::build(self.n(), |x, y, z| {
            ci_holds_unchecked(self, NodeSet::singleton(x), NodeSet::singleton(y), z, tol)
        })
    }

    /// CSV dump: one row per full state, probability last.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.spec.names().to_vec();
        header.push("probability".into());
        w.write_record(&header)?;
        let n = self.n();
        let cards = self.spec.cards();
        let mut states = vec![0usize; n];
        for &p in &self.probs {
            let mut rec: Vec<String> = states.iter().map(|s| s.to_string()).collect();
            rec.push(p.to_string());
            w.write_record(&rec)?;
            for v in (0..n).rev() {
                states[v] += 1;
                if states[v] < cards[v] {
                    break;
                }
                states[v] = 0;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn checked_cells(cards: &[usize]) -> Result<usize> {
    let mut cells: usize = 1;
    for &c in cards {
        cells = cells
            .checked_mul(c)
            .filter(|&x| x <= MAX_CELLS)
            .ok_or_else(|| {
                Error::TooLarge(format!("joint state space exceeds {MAX_CELLS} cells"))
            })?;
    }
    Ok(cells)
}

/// Product of the CPTs over every full assignment.
pub fn joint_from_bn(bn: &ParametricBn) -> Result<JointTable> {
    let spec = bn.spec();
    let cells = checked_cells(spec.cards())?;
    let n = spec.len();
    let cards = spec.cards();
    let mut probs = Vec::with_capacity(cells);
    let mut states = vec![0u8; n];
    for _ in 0..cells {
        let mut p = 1.0;
        for v in 0..n {
            p *= bn.prob(v, bn.parent_config(v, &states), states[v] as usize);
        }
        probs.push(p);
        for v in (0..n).rev() {
            states[v] += 1;
            if (states[v] as usize) < cards[v] {
                break;
            }
            states[v] = 0;
        }
    }
    Ok(JointTable {
        spec: spec.clone(),
        probs,
    })
}

/// Conditions on `fix` and sums out `drop`, renormalising.
pub fn condition_and_marginalize(
    p: &JointTable,
    fix: &[(usize, u8)],
    drop: NodeSet,
) -> Result<JointTable> {
    let n = p.n();
    for &(v, s) in fix {
        if v >= n {
            return Err(Error::NodeOutOfRange { index: v, n });
        }
        if s as usize >= p.spec.card(v) {
            return Err(Error::Query(format!(
                "state {s} out of range for {}",
                p.spec.name(v)
            )));
        }
    }
    if !drop.is_subset(NodeSet::full(n)) {
        return Err(Error::Query("drop set out of range".into()));
    }
    let keep = NodeSet::full(n).difference(drop);
    let keep_list: Vec<usize> = keep.iter().collect();
    let cards = p.spec.cards();
    let size: usize = keep_list.iter().map(|&v| cards[v]).product();
    let mut out = vec![0.0; size];
    let mut states = vec![0usize; n];
    for &prob in &p.probs {
        if fix.iter().all(|&(v, s)| states[v] == s as usize) {
            let idx = keep_list.iter().fold(0, |i, &v| i * cards[v] + states[v]);
            out[idx] += prob;
        }
        for v in (0..n).rev() {
            states[v] += 1;
            if states[v] < cards[v] {
                break;
            }
            states[v] = 0;
        }
    }
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    for x in &mut out {
        *x /= total;
    }
    Ok(JointTable {
        spec: p.spec.restrict(keep),
        probs: out,
    })
}

/// Whether `x ⫫ y | z`: the largest `|p(x,y|z) − p(x|z)p(y|z)|` over all
/// states is within `tol`, ignoring configurations of `z` with zero mass.
pub fn ci_holds(p: &JointTable, x: NodeSet, y: NodeSet, z: NodeSet, tol: f64) -> Result<bool> {
    let all = NodeSet::full(p.n());
    if x.is_empty() || y.is_empty() {
        return Err(Error::Query("independence sets must be non-empty".into()));
    }
    if !x.union(y).union(z).is_subset(all) {
        return Err(Error::Query("variable out of range".into()));
    }
    if !x.is_disjoint(y) || !x.is_disjoint(z) || !y.is_disjoint(z) {
        return Err(Error::Query("sets must be pairwise disjoint".into()));
    }
    Ok(ci_holds_unchecked(p, x, y, z, tol))
}

pub(crate) fn ci_holds_unchecked(
    p: &JointTable,
    x: NodeSet,
    y: NodeSet,
    z: NodeSet,
    tol: f64,
) -> bool {
    let order: Vec<usize> = z.iter().chain(x.iter()).chain(y.iter()).collect();
    let table = p.marginal_ordered(&order);
    let rx = p.spec.configurations(x);
    let ry = p.spec.configurations(y);
    for block in table.chunks(rx * ry) {
        let pz: f64 = block.iter().sum();
        if pz <= 0.0 {
            continue;
        }
        let px: Vec<f64> = block
            .chunks(ry)
            .map(|r| r.iter().sum::<f64>() / pz)
            .collect();
        let py: Vec<f64> = (0..ry)
            .map(|b| (0..rx).map(|a| block[a * ry + b]).sum::<f64>() / pz)
            .collect();
        for a in 0..rx {
            for b in 0..ry {
                if (block[a * ry + b] / pz - px[a] * py[b]).abs() > tol {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;

    fn xor() -> JointTable {
        // X, Y fair coins, W = X xor Y.
        let spec =
            VariableSpec::new(vec!["X".into(), "Y".into(), "W".into()], vec![2, 2, 2]).unwrap();
        let mut probs = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                probs[(x * 2 + y) * 2 + (x ^ y)] = 0.25;
            }
        }
        JointTable::new(spec, probs).unwrap()
    }

    #[test]
    fn joint_of_single_and_independent_variables() {
        let bn = ParametricBn::new(
            Dag::empty(1),
            VariableSpec::numbered(&[2]),
            vec![vec![0.3, 0.7]],
        )
        .unwrap();
        assert_eq!(joint_from_bn(&bn).unwrap().probs(), &[0.3, 0.7]);
        let bn = ParametricBn::new(
            Dag::empty(2),
            VariableSpec::numbered(&[2, 2]),
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        assert!(joint_from_bn(&bn)
            .unwrap()
            .probs()
            .iter()
            .all(|&p| p == 0.25));
    }

    #[test]
    fn root_marginal_equals_cpt() {
        let g = Dag::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let spec = VariableSpec::numbered(&[3, 2, 2]);
        let bn =
            crate::datagen::sample_parameters(&g, &spec, 10.0, crate::datagen::RngSeed::new(4, 0))
                .unwrap();
        let p = joint_from_bn(&bn).unwrap();
        let m = p.marginal(NodeSet::singleton(0));
        for (a, b) in m.iter().zip(bn.cpt(0)) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn condition_and_marginalize_basics() {
        let p = xor();
        let same = condition_and_marginalize(&p, &[], NodeSet::EMPTY).unwrap();
        assert_eq!(same, p);
        let mx = condition_and_marginalize(&p, &[], NodeSet::from_iter([1, 2])).unwrap();
        assert_eq!(mx.probs(), &[0.5, 0.5]);
        // Given W = 1, X and Y disagree.
        let c = condition_and_marginalize(&p, &[(2, 1)], NodeSet::singleton(2)).unwrap();
        assert_eq!(c.probs(), &[0.0, 0.5, 0.5, 0.0]);
        assert!(matches!(
            condition_and_marginalize(&c, &[(0, 0), (1, 0)], NodeSet::EMPTY),
            Err(Error::ZeroProbability)
        ));
    }

    #[test]
    fn ci_on_xor() {
        let p = xor();
        let s = NodeSet::singleton;
        assert!(ci_holds(&p, s(0), s(1), NodeSet::EMPTY, CI_TOL).unwrap());
        assert!(!ci_holds(&p, s(0), s(1), s(2), CI_TOL).unwrap());
        assert!(!ci_holds(&p, s(0), NodeSet::from_iter([1, 2]), NodeSet::EMPTY, CI_TOL).unwrap());
        assert!(ci_holds(&p, s(0), s(0), NodeSet::EMPTY, CI_TOL).is_err());
        assert!(ci_holds(&p, NodeSet::EMPTY, s(0), NodeSet::EMPTY, CI_TOL).is_err());
    }

    #[test]
    fn rejects_oversized_tables() {
        let spec = VariableSpec::numbered(&[256, 256, 256]);
        assert!(matches!(
            JointTable::new(spec, vec![]),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn csv_dump() {
        let mut buf = Vec::new();
        xor().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("X,Y,W,probability\n0,0,0,0.25\n0,0,1,0\n"));
        assert_eq!(text.lines().count(), 9);
    }
}
