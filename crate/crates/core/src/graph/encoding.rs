//! Canonical text encoding of DAGs and classes: one edge per line,
//! `u -> v` or `u -- v`, nodes by name, edges sorted by node index.

use super::{Cpdag, Dag, VariableSpec};
use crate::error::{Error, Result};

pub fn format_dag(g: &Dag, spec: &VariableSpec) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        out.push_str(&format!("{} -> {}\n", spec.name(u), spec.name(v)));
    }
    out
}

pub fn format_cpdag(c: &Cpdag, spec: &VariableSpec) -> String {
    let mut lines: Vec<(usize, usize, &str)> = c
        .directed_edges()
        .into_iter()
        .map(|(u, v)| (u, v, "->"))
        .chain(c.undirected_edges().into_iter().map(|(u, v)| (u, v, "--")))
        .collect();
    lines.sort_unstable();
    let mut out = String::new();
    for (u, v, arrow) in lines {
        out.push_str(&format!("{} {arrow} {}\n", spec.name(u), spec.name(v)));
    }
    out
}

/// Joins an encoding onto a single line with `; ` separators.
pub fn one_line(encoding: &str) -> String {
    encoding.lines().collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Directed,
    Undirected,
}

/// Edges with their marks and 1-based line numbers.
fn parse_edges(text: &str, spec: &VariableSpec) -> Result<Vec<(usize, usize, Mark, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        for item in raw.split(';') {
            let item = item.trim();
            if item.is_empty() || item.starts_with('#') {
                continue;
            }
            let (mark, sep) = if item.contains("->") {
                (Mark::Directed, "->")
            } else if item.contains("--") {
                (Mark::Undirected, "--")
            } else {
                return Err(Error::parse(
                    line_no,
                    format!("expected an edge, got {item:?}"),
                ));
            };
            let (lhs, rhs) = item.split_once(sep).expect("separator present");
            let lookup = |name: &str| {
                let name = name.trim();
                spec.index_of(name)
                    .ok_or_else(|| Error::parse(line_no, format!("unknown variable {name:?}")))
            };
            out.push((lookup(lhs)?, lookup(rhs)?, mark, line_no));
        }
    }
    Ok(out)
}

/// Parses a DAG; every edge must be directed.
pub fn parse_dag(text: &str, spec: &VariableSpec) -> Result<Dag> {
    let mut edges = Vec::new();
    for (u, v, mark, line_no) in parse_edges(text, spec)? {
        if mark != Mark::Directed {
            return Err(Error::parse(line_no, "undirected edge in a DAG"));
        }
        edges.push((u, v));
    }
    let mut pairs: Vec<_> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    pairs.sort_unstable();
    if pairs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Structure("pair listed twice".into()));
    }
    Dag::from_edges(spec.len(), &edges)
}

/// Parses a completed PDAG, validating that it represents a class.
pub fn parse_cpdag(text: &str, spec: &VariableSpec) -> Result<Cpdag> {
    let mut directed = Vec::new();
    let mut undirected = Vec::new();
    for (u, v, mark, _) in parse_edges(text, spec)? {
        match mark {
            Mark::Directed => directed.push((u, v)),
            Mark::Undirected => undirected.push((u, v)),
        }
    }
    Cpdag::new(spec.len(), &directed, &undirected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cpdag_text_is_sorted_by_node() {
        let spec = VariableSpec::numbered(&[2, 2, 2, 2]);
        let g = Dag::from_edges(4, &[(0, 2), (1, 2), (2, 3), (0, 1)]).unwrap();
        let c = g.to_cpdag();
        let text = format_cpdag(&c, &spec);
        assert_eq!(parse_cpdag(&text, &spec).unwrap(), c);
        assert_eq!(parse_cpdag(&one_line(&text), &spec).unwrap(), c);
        let lines: Vec<&str> = text.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
    }

    #[test]
    fn dag_roundtrip() {
        let spec = VariableSpec::numbered(&[2, 3, 2]);
        let g = Dag::from_edges(3, &[(2, 0), (0, 1)]).unwrap();
        let text = format_dag(&g, &spec);
        assert_eq!(text, "X1 -> X2\nX3 -> X1\n");
        assert_eq!(parse_dag(&text, &spec).unwrap(), g);
    }

    #[test]
    fn rejects_garbage() {
        let spec = VariableSpec::numbered(&[2, 2]);
        assert!(parse_dag("X1 => X2", &spec).is_err());
        assert!(parse_dag("X1 -> X9", &spec).is_err());
        assert!(parse_dag("X1 -> X2\nX2 -> X1", &spec).is_err());
        assert!(parse_dag("X1 -- X2", &spec).is_err());
        assert!(parse_cpdag("X1 -> X2", &spec).is_err());
        assert!(parse_dag("# comment\n\n", &spec).unwrap().edge_count() == 0);
    }
}
