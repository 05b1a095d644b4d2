use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeSet, VariableSpec};

/// Integer-coded categorical records, stored column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CategoricalDataset {
    spec: VariableSpec,
    columns: Vec<Vec<u8>>,
    len: usize,
}

impl CategoricalDataset {
    pub fn from_rows(spec: VariableSpec, rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = spec.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::parse(
                    i + 1,
                    format!("expected {n} values, got {}", row.len()),
                ));
            }
            for (v, &x) in row.iter().enumerate() {
                if x as usize >= spec.card(v) {
                    return Err(Error::parse(
                        i + 1,
                        format!("state {x} out of range for {}", spec.name(v)),
                    ));
                }
                columns[v].push(x);
            }
        }
        Ok(CategoricalDataset {
            spec,
            columns,
            len: rows.len(),
        })
    }

    pub(crate) fn from_columns_unchecked(spec: VariableSpec, columns: Vec<Vec<u8>>) -> Self {
        let len = columns.first().map_or(0, Vec::len);
        debug_assert!(columns.iter().all(|c| c.len() == len));
        CategoricalDataset { spec, columns, len }
    }

    pub fn spec(&self) -> &VariableSpec {
        &self.spec
    }

    /// Number of records, `m`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn column(&self, v: usize) -> &[u8] {
        &self.columns[v]
    }

    pub fn row(&self, i: usize) -> Vec<u8> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// The same records restricted to `keep`.
    pub fn project(&self, keep: NodeSet) -> CategoricalDataset {
        CategoricalDataset {
            spec: self.spec.restrict(keep),
            columns: keep.iter().map(|v| self.columns[v].clone()).collect(),
            len: self.len,
        }
    }

    /// Records reordered by `perm` (record `i` of the result is record `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> CategoricalDataset {
        CategoricalDataset {
            spec: self.spec.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| perm.iter().map(|&i| c[i]).collect())
                .collect(),
            len: perm.len(),
        }
    }
}

/// How state counts are determined when reading a CSV.
#[derive(Clone, Copy, Debug)]
pub enum Cards<'a> {
    /// Names and cardinalities from a schema; the header must match it.
    Schema(&'a VariableSpec),
    /// Each cardinality is `max + 1` over the column (at least 1).
    Infer,
}

/// Reads a dataset CSV: a header row of variable names followed by
/// integer state codes.
pub fn read_dataset<R: Read>(reader: R, cards: Cards<'_>) -> Result<CategoricalDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || header == [""] {
        return Err(Error::parse(1, "no variables in header"));
    }
    if let Cards::Schema(spec) = cards {
        if header != spec.names() {
            return Err(Error::parse(
                1,
                format!(
                    "header {:?} does not match schema {:?}",
                    header,
                    spec.names()
                ),
            ));
        }
    }
    let n = header.len();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != n {
            return Err(Error::parse(
                line,
                format!("expected {n} fields, got {}", rec.len()),
            ));
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<u8>()
                    .map_err(|_| Error::parse(line, format!("invalid state code {f:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    let spec = match cards {
        Cards::Schema(spec) => spec.clone(),
        Cards::Infer => {
            let cards = (0..n)
                .map(|v| rows.iter().map(|r| r[v] as usize + 1).max().unwrap_or(1))
                .collect();
            VariableSpec::new(header, cards)?
        }
    };
    CategoricalDataset::from_rows(spec, rows)
}

pub fn write_dataset<W: Write>(writer: W, data: &CategoricalDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(data.spec().names())?;
    let mut buf = Vec::with_capacity(data.spec().len());
    for i in 0..data.len() {
        buf.clear();
        buf.extend(data.columns.iter().map(|c| c[i].to_string()));
        w.write_record(&buf)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    variables: Vec<SchemaVariable>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaVariable {
    name: String,
    cardinality: usize,
}

/// Parses a schema sidecar: `{"variables": [{"name": .., "cardinality": ..}, ..]}`.
pub fn read_schema(text: &str) -> Result<VariableSpec> {
    let file: SchemaFile = serde_json::from_str(text)?;
    if file.variables.is_empty() {
        return Err(Error::Spec("schema lists no variables".into()));
    }
    let (names, cards) = file
        .variables
        .into_iter()
        .map(|v| (v.name, v.cardinality))
        .unzip();
    VariableSpec::new(names, cards)
}

pub fn write_schema(spec: &VariableSpec) -> String {
    let file = SchemaFile {
        variables: spec
            .names()
            .iter()
            .zip(spec.cards())
            .map(|(name, &cardinality)| SchemaVariable {
                name: name.clone(),
                cardinality,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("schema serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_with_schema() {
        let spec = VariableSpec::numbered(&[2, 3]);
        let d = CategoricalDataset::from_rows(spec.clone(), vec![vec![0, 2], vec![1, 0]]).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "X1,X2\n0,2\n1,0\n");
        let back = read_dataset(buf.as_slice(), Cards::Schema(&spec)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn inferred_cards() {
        let d = read_dataset("A,B\n0,4\n2,0\n".as_bytes(), Cards::Infer).unwrap();
        assert_eq!(d.spec().cards(), &[3, 5]);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn rejects_malformed() {
        let spec = VariableSpec::numbered(&[2, 2]);
        assert!(read_dataset("X1,X2\n0,2\n".as_bytes(), Cards::Schema(&spec)).is_err());
        assert!(read_dataset("X2,X1\n0,1\n".as_bytes(), Cards::Schema(&spec)).is_err());
        assert!(read_dataset("X1,X2\n0\n".as_bytes(), Cards::Schema(&spec)).is_err());
        assert!(read_dataset("X1,X2\n0,-1\n".as_bytes(), Cards::Schema(&spec)).is_err());
        assert!(read_dataset("X1,X1\n0,1\n".as_bytes(), Cards::Infer).is_err());
    }

    #[test]
    fn rejects_zero_variables() {
        assert!(read_dataset("".as_bytes(), Cards::Infer).is_err());
        assert!(read_dataset("\n".as_bytes(), Cards::Infer).is_err());
        assert!(read_schema(r#"{"variables":[]}"#).is_err());
    }

    #[test]
    fn header_only_is_empty() {
        let spec = VariableSpec::numbered(&[2, 2]);
        let d = read_dataset("X1,X2\n".as_bytes(), Cards::Schema(&spec)).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn schema_roundtrip() {
        let spec = VariableSpec::numbered(&[4, 2]);
        assert_eq!(read_schema(&write_schema(&spec)).unwrap(), spec);
        assert!(read_schema(r#"{"variables":[{"name":"a","cardinality":0}]}"#).is_err());
        assert!(read_schema("[]").is_err());
    }
}
