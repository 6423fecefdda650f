use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{SvebSubclass, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};
use crate::wfdb::AamiClass;

const META_COLUMNS: [&str; 4] = ["record_id", "beat_index", "label", "sveb_subclass"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeatMeta {
    pub record_id: String,
    pub beat_index: usize,
    pub label: AamiClass,
    pub sveb_subclass: Option<SvebSubclass>,
}

/// Beats by features, row-major, with the column registry carried along.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    columns: Vec<String>,
    meta: Vec<BeatMeta>,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new() -> Self {
        Self { columns: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(), meta: Vec::new(), data: Vec::new() }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.meta.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn meta(&self) -> &[BeatMeta] {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut [BeatMeta] {
        &mut self.meta
    }

    pub fn labels(&self) -> Vec<AamiClass> {
        self.meta.iter().map(|m| m.label).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.data[i * self.n_cols() + j]).collect()
    }

    pub fn push(&mut self, meta: BeatMeta, row: &[f64]) -> Result<()> {
        if row.len() != self.n_cols() {
            return Err(Error::DimensionMismatch { expected: self.n_cols(), got: row.len() });
        }
        self.meta.push(meta);
        self.data.extend_from_slice(row);
        Ok(())
    }

    /// Stack matrices that share a column registry, in the given order.
    pub fn concat(parts: &[FeatureMatrix]) -> Result<FeatureMatrix> {
        let mut out = FeatureMatrix::new();
        for p in parts {
            if p.columns != out.columns {
                return Err(Error::InvalidInput("feature matrices have different column registries".into()));
            }
            out.meta.extend_from_slice(&p.meta);
            out.data.extend_from_slice(&p.data);
        }
        Ok(out)
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix { columns: self.columns.clone(), ..Default::default() };
        for &i in rows {
            out.meta.push(self.meta[i].clone());
            out.data.extend_from_slice(self.row(i));
        }
        out
    }

    /// Distinct record ids in first-seen order.
    pub fn record_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for m in &self.meta {
            if ids.last() != Some(&m.record_id) && !ids.contains(&m.record_id) {
                ids.push(m.record_id.clone());
            }
        }
        ids
    }

    /// The chosen columns as a samples-by-features matrix.
    pub fn to_dmatrix(&self, cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_rows(), cols.len(), |i, j| self.data[i * self.n_cols() + cols[j]])
    }

    pub fn to_dmatrix_all(&self) -> DMatrix<f64> {
        let cols: Vec<usize> = (0..self.n_cols()).collect();
        self.to_dmatrix(&cols)
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let header: Vec<&str> = META_COLUMNS.iter().copied().chain(self.columns.iter().map(String::as_str)).collect();
        writeln!(w, "{}", header.join("\t"))?;
        for (i, m) in self.meta.iter().enumerate() {
            let sub = m.sveb_subclass.map_or("-".to_string(), |s| s.to_string());
            write!(w, "{}\t{}\t{}\t{}", m.record_id, m.beat_index, m.label, sub)?;
            for v in self.row(i) {
                // Display of f64 is the shortest string that parses back to the same value.
                write!(w, "\t{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_tsv(path: &Path) -> Result<FeatureMatrix> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }

    pub fn read_from<R: BufRead>(reader: R, what: &str) -> Result<FeatureMatrix> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(h) => h.map_err(|e| Error::format(what, e.to_string()))?,
            None => return Err(Error::format(what, "empty feature file")),
        };
        let names: Vec<&str> = header.split('\t').collect();
        if names.len() < META_COLUMNS.len() || names[..META_COLUMNS.len()] != META_COLUMNS {
            return Err(Error::format(what, "header does not start with the beat metadata columns"));
        }
        let columns: Vec<String> = names[META_COLUMNS.len()..].iter().map(|s| s.to_string()).collect();
        if columns.len() != N_FEATURES || columns.iter().zip(FEATURE_NAMES).any(|(a, b)| a != b) {
            return Err(Error::format(what, "feature columns differ from the registry"));
        }
        let mut out = FeatureMatrix { columns, ..Default::default() };
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::format(what, e.to_string()))?;
            let bad = |msg: String| Error::format(what, format!("line {}: {msg}", n + 2));
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != names.len() {
                return Err(bad(format!("{} fields, expected {}", fields.len(), names.len())));
            }
            let beat_index = fields[1].parse().map_err(|_| bad(format!("bad beat index `{}`", fields[1])))?;
            let sveb_subclass = match fields[3] {
                "-" => None,
                s => Some(s.parse()?),
            };
            out.meta.push(BeatMeta {
                record_id: fields[0].to_string(),
                beat_index,
                label: fields[2].parse()?,
                sveb_subclass,
            });
            for f in &fields[META_COLUMNS.len()..] {
                out.data.push(f.parse().map_err(|_| bad(format!("bad number `{f}`")))?);
            }
        }
        Ok(out)
    }
}

/// Column z-scoring with statistics from a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    /// Population statistics. Constant columns get mean 0 and sd 1 so they
    /// pass through unchanged.
    pub fn fit(x: &DMatrix<f64>) -> Standardizer {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut sd = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
            if var > 0.0 && var.is_finite() {
                mean.push(m);
                sd.push(var.sqrt());
            } else {
                mean.push(0.0);
                sd.push(1.0);
            }
        }
        Standardizer { mean, sd }
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), got: x.ncols() });
        }
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - self.mean[j]) / self.sd[j]))
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, v)| (v - self.mean[j]) / self.sd[j]).collect()
    }

    pub fn inverse(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| z[(i, j)] * self.sd[j] + self.mean[j])
    }
}

/// Standardize `train` and `apply` with the training statistics.
pub fn standardize(
    train: &DMatrix<f64>,
    apply: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, Standardizer)> {
    let s = Standardizer::fit(train);
    Ok((s.transform(train)?, s.transform(apply)?, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> FeatureMatrix {
        let mut m = FeatureMatrix::new();
        for i in 0..4 {
            let row: Vec<f64> = (0..N_FEATURES).map(|j| (i * N_FEATURES + j) as f64 * 0.1 - 1.0 / 3.0).collect();
            let meta = BeatMeta {
                record_id: format!("r{}", i / 2),
                beat_index: i + 1,
                label: AamiClass::ALL[i],
                sveb_subclass: (i == 1).then_some(SvebSubclass::S2),
            };
            m.push(meta, &row).unwrap();
        }
        m
    }

    #[test]
    fn tsv_round_trip_is_exact() {
        let m = sample();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let back = FeatureMatrix::read_from(&buf[..], "mem").unwrap();
        assert_eq!(back, m);
        assert_eq!(back.columns(), FEATURE_NAMES);
    }

    #[test]
    fn reordered_columns_rejected() {
        let m = sample();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("pre_rr\tpost_rr", "post_rr\tpre_rr", 1);
        assert!(FeatureMatrix::read_from(text.as_bytes(), "mem").is_err());
    }

    #[test]
    fn record_ids_and_row_selection() {
        let m = sample();
        assert_eq!(m.record_ids(), vec!["r0", "r1"]);
        let s = m.select_rows(&[3, 0]);
        assert_eq!(s.row(0), m.row(3));
        assert_eq!(s.meta()[1], m.meta()[0]);
        assert_eq!(m.to_dmatrix(&[2, 0])[(1, 0)], m.row(1)[2]);
    }

    #[test]
    fn closed_form_standardization() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 5.0, 5.0, 5.0]);
        let (z, _, s) = standardize(&x, &x).unwrap();
        let k = (1.5f64).sqrt();
        for (got, want) in z.column(0).iter().zip([-k, 0.0, k]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(z.column(1).iter().copied().collect::<Vec<_>>(), vec![5.0; 3]);
        assert_eq!((s.mean[1], s.sd[1]), (0.0, 1.0));
    }

    #[test]
    fn apply_uses_training_statistics() {
        let train = DMatrix::from_column_slice(2, 1, &[0.0, 2.0]);
        let apply = DMatrix::from_column_slice(1, 1, &[4.0]);
        let (_, z, _) = standardize(&train, &apply).unwrap();
        assert_eq!(z[(0, 0)], 3.0);
    }

    proptest! {
        #[test]
        fn inverse_recovers_input(vals in prop::collection::vec(-100.0f64..100.0, 12..60)) {
            let rows = vals.len() / 3;
            let x = DMatrix::from_row_slice(rows, 3, &vals[..rows * 3]);
            let s = Standardizer::fit(&x);
            let back = s.inverse(&s.transform(&x).unwrap());
            for (a, b) in back.iter().zip(x.iter()) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }
}
