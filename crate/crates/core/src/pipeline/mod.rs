//! Cached end-to-end runs: ingest, preprocess, extract, select, train,
//! evaluate and the one-shot comparison report.

pub mod cache;
pub mod config;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cache::{atomic_write, digest_bytes, digest_json, Cache, CacheEntry};
pub use config::{PipelineConfig, QUICK_RECORDS};

use crate::classifiers::{
    fit_model, labelled_rows, Classifier, Dataset, FitSpec, HiddenRule, Model, ModelKind, TrainConfig, TrainedModel,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    aggregate_runs, evaluate_predictions, literature_rows, report_table, write_results_tsv, Evaluation, MethodRow,
    MetricTriple,
};
use crate::features::{
    assign_sveb_subclasses, extract_record, feature_indices, ExtractionReport, FeatureMatrix, Standardizer,
};
use crate::preprocess::{preprocess_record, PreprocessedRecord};
use crate::selection::{forward_select, validation_split, Prepared, SelectionTrace, WrapperConfig};
use crate::wfdb::{load_record, parse_header, DS1, DS2, PACED};

/// Bumped whenever a stage's output format or algorithm changes.
const STAGE_VERSION: u32 = 1;

/// The 11-feature LDA subset and 4-feature ANN subset used by `--paper-subsets`.
pub const PUBLISHED_LDA_SUBSET: [&str; 11] = [
    "norm_pre_rr",
    "post_rr",
    "t_dur",
    "energy_t",
    "qrs_morph_0",
    "qrs_morph_1",
    "qrs_morph_2",
    "qrs_morph_3",
    "max_fft_rs",
    "qrs_dur",
    "r_amplitude",
];
pub const PUBLISHED_ANN_SUBSET: [&str; 4] = ["t_dur", "r_amplitude", "max_fft_qrs", "norm_pre_rr"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Split {
    Ds1,
    Ds2,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Ds1 => "ds1",
            Split::Ds2 => "ds2",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ds1" => Ok(Split::Ds1),
            "ds2" => Ok(Split::Ds2),
            other => Err(Error::InvalidParameter(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub record_id: String,
    pub n_signals: usize,
    pub n_samples: usize,
    pub sampling_rate: f64,
    /// Annotated beats per AAMI class, in N, S, V, F, Q order.
    pub class_counts: [usize; 5],
    pub input_digest: String,
}

#[derive(Serialize, Deserialize)]
struct Extracted {
    report: ExtractionReport,
    matrix_tsv: String,
}

#[derive(Debug, Clone)]
pub struct SplitFeatures {
    pub split: Split,
    pub records: Vec<String>,
    pub matrix: FeatureMatrix,
    pub report: ExtractionReport,
    /// Digest over the per-record extraction artifacts, in record order.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub hidden: HiddenRule,
    pub learning_rate: f64,
    pub init_variance: f64,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct ModelEvaluation {
    pub combined: Evaluation,
    /// One evaluation per ensemble member; empty for other kinds.
    pub members: Vec<Evaluation>,
}

#[derive(Debug, Clone)]
pub struct Reproduction {
    pub report: String,
    pub rows: Vec<MethodRow>,
    pub lda_subset: Vec<String>,
    pub ann_subset: Vec<String>,
}

pub struct Pipeline {
    cfg: PipelineConfig,
    cache: Cache,
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec_pretty(v)?)
}

fn from_json<T: for<'de> Deserialize<'de>>(b: &[u8]) -> Result<T> {
    Ok(serde_json::from_slice(b)?)
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cache: Cache::new(&cfg.cache_dir), cfg })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    /// Records of `split` in scope, in canonical order.
    pub fn records(&self, split: Split) -> Vec<String> {
        let canon: &[&str] = match split {
            Split::Ds1 => &DS1,
            Split::Ds2 => &DS2,
        };
        let mut ids: Vec<String> = canon
            .iter()
            .filter(|id| self.cfg.records.as_ref().is_none_or(|r| r.iter().any(|x| x == *id)))
            .map(|s| s.to_string())
            .collect();
        if self.cfg.quick {
            ids.truncate(QUICK_RECORDS);
        }
        ids
    }

    /// All standard record ids (DS1, DS2 and paced) present in the data directory.
    pub fn available_records(&self) -> Vec<String> {
        DS1.iter()
            .chain(&DS2)
            .chain(&PACED)
            .filter(|id| self.cfg.data_dir.join(format!("{id}.hea")).is_file())
            .map(|s| s.to_string())
            .collect()
    }

    /// Error listing every record whose header or annotation file is missing.
    pub fn check_data(&self, ids: &[String]) -> Result<()> {
        if !self.cfg.data_dir.is_dir() {
            return Err(Error::MissingData(format!("data directory {} does not exist", self.cfg.data_dir.display())));
        }
        let missing: Vec<&str> = ids
            .iter()
            .filter(|id| {
                let d = &self.cfg.data_dir;
                !d.join(format!("{id}.hea")).is_file() || !d.join(format!("{id}.{}", self.cfg.annotator)).is_file()
            })
            .map(String::as_str)
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingData(format!(
                "{} record(s) missing from {}: {}",
                missing.len(),
                self.cfg.data_dir.display(),
                missing.join(", ")
            )))
        }
    }

    fn read(&self, name: &str) -> Result<Vec<u8>> {
        let p = self.cfg.data_dir.join(name);
        std::fs::read(&p).map_err(|e| Error::io(p, e))
    }

    /// Digest over the header, signal and annotation files of a record.
    fn input_digest(&self, id: &str) -> Result<String> {
        let hea = self.read(&format!("{id}.hea"))?;
        let header = parse_header(&String::from_utf8_lossy(&hea))?;
        let mut files: Vec<String> = vec![format!("{id}.hea")];
        for s in &header.signals {
            if !files.contains(&s.file_name) {
                files.push(s.file_name.clone());
            }
        }
        files.push(format!("{id}.{}", self.cfg.annotator));
        let mut h = Sha256::new();
        for (k, f) in files.iter().enumerate() {
            let bytes = if k == 0 { hea.clone() } else { self.read(f)? };
            h.update(f.as_bytes());
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(&bytes);
        }
        Ok(hex::encode(h.finalize()))
    }

    pub fn ingest(&self, id: &str) -> Result<(CacheEntry, RecordSummary)> {
        let input = self.input_digest(id)?;
        let key = digest_json(&("ingest", STAGE_VERSION, id, &self.cfg.annotator, &input))?;
        let (entry, bytes) = self.cache.get_or_compute("ingest", &key, "json", || {
            let rec = load_record(&self.cfg.data_dir, id, &self.cfg.annotator)?;
            to_json(&RecordSummary {
                record_id: id.to_string(),
                n_signals: rec.header.n_signals,
                n_samples: rec.header.n_samples,
                sampling_rate: rec.header.sampling_rate,
                class_counts: rec.class_counts()?,
                input_digest: input.clone(),
            })
        })?;
        Ok((entry, from_json(&bytes)?))
    }

    fn preprocess_key(&self, id: &str) -> Result<String> {
        let (ingest, _) = self.ingest(id)?;
        digest_json(&("preprocess", STAGE_VERSION, &ingest.artifact, &self.cfg.filter, self.cfg.target_rate))
    }

    fn compute_preprocess(&self, id: &str) -> Result<Vec<u8>> {
        let rec = load_record(&self.cfg.data_dir, id, &self.cfg.annotator)?;
        let pre = preprocess_record(&rec, &self.cfg.filter)
            .map_err(|e| Error::Record { record: id.to_string(), message: e.to_string() })?;
        to_json(&pre)
    }

    pub fn preprocess(&self, id: &str) -> Result<(CacheEntry, PreprocessedRecord)> {
        let key = self.preprocess_key(id)?;
        let (entry, bytes) = self.cache.get_or_compute("preprocess", &key, "json", || self.compute_preprocess(id))?;
        Ok((entry, from_json(&bytes)?))
    }

    /// The preprocess entry without loading the artifact when it is cached.
    fn preprocess_entry(&self, id: &str) -> Result<CacheEntry> {
        let key = self.preprocess_key(id)?;
        if let Some(e) = self.cache.peek("preprocess", &key, "json") {
            self.cache.record(&e);
            return Ok(e);
        }
        Ok(self.preprocess(id)?.0)
    }

    pub fn extract(&self, id: &str) -> Result<(CacheEntry, FeatureMatrix, ExtractionReport)> {
        let pre = self.preprocess_entry(id)?;
        let key = digest_json(&("extract", STAGE_VERSION, &pre.artifact, self.cfg.normal_reference))?;
        let (entry, bytes) = self.cache.get_or_compute("extract", &key, "json", || {
            let rec: PreprocessedRecord = from_json(&self.cache.load(&pre)?)?;
            let (m, report) = extract_record(&rec, self.cfg.normal_reference)
                .map_err(|e| Error::Record { record: id.to_string(), message: e.to_string() })?;
            let mut tsv = Vec::new();
            m.write_to(&mut tsv).map_err(|e| Error::io("<features>", e))?;
            let matrix_tsv = String::from_utf8(tsv).expect("feature table is UTF-8");
            to_json(&Extracted { report, matrix_tsv })
        })?;
        let ex: Extracted = from_json(&bytes)?;
        let m = FeatureMatrix::read_from(ex.matrix_tsv.as_bytes(), &format!("cached features of {id}"))?;
        Ok((entry, m, ex.report))
    }

    pub fn features(&self, split: Split) -> Result<SplitFeatures> {
        let records = self.records(split);
        if records.is_empty() {
            return Err(Error::MissingData(format!("no {split} records in scope")));
        }
        self.check_data(&records)?;
        let parts: Vec<(CacheEntry, FeatureMatrix, ExtractionReport)> =
            records.par_iter().map(|id| self.extract(id)).collect::<Result<_>>()?;
        let mut report = ExtractionReport::default();
        parts.iter().for_each(|p| report.merge(&p.2));
        let digests: Vec<&str> = parts.iter().map(|p| p.0.artifact.as_str()).collect();
        let digest = digest_json(&digests)?;
        let matrix = FeatureMatrix::concat(&parts.into_iter().map(|p| p.1).collect::<Vec<_>>())?;
        Ok(SplitFeatures { split, records, matrix, report, digest })
    }

    /// DS1 features with S1/S2 subclasses when the scheme needs them.
    fn training_features(&self) -> Result<SplitFeatures> {
        let mut f = self.features(Split::Ds1)?;
        if self.cfg.scheme == crate::classifiers::LabelScheme::FourClass {
            assign_sveb_subclasses(&mut f.matrix, self.cfg.seed)?;
        }
        Ok(f)
    }

    pub fn wrapper_config(&self, kind: ModelKind) -> WrapperConfig {
        WrapperConfig {
            scheme: self.cfg.scheme,
            objective: self.cfg.objective,
            max_features: self.cfg.max_features,
            min_improvement: self.cfg.min_improvement,
            seed: self.cfg.seed,
            mlp_max_epochs: self.cfg.wrapper_mlp_epochs,
            ..WrapperConfig::new(kind)
        }
    }

    pub fn select(&self, kind: ModelKind) -> Result<(CacheEntry, SelectionTrace)> {
        let ds1 = self.training_features()?;
        let wcfg = self.wrapper_config(kind);
        let key = digest_json(&("select", STAGE_VERSION, &ds1.digest, &wcfg, self.cfg.validation_fraction))?;
        let (entry, bytes) = self.cache.get_or_compute("select", &key, "json", || {
            let (tr, va) = validation_split(&ds1.matrix, self.cfg.validation_fraction, self.cfg.seed)?;
            let data = Prepared::new(&tr, &va, self.cfg.scheme)?;
            to_json(&forward_select(&data, &wcfg)?)
        })?;
        Ok((entry, from_json(&bytes)?))
    }

    fn train_key(&self, ds1: &SplitFeatures, kind: ModelKind, features: &[String]) -> Result<String> {
        let c = &self.cfg;
        let base = ("train", STAGE_VERSION, &ds1.digest, kind, features, c.scheme);
        match kind {
            // trained on all of DS1; the seed only matters through S1/S2 clustering
            ModelKind::Lda | ModelKind::Qda | ModelKind::Moe => {
                let seed = (c.scheme == crate::classifiers::LabelScheme::FourClass).then_some(c.seed);
                digest_json(&(base, seed))
            }
            ModelKind::Mlp | ModelKind::Ensemble => digest_json(&(
                base,
                c.seed,
                c.validation_fraction,
                c.objective,
                (&c.hidden_grid, &c.learning_rate_grid, &c.init_variance_grid),
                (c.ensemble_size, c.max_epochs, c.patience, c.balanced),
            )),
        }
    }

    pub fn train(&self, kind: ModelKind, features: &[String]) -> Result<(CacheEntry, TrainedModel)> {
        if features.is_empty() {
            return Err(Error::InvalidInput("empty feature subset".into()));
        }
        feature_indices(features)?;
        let ds1 = self.training_features()?;
        let key = self.train_key(&ds1, kind, features)?;
        let (entry, bytes) =
            self.cache.get_or_compute("train", &key, "json", || to_json(&self.train_model(kind, &ds1.matrix, features)?))?;
        Ok((entry, from_json(&bytes)?))
    }

    fn train_config(&self, learning_rate: f64) -> TrainConfig {
        TrainConfig {
            learning_rate,
            max_epochs: self.cfg.max_epochs,
            patience: self.cfg.patience,
            balanced: self.cfg.balanced,
        }
    }

    /// Fit a model on DS1. MLP kinds hold out a record-level validation split
    /// for early stopping and the hyperparameter grid.
    pub fn train_model(&self, kind: ModelKind, m: &FeatureMatrix, features: &[String]) -> Result<TrainedModel> {
        let cols = feature_indices(features)?;
        let scheme = self.cfg.scheme;
        let n = scheme.n_classes();
        let spec_for = |kind, hidden, learning_rate, init_variance, seeds: Vec<u64>| FitSpec {
            kind,
            hidden,
            init_variance,
            train: self.train_config(learning_rate),
            seeds,
            class_weights: None,
        };
        match kind {
            ModelKind::Lda | ModelKind::Qda | ModelKind::Moe => {
                let (rows, y) = labelled_rows(m, scheme)?;
                let raw = m.select_rows(&rows).to_dmatrix(&cols);
                let s = Standardizer::fit(&raw);
                let x = s.transform(&raw)?;
                let empty = DMatrix::zeros(0, cols.len());
                let spec = FitSpec::new(kind, self.cfg.seed);
                let fitted = fit_model(&spec, n, &Dataset { x: &x, y: &y }, &Dataset { x: &empty, y: &[] })?;
                Ok(TrainedModel::new(scheme, features.to_vec(), Some(s), fitted.model))
            }
            ModelKind::Mlp | ModelKind::Ensemble => {
                let (tr, va) = validation_split(m, self.cfg.validation_fraction, self.cfg.seed)?;
                let (rows_t, y_t) = labelled_rows(&tr, scheme)?;
                let raw_t = tr.select_rows(&rows_t).to_dmatrix(&cols);
                let s = Standardizer::fit(&raw_t);
                let xt = s.transform(&raw_t)?;
                let xv_all = s.transform(&va.to_dmatrix(&cols))?;
                let mut rows_v = Vec::new();
                let mut y_v = Vec::new();
                for (i, meta) in va.meta().iter().enumerate() {
                    if let Some(c) = scheme.class_of(meta.label, meta.sveb_subclass)? {
                        rows_v.push(i);
                        y_v.push(c);
                    }
                }
                let xv = DMatrix::from_fn(rows_v.len(), cols.len(), |i, j| xv_all[(rows_v[i], j)]);
                let train = Dataset { x: &xt, y: &y_t };
                let valid = Dataset { x: &xv, y: &y_v };
                let truth_v = va.labels();

                let c = &self.cfg;
                let mut grid = Vec::new();
                for &h in &c.hidden_grid {
                    for &eta in &c.learning_rate_grid {
                        for &var in &c.init_variance_grid {
                            grid.push((h, eta, var));
                        }
                    }
                }
                let scored: Vec<GridPoint> = grid
                    .par_iter()
                    .map(|&(h, eta, var)| {
                        let spec = spec_for(ModelKind::Mlp, h, eta, var, vec![c.seed]);
                        let model = fit_model(&spec, n, &train, &valid)?.model;
                        let e = evaluate_predictions(&truth_v, &model.predict_rows(&xv_all)?, scheme)?;
                        Ok(GridPoint { hidden: h, learning_rate: eta, init_variance: var, score: c.objective.score(&e) })
                    })
                    .collect::<Result<_>>()?;
                let best = scored.iter().enumerate().fold(0, |b, (k, g)| if g.score > scored[b].score { k } else { b });
                let g = &scored[best];
                log::info!(
                    "grid winner: hidden {} eta {} variance {} (validation score {:.4})",
                    g.hidden,
                    g.learning_rate,
                    g.init_variance,
                    g.score
                );
                let seeds = match kind {
                    ModelKind::Mlp => vec![c.seed],
                    _ => (0..c.ensemble_size as u64).map(|k| c.seed.wrapping_add(k)).collect(),
                };
                let spec = spec_for(kind, g.hidden, g.learning_rate, g.init_variance, seeds);
                let fitted = fit_model(&spec, n, &train, &valid)?;
                Ok(TrainedModel::new(scheme, features.to_vec(), Some(s), fitted.model))
            }
        }
    }

    pub fn evaluate(&self, model: &TrainedModel, split: Split) -> Result<ModelEvaluation> {
        let f = self.features(split)?;
        evaluate_model(model, &f.matrix)
    }

    pub fn ensemble_seeds(&self) -> Vec<u64> {
        (0..self.cfg.ensemble_size as u64).map(|k| self.cfg.seed.wrapping_add(k)).collect()
    }

    /// Train on DS1, test on DS2 and write `report.txt`, `results.tsv`,
    /// `members.tsv` and `manifest.json` into `out_dir`.
    pub fn reproduce(&self, out_dir: &Path) -> Result<Reproduction> {
        let ds1 = self.features(Split::Ds1)?;
        let ds2 = self.features(Split::Ds2)?;
        let (lda_subset, ann_subset) = if self.cfg.paper_subsets {
            (
                PUBLISHED_LDA_SUBSET.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                PUBLISHED_ANN_SUBSET.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            )
        } else {
            (self.select(ModelKind::Lda)?.1.final_subset, self.select(ModelKind::Mlp)?.1.final_subset)
        };
        let (_, lda) = self.train(ModelKind::Lda, &lda_subset)?;
        let (_, moe) = self.train(ModelKind::Moe, &ann_subset)?;
        let (_, ens) = self.train(ModelKind::Ensemble, &ann_subset)?;
        let lda_e = evaluate_model(&lda, &ds2.matrix)?;
        let moe_e = evaluate_model(&moe, &ds2.matrix)?;
        let ens_e = evaluate_model(&ens, &ds2.matrix)?;

        let single = |name: String, e: &Evaluation| MethodRow {
            method: name,
            published: false,
            sveb: MetricTriple::from_metrics(&e.sveb),
            veb: MetricTriple::from_metrics(&e.veb),
        };
        let sveb_runs: Vec<_> = ens_e.members.iter().map(|e| e.sveb).collect();
        let veb_runs: Vec<_> = ens_e.members.iter().map(|e| e.veb).collect();
        let mut rows = literature_rows();
        rows.push(single(format!("LDA ({} features)", lda_subset.len()), &lda_e.combined));
        rows.push(single(format!("MoE ({} features)", ann_subset.len()), &moe_e.combined));
        rows.push(MethodRow {
            method: format!("ANN ensemble ({} features, {}-run mean)", ann_subset.len(), ens_e.members.len()),
            published: false,
            sveb: MetricTriple::from_aggregate(&aggregate_runs(&sveb_runs)?),
            veb: MetricTriple::from_aggregate(&aggregate_runs(&veb_runs)?),
        });
        rows.push(single(format!("ANN ensemble ({} features, averaged outputs)", ann_subset.len()), &ens_e.combined));

        let overlap = lda_subset.iter().filter(|f| PUBLISHED_LDA_SUBSET.contains(&f.as_str())).count();
        let mut report = String::new();
        report.push_str(&format!(
            "Train: DS1, {} records, {} beats. Test: DS2, {} records, {} beats.\n",
            ds1.records.len(),
            ds1.matrix.n_rows(),
            ds2.records.len(),
            ds2.matrix.n_rows()
        ));
        report.push_str(&format!(
            "Feature subsets ({}):\n  LDA: {}\n  MoE / ANN: {}\n",
            if self.cfg.paper_subsets { "published" } else { "wrapper-selected" },
            lda_subset.join(", "),
            ann_subset.join(", ")
        ));
        report.push_str(&format!(
            "LDA subset overlap with the published {}-feature subset: {overlap}/{}\n\n",
            PUBLISHED_LDA_SUBSET.len(),
            PUBLISHED_LDA_SUBSET.len()
        ));
        report.push_str(&report_table(&rows));

        let mut tsv = Vec::new();
        write_results_tsv(&rows, &mut tsv)?;
        let mut members = String::from("seed\tsveb_se\tsveb_ppv\tsveb_f\tveb_se\tveb_ppv\tveb_f\n");
        let fmt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v}"));
        for (seed, e) in self.ensemble_seeds().iter().zip(&ens_e.members) {
            members.push_str(&format!(
                "{seed}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                fmt(e.sveb.se),
                fmt(e.sveb.ppv),
                fmt(e.sveb.f_measure),
                fmt(e.veb.se),
                fmt(e.veb.ppv),
                fmt(e.veb.f_measure)
            ));
        }
        let outputs = [
            ("report.txt", report.as_bytes().to_vec()),
            ("results.tsv", tsv),
            ("members.tsv", members.into_bytes()),
        ];
        for (name, bytes) in &outputs {
            atomic_write(&out_dir.join(name), bytes)?;
        }
        let manifest = self.manifest(&ds1, &ds2, &outputs)?;
        atomic_write(&out_dir.join("manifest.json"), &to_json(&manifest)?)?;
        Ok(Reproduction { report, rows, lda_subset, ann_subset })
    }

    fn manifest(&self, ds1: &SplitFeatures, ds2: &SplitFeatures, outputs: &[(&str, Vec<u8>)]) -> Result<Manifest> {
        let stages: BTreeSet<StageDigest> = self
            .cache
            .entries()
            .into_iter()
            .map(|e| StageDigest { stage: e.stage, key: e.key, artifact: e.artifact })
            .collect();
        Ok(Manifest {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.cfg.clone(),
            seed: self.cfg.seed,
            ensemble_seeds: self.ensemble_seeds(),
            ds1_records: ds1.records.clone(),
            ds2_records: ds2.records.clone(),
            ds1_extraction: ds1.report,
            ds2_extraction: ds2.report,
            stages: stages.into_iter().collect(),
            outputs: outputs.iter().map(|(n, b)| (n.to_string(), digest_bytes(b))).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StageDigest {
    pub stage: String,
    pub key: String,
    pub artifact: String,
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub crate_version: String,
    pub config: PipelineConfig,
    pub seed: u64,
    pub ensemble_seeds: Vec<u64>,
    pub ds1_records: Vec<String>,
    pub ds2_records: Vec<String>,
    pub ds1_extraction: ExtractionReport,
    pub ds2_extraction: ExtractionReport,
    pub stages: Vec<StageDigest>,
    pub outputs: Vec<(String, String)>,
}

/// Apply a trained model to every row of `m`.
pub fn evaluate_model(model: &TrainedModel, m: &FeatureMatrix) -> Result<ModelEvaluation> {
    let cols = feature_indices(&model.features)?;
    let raw = m.to_dmatrix(&cols);
    let x = match &model.standardizer {
        Some(s) => s.transform(&raw)?,
        None => raw,
    };
    let truth = m.labels();
    let combined = evaluate_predictions(&truth, &model.model.predict_rows(&x)?, model.scheme)?;
    let members = match &model.model {
        Model::Ensemble(e) => e
            .members()
            .par_iter()
            .map(|mlp| evaluate_predictions(&truth, &mlp.predict_rows(&x)?, model.scheme))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    Ok(ModelEvaluation { combined, members })
}

/// Feature names from a subset file: `all`, a selection trace (`.json`), or
/// one name per line with `#` comments.
pub fn read_feature_subset(spec: &str) -> Result<Vec<String>> {
    if spec == "all" {
        return Ok(crate::features::FEATURE_NAMES.iter().map(|s| s.to_string()).collect());
    }
    let path = PathBuf::from(spec);
    let names: Vec<String> = if path.extension().is_some_and(|e| e == "json") {
        SelectionTrace::load(&path)?.final_subset
    } else {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        text.lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect()
    };
    if names.is_empty() {
        return Err(Error::InvalidInput(format!("{spec}: empty feature subset")));
    }
    feature_indices(&names)?;
    Ok(names)
}
