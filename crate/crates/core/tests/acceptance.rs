//! Acceptance suite. Prints one PASS / FAIL / BLOCKED line per criterion and
//! exits non-zero when any criterion fails.
//!
//! Criteria that need the MIT-BIH Arrhythmia Database run only when
//! `MITDB_DIR` points at a directory with the 48 records; otherwise they are
//! reported as BLOCKED. `MITDB_CACHE_DIR` optionally keeps their stage cache
//! between runs.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ecg_arrhythmia::classifiers::{
    ensemble_train, lda_fit, mlp_train, qda_fit, Classifier, Dataset, EnsembleConfig, HiddenRule, LabelScheme, Mlp,
    MixtureOfExperts, ModelKind, TrainConfig,
};
use ecg_arrhythmia::evaluation::{f_measure, literature_rows, MethodRow};
use ecg_arrhythmia::preprocess::{notch_60hz, remove_baseline, resample_to_115, Resampler, ResampleSpec};
use ecg_arrhythmia::selection::{forward_select, validation_split, Prepared, WrapperConfig};
use ecg_arrhythmia::synth::normal_train;
use ecg_arrhythmia::wfdb::annotation::symbol_code;
use ecg_arrhythmia::wfdb::{
    decode_format212, encode_annotations, encode_format212, parse_annotations, parse_header, AnnotationEvent, DS1,
    DS2, PACED,
};
use ecg_arrhythmia::pipeline::{Pipeline, PipelineConfig, Split, PUBLISHED_LDA_SUBSET};

use common::{
    bayes_error, error_rate, gaussian_sample, informative_matrix, natural_spline, pick_three, synthetic_db, xor, Gauss2,
    QUICK_IDS,
};

enum Status {
    Pass,
    Fail,
    Blocked,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Self { status: if ok { Status::Pass } else { Status::Fail }, detail }
    }

    fn blocked(detail: impl Into<String>) -> Self {
        Self { status: Status::Blocked, detail: detail.into() }
    }
}

/// Directory with the real database, when configured and complete.
fn mitdb() -> Result<PathBuf, String> {
    let dir = std::env::var_os("MITDB_DIR").ok_or("MITDB_DIR not set; MIT-BIH records unavailable")?;
    let dir = PathBuf::from(dir);
    let missing: Vec<&str> = DS1
        .iter()
        .chain(&DS2)
        .chain(&PACED)
        .copied()
        .filter(|id| !dir.join(format!("{id}.hea")).is_file() || !dir.join(format!("{id}.atr")).is_file())
        .collect();
    if missing.is_empty() {
        Ok(dir)
    } else {
        Err(format!("{} records missing from {}: {}", missing.len(), dir.display(), missing.join(" ")))
    }
}

fn mitdb_config(data: &Path) -> (PipelineConfig, Option<tempfile::TempDir>) {
    let mut cfg = PipelineConfig { data_dir: data.to_path_buf(), ..PipelineConfig::default() };
    match std::env::var_os("MITDB_CACHE_DIR") {
        Some(c) => {
            cfg.cache_dir = PathBuf::from(c);
            (cfg, None)
        }
        None => {
            let tmp = tempfile::tempdir().unwrap();
            cfg.cache_dir = tmp.path().to_path_buf();
            (cfg, Some(tmp))
        }
    }
}

// (Se, PPV, F) triples as printed in the published comparison tables, in
// print order and including repeats across tables.
const PUBLISHED: [(&str, f64, f64, f64); 31] = [
    ("de Chazal 2004, SVEB", 75.9, 38.5, 51.08),
    ("de Chazal & Reilly 2006, SVEB", 87.7, 47.0, 61.20),
    ("Alvarado, SVEB", 86.19, 56.68, 68.38),
    ("Wiens & Guttag, SVEB", 92.0, 99.5, 95.60),
    ("four-class LDA on 22 features, SVEB", 78.8, 42.0, 54.79),
    ("de Chazal 2004, SVEB", 75.9, 38.5, 51.08),
    ("de Chazal 2004, VEB", 77.7, 81.9, 79.74),
    ("de Chazal & Reilly 2006, SVEB", 87.7, 47.0, 61.20),
    ("de Chazal & Reilly 2006, VEB", 94.3, 96.2, 95.24),
    ("Alvarado, SVEB", 86.19, 56.68, 68.38),
    ("Alvarado, VEB", 92.43, 94.82, 93.60),
    ("Wiens & Guttag, SVEB", 92.0, 99.5, 95.60),
    ("Wiens & Guttag, VEB", 99.6, 99.3, 99.44),
    ("four-class LDA on 26 features, SVEB", 89.1, 36.8, 52.09),
    ("four-class LDA on 26 features, VEB", 82.04, 78.25, 80.1),
    ("de Chazal 2004, SVEB", 75.9, 38.5, 51.08),
    ("de Chazal 2004, VEB", 77.7, 81.9, 79.74),
    ("de Chazal & Reilly 2006, SVEB", 87.7, 47.0, 61.20),
    ("de Chazal & Reilly 2006, VEB", 94.3, 96.2, 95.24),
    ("Alvarado, SVEB", 86.19, 56.68, 68.38),
    ("Alvarado, VEB", 92.43, 94.82, 93.60),
    ("Ince, SVEB", 63.5, 53.7, 58.19),
    ("Ince, VEB", 84.6, 87.4, 85.97),
    ("Wiens & Guttag, SVEB", 92.0, 99.5, 95.60),
    ("Wiens & Guttag, VEB", 99.6, 99.3, 99.44),
    ("LDA, 11 features, SVEB", 91.94, 67.52, 77.86),
    ("LDA, 11 features, VEB", 81.98, 96.63, 88.70),
    ("MoE, 4 features, SVEB", 93.74, 58.88, 72.33),
    ("MoE, 4 features, VEB", 69.43, 94.58, 80.08),
    ("ANN ensemble, 4 features, SVEB", 87.19, 83.78, 85.45),
    ("ANN ensemble, 4 features, VEB", 89.78, 92.56, 91.14),
];

fn criterion_1() -> Outcome {
    let mut worst = (0.0f64, "");
    for &(name, se, ppv, f) in &PUBLISHED {
        let d = (f_measure(se, ppv).unwrap() - f).abs();
        if d > worst.0 {
            worst = (d, name);
        }
    }
    // The comparison rows shipped in reports must agree with the same numbers.
    let mut lit_ok = true;
    for r in literature_rows() {
        for t in [r.sveb, r.veb] {
            let (se, ppv, f) = (t.se.value.unwrap(), t.ppv.value.unwrap(), t.f.value.unwrap());
            lit_ok &= PUBLISHED.iter().any(|p| p.1 == se && p.2 == ppv && p.3 == f);
            lit_ok &= (f_measure(se, ppv).unwrap() - f).abs() <= 0.02;
        }
    }
    Outcome::check(
        worst.0 <= 0.02 && lit_ok,
        format!(
            "{} printed rows, max |F - 2*Se*PPV/(Se+PPV)| = {:.4} ({}); tolerance 0.02; report comparison rows {}",
            PUBLISHED.len(),
            worst.0,
            worst.1,
            if lit_ok { "consistent" } else { "INCONSISTENT" }
        ),
    )
}

fn row<'a>(rows: &'a [MethodRow], prefix: &str, contains: &str) -> &'a MethodRow {
    rows.iter().find(|r| !r.published && r.method.starts_with(prefix) && r.method.contains(contains)).unwrap()
}

fn criterion_2() -> Outcome {
    let data = match mitdb() {
        Ok(d) => d,
        Err(why) => return Outcome::blocked(why),
    };
    let (mut cfg, _tmp) = mitdb_config(&data);
    cfg.paper_subsets = true;
    let out = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let r = Pipeline::new(cfg).unwrap().reproduce(out.path()).unwrap();
    let minutes = start.elapsed().as_secs_f64() / 60.0;
    let v = |c: ecg_arrhythmia::evaluation::Cell| c.value.unwrap_or(f64::NAN);
    let lda = row(&r.rows, "LDA", "");
    let ens = row(&r.rows, "ANN ensemble", "run mean");
    let checks = [
        ("LDA SVEB Se", v(lda.sveb.se), (v(lda.sveb.se) - 91.94).abs() <= 8.0),
        ("LDA SVEB F", v(lda.sveb.f), (v(lda.sveb.f) - 77.86).abs() <= 8.0),
        ("LDA VEB F", v(lda.veb.f), (v(lda.veb.f) - 88.70).abs() <= 8.0),
        ("ensemble SVEB F", v(ens.sveb.f), v(ens.sveb.f) >= 75.0),
        ("ensemble VEB F", v(ens.veb.f), v(ens.veb.f) >= 83.0),
        ("ensemble SVEB F s.e.", ens.sveb.f.stderr.unwrap_or(f64::NAN), ens.sveb.f.stderr.is_some_and(|s| s <= 1.5)),
        ("runtime (min)", minutes, minutes < 30.0),
    ];
    let ok = checks.iter().all(|c| c.2);
    let detail = checks
        .iter()
        .map(|(n, x, pass)| format!("{n} {x:.2}{}", if *pass { "" } else { " (out of band)" }))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::check(ok, detail)
}

fn criterion_3() -> Outcome {
    let data = match mitdb() {
        Ok(d) => d,
        Err(why) => return Outcome::blocked(why),
    };
    let (cfg, _tmp) = mitdb_config(&data);
    let p = Pipeline::new(cfg).unwrap();
    let ds1 = p.features(Split::Ds1).unwrap().matrix.n_rows() as f64;
    let ds2 = p.features(Split::Ds2).unwrap().matrix.n_rows() as f64;
    let mut totals = [0usize; 5];
    for id in DS1.iter().chain(&DS2).chain(&PACED) {
        let (_, s) = p.ingest(id).unwrap();
        totals.iter_mut().zip(s.class_counts).for_each(|(t, c)| *t += c);
    }
    let expected = [90631.0, 2781.0, 7236.0, 803.0, 8043.0];
    let class_ok: Vec<bool> = totals.iter().zip(expected).map(|(&t, e)| (t as f64 - e).abs() <= 0.005 * e).collect();
    let ok = (ds1 - 51020.0).abs() <= 510.2 && (ds2 - 49711.0).abs() <= 497.11 && class_ok.iter().all(|&b| b);
    Outcome::check(
        ok,
        format!(
            "DS1 {ds1} beats (51020 +-1%), DS2 {ds2} beats (49711 +-1%), N/S/V/F/Q {:?} vs {:?} (+-0.5%)",
            totals, expected
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut f212 = 0;
    for _ in 0..100_000 {
        let n_sig = rng.random_range(1..=3);
        let n = rng.random_range(1..=24);
        let ch: Vec<Vec<i16>> =
            (0..n_sig).map(|_| (0..n).map(|_| rng.random_range(-2048..=2047)).collect()).collect();
        let bytes = encode_format212(&ch).unwrap();
        f212 += usize::from(decode_format212(&bytes, n, n_sig).unwrap() == ch);
    }
    let symbols = ['N', 'L', 'R', 'A', 'a', 'J', 'S', 'V', 'F', 'e', 'j', 'E', '/', 'f', 'Q', '+', '~', '|', 'x'];
    let mut ann = 0;
    for _ in 0..100_000 {
        let mut t = 0u64;
        let events: Vec<AnnotationEvent> = (0..rng.random_range(0..=8))
            .map(|_| {
                t += if rng.random_bool(0.2) { rng.random_range(1024..3_000_000) } else { rng.random_range(1..1024) };
                let mut e =
                    AnnotationEvent::new(t, symbol_code(symbols[rng.random_range(0..symbols.len())]).unwrap()).unwrap();
                if rng.random_bool(0.1) {
                    e.subtype = rng.random_range(-8..8);
                }
                if rng.random_bool(0.1) {
                    e.aux = Some((0..rng.random_range(1..6)).map(|_| rng.random_range(b'A'..=b'Z') as char).collect());
                }
                e
            })
            .collect();
        ann += usize::from(parse_annotations(&encode_annotations(&events).unwrap()).unwrap() == events);
    }
    // Reference values for record 100 as reported by an independent WFDB reader.
    let fixtures = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"));
    let h = parse_header(&std::fs::read_to_string(fixtures.join("100.hea")).unwrap()).unwrap();
    let header_ok = h.record_id == "100"
        && h.n_signals == 2
        && h.sampling_rate == 360.0
        && h.n_samples == 650_000
        && h.signals.iter().map(|s| s.lead_name.as_str()).eq(["MLII", "V5"])
        && h.signals.iter().all(|s| s.format_code == 212 && s.adc_gain == 200.0 && s.adc_resolution == 11 && s.adc_zero == 1024)
        && h.signals.iter().map(|s| (s.init_value, s.checksum)).eq([(995, -22131), (1011, 20052)]);
    Outcome::check(
        f212 == 100_000 && ann == 100_000 && header_ok,
        format!(
            "format 212 {f212}/100000 exact, annotations {ann}/100000 exact, record 100 header {}",
            if header_ok { "matches" } else { "MISMATCH" }
        ),
    )
}

fn tone(f: f64, rate: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect()
}

/// Least-squares amplitude of a sinusoid at `f` in `x[start..]`.
fn amplitude(x: &[f64], f: f64, rate: f64, start: usize) -> f64 {
    let (mut ss, mut sc, mut cc, mut xs, mut xc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, v) in x.iter().enumerate().skip(start) {
        let (s, c) = (2.0 * PI * f * i as f64 / rate).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        xs += v * s;
        xc += v * c;
    }
    let det = ss * cc - sc * sc;
    let a = (xs * cc - xc * sc) / det;
    let b = (xc * ss - xs * sc) / det;
    (a * a + b * b).sqrt()
}

fn db(x: f64) -> f64 {
    20.0 * x.max(1e-12).log10()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn criterion_5() -> Outcome {
    let rate = 360.0;
    let at_60 = db(amplitude(&notch_60hz(&tone(60.0, rate, 7200), rate).unwrap(), 60.0, rate, 1800));
    let mut worst_outside = 0.0f64;
    let mut f: f64 = 0.5;
    while f < 180.0 {
        if (f - 60.0).abs() >= 5.0 {
            let g = db(amplitude(&notch_60hz(&tone(f, rate, 7200), rate).unwrap(), f, rate, 1800));
            worst_outside = worst_outside.min(g);
        }
        f += 0.5;
    }

    let resampler = Resampler::new(ResampleSpec::mitbih()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lengths_ok = (0..200).all(|_| {
        let n = rng.random_range(1..5000);
        let y = resampler.process(&vec![0.0; n]).unwrap();
        y.len() == (n * 23).div_ceil(72)
    });
    let mut worst_tone = 0.0f64;
    for f in [0.5, 1.0, 5.0, 10.0, 20.0, 30.0, 40.0] {
        let y = resample_to_115(&tone(f, rate, 36_000)).unwrap();
        let a = amplitude(&y[..y.len() - 230], f, 115.0, 230);
        worst_tone = worst_tone.max((a - 1.0).abs());
    }

    // Residual drift: spline through the output at isoelectric points (PR and
    // TP segments, where the clean template is zero).
    let (clean, peaks) = normal_train(rate, 60.0, 0.8, 0.4);
    let drift = tone(0.5, rate, clean.len());
    let with_drift: Vec<f64> = clean.iter().zip(&drift).map(|(c, d)| c + d).collect();
    let y = remove_baseline(&with_drift, rate).unwrap();
    let (knots_t, knots_v): (Vec<f64>, Vec<f64>) = peaks
        .iter()
        .flat_map(|&r| [r - 0.1, r + 0.5])
        .filter(|t| (3.0..57.0).contains(t))
        .map(|t| (t, y[(t * rate).round() as usize]))
        .unzip();
    let grid: Vec<f64> = (0..clean.len())
        .map(|i| i as f64 / rate)
        .filter(|&t| t >= knots_t[0] && t <= knots_t[knots_t.len() - 1])
        .collect();
    let residual = natural_spline(&knots_t, &knots_v, &grid);
    let drift_on_grid: Vec<f64> = grid.iter().map(|t| (PI * t).sin()).collect();
    let attenuation = 1.0 - rms(&residual) / rms(&drift_on_grid);

    Outcome::check(
        at_60 <= -20.0 && worst_outside >= -3.0 && lengths_ok && worst_tone <= 0.02 && attenuation >= 0.90,
        format!(
            "notch {at_60:.1} dB at 60 Hz (<= -20), worst {worst_outside:.2} dB beyond +-5 Hz (>= -3); \
             resampled length ceil(23n/72) {}; passband tone error {:.2}% (<= 2%); 0.5 Hz drift attenuated {:.1}% (>= 90%)",
            if lengths_ok { "holds" } else { "VIOLATED" },
            100.0 * worst_tone,
            100.0 * attenuation
        ),
    )
}

fn max_gradient_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let n_in = rng.random_range(1..6);
        let n_out = rng.random_range(2..6);
        let m = Mlp::new(n_in, n_out, HiddenRule::Explicit(rng.random_range(1..8)), trial, 0.4).unwrap();
        let x: Vec<f64> = (0..n_in).map(|_| rng.random_range(-2.0..2.0)).collect();
        let target = rng.random_range(0..n_out);
        let g = m.gradient(&x, target).unwrap();
        type Get = fn(&mut Mlp) -> &mut Vec<f64>;
        let params: [(Get, &Vec<f64>); 4] =
            [(|m| &mut m.w1, &g.w1), (|m| &mut m.b1, &g.b1), (|m| &mut m.w2, &g.w2), (|m| &mut m.b2, &g.b2)];
        for (get, analytic) in params {
            for (k, &a) in analytic.iter().enumerate() {
                let mut plus = m.clone();
                get(&mut plus)[k] += eps;
                let mut minus = m.clone();
                get(&mut minus)[k] -= eps;
                let numeric = (plus.loss(&x, target).unwrap() - minus.loss(&x, target).unwrap()) / (2.0 * eps);
                worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8));
            }
        }
    }
    worst
}

fn criterion_6() -> Outcome {
    let grad = max_gradient_error();

    let shared = [1.0, 0.3, 0.8];
    let equal = [Gauss2 { mean: [0.0, 0.0], cov: shared }, Gauss2 { mean: [1.5, 1.0], cov: shared }];
    let unequal = [
        Gauss2 { mean: [0.0, 0.0], cov: [1.0, 0.2, 0.5] },
        Gauss2 { mean: [1.0, 0.5], cov: [3.0, -0.8, 2.0] },
    ];
    let (x, y) = gaussian_sample(&equal, 10_000, 60);
    let (tx, ty) = gaussian_sample(&equal, 100_000, 61);
    let lda = lda_fit(&x, &y, 2, None).unwrap();
    let lda_gap = (error_rate(&lda.predict_rows(&tx).unwrap(), &ty) - bayes_error(&equal, &tx, &ty)).abs();
    let (x, y) = gaussian_sample(&unequal, 10_000, 62);
    let (tx, ty) = gaussian_sample(&unequal, 100_000, 63);
    let qda = qda_fit(&x, &y, 2).unwrap();
    let qda_gap = (error_rate(&qda.predict_rows(&tx).unwrap(), &ty) - bayes_error(&unequal, &tx, &ty)).abs();

    let (bx, by) = common::blobs(5, 3, 300, 0.9, 9, 10);
    let lda5 = lda_fit(&bx, &by, 5, None).unwrap();
    let qda5 = qda_fit(&bx, &by, 5).unwrap();
    let moe = MixtureOfExperts::new(lda5.clone(), qda5.clone()).unwrap();
    let empty = DMatrix::zeros(0, 3);
    let train = TrainConfig { max_epochs: 20, ..TrainConfig::default() };
    let (ens, outcomes) = ensemble_train(
        &EnsembleConfig::with_seeds(HiddenRule::SumOver2, 0.2, train, 0, 4),
        5,
        &Dataset { x: &bx, y: &by },
        &Dataset { x: &empty, y: &[] },
    )
    .unwrap();
    let mlp = outcomes[0].model.clone();
    let models: [&dyn Classifier; 5] = [&lda5, &qda5, &moe, &mlp, &ens];
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut worst_sum = 0.0f64;
    for _ in 0..5000 {
        let scale = if rng.random_bool(0.1) { 40.0 } else { 3.0 };
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-scale..scale)).collect();
        for m in models {
            let post = m.posterior(&p).unwrap();
            worst_sum = worst_sum.max((post.iter().sum::<f64>() - 1.0).abs());
        }
    }

    let (xx, xy) = xor(25);
    let empty = DMatrix::zeros(0, 2);
    let cfg = TrainConfig { learning_rate: 0.3, max_epochs: 200, patience: 200, balanced: false };
    let learned = (0..20u64)
        .filter(|&seed| {
            let init = Mlp::new(2, 2, HiddenRule::Explicit(4), seed, 0.5).unwrap();
            let out = mlp_train(&init, &Dataset { x: &xx, y: &xy }, &Dataset { x: &empty, y: &[] }, &cfg).unwrap();
            // Any epoch up to 200 counts; the returned snapshot has the lowest loss.
            error_rate(&out.model.predict_rows(&xx).unwrap(), &xy) == 0.0
        })
        .count();

    Outcome::check(
        grad < 1e-4 && lda_gap <= 0.02 && qda_gap <= 0.02 && worst_sum <= 1e-9 && learned >= 18,
        format!(
            "gradient rel. error {grad:.1e} (< 1e-4); LDA {:.2} and QDA {:.2} points from the Bayes rate (<= 2); \
             max |sum posterior - 1| {worst_sum:.1e} (<= 1e-9); XOR learned by {learned}/20 seeds (>= 18)",
            100.0 * lda_gap,
            100.0 * qda_gap
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 50;
    let mut recovered = 0;
    let mut monotone = true;
    for t in 0..trials {
        let informative = pick_three(&mut rng);
        let m = informative_matrix(8, 150, informative, 700 + t);
        let (train, valid) = validation_split(&m, 0.25, t).unwrap();
        let data = Prepared::new(&train, &valid, LabelScheme::FiveClass).unwrap();
        let mut cfg = WrapperConfig::new(ModelKind::Lda);
        cfg.max_features = 5;
        let trace = forward_select(&data, &cfg).unwrap();
        monotone &= trace.steps.windows(2).all(|w| w[1].score >= w[0].score);
        let chosen: Vec<usize> = trace
            .final_subset
            .iter()
            .map(|name| m.columns().iter().position(|c| c == name).unwrap())
            .collect();
        recovered += usize::from(informative.iter().all(|i| chosen.contains(i)));
    }
    let gated = monotone && recovered * 10 >= trials as usize * 9;
    let soft = match mitdb() {
        Err(_) => "overlap with the published 11-feature LDA subset: BLOCKED (no MIT-BIH data)".to_string(),
        Ok(data) => {
            let (cfg, _tmp) = mitdb_config(&data);
            let (_, trace) = Pipeline::new(cfg).unwrap().select(ModelKind::Lda).unwrap();
            let overlap = trace.final_subset.iter().filter(|f| PUBLISHED_LDA_SUBSET.contains(&f.as_str())).count();
            format!(
                "overlap with the published 11-feature LDA subset {overlap}/11 (soft target >= 6, not gated): {}",
                trace.final_subset.join(",")
            )
        }
    };
    Outcome::check(
        gated,
        format!(
            "trace scores non-decreasing {}; 3 informative of 31 recovered in the first 5 steps in {recovered}/{trials} \
             trials (>= 90%); {soft}",
            if monotone { "in every trial" } else { "VIOLATED" }
        ),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("db");
    synthetic_db(&data, &QUICK_IDS, 180.0);
    let run = |k: usize| {
        let cfg = PipelineConfig {
            data_dir: data.clone(),
            cache_dir: dir.path().join(format!("cache{k}")),
            quick: true,
            seed: 42,
            ..PipelineConfig::default()
        };
        let out = dir.path().join(format!("out{k}"));
        Pipeline::new(cfg).unwrap().reproduce(&out).unwrap();
        ["report.txt", "results.tsv", "members.tsv"].map(|f| std::fs::read(out.join(f)).unwrap())
    };
    let start = Instant::now();
    let a = run(0);
    let b = run(1);
    let same: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x == y).collect();
    Outcome::check(
        same.iter().all(|&s| s),
        format!(
            "two clean-cache quick reproductions (synthetic records, seed 42, wrapper selection) in {:.1} s: \
             report.txt {}, results.tsv {}, members.tsv {}",
            start.elapsed().as_secs_f64(),
            if same[0] { "identical" } else { "DIFFERENT" },
            if same[1] { "identical" } else { "DIFFERENT" },
            if same[2] { "identical" } else { "DIFFERENT" }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("metric formula", criterion_1),
        ("pipeline reproduction", criterion_2),
        ("dataset integrity", criterion_3),
        ("parser oracle", criterion_4),
        ("DSP properties", criterion_5),
        ("classifier numerics", criterion_6),
        ("wrapper properties", criterion_7),
        ("determinism", criterion_8),
    ];
    // `cargo test -- <filter>` selects criteria by number or name.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let number = (k + 1).to_string();
        if !filters.is_empty() && !filters.iter().any(|f| *f == number || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Outcome { status: Status::Fail, detail: format!("panicked: {msg}") }
            });
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Blocked => "BLOCKED",
        };
        println!(
            "acceptance {number} {name}: {tag} [{:.1} s] {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
}
