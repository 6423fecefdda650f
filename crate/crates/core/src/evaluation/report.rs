use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::metrics::{BinaryMetrics, RunAggregate};
use crate::error::{Error, Result};

pub const MISSING: &str = "n/a";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub value: Option<f64>,
    pub stderr: Option<f64>,
}

impl Cell {
    pub fn new(value: f64) -> Self {
        Self { value: Some(value), stderr: None }
    }

    /// Two decimals, with the standard error in parentheses when known.
    pub fn render(&self) -> String {
        match (self.value, self.stderr) {
            (None, _) => MISSING.to_string(),
            (Some(v), None) => format!("{v:.2}"),
            (Some(v), Some(e)) => format!("{v:.2} ({})", trim_decimals(e)),
        }
    }
}

fn trim_decimals(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricTriple {
    pub se: Cell,
    pub ppv: Cell,
    pub f: Cell,
}

impl MetricTriple {
    pub fn from_values(se: f64, ppv: f64, f: f64) -> Self {
        Self { se: Cell::new(se), ppv: Cell::new(ppv), f: Cell::new(f) }
    }

    pub fn from_metrics(m: &BinaryMetrics) -> Self {
        let c = |value| Cell { value, stderr: None };
        Self { se: c(m.se), ppv: c(m.ppv), f: c(m.f_measure) }
    }

    pub fn from_aggregate(a: &RunAggregate) -> Self {
        let c = |s: super::metrics::MetricSummary| Cell { value: s.mean, stderr: s.stderr };
        Self { se: c(a.se), ppv: c(a.ppv), f: c(a.f_measure) }
    }

    fn cells(&self) -> [Cell; 3] {
        [self.se, self.ppv, self.f]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    /// Numbers copied from a publication rather than computed here.
    pub published: bool,
    pub sveb: MetricTriple,
    pub veb: MetricTriple,
}

/// Published results of earlier methods on the same DS1/DS2 protocol,
/// kept for side-by-side comparison. None of them is recomputed.
pub fn literature_rows() -> Vec<MethodRow> {
    let row = |method: &str, s: [f64; 3], v: [f64; 3]| MethodRow {
        method: method.to_string(),
        published: true,
        sveb: MetricTriple::from_values(s[0], s[1], s[2]),
        veb: MetricTriple::from_values(v[0], v[1], v[2]),
    };
    vec![
        // de Chazal, O'Dwyer, Reilly, IEEE TBME 2004
        row("de Chazal et al. 2004", [75.9, 38.5, 51.08], [77.7, 81.9, 79.74]),
        // de Chazal, Reilly, IEEE TBME 2006 (patient-adaptable)
        row("de Chazal & Reilly 2006", [87.7, 47.0, 61.20], [94.3, 96.2, 95.24]),
        // Alvarado et al., integrate-and-fire sampling
        row("Alvarado et al.", [86.19, 56.68, 68.38], [92.43, 94.82, 93.60]),
        // Ince, Kiranyaz, Gabbouj, IEEE TBME 2009
        row("Ince et al. 2009", [63.5, 53.7, 58.19], [84.6, 87.4, 85.97]),
        // Wiens, Guttag, active learning SVM, 2010
        row("Wiens & Guttag 2010", [92.0, 99.5, 95.60], [99.6, 99.3, 99.44]),
    ]
}

const HEADINGS: [&str; 6] = ["SVEB Se", "SVEB PPV", "SVEB F", "VEB Se", "VEB PPV", "VEB F"];

/// Human-readable comparison table.
pub fn report_table(rows: &[MethodRow]) -> String {
    let mut cells: Vec<Vec<String>> = vec![std::iter::once("Method".to_string())
        .chain(HEADINGS.iter().map(|h| h.to_string()))
        .collect()];
    for r in rows {
        let name = if r.published { format!("{} (published)", r.method) } else { r.method.clone() };
        cells.push(
            std::iter::once(name)
                .chain(r.sveb.cells().iter().chain(r.veb.cells().iter()).map(Cell::render))
                .collect(),
        );
    }
    let widths: Vec<usize> =
        (0..cells[0].len()).map(|j| cells.iter().map(|row| row[j].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in cells.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = widths[j]) } else { format!("{c:>w$}", w = widths[j]) })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if i == 0 {
            let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        }
    }
    out
}

const TSV_COLUMNS: [&str; 14] = [
    "method",
    "published",
    "sveb_se",
    "sveb_se_stderr",
    "sveb_ppv",
    "sveb_ppv_stderr",
    "sveb_f",
    "sveb_f_stderr",
    "veb_se",
    "veb_se_stderr",
    "veb_ppv",
    "veb_ppv_stderr",
    "veb_f",
    "veb_f_stderr",
];

fn opt(x: Option<f64>) -> String {
    // `{}` prints the shortest string that parses back to the same f64
    x.map_or_else(|| MISSING.to_string(), |v| format!("{v}"))
}

/// Machine-readable results, one row per method.
pub fn write_results_tsv<W: Write>(rows: &[MethodRow], mut w: W) -> Result<()> {
    let io = |e| Error::io("<results>", e);
    writeln!(w, "{}", TSV_COLUMNS.join("\t")).map_err(io)?;
    for r in rows {
        if r.method.contains(['\t', '\n']) {
            return Err(Error::InvalidInput(format!("method name {:?} has a tab or newline", r.method)));
        }
        let mut fields = vec![r.method.clone(), r.published.to_string()];
        for c in r.sveb.cells().iter().chain(r.veb.cells().iter()) {
            fields.push(opt(c.value));
            fields.push(opt(c.stderr));
        }
        writeln!(w, "{}", fields.join("\t")).map_err(io)?;
    }
    Ok(())
}

pub fn read_results_tsv<R: BufRead>(r: R) -> Result<Vec<MethodRow>> {
    let bad = |line: usize, msg: String| Error::format("results table", format!("line {line}: {msg}"));
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l.map_err(|e| Error::io("<results>", e))?,
        None => return Err(bad(1, "empty file".into())),
    };
    if header.split('\t').ne(TSV_COLUMNS.iter().copied()) {
        return Err(bad(1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io("<results>", e))?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != TSV_COLUMNS.len() {
            return Err(bad(i + 1, format!("{} fields, expected {}", f.len(), TSV_COLUMNS.len())));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s == MISSING {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| bad(i + 1, format!("bad number `{s}`")))
        };
        let cell = |k: usize| -> Result<Cell> { Ok(Cell { value: num(f[k])?, stderr: num(f[k + 1])? }) };
        let published = f[1].parse().map_err(|_| bad(i + 1, format!("bad flag `{}`", f[1])))?;
        rows.push(MethodRow {
            method: f[0].to_string(),
            published,
            sveb: MetricTriple { se: cell(2)?, ppv: cell(4)?, f: cell(6)? },
            veb: MetricTriple { se: cell(8)?, ppv: cell(10)?, f: cell(12)? },
        });
    }
    Ok(rows)
}
