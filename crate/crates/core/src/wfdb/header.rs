//! WFDB header (`.hea`) parsing.
//!
//! Only single-segment records are handled. The record line is
//! `name nsig fs nsamp [time [date]]` where `fs` may carry a counter frequency
//! (`360/720(0)`); each signal line is
//! `file format[xN][:skew][+offset] gain[(baseline)][/units] res zero init checksum blocksize desc`.
//! Missing trailing fields take the WFDB defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-signal specification from one header line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub file_name: String,
    pub format_code: u16,
    /// ADC counts per millivolt.
    pub adc_gain: f64,
    /// Sample value corresponding to 0 mV. Defaults to `adc_zero`.
    pub baseline: i32,
    pub units: String,
    pub adc_resolution: u8,
    pub adc_zero: i32,
    pub init_value: i32,
    pub checksum: i32,
    pub block_size: u32,
    pub lead_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub record_id: String,
    pub n_signals: usize,
    pub sampling_rate: f64,
    pub n_samples: usize,
    pub signals: Vec<SignalSpec>,
    pub comments: Vec<String>,
}

impl RecordHeader {
    pub fn signal(&self, channel: usize) -> Option<&SignalSpec> {
        self.signals.get(channel)
    }
}

pub fn parse_header(text: &str) -> Result<RecordHeader> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut comments = Vec::new();
    let (record_line_no, record_line) = loop {
        match lines.next() {
            Some((_, l)) if l.starts_with('#') => comments.push(strip_comment(l)),
            Some(found) => break found,
            None => return Err(Error::header(1, "missing record line")),
        }
    };

    let fields: Vec<&str> = record_line.split_whitespace().collect();
    if fields.len() < 4 {
        return Err(Error::header(
            record_line_no,
            "record line needs record id, signal count, sampling rate and sample count",
        ));
    }
    let record_id = fields[0];
    if record_id.contains('/') {
        return Err(Error::header(record_line_no, "multi-segment records are not supported"));
    }
    let n_signals: usize = fields[1]
        .parse()
        .map_err(|_| Error::header(record_line_no, format!("bad signal count `{}`", fields[1])))?;
    if n_signals == 0 {
        return Err(Error::header(record_line_no, "record has no signals"));
    }
    let sampling_rate = parse_frequency(fields[2])
        .ok_or_else(|| Error::header(record_line_no, format!("bad sampling rate `{}`", fields[2])))?;
    if !(sampling_rate > 0.0) {
        return Err(Error::header(record_line_no, "sampling rate must be positive"));
    }
    let n_samples: usize = fields[3]
        .parse()
        .map_err(|_| Error::header(record_line_no, format!("bad sample count `{}`", fields[3])))?;

    let mut signals = Vec::with_capacity(n_signals);
    for (line_no, line) in lines {
        if line.starts_with('#') {
            comments.push(strip_comment(line));
            continue;
        }
        if signals.len() == n_signals {
            // Anything beyond the declared signals is ignored.
            continue;
        }
        signals.push(parse_signal_line(line_no, line)?);
    }
    if signals.len() != n_signals {
        return Err(Error::header(
            record_line_no,
            format!("declared {n_signals} signals but found {}", signals.len()),
        ));
    }

    Ok(RecordHeader {
        record_id: record_id.to_string(),
        n_signals,
        sampling_rate,
        n_samples,
        signals,
        comments,
    })
}

fn strip_comment(line: &str) -> String {
    line.trim_start_matches('#').trim().to_string()
}

/// `360`, `360/720` or `360/720(0)`; only the sampling frequency is kept.
fn parse_frequency(field: &str) -> Option<f64> {
    let fs = field.split('/').next()?;
    let value: f64 = fs.parse().ok()?;
    value.is_finite().then_some(value)
}

fn parse_signal_line(line_no: usize, line: &str) -> Result<SignalSpec> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 2 {
        return Err(Error::header(line_no, "signal line needs a file name and a format"));
    }
    let file_name = fields[0].to_string();

    let format_field = fields[1];
    let digits: String = format_field.chars().take_while(|c| c.is_ascii_digit()).collect();
    let format_code: u16 = digits
        .parse()
        .map_err(|_| Error::header(line_no, format!("bad format `{format_field}`")))?;

    let mut adc_gain = 200.0;
    let mut baseline: Option<i32> = None;
    let mut units = "mV".to_string();
    if let Some(gain_field) = fields.get(2) {
        let (gain_part, unit_part) = match gain_field.split_once('/') {
            Some((g, u)) => (g, Some(u)),
            None => (*gain_field, None),
        };
        let (gain_str, base_str) = match gain_part.split_once('(') {
            Some((g, rest)) => (g, Some(rest.trim_end_matches(')'))),
            None => (gain_part, None),
        };
        let gain: f64 = gain_str
            .parse()
            .map_err(|_| Error::header(line_no, format!("bad ADC gain `{gain_field}`")))?;
        // WFDB treats a zero gain as "uncalibrated, use the default".
        if gain != 0.0 {
            adc_gain = gain;
        }
        if let Some(b) = base_str {
            baseline = Some(
                b.parse()
                    .map_err(|_| Error::header(line_no, format!("bad baseline `{b}`")))?,
            );
        }
        if let Some(u) = unit_part {
            units = u.to_string();
        }
    }
    if !(adc_gain > 0.0) || !adc_gain.is_finite() {
        return Err(Error::header(line_no, "ADC gain must be positive"));
    }

    let int_field = |idx: usize, name: &str, default: i64| -> Result<i64> {
        match fields.get(idx) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::header(line_no, format!("bad {name} `{s}`"))),
            None => Ok(default),
        }
    };
    let adc_resolution = int_field(3, "ADC resolution", 12)?;
    let adc_zero = int_field(4, "ADC zero", 0)?;
    let init_value = int_field(5, "initial value", 0)?;
    let checksum = int_field(6, "checksum", 0)?;
    let block_size = int_field(7, "block size", 0)?;
    let lead_name = if fields.len() > 8 { fields[8..].join(" ") } else { String::new() };

    let adc_resolution = u8::try_from(adc_resolution)
        .map_err(|_| Error::header(line_no, "ADC resolution out of range"))?;
    let to_i32 = |v: i64, name: &str| {
        i32::try_from(v).map_err(|_| Error::header(line_no, format!("{name} out of range")))
    };
    let adc_zero = to_i32(adc_zero, "ADC zero")?;

    Ok(SignalSpec {
        file_name,
        format_code,
        adc_gain,
        baseline: baseline.unwrap_or(adc_zero),
        units,
        adc_resolution,
        adc_zero,
        init_value: to_i32(init_value, "initial value")?,
        checksum: to_i32(checksum, "checksum")?,
        block_size: u32::try_from(block_size)
            .map_err(|_| Error::header(line_no, "block size out of range"))?,
        lead_name,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const RECORD_100: &str = "100 2 360 650000\n\
        100.dat 212 200 11 1024 995 -22131 0 MLII\n\
        100.dat 212 200 11 1024 1011 20052 0 V5\n\
        # 69 M 1085 1629 x1\n\
        # Aldomet, Inderal\n";

    #[test]
    fn record_100_layout() {
        let h = parse_header(RECORD_100).unwrap();
        assert_eq!(h.record_id, "100");
        assert_eq!(h.n_signals, 2);
        assert_eq!(h.sampling_rate, 360.0);
        assert_eq!(h.n_samples, 650_000);
        assert_eq!(h.signals[0].adc_gain, 200.0);
        assert_eq!(h.signals[0].format_code, 212);
        assert_eq!(h.signals[0].adc_resolution, 11);
        assert_eq!(h.signals[0].adc_zero, 1024);
        assert_eq!(h.signals[0].baseline, 1024);
        assert_eq!(h.signals[1].lead_name, "V5");
        assert_eq!(h.comments.len(), 2);
    }

    #[test]
    fn zero_sampling_rate_rejected() {
        let err = parse_header("100 1 0 10\n100.dat 212 200 11 1024 0 0 0 MLII\n").unwrap_err();
        assert!(matches!(err, Error::Header { line: 1, .. }), "{err}");
    }

    #[test]
    fn single_signal() {
        let h = parse_header("x 1 360 20\nx.dat 212 200 11 1024 0 0 0 MLII\n").unwrap();
        assert_eq!(h.n_signals, 1);
        assert_eq!(h.signals.len(), 1);
    }

    #[test]
    fn gain_with_baseline_and_units() {
        let h = parse_header("fx1 1 360 5001\nfx1.dat 212 200(1024)/mV 12 0 -2048 31111 0 MLII\n")
            .unwrap();
        let s = &h.signals[0];
        assert_eq!(s.baseline, 1024);
        assert_eq!(s.adc_zero, 0);
        assert_eq!(s.units, "mV");
        assert_eq!(s.init_value, -2048);
    }

    #[test]
    fn optional_fields_default() {
        let h = parse_header("r 1 250/500(0) 100\nr.dat 212\n").unwrap();
        assert_eq!(h.sampling_rate, 250.0);
        assert_eq!(h.signals[0].adc_gain, 200.0);
        assert_eq!(h.signals[0].adc_resolution, 12);
        assert_eq!(h.signals[0].lead_name, "");
    }

    #[test]
    fn malformed_signal_line_reports_line_number() {
        let err = parse_header("r 2 360 10\nr.dat 212 200 11 1024 0 0 0 I\n\nr.dat 212 abc\n")
            .unwrap_err();
        assert!(matches!(err, Error::Header { line: 4, .. }), "{err}");
    }

    #[test]
    fn missing_signal_lines() {
        assert!(parse_header("r 2 360 10\nr.dat 212 200 11 1024 0 0 0 I\n").is_err());
        assert!(parse_header("r 2 360\n").is_err());
        assert!(parse_header("").is_err());
    }
}
