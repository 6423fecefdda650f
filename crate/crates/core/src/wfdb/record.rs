use std::fs;
use std::path::Path;

use serde::Serialize;

use super::aami::{map_to_aami, AamiClass};
use super::annotation::{encode_annotations, parse_annotations, AnnotationEvent};
use super::format212::{decode_format212, encode_format212};
use super::header::{parse_header, RecordHeader};
use crate::error::{Error, Result};

/// One parsed recording. Immutable after construction.
#[derive(Debug, Clone)]
pub struct EcgRecord {
    pub header: RecordHeader,
    pub channels: Vec<Vec<i16>>,
    pub annotations: Vec<AnnotationEvent>,
}

/// A beat annotation paired with its AAMI class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BeatLabel {
    pub sample_index: u64,
    pub mit_code: u8,
    pub class: AamiClass,
}

impl EcgRecord {
    pub fn new(
        header: RecordHeader,
        channels: Vec<Vec<i16>>,
        annotations: Vec<AnnotationEvent>,
    ) -> Result<Self> {
        let rec = |message: String| Error::Record { record: header.record_id.clone(), message };
        if channels.len() != header.n_signals {
            return Err(rec(format!(
                "header declares {} signals, got {} channels",
                header.n_signals,
                channels.len()
            )));
        }
        if let Some(bad) = channels.iter().position(|c| c.len() != header.n_samples) {
            return Err(rec(format!(
                "channel {bad} has {} samples, header declares {}",
                channels[bad].len(),
                header.n_samples
            )));
        }
        if let Some(a) = annotations.iter().find(|a| a.sample_index >= header.n_samples as u64) {
            return Err(rec(format!("annotation at sample {} is past the end", a.sample_index)));
        }
        let mut prev: Option<u64> = None;
        for a in annotations.iter().filter(|a| a.is_beat()) {
            if prev.is_some_and(|p| a.sample_index <= p) {
                return Err(rec(format!("beat annotations not strictly increasing at {}", a.sample_index)));
            }
            prev = Some(a.sample_index);
        }
        Ok(Self { header, channels, annotations })
    }

    pub fn id(&self) -> &str {
        &self.header.record_id
    }

    pub fn sampling_rate(&self) -> f64 {
        self.header.sampling_rate
    }

    /// Physical value of sample `i` of channel `ch`.
    pub fn millivolts(&self, ch: usize, i: usize) -> f64 {
        let spec = &self.header.signals[ch];
        (self.channels[ch][i] as f64 - spec.baseline as f64) / spec.adc_gain
    }

    pub fn channel_mv(&self, ch: usize) -> Vec<f64> {
        let spec = &self.header.signals[ch];
        self.channels[ch]
            .iter()
            .map(|&s| (s as f64 - spec.baseline as f64) / spec.adc_gain)
            .collect()
    }

    /// Beat annotations with their AAMI class; non-beat annotations are skipped.
    pub fn beat_labels(&self) -> Result<Vec<BeatLabel>> {
        let mut out = Vec::new();
        for a in &self.annotations {
            if let Some(class) = map_to_aami(a.mit_code)? {
                out.push(BeatLabel { sample_index: a.sample_index, mit_code: a.mit_code, class });
            }
        }
        Ok(out)
    }

    pub fn class_counts(&self) -> Result<[usize; 5]> {
        let mut counts = [0usize; 5];
        for b in self.beat_labels()? {
            counts[b.class.index()] += 1;
        }
        Ok(counts)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Load `<dir>/<id>.hea`, its format-212 signal file(s) and `<dir>/<id>.<annotator>`.
pub fn load_record(dir: &Path, record_id: &str, annotator: &str) -> Result<EcgRecord> {
    let hea_path = dir.join(format!("{record_id}.hea"));
    let text = fs::read_to_string(&hea_path).map_err(|e| Error::io(&hea_path, e))?;
    let header = parse_header(&text)?;

    if let Some(s) = header.signals.iter().find(|s| s.format_code != 212) {
        return Err(Error::Record {
            record: record_id.to_string(),
            message: format!("signal format {} is not supported", s.format_code),
        });
    }

    // Signals sharing a file are interleaved in it, in header order.
    let mut channels: Vec<Vec<i16>> = vec![Vec::new(); header.n_signals];
    let mut done = vec![false; header.n_signals];
    for i in 0..header.n_signals {
        if done[i] {
            continue;
        }
        let file = &header.signals[i].file_name;
        let members: Vec<usize> =
            (i..header.n_signals).filter(|&j| &header.signals[j].file_name == file).collect();
        let bytes = read(&dir.join(file))?;
        let decoded = decode_format212(&bytes, header.n_samples, members.len())?;
        for (slot, data) in members.iter().zip(decoded) {
            channels[*slot] = data;
            done[*slot] = true;
        }
    }

    let annotations = parse_annotations(&read(&dir.join(format!("{record_id}.{annotator}")))?)?;
    EcgRecord::new(header, channels, annotations)
}

/// Write a record as `<id>.hea`, `<id>.dat` (all channels interleaved, format 212)
/// and `<id>.<annotator>`.
pub fn write_record(dir: &Path, record: &EcgRecord, annotator: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let h = &record.header;
    let id = &h.record_id;
    let dat_name = format!("{id}.dat");
    let mut text = format!("{id} {} {} {}\n", h.n_signals, h.sampling_rate, h.n_samples);
    for s in &h.signals {
        text.push_str(&format!(
            "{dat_name} 212 {}({})/{} {} {} {} {} {} {}\n",
            s.adc_gain,
            s.baseline,
            s.units,
            s.adc_resolution,
            s.adc_zero,
            s.init_value,
            s.checksum,
            s.block_size,
            s.lead_name
        ));
    }
    for c in &h.comments {
        text.push_str(&format!("# {c}\n"));
    }
    let write = |name: String, bytes: &[u8]| {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
    };
    write(format!("{id}.hea"), text.as_bytes())?;
    write(dat_name, &encode_format212(&record.channels)?)?;
    write(format!("{id}.{annotator}"), &encode_annotations(&record.annotations)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfdb::header::SignalSpec;

    fn header(n: usize) -> RecordHeader {
        RecordHeader {
            record_id: "t".into(),
            n_signals: 1,
            sampling_rate: 360.0,
            n_samples: n,
            signals: vec![SignalSpec {
                file_name: "t.dat".into(),
                format_code: 212,
                adc_gain: 200.0,
                baseline: 1024,
                units: "mV".into(),
                adc_resolution: 11,
                adc_zero: 1024,
                init_value: 0,
                checksum: 0,
                block_size: 0,
                lead_name: "MLII".into(),
            }],
            comments: vec![],
        }
    }

    #[test]
    fn millivolts_use_baseline_and_gain() {
        let r = EcgRecord::new(header(2), vec![vec![1224, 824]], vec![]).unwrap();
        assert_eq!(r.millivolts(0, 0), 1.0);
        assert_eq!(r.millivolts(0, 1), -1.0);
    }

    #[test]
    fn invariants_checked() {
        assert!(EcgRecord::new(header(3), vec![vec![0, 0]], vec![]).is_err());
        let late = AnnotationEvent::new(3, 1).unwrap();
        assert!(EcgRecord::new(header(3), vec![vec![0; 3]], vec![late]).is_err());
        let a = AnnotationEvent::new(1, 1).unwrap();
        assert!(EcgRecord::new(header(3), vec![vec![0; 3]], vec![a.clone(), a]).is_err());
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let anns = vec![
            AnnotationEvent::new(2, 1).unwrap(),
            AnnotationEvent::new(2, 28).unwrap(),
            AnnotationEvent::new(1500, 5).unwrap(),
        ];
        let samples: Vec<i16> = (0..2000).map(|i| ((i * 37) % 4000 - 2000) as i16).collect();
        let r = EcgRecord::new(header(2000), vec![samples], anns).unwrap();
        write_record(dir.path(), &r, "atr").unwrap();
        let back = load_record(dir.path(), "t", "atr").unwrap();
        assert_eq!(back.channels, r.channels);
        assert_eq!(back.annotations, r.annotations);
        assert_eq!(back.header.signals[0].adc_gain, 200.0);
        assert_eq!(back.class_counts().unwrap(), [1, 0, 1, 0, 0]);
    }
}
