//! MIT-BIH ingest: WFDB headers, format-212 signals, MIT annotations, the
//! AAMI class grouping and the DS1/DS2 record split.

pub mod aami;
pub mod annotation;
pub mod dataset;
pub mod format212;
pub mod header;
pub mod record;

pub use aami::{map_to_aami, AamiClass};
pub use annotation::{encode_annotations, parse_annotations, AnnotationEvent};
pub use dataset::{partition_of, split_dataset, DatasetSplit, Partition, DS1, DS2, PACED};
pub use format212::{decode_format212, encode_format212};
pub use header::{parse_header, RecordHeader, SignalSpec};
pub use record::{load_record, write_record, BeatLabel, EcgRecord};
