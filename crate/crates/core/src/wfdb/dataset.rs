use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DS1: [&str; 22] = [
    "101", "106", "108", "109", "112", "114", "115", "116", "118", "119", "122", "124", "201", "203",
    "205", "207", "208", "209", "215", "220", "223", "230",
];

pub const DS2: [&str; 22] = [
    "100", "103", "105", "111", "113", "117", "121", "123", "200", "202", "210", "212", "213", "214",
    "219", "221", "222", "228", "231", "232", "233", "234",
];

/// Records of paced patients, excluded from both splits.
pub const PACED: [&str; 4] = ["102", "104", "107", "217"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Partition {
    Ds1,
    Ds2,
    ExcludedPaced,
}

pub fn partition_of(record_id: &str) -> Result<Partition> {
    if DS1.contains(&record_id) {
        Ok(Partition::Ds1)
    } else if DS2.contains(&record_id) {
        Ok(Partition::Ds2)
    } else if PACED.contains(&record_id) {
        Ok(Partition::ExcludedPaced)
    } else {
        Err(Error::UnknownRecord(record_id.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub ds1: Vec<String>,
    pub ds2: Vec<String>,
    pub excluded_paced: Vec<String>,
}

impl DatasetSplit {
    /// The full 48-record assignment.
    pub fn standard() -> Self {
        let owned = |ids: &[&str]| ids.iter().map(|s| s.to_string()).collect();
        Self { ds1: owned(&DS1), ds2: owned(&DS2), excluded_paced: owned(&PACED) }
    }
}

/// Assign each record to DS1, DS2 or the paced exclusion list, keeping the
/// canonical ordering of each list.
pub fn split_dataset<S: AsRef<str>>(records: &[S]) -> Result<DatasetSplit> {
    let mut split = DatasetSplit::default();
    for r in records {
        let id = r.as_ref();
        let bucket = match partition_of(id)? {
            Partition::Ds1 => &mut split.ds1,
            Partition::Ds2 => &mut split.ds2,
            Partition::ExcludedPaced => &mut split.excluded_paced,
        };
        if !bucket.iter().any(|x| x == id) {
            bucket.push(id.to_string());
        }
    }
    let order = |list: &mut Vec<String>, canon: &[&str]| {
        list.sort_by_key(|id| canon.iter().position(|c| c == id));
    };
    order(&mut split.ds1, &DS1);
    order(&mut split.ds2, &DS2);
    order(&mut split.excluded_paced, &PACED);
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_lists() {
        assert_eq!(partition_of("101").unwrap(), Partition::Ds1);
        assert_eq!(partition_of("100").unwrap(), Partition::Ds2);
        assert_eq!(partition_of("102").unwrap(), Partition::ExcludedPaced);
        assert!(matches!(partition_of("999"), Err(Error::UnknownRecord(_))));
    }

    #[test]
    fn splits_are_disjoint_and_cover_48() {
        let s = DatasetSplit::standard();
        assert_eq!(s.ds1.len(), 22);
        assert_eq!(s.ds2.len(), 22);
        let mut all: Vec<&String> = s.ds1.iter().chain(&s.ds2).chain(&s.excluded_paced).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 48);
    }

    #[test]
    fn split_subset_keeps_canonical_order() {
        let s = split_dataset(&["230", "100", "101", "217", "101"]).unwrap();
        assert_eq!(s.ds1, vec!["101", "230"]);
        assert_eq!(s.ds2, vec!["100"]);
        assert_eq!(s.excluded_paced, vec!["217"]);
        assert!(split_dataset(&["100", "42"]).is_err());
    }
}
