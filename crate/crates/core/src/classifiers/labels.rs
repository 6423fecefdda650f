use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SvebSubclass;
use crate::wfdb::AamiClass;

/// Positive class of a one-vs-rest evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Sveb,
    Veb,
}

impl Target {
    pub const BOTH: [Target; 2] = [Target::Sveb, Target::Veb];

    pub fn is_positive(self, truth: AamiClass) -> bool {
        match self {
            Target::Sveb => truth == AamiClass::S,
            Target::Veb => truth == AamiClass::V,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Sveb => "SVEB",
            Target::Veb => "VEB",
        })
    }
}

/// Output classes of a classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelScheme {
    /// N, S, V, F, Q.
    FiveClass,
    /// N, S1, S2, V. F and Q beats are left out of training.
    FourClass,
}

const FIVE: [&str; 5] = ["N", "S", "V", "F", "Q"];
const FOUR: [&str; 4] = ["N", "S1", "S2", "V"];

impl LabelScheme {
    pub fn class_names(self) -> &'static [&'static str] {
        match self {
            LabelScheme::FiveClass => &FIVE,
            LabelScheme::FourClass => &FOUR,
        }
    }

    pub fn n_classes(self) -> usize {
        self.class_names().len()
    }

    /// Training class of a beat, or `None` when the scheme has no slot for it.
    pub fn class_of(self, label: AamiClass, sub: Option<SvebSubclass>) -> Result<Option<usize>> {
        Ok(match self {
            LabelScheme::FiveClass => Some(label.index()),
            LabelScheme::FourClass => match label {
                AamiClass::N => Some(0),
                AamiClass::S => match sub {
                    Some(SvebSubclass::S1) => Some(1),
                    Some(SvebSubclass::S2) => Some(2),
                    None => {
                        return Err(Error::InvalidInput(
                            "four-class training needs an S1/S2 subclass on every SVEB".into(),
                        ))
                    }
                },
                AamiClass::V => Some(3),
                AamiClass::F | AamiClass::Q => None,
            },
        })
    }

    /// AAMI class a predicted index stands for.
    pub fn aami_class(self, index: usize) -> AamiClass {
        match self {
            LabelScheme::FiveClass => AamiClass::ALL[index],
            LabelScheme::FourClass => [AamiClass::N, AamiClass::S, AamiClass::S, AamiClass::V][index],
        }
    }

    /// Whether predicted class `index` counts as a positive for `target`.
    pub fn is_positive(self, index: usize, target: Target) -> bool {
        let name = self.class_names()[index];
        match target {
            Target::Sveb => matches!(name, "S" | "S1" | "S2"),
            Target::Veb => name == "V",
        }
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelScheme::FiveClass => "5-class",
            LabelScheme::FourClass => "4-class",
        })
    }
}

impl FromStr for LabelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "5" | "5-class" | "five" => Ok(LabelScheme::FiveClass),
            "4" | "4-class" | "four" => Ok(LabelScheme::FourClass),
            other => Err(Error::InvalidParameter(format!("unknown label scheme `{other}`"))),
        }
    }
}

/// Binary predictions from class tokens of either scheme.
pub fn consolidate_to_binary_labels<S: AsRef<str>>(predictions: &[S], target: Target) -> Result<Vec<bool>> {
    predictions
        .iter()
        .map(|p| match (p.as_ref(), target) {
            ("S" | "S1" | "S2", Target::Sveb) | ("V", Target::Veb) => Ok(true),
            ("N" | "S" | "S1" | "S2" | "V" | "F" | "Q", _) => Ok(false),
            (other, _) => Err(Error::UnknownLabel(other.to_string())),
        })
        .collect()
}

/// Index of the largest value. Ties go to the lowest index, which is the
/// N < S < V < F < Q order for both schemes.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
