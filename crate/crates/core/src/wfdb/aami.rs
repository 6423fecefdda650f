use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::annotation::{code_symbol, is_beat_code};
use crate::error::{Error, Result};

/// AAMI heartbeat classes. The declaration order is the tie-break order used
/// by every argmax in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AamiClass {
    N,
    S,
    V,
    F,
    Q,
}

impl AamiClass {
    pub const ALL: [AamiClass; 5] = [AamiClass::N, AamiClass::S, AamiClass::V, AamiClass::F, AamiClass::Q];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AamiClass::N => "N",
            AamiClass::S => "S",
            AamiClass::V => "V",
            AamiClass::F => "F",
            AamiClass::Q => "Q",
        }
    }
}

impl fmt::Display for AamiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AamiClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" => Ok(AamiClass::N),
            "S" => Ok(AamiClass::S),
            "V" => Ok(AamiClass::V),
            "F" => Ok(AamiClass::F),
            "Q" => Ok(AamiClass::Q),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// Map an MIT annotation code to its AAMI class.
///
/// Non-beat annotations (rhythm, noise, wave markers) give `Ok(None)`. Beat
/// codes outside the AAMI grouping (`B`, `r`, `n`, `?`) and codes missing from
/// the MIT table are errors.
pub fn map_to_aami(mit_code: u8) -> Result<Option<AamiClass>> {
    let symbol = code_symbol(mit_code).ok_or(Error::UnknownAnnotationCode(mit_code))?;
    let class = match symbol {
        'N' | 'L' | 'R' | 'e' | 'j' => AamiClass::N,
        'A' | 'a' | 'J' | 'S' => AamiClass::S,
        'V' | 'E' => AamiClass::V,
        'F' => AamiClass::F,
        '/' | 'f' | 'Q' => AamiClass::Q,
        _ if is_beat_code(mit_code) => return Err(Error::UnmappedBeatCode(mit_code)),
        _ => return Ok(None),
    };
    Ok(Some(class))
}
