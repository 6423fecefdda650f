//! MIT-format binary annotation files (`.atr`).
//!
//! The stream is a sequence of little-endian 16-bit words. The top six bits
//! are the annotation code, the low ten bits the sample delta (or, for
//! pseudo-codes, a payload). Pseudo-codes:
//!
//! * `SKIP` (59): the next four bytes hold a 32-bit delta, high word first.
//! * `NUM` (60), `SUB` (61), `CHN` (62): set a field of the preceding annotation.
//! * `AUX` (63): the low bits give a byte count; the payload follows, padded to even length.
//!
//! A zero word terminates the stream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SKIP: u8 = 59;
pub const NUM: u8 = 60;
pub const SUB: u8 = 61;
pub const CHN: u8 = 62;
pub const AUX: u8 = 63;

const MAX_DELTA: u64 = 0x3FF;

/// MIT annotation code table: (code, symbol, is_beat).
const CODE_TABLE: &[(u8, char, bool)] = &[
    (0, ' ', false),
    (1, 'N', true),
    (2, 'L', true),
    (3, 'R', true),
    (4, 'a', true),
    (5, 'V', true),
    (6, 'F', true),
    (7, 'J', true),
    (8, 'A', true),
    (9, 'S', true),
    (10, 'E', true),
    (11, 'j', true),
    (12, '/', true),
    (13, 'Q', true),
    (14, '~', false),
    (16, '|', false),
    (18, 's', false),
    (19, 'T', false),
    (20, '*', false),
    (21, 'D', false),
    (22, '"', false),
    (23, '=', false),
    (24, 'p', false),
    (25, 'B', true),
    (26, '^', false),
    (27, 't', false),
    (28, '+', false),
    (29, 'u', false),
    (30, '?', true),
    (31, '!', false),
    (32, '[', false),
    (33, ']', false),
    (34, 'e', true),
    (35, 'n', true),
    (36, '@', false),
    (37, 'x', false),
    (38, 'f', true),
    (39, '(', false),
    (40, ')', false),
    (41, 'r', true),
];

fn lookup(code: u8) -> Option<(char, bool)> {
    CODE_TABLE
        .iter()
        .find(|(c, _, _)| *c == code)
        .map(|&(_, sym, beat)| (sym, beat))
}

/// Symbol for a known annotation code.
pub fn code_symbol(code: u8) -> Option<char> {
    lookup(code).map(|(s, _)| s)
}

/// Code for a known annotation symbol.
pub fn symbol_code(symbol: char) -> Option<u8> {
    CODE_TABLE.iter().find(|(_, s, _)| *s == symbol).map(|(c, _, _)| *c)
}

/// Whether the code labels a QRS complex (as opposed to rhythm, noise or wave markers).
pub fn is_beat_code(code: u8) -> bool {
    lookup(code).is_some_and(|(_, beat)| beat)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationEvent {
    /// Absolute sample index at the record's native rate.
    pub sample_index: u64,
    pub mit_code: u8,
    pub symbol: char,
    pub subtype: i8,
    pub channel: u8,
    pub num: i8,
    pub aux: Option<String>,
}

impl AnnotationEvent {
    pub fn new(sample_index: u64, mit_code: u8) -> Result<Self> {
        let symbol = code_symbol(mit_code).ok_or(Error::UnknownAnnotationCode(mit_code))?;
        Ok(Self { sample_index, mit_code, symbol, subtype: 0, channel: 0, num: 0, aux: None })
    }

    pub fn is_beat(&self) -> bool {
        is_beat_code(self.mit_code)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn word(&mut self) -> Result<Option<u16>> {
        match self.bytes.len() - self.pos {
            0 => Ok(None),
            1 => Err(Error::annotation(self.pos, "stream ends inside an annotation word")),
            _ => {
                let w = u16::from_le_bytes([self.bytes[self.pos], self.bytes[self.pos + 1]]);
                self.pos += 2;
                Ok(Some(w))
            }
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::annotation(self.pos, format!("stream ends inside {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

/// Parse a complete annotation file. Pseudo-annotations are folded into the
/// events they modify; non-beat annotations are kept.
pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<AnnotationEvent>> {
    let mut r = Reader { bytes, pos: 0 };
    let mut events: Vec<AnnotationEvent> = Vec::new();
    let mut time: i64 = 0;
    let mut channel: u8 = 0;
    let mut num: i8 = 0;

    loop {
        let offset = r.pos;
        let Some(word) = r.word()? else { break };
        let code = (word >> 10) as u8;
        let value = word & 0x3FF;
        match code {
            0 if value == 0 => break,
            SKIP => {
                let ext = r.take(4, "a SKIP extension")?;
                let hi = u16::from_le_bytes([ext[0], ext[1]]) as u32;
                let lo = u16::from_le_bytes([ext[2], ext[3]]) as u32;
                time += ((hi << 16) | lo) as i32 as i64;
            }
            NUM | SUB | CHN => {
                let last = events
                    .last_mut()
                    .ok_or_else(|| Error::annotation(offset, "modifier before any annotation"))?;
                match code {
                    NUM => {
                        last.num = value as i8;
                        num = last.num;
                    }
                    SUB => last.subtype = value as i8,
                    _ => {
                        last.channel = value as u8;
                        channel = last.channel;
                    }
                }
            }
            AUX => {
                let len = value as usize;
                let padded = len + (len & 1);
                let payload = r.take(padded, "an AUX payload")?;
                let last = events
                    .last_mut()
                    .ok_or_else(|| Error::annotation(offset, "AUX before any annotation"))?;
                let text = &payload[..len];
                let text = text.split(|&b| b == 0).next().unwrap_or(&[]);
                last.aux = Some(String::from_utf8_lossy(text).into_owned());
            }
            _ => {
                time += value as i64;
                if time < 0 {
                    return Err(Error::annotation(offset, "negative sample index"));
                }
                let symbol = code_symbol(code).ok_or_else(|| {
                    Error::annotation(offset, format!("unknown annotation code {code}"))
                })?;
                events.push(AnnotationEvent {
                    sample_index: time as u64,
                    mit_code: code,
                    symbol,
                    subtype: 0,
                    channel,
                    num,
                    aux: None,
                });
            }
        }
    }
    Ok(events)
}

/// Write events in MIT format. Used for round-trip verification and for
/// synthetic databases.
pub fn encode_annotations(events: &[AnnotationEvent]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(events.len() * 2 + 2);
    let word = |out: &mut Vec<u8>, code: u8, value: u16| {
        out.extend_from_slice(&(((code as u16) << 10) | (value & 0x3FF)).to_le_bytes());
    };
    let mut prev: u64 = 0;
    let mut channel: u8 = 0;
    let mut num: i8 = 0;
    for ev in events {
        if ev.mit_code == 0 || ev.mit_code >= SKIP || code_symbol(ev.mit_code).is_none() {
            return Err(Error::UnknownAnnotationCode(ev.mit_code));
        }
        let delta = ev
            .sample_index
            .checked_sub(prev)
            .ok_or_else(|| Error::InvalidInput("annotations must be sorted by sample".into()))?;
        let mut field = delta;
        if delta > MAX_DELTA {
            let d = u32::try_from(delta)
                .ok()
                .filter(|d| *d <= i32::MAX as u32)
                .ok_or_else(|| Error::InvalidInput("annotation gap exceeds 32 bits".into()))?;
            word(&mut out, SKIP, 0);
            out.extend_from_slice(&((d >> 16) as u16).to_le_bytes());
            out.extend_from_slice(&((d & 0xFFFF) as u16).to_le_bytes());
            field = 0;
        }
        word(&mut out, ev.mit_code, field as u16);
        if ev.subtype != 0 {
            word(&mut out, SUB, ev.subtype as u8 as u16);
        }
        if ev.channel != channel {
            word(&mut out, CHN, ev.channel as u16);
            channel = ev.channel;
        }
        if ev.num != num {
            word(&mut out, NUM, ev.num as u8 as u16);
            num = ev.num;
        }
        if let Some(aux) = &ev.aux {
            let b = aux.as_bytes();
            if b.len() > MAX_DELTA as usize {
                return Err(Error::InvalidInput("AUX payload longer than 1023 bytes".into()));
            }
            word(&mut out, AUX, b.len() as u16);
            out.extend_from_slice(b);
            if b.len() % 2 == 1 {
                out.push(0);
            }
        }
        prev = ev.sample_index;
    }
    out.extend_from_slice(&[0, 0]);
    Ok(out)
}
