//! Format 212: two 12-bit two's-complement samples packed into three bytes.
//!
//! ```text
//! byte0 = s0[7:0]
//! byte1 = s1[11:8] << 4 | s0[11:8]
//! byte2 = s1[7:0]
//! ```
//!
//! Samples of all channels are interleaved frame by frame. An odd total
//! sample count ends with a two-byte group holding only `s0`.

use crate::error::{Error, Result};

pub const MIN_SAMPLE: i16 = -2048;
pub const MAX_SAMPLE: i16 = 2047;

/// Bytes needed to store `total` interleaved samples.
pub fn encoded_len(total: usize) -> usize {
    (total / 2) * 3 + (total % 2) * 2
}

#[inline]
fn sign_extend_12(v: u16) -> i16 {
    ((v << 4) as i16) >> 4
}

/// Decode `n_samples` frames of `n_signals` interleaved channels.
pub fn decode_format212(bytes: &[u8], n_samples: usize, n_signals: usize) -> Result<Vec<Vec<i16>>> {
    if n_signals == 0 {
        return Err(Error::InvalidInput("format 212 decode needs at least one signal".into()));
    }
    let total = n_samples
        .checked_mul(n_signals)
        .ok_or_else(|| Error::InvalidInput("sample count overflow".into()))?;
    let expected = encoded_len(total);
    if bytes.len() < expected {
        return Err(Error::Truncated { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::LengthMismatch { expected, found: bytes.len() });
    }

    let mut channels: Vec<Vec<i16>> = (0..n_signals).map(|_| Vec::with_capacity(n_samples)).collect();
    let mut k = 0usize;
    let mut push = |s: i16| {
        channels[k % n_signals].push(s);
        k += 1;
    };
    let mut groups = bytes.chunks_exact(3);
    for g in &mut groups {
        let (b0, b1, b2) = (g[0] as u16, g[1] as u16, g[2] as u16);
        push(sign_extend_12(b0 | ((b1 & 0x0F) << 8)));
        push(sign_extend_12(b2 | ((b1 & 0xF0) << 4)));
    }
    let rest = groups.remainder();
    if total % 2 == 1 {
        let (b0, b1) = (rest[0] as u16, rest[1] as u16);
        push(sign_extend_12(b0 | ((b1 & 0x0F) << 8)));
    }
    Ok(channels)
}

/// Inverse of [`decode_format212`]. All channels must have equal length and
/// every sample must fit in 12 bits.
pub fn encode_format212(channels: &[Vec<i16>]) -> Result<Vec<u8>> {
    let n_signals = channels.len();
    if n_signals == 0 {
        return Ok(Vec::new());
    }
    let n_samples = channels[0].len();
    if channels.iter().any(|c| c.len() != n_samples) {
        return Err(Error::InvalidInput("channels differ in length".into()));
    }
    let mut interleaved = Vec::with_capacity(n_samples * n_signals);
    for i in 0..n_samples {
        for ch in channels {
            let s = ch[i];
            if !(MIN_SAMPLE..=MAX_SAMPLE).contains(&s) {
                return Err(Error::InvalidInput(format!("sample {s} does not fit in 12 bits")));
            }
            interleaved.push((s as u16) & 0x0FFF);
        }
    }
    let mut out = Vec::with_capacity(encoded_len(interleaved.len()));
    let mut pairs = interleaved.chunks_exact(2);
    for p in &mut pairs {
        out.push((p[0] & 0xFF) as u8);
        out.push((((p[1] >> 8) << 4) | (p[0] >> 8)) as u8);
        out.push((p[1] & 0xFF) as u8);
    }
    if let [last] = pairs.remainder() {
        out.push((last & 0xFF) as u8);
        out.push((last >> 8) as u8);
    }
    Ok(out)
}
