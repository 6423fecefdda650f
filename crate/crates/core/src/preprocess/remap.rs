use crate::error::{Error, Result};

/// Samples searched on each side of a remapped R-peak.
pub const REFINE_RADIUS: usize = 5;

/// `round(index * up / down)`, halves rounded up.
pub fn remap_index(index: u64, up: usize, down: usize) -> u64 {
    (2 * index * up as u64 + down as u64) / (2 * down as u64)
}

/// Remap strictly increasing indices to the new rate. Collisions are pushed
/// forward one sample at a time so the output stays strictly increasing.
pub fn remap_annotations(indices: &[u64], up: usize, down: usize, out_len: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(indices.len());
    let mut prev: Option<u64> = None;
    for &idx in indices {
        let mut r = remap_index(idx, up, down);
        if let Some(p) = prev {
            if r <= p {
                r = p + 1;
            }
        }
        if r as usize >= out_len {
            return Err(Error::InvalidInput(format!(
                "annotation at {idx} remaps to {r}, past the end of a {out_len}-sample signal"
            )));
        }
        out.push(r as usize);
        prev = Some(r);
    }
    Ok(out)
}

/// Move each peak to the sample of largest absolute amplitude within
/// `radius` samples, keeping the sequence strictly increasing.
pub fn refine_r_peaks(signal: &[f64], peaks: &[usize], radius: usize) -> Vec<usize> {
    let n = signal.len();
    let mut out: Vec<usize> = Vec::with_capacity(peaks.len());
    for (j, &p) in peaks.iter().enumerate() {
        let lo = p.saturating_sub(radius);
        let hi = (p + radius).min(n.saturating_sub(1));
        let mut best = p;
        for i in lo..=hi {
            if signal[i].abs() > signal[best].abs() {
                best = i;
            }
        }
        let floor = out.last().map_or(0, |&q| q + 1);
        let ceiling = peaks.get(j + 1).copied().unwrap_or(usize::MAX);
        if best < floor || best >= ceiling {
            best = p.max(floor);
        }
        out.push(best);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_zero() {
        assert_eq!(remap_index(72, 23, 72), 23);
        assert_eq!(remap_index(0, 23, 72), 0);
        assert_eq!(remap_index(650_000, 23, 72), 207_639);
    }

    #[test]
    fn adjacent_pairs_stay_distinct() {
        let r = remap_annotations(&[100, 101], 23, 72, 1000).unwrap();
        assert!(r[0] < r[1]);
        for i in 0..999u64 {
            let r = remap_annotations(&[i, i + 1], 23, 72, 1000).unwrap();
            assert!(r[0] < r[1], "pair ({i}, {})", i + 1);
        }
        let dense: Vec<u64> = (0..1000).collect();
        let r = remap_annotations(&dense, 23, 72, 2000).unwrap();
        assert!(r.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn out_of_range() {
        assert!(remap_annotations(&[720], 23, 72, 230).is_err());
        // 719 * 23 / 72 = 229.7 rounds onto the first sample past the end.
        assert!(remap_annotations(&[719], 23, 72, 230).is_err());
        assert!(remap_annotations(&[718], 23, 72, 230).is_ok());
    }

    #[test]
    fn refinement_finds_local_max() {
        let mut s = vec![0.0; 50];
        s[23] = -2.0;
        s[31] = 1.5;
        assert_eq!(refine_r_peaks(&s, &[20, 29], 5), vec![23, 31]);
        // Both peaks would collapse onto sample 23; the second keeps its place.
        assert_eq!(refine_r_peaks(&s, &[21, 24], 5), vec![23, 24]);
    }
}
