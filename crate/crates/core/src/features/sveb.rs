//! Two-way split of SVEB beats by morphology.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{feature_index, FeatureMatrix, SvebSubclass};
use crate::error::Result;
use crate::wfdb::AamiClass;

pub const RESTARTS: usize = 20;
const MAX_ITER: usize = 200;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Lloyd's 2-means, best of `restarts` random initialisations. Returns the
/// cluster of each point (0 or 1) and the within-cluster sum of squares.
pub fn kmeans2(points: &[Vec<f64>], restarts: usize, seed: u64) -> (Vec<usize>, f64) {
    let n = points.len();
    if n < 2 {
        return (vec![0; n], 0.0);
    }
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        let mut centers = [points[a].clone(), points[b].clone()];
        let mut assign = vec![usize::MAX; n];
        for _ in 0..MAX_ITER {
            let mut changed = false;
            for (p, slot) in points.iter().zip(assign.iter_mut()) {
                // Ties go to cluster 0.
                let c = usize::from(sq_dist(p, &centers[1]) < sq_dist(p, &centers[0]));
                if *slot != c {
                    *slot = c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            for (c, center) in centers.iter_mut().enumerate() {
                let members: Vec<&Vec<f64>> = points.iter().zip(&assign).filter(|(_, &k)| k == c).map(|(p, _)| p).collect();
                if members.is_empty() {
                    continue;
                }
                *center = (0..dim).map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64).collect();
            }
        }
        let inertia: f64 = points.iter().zip(&assign).map(|(p, &c)| sq_dist(p, &centers[c])).sum();
        if best.as_ref().is_none_or(|(_, b)| inertia < *b) {
            best = Some((assign, inertia));
        }
    }
    best.expect("at least one restart")
}

/// Name clusters so the larger one is S1. Equal sizes: the cluster holding
/// the first point is S1.
fn name_clusters(assign: &[usize]) -> Vec<SvebSubclass> {
    let ones = assign.iter().filter(|&&c| c == 1).count();
    let zeros = assign.len() - ones;
    let s1 = if zeros > ones || (zeros == ones && assign.first() == Some(&0)) { 0 } else { 1 };
    assign.iter().map(|&c| if c == s1 { SvebSubclass::S1 } else { SvebSubclass::S2 }).collect()
}

/// Assign each morphology vector to S1 or S2. Fewer than two beats are all S1.
pub fn split_sveb_classes(morphology: &[Vec<f64>], seed: u64) -> Vec<SvebSubclass> {
    if morphology.len() < 2 {
        return vec![SvebSubclass::S1; morphology.len()];
    }
    name_clusters(&kmeans2(morphology, RESTARTS, seed).0)
}

/// Columns used for the SVEB split: the QRS and T morphology samples.
pub fn morphology_columns() -> Result<Vec<usize>> {
    let mut cols = Vec::new();
    for k in 0..4 {
        cols.push(feature_index(&format!("qrs_morph_{k}"))?);
    }
    for k in 0..9 {
        cols.push(feature_index(&format!("t_morph_{k}"))?);
    }
    Ok(cols)
}

/// Label every S row of `m` with its subclass; other rows get `None`.
pub fn assign_sveb_subclasses(m: &mut FeatureMatrix, seed: u64) -> Result<()> {
    let cols = morphology_columns()?;
    let rows: Vec<usize> = (0..m.n_rows()).filter(|&i| m.meta()[i].label == AamiClass::S).collect();
    let points: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| m.row(i)[j]).collect()).collect();
    let subs = split_sveb_classes(&points, seed);
    for meta in m.meta_mut() {
        meta.sveb_subclass = None;
    }
    for (&i, s) in rows.iter().zip(subs) {
        m.meta_mut()[i].sveb_subclass = Some(s);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(n1: usize, n2: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.05).unwrap();
        (0..n1 + n2)
            .map(|i| {
                let c = if i < n1 { 0.0 } else { 1.0 };
                (0..13).map(|_| c + noise.sample(&mut rng)).collect()
            })
            .collect()
    }

    #[test]
    fn separated_clusters_recovered() {
        let pts = blobs(30, 12, 1);
        let subs = split_sveb_classes(&pts, 7);
        assert!(subs[..30].iter().all(|&s| s == SvebSubclass::S1));
        assert!(subs[30..].iter().all(|&s| s == SvebSubclass::S2));
    }

    #[test]
    fn identical_beats_single_cluster() {
        let pts = vec![vec![0.3; 13]; 9];
        assert!(split_sveb_classes(&pts, 3).iter().all(|&s| s == SvebSubclass::S1));
        assert_eq!(split_sveb_classes(&pts[..1], 3), vec![SvebSubclass::S1]);
        assert!(split_sveb_classes(&[], 3).is_empty());
    }

    #[test]
    fn deterministic_and_stable_across_seeds() {
        let pts = blobs(40, 25, 2);
        assert_eq!(split_sveb_classes(&pts, 11), split_sveb_classes(&pts, 11));
        assert_eq!(split_sveb_classes(&pts, 11), split_sveb_classes(&pts, 12));
    }
}
