//! Batch-hard triplet loss with mining restricted to a single camera.
//!
//! For every anchor the farthest same-identity sample and the nearest
//! different-identity sample, both from the anchor's own camera, form the
//! triplet. Ties go to the lowest index. Anchors lacking a positive or a
//! negative in their camera are skipped and counted.

use crate::error::{Error, Result};
use crate::numeric::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletConfig {
    pub margin: f64,
    pub persons: usize,
    pub images_per_person: usize,
}

impl TripletConfig {
    pub fn new(margin: f64, persons: usize, images_per_person: usize) -> Result<Self> {
        if !(margin > 0.0) || !margin.is_finite() {
            return Err(Error::InvalidConfig(format!("margin must be positive, got {margin}")));
        }
        if persons < 2 || images_per_person < 2 {
            return Err(Error::InvalidConfig(format!(
                "need P >= 2 and K >= 2, got P={persons} K={images_per_person}"
            )));
        }
        Ok(Self {
            margin,
            persons,
            images_per_person,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.persons * self.images_per_person
    }
}

/// Euclidean distances between all rows, via `|a|² + |b|² − 2a·b` clamped
/// at zero before the square root.
pub fn pairwise_distances(embeddings: &Matrix) -> Matrix {
    let n = embeddings.rows();
    let norms: Vec<f64> = embeddings
        .row_iter()
        .map(|r| r.iter().map(|v| v * v).sum())
        .collect();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        let ri = embeddings.row(i);
        for j in (i + 1)..n {
            let sq = norms[i] + norms[j] - 2.0 * crate::numeric::dot(ri, embeddings.row(j));
            let v = sq.max(0.0).sqrt();
            d.set(i, j, v);
            d.set(j, i, v);
        }
    }
    d
}

/// Hardest positive and hardest negative for one anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinedTriplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
    pub positive_distance: f64,
    pub negative_distance: f64,
}

impl MinedTriplet {
    /// `[m + d(a,p) − d(a,n)]₊`
    pub fn hinge(&self, margin: f64) -> f64 {
        (margin + self.positive_distance - self.negative_distance).max(0.0)
    }
}

/// Indices `(hardest_positive, hardest_negative)` for each anchor, `None`
/// where the anchor has no positive or no negative in its camera. Works on
/// any precomputed dissimilarity matrix.
pub fn mine_batch_hard(
    distances: &Matrix,
    identities: &[usize],
    cameras: &[usize],
) -> Result<Vec<Option<(usize, usize)>>> {
    let n = distances.rows();
    if distances.cols() != n || identities.len() != n || cameras.len() != n {
        return Err(Error::Dimension {
            op: "mine_batch_hard",
            left: distances.shape(),
            right: (identities.len(), cameras.len()),
        });
    }
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let row = distances.row(a);
        let mut pos: Option<usize> = None;
        let mut neg: Option<usize> = None;
        for j in 0..n {
            if j == a || cameras[j] != cameras[a] {
                continue;
            }
            if identities[j] == identities[a] {
                if pos.is_none_or(|p| row[j] > row[p]) {
                    pos = Some(j);
                }
            } else if neg.is_none_or(|q| row[j] < row[q]) {
                neg = Some(j);
            }
        }
        out.push(pos.zip(neg));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TripletOutput {
    /// Mean hinge over valid anchors.
    pub loss: f64,
    pub grad_embeddings: Matrix,
    pub triplets: Vec<MinedTriplet>,
    /// Valid anchors with a positive hinge.
    pub active_anchors: usize,
    /// Anchors without a same-camera positive or negative.
    pub skipped_anchors: usize,
}

impl TripletOutput {
    pub fn valid_anchors(&self) -> usize {
        self.triplets.len()
    }

    pub fn active_fraction(&self) -> f64 {
        self.active_anchors as f64 / self.triplets.len() as f64
    }
}

fn direct_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Loss and subgradient through each anchor's selected pair.
pub fn batch_hard_triplet(
    embeddings: &Matrix,
    identities: &[usize],
    cameras: &[usize],
    margin: f64,
) -> Result<TripletOutput> {
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(Error::InvalidArgument(format!("margin must be non-negative, got {margin}")));
    }
    let dist = pairwise_distances(embeddings);
    let mined = mine_batch_hard(&dist, identities, cameras)?;
    let valid = mined.iter().filter(|m| m.is_some()).count();
    if valid == 0 {
        return Err(Error::EmptySet(
            "no anchor has both a same-camera positive and negative".into(),
        ));
    }
    let inv = 1.0 / valid as f64;
    let d = embeddings.cols();
    let mut grad = Matrix::zeros(embeddings.rows(), d);
    let mut triplets = Vec::with_capacity(valid);
    let mut total = 0.0;
    let mut active = 0;
    let mut diff = vec![0.0; d];
    for (a, m) in mined.iter().enumerate() {
        let Some((p, n)) = *m else { continue };
        // Recompute the selected pair distances directly; the expanded form
        // used for mining loses precision for nearby points.
        let ea = embeddings.row(a);
        let t = MinedTriplet {
            anchor: a,
            positive: p,
            negative: n,
            positive_distance: direct_distance(ea, embeddings.row(p)),
            negative_distance: direct_distance(ea, embeddings.row(n)),
        };
        let h = t.hinge(margin);
        triplets.push(t);
        if h <= 0.0 {
            continue;
        }
        total += h;
        active += 1;
        for (other, sign, dist) in [(p, 1.0, t.positive_distance), (n, -1.0, t.negative_distance)] {
            if dist == 0.0 {
                continue;
            }
            let coef = sign * inv / dist;
            for (k, v) in diff.iter_mut().enumerate() {
                *v = coef * (embeddings.get(a, k) - embeddings.get(other, k));
            }
            for (g, v) in grad.row_mut(a).iter_mut().zip(&diff) {
                *g += v;
            }
            for (g, v) in grad.row_mut(other).iter_mut().zip(&diff) {
                *g -= v;
            }
        }
    }
    Ok(TripletOutput {
        loss: total * inv,
        grad_embeddings: grad,
        triplets,
        active_anchors: active,
        skipped_anchors: embeddings.rows() - valid,
    })
}
