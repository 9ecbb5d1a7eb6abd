//! Retrieval and alignment metrics.
//!
//! Retrieval ranks the gallery split for every query-split sample. The
//! alignment metrics (inter-camera discrepancy and the camera confusion
//! matrix) are computed on a selectable subset, the test samples by default.

mod alignment;
mod ranking;

use std::fs::{self, File};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{parse_rows, write_rows, Dataset, Sample, Split};
use crate::error::{Error, Result};
use crate::numeric::{Matrix, Network};

pub use alignment::{camera_confusion, inter_camera_discrepancy, off_diagonal_uniformity};
pub use ranking::{cmc_map, rank_queries, Labels, Protocol, QueryRanking, RankingResult};

/// Samples the alignment metrics are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricSplit {
    /// Query and gallery samples.
    Test,
    Train,
}

impl MetricSplit {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricSplit::Test => "test",
            MetricSplit::Train => "train",
        }
    }

    pub fn indices(self, ds: &Dataset) -> Vec<usize> {
        match self {
            MetricSplit::Test => ds.test_indices(),
            MetricSplit::Train => ds.split_indices(Split::Train),
        }
    }
}

impl std::fmt::Display for MetricSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test" => Ok(MetricSplit::Test),
            "train" => Ok(MetricSplit::Train),
            _ => Err(Error::InvalidArgument(format!("unknown split {s:?} (expected test or train)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub max_rank: usize,
    pub protocol: Protocol,
    pub metric_split: MetricSplit,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            max_rank: 20,
            protocol: Protocol::CrossCamera,
            metric_split: MetricSplit::Test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub num_queries: usize,
    pub map: f64,
    /// `cmc[r - 1]` is the fraction of queries matched within the top `r`.
    pub cmc: Vec<f64>,
    pub d_inter_camera: f64,
    pub num_cameras: usize,
    /// Row-major `C × C`.
    pub confusion: Vec<f64>,
    pub off_diagonal_uniformity: f64,
    /// Split the discrepancy and confusion were computed on.
    pub metric_split: MetricSplit,
    pub excluded_queries: usize,
}

impl EvalReport {
    /// CMC at 1-based `rank`, if within the computed range.
    pub fn rank(&self, rank: usize) -> Option<f64> {
        rank.checked_sub(1).and_then(|r| self.cmc.get(r)).copied()
    }

    /// `mAP=<v> R1=<v> R5=<v> R10=<v>`, each to four decimals.
    pub fn summary_line(&self) -> String {
        let r = |k| self.rank(k).map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"));
        format!("mAP={:.4} R1={} R5={} R10={}", self.map, r(1), r(5), r(10))
    }

    pub fn confusion_matrix(&self) -> Matrix {
        Matrix::from_vec(self.num_cameras, self.num_cameras, self.confusion.clone())
            .expect("report confusion is square")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_compatible(net: &Network, ds: &Dataset) -> Result<()> {
    if net.input_dim() != ds.input_dim() {
        return Err(Error::InvalidConfig(format!(
            "model expects {} input features, dataset has {}",
            net.input_dim(),
            ds.input_dim()
        )));
    }
    if net.num_cameras() != ds.num_cameras() {
        return Err(Error::InvalidConfig(format!(
            "model discriminates {} cameras, dataset has {}",
            net.num_cameras(),
            ds.num_cameras()
        )));
    }
    Ok(())
}

/// Ranks the query split against the gallery split.
pub fn rank_dataset(net: &Network, ds: &Dataset, protocol: Protocol) -> Result<RankingResult> {
    check_compatible(net, ds)?;
    let q = ds.split_indices(Split::Query);
    let g = ds.split_indices(Split::Gallery);
    if q.is_empty() || g.is_empty() {
        return Err(Error::EmptySet("dataset has no query or no gallery samples".into()));
    }
    let qe = net.embed(&ds.features(&q))?;
    let ge = net.embed(&ds.features(&g))?;
    let (qi, qc) = (ds.identities(&q), ds.cameras(&q));
    let (gi, gc) = (ds.identities(&g), ds.cameras(&g));
    rank_queries(
        &qe,
        &ge,
        Labels { identities: &qi, cameras: &qc },
        Labels { identities: &gi, cameras: &gc },
        protocol,
    )
}

/// Confusion matrix over the samples of `split`.
pub fn dataset_confusion(net: &Network, ds: &Dataset, split: MetricSplit) -> Result<Matrix> {
    check_compatible(net, ds)?;
    let idx = split.indices(ds);
    camera_confusion(net, &ds.features(&idx), &ds.cameras(&idx))
}

pub fn evaluate(net: &Network, ds: &Dataset, opts: &EvalOptions) -> Result<EvalReport> {
    let rr = rank_dataset(net, ds, opts.protocol)?;
    let (cmc, map) = cmc_map(&rr, opts.max_rank)?;
    let idx = opts.metric_split.indices(ds);
    let feats = ds.features(&idx);
    let cams = ds.cameras(&idx);
    let d_inter_camera = inter_camera_discrepancy(&net.embed(&feats)?, &cams, ds.num_cameras())?;
    let confusion = camera_confusion(net, &feats, &cams)?;
    Ok(EvalReport {
        protocol: opts.protocol,
        num_queries: rr.queries.len(),
        map,
        cmc,
        d_inter_camera,
        num_cameras: ds.num_cameras(),
        off_diagonal_uniformity: off_diagonal_uniformity(&confusion)?,
        confusion: confusion.into_vec(),
        metric_split: opts.metric_split,
        excluded_queries: rr.excluded_queries.len(),
    })
}

/// Writes every sample's embedding as `camera,identity,split,e0,...`.
pub fn write_embeddings<W: std::io::Write>(net: &Network, ds: &Dataset, out: W) -> Result<()> {
    check_compatible(net, ds)?;
    let all: Vec<usize> = (0..ds.len()).collect();
    let emb = net.embed(&ds.features(&all))?;
    write_rows(out, 'e', emb.cols(), ds.samples().iter().zip(emb.row_iter()))
}

pub fn export_embeddings(net: &Network, ds: &Dataset, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_embeddings(net, ds, f).map_err(|e| e.with_path(path))
}

/// Reads an embedding export back. Each returned sample carries its
/// embedding in `features`.
pub fn load_embeddings(path: &Path) -> Result<Vec<Sample>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_rows(&text, 'e').map_err(|e| e.with_path(path))?.samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, Provenance, SynthConfig};
    use crate::numeric::LinearLayer;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ds() -> Dataset {
        generate_synthetic(&SynthConfig {
            cameras: 3,
            identities_per_camera: 3,
            samples_per_identity: 3,
            input_dim: 4,
            cross_camera_overlap: 3,
            ..SynthConfig::default()
        })
        .unwrap()
    }

    fn net(input: usize, cameras: usize) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        Network::random(input, &[6], 5, cameras, &mut rng).unwrap()
    }

    #[test]
    fn report_invariants() {
        let d = ds();
        let r = evaluate(&net(4, 3), &d, &EvalOptions { max_rank: 10, ..EvalOptions::default() }).unwrap();
        assert_eq!(r.cmc.len(), 10);
        assert!(r.cmc.windows(2).all(|w| w[0] <= w[1]));
        assert!((0.0..=1.0).contains(&r.map));
        assert!(r.d_inter_camera >= 0.0);
        assert_eq!(r.num_queries + r.excluded_queries, d.split_indices(Split::Query).len());
        for row in r.confusion_matrix().row_iter() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let line = r.summary_line();
        assert!(line.starts_with("mAP=") && line.contains(" R1=") && line.contains(" R10="), "{line}");
        let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn identity_embedding_on_clean_copies_is_perfect() {
        // Every gallery entry is an exact copy of a query seen by another
        // camera, so the nearest non-excluded entry is always a true match.
        let mut samples = Vec::new();
        for id in 0..4usize {
            let f = vec![id as f64 * 10.0, 0.0];
            for cam in 0..2 {
                samples.push(Sample { features: f.clone(), camera: cam, identity: id, split: Split::Query });
                samples.push(Sample { features: f.clone(), camera: cam, identity: id, split: Split::Gallery });
            }
        }
        for cam in 0..2 {
            for id in 10..12 {
                for _ in 0..2 {
                    samples.push(Sample { features: vec![id as f64, 1.0], camera: cam, identity: id + cam * 5, split: Split::Train });
                }
            }
        }
        let d = Dataset::new(samples, 2, 2, Provenance::File("x".into())).unwrap();
        let eye = LinearLayer::new(Matrix::identity(2), vec![0.0; 2]).unwrap();
        let n = Network::new(vec![eye], LinearLayer::zeros(2, 2)).unwrap();
        let r = evaluate(&n, &d, &EvalOptions::default()).unwrap();
        assert_eq!(r.map, 1.0);
        assert_eq!(r.cmc[0], 1.0);
        assert_eq!(r.off_diagonal_uniformity, 0.0);
    }

    #[test]
    fn mismatched_dims() {
        let d = ds();
        assert!(matches!(evaluate(&net(5, 3), &d, &EvalOptions::default()), Err(Error::InvalidConfig(_))));
        assert!(matches!(evaluate(&net(4, 2), &d, &EvalOptions::default()), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn export_round_trip() {
        let d = ds();
        let n = net(4, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.csv");
        export_embeddings(&n, &d, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap().split(',').count(), 3 + 5);
        let back = load_embeddings(&path).unwrap();
        assert_eq!(back.len(), d.len());
        let all: Vec<usize> = (0..d.len()).collect();
        let emb = n.embed(&d.features(&all)).unwrap();
        for (s, (orig, row)) in back.iter().zip(d.samples().iter().zip(emb.row_iter())) {
            assert_eq!(s.features, row);
            assert_eq!((s.camera, s.identity, s.split), (orig.camera, orig.identity, orig.split));
        }
        let mut again = Vec::new();
        write_embeddings(&n, &d, &mut again).unwrap();
        assert_eq!(again, text.as_bytes());
    }

    #[test]
    fn train_split_metrics() {
        let d = ds();
        let r = evaluate(&net(4, 3), &d, &EvalOptions { metric_split: MetricSplit::Train, ..EvalOptions::default() })
            .unwrap();
        assert_eq!(r.metric_split, MetricSplit::Train);
        assert!(r.to_json().contains("\"metric_split\": \"train\""));
    }
}
