use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Which gallery entries a query is ranked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Gallery entries sharing both identity and camera with the query are
    /// removed before ranking.
    CrossCamera,
    /// Every gallery entry is ranked.
    AllGallery,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::CrossCamera => "cross-camera",
            Protocol::AllGallery => "all-gallery",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cross-camera" => Ok(Protocol::CrossCamera),
            "all-gallery" => Ok(Protocol::AllGallery),
            _ => Err(Error::InvalidArgument(format!(
                "unknown protocol {s:?} (expected cross-camera or all-gallery)"
            ))),
        }
    }
}

/// Identity and camera of each row of an embedding matrix.
#[derive(Debug, Clone, Copy)]
pub struct Labels<'a> {
    pub identities: &'a [usize],
    pub cameras: &'a [usize],
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRanking {
    /// Row of the query in the query matrix.
    pub query: usize,
    /// Gallery rows, nearest first.
    pub gallery: Vec<usize>,
    pub distances: Vec<f64>,
    pub relevant: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub protocol: Protocol,
    pub queries: Vec<QueryRanking>,
    /// Queries left without any relevant gallery entry.
    pub excluded_queries: Vec<usize>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_labels(what: &str, m: &Matrix, l: &Labels<'_>) -> Result<()> {
    if l.identities.len() != m.rows() || l.cameras.len() != m.rows() {
        return Err(Error::InvalidArgument(format!(
            "{what}: {} rows but {} identities and {} cameras",
            m.rows(),
            l.identities.len(),
            l.cameras.len()
        )));
    }
    Ok(())
}

/// Ranks the gallery for every query by ascending Euclidean distance, ties
/// going to the lower gallery row.
pub fn rank_queries(
    query: &Matrix,
    gallery: &Matrix,
    query_labels: Labels<'_>,
    gallery_labels: Labels<'_>,
    protocol: Protocol,
) -> Result<RankingResult> {
    if query.cols() != gallery.cols() {
        return Err(Error::Dimension {
            op: "rank_queries",
            left: query.shape(),
            right: gallery.shape(),
        });
    }
    check_labels("query", query, &query_labels)?;
    check_labels("gallery", gallery, &gallery_labels)?;
    let mut queries = Vec::with_capacity(query.rows());
    let mut excluded = Vec::new();
    for q in 0..query.rows() {
        let qid = query_labels.identities[q];
        let qcam = query_labels.cameras[q];
        let mut order: Vec<(f64, usize)> = (0..gallery.rows())
            .filter(|&g| {
                protocol == Protocol::AllGallery
                    || !(gallery_labels.identities[g] == qid && gallery_labels.cameras[g] == qcam)
            })
            .map(|g| (euclidean(query.row(q), gallery.row(g)), g))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let relevant: Vec<bool> = order.iter().map(|&(_, g)| gallery_labels.identities[g] == qid).collect();
        if !relevant.contains(&true) {
            excluded.push(q);
            continue;
        }
        queries.push(QueryRanking {
            query: q,
            gallery: order.iter().map(|&(_, g)| g).collect(),
            distances: order.iter().map(|&(d, _)| d).collect(),
            relevant,
        });
    }
    Ok(RankingResult {
        protocol,
        queries,
        excluded_queries: excluded,
    })
}

/// CMC curve for ranks `1..=max_rank` and mean average precision.
///
/// AP of a query is the mean, over the positions `k` of its relevant
/// entries, of the fraction of relevant entries within the top `k`.
pub fn cmc_map(rr: &RankingResult, max_rank: usize) -> Result<(Vec<f64>, f64)> {
    if rr.queries.is_empty() {
        return Err(Error::EmptySet("no query has a relevant gallery entry".into()));
    }
    if max_rank == 0 {
        return Err(Error::InvalidArgument("max rank must be positive".into()));
    }
    let mut hits = vec![0usize; max_rank];
    let mut ap_sum = 0.0;
    for q in &rr.queries {
        let first = q.relevant.iter().position(|&r| r).expect("ranked queries have a match");
        for h in hits.iter_mut().skip(first) {
            *h += 1;
        }
        let mut found = 0usize;
        let mut precision_sum = 0.0;
        for (k, _) in q.relevant.iter().enumerate().filter(|(_, &r)| r) {
            found += 1;
            precision_sum += found as f64 / (k + 1) as f64;
        }
        ap_sum += precision_sum / found as f64;
    }
    let n = rr.queries.len() as f64;
    let cmc = hits.into_iter().map(|h| h as f64 / n).collect();
    Ok((cmc, ap_sum / n))
}
