//! Batch samplers over the train split.

use rand::seq::index;
use rand::Rng;

use super::dataset::Dataset;
use crate::error::{Error, Result};

/// `P` identities × `K` samples, all from one camera.
#[derive(Debug, Clone, PartialEq)]
pub struct PkBatch {
    pub camera: usize,
    /// Dataset indices, grouped by identity.
    pub indices: Vec<usize>,
    /// Identity label of each entry of `indices`.
    pub identities: Vec<usize>,
    /// Identities that had fewer than `K` samples and were drawn with
    /// replacement.
    pub with_replacement: Vec<usize>,
}

/// The same number of samples from every camera.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraBalancedBatch {
    pub indices: Vec<usize>,
    pub cameras: Vec<usize>,
    pub quota: usize,
}

/// Draws `persons` identities of `camera` uniformly without replacement and
/// `k` samples of each. Identities with fewer than `k` samples are sampled
/// with replacement and listed in `with_replacement`.
pub fn sample_pk_batch<R: Rng + ?Sized>(
    ds: &Dataset,
    persons: usize,
    k: usize,
    camera: usize,
    rng: &mut R,
) -> Result<PkBatch> {
    if camera >= ds.num_cameras() {
        return Err(Error::InvalidArgument(format!(
            "camera {camera} out of range for {} cameras",
            ds.num_cameras()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let groups = ds.train_identities(camera);
    if groups.len() < persons {
        return Err(Error::InvalidConfig(format!(
            "camera {camera} has {} train identities, fewer than P={persons}",
            groups.len()
        )));
    }
    let mut indices = Vec::with_capacity(persons * k);
    let mut identities = Vec::with_capacity(persons * k);
    let mut with_replacement = Vec::new();
    for g in index::sample(rng, groups.len(), persons).into_iter() {
        let group = &groups[g];
        let n = group.samples.len();
        if n >= k {
            for i in index::sample(rng, n, k).into_iter() {
                indices.push(group.samples[i]);
            }
        } else {
            with_replacement.push(group.identity);
            for _ in 0..k {
                indices.push(group.samples[rng.random_range(0..n)]);
            }
        }
        identities.extend(std::iter::repeat_n(group.identity, k));
    }
    Ok(PkBatch {
        camera,
        indices,
        identities,
        with_replacement,
    })
}

/// `⌊base / C⌋` train samples per camera, without replacement.
pub fn sample_camera_balanced<R: Rng + ?Sized>(
    ds: &Dataset,
    base: usize,
    rng: &mut R,
) -> Result<CameraBalancedBatch> {
    let c = ds.num_cameras();
    let quota = base / c;
    if quota == 0 {
        return Err(Error::InvalidConfig(format!(
            "batch base {base} gives no samples per camera for {c} cameras"
        )));
    }
    let mut indices = Vec::with_capacity(quota * c);
    let mut cameras = Vec::with_capacity(quota * c);
    for camera in 0..c {
        let pool = ds.train_samples_of_camera(camera);
        if pool.len() < quota {
            return Err(Error::InvalidConfig(format!(
                "camera {camera} has {} train samples, fewer than the quota {quota}",
                pool.len()
            )));
        }
        for i in index::sample(rng, pool.len(), quota).into_iter() {
            indices.push(pool[i]);
        }
        cameras.extend(std::iter::repeat_n(camera, quota));
    }
    Ok(CameraBalancedBatch {
        indices,
        cameras,
        quota,
    })
}
