use crate::error::{Error, Result};
use crate::numeric::{Matrix, Network};

fn camera_counts(cameras: &[usize], num_cameras: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; num_cameras];
    for &c in cameras {
        if c >= num_cameras {
            return Err(Error::InvalidArgument(format!(
                "camera {c} out of range for {num_cameras} cameras"
            )));
        }
        counts[c] += 1;
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptySet(format!("camera {c} has no samples")));
    }
    Ok(counts)
}

/// Mean over cameras of the distance between the camera's mean embedding and
/// the mean of all embeddings.
pub fn inter_camera_discrepancy(embeddings: &Matrix, cameras: &[usize], num_cameras: usize) -> Result<f64> {
    if cameras.len() != embeddings.rows() {
        return Err(Error::InvalidArgument(format!(
            "{} embeddings but {} camera labels",
            embeddings.rows(),
            cameras.len()
        )));
    }
    let counts = camera_counts(cameras, num_cameras)?;
    let d = embeddings.cols();
    let mut means = Matrix::zeros(num_cameras, d);
    let mut global = vec![0.0; d];
    for (row, &c) in embeddings.row_iter().zip(cameras) {
        for ((m, g), v) in means.row_mut(c).iter_mut().zip(global.iter_mut()).zip(row) {
            *m += v;
            *g += v;
        }
    }
    let n = embeddings.rows() as f64;
    global.iter_mut().for_each(|g| *g /= n);
    let mut total = 0.0;
    for (c, &count) in counts.iter().enumerate() {
        let dist2: f64 = means
            .row(c)
            .iter()
            .zip(&global)
            .map(|(m, g)| {
                let diff = m / count as f64 - g;
                diff * diff
            })
            .sum();
        total += dist2.sqrt();
    }
    Ok(total / num_cameras as f64)
}

/// Row `c` is the discriminator's mean predicted distribution over the
/// samples of camera `c`.
pub fn camera_confusion(net: &Network, features: &Matrix, cameras: &[usize]) -> Result<Matrix> {
    if cameras.len() != features.rows() {
        return Err(Error::InvalidArgument(format!(
            "{} samples but {} camera labels",
            features.rows(),
            cameras.len()
        )));
    }
    let c = net.num_cameras();
    let counts = camera_counts(cameras, c)?;
    let probs = net.forward_discriminator(&net.embed(features)?)?.probs;
    let mut conf = Matrix::zeros(c, c);
    for (row, &cam) in probs.row_iter().zip(cameras) {
        for (acc, p) in conf.row_mut(cam).iter_mut().zip(row) {
            *acc += p;
        }
    }
    for (cam, &count) in counts.iter().enumerate() {
        conf.row_mut(cam).iter_mut().for_each(|v| *v /= count as f64);
    }
    Ok(conf)
}

/// Mean over rows of the L1 distance between the row's off-diagonal entries,
/// renormalized to sum to one, and the uniform distribution over the other
/// `C − 1` cameras. Zero means every camera is confused evenly with all
/// others.
pub fn off_diagonal_uniformity(confusion: &Matrix) -> Result<f64> {
    let c = confusion.rows();
    if confusion.cols() != c || c < 2 {
        return Err(Error::InvalidArgument(format!(
            "confusion matrix must be square with at least 2 cameras, got {}x{}",
            confusion.rows(),
            confusion.cols()
        )));
    }
    let u = 1.0 / (c - 1) as f64;
    let mut total = 0.0;
    for r in 0..c {
        let row = confusion.row(r);
        let off: f64 = row.iter().enumerate().filter(|&(k, _)| k != r).map(|(_, v)| v).sum();
        if !(off > 0.0) {
            // All mass on the diagonal: the renormalized row is undefined;
            // score it as the farthest a distribution can be from uniform.
            total += 2.0 * (1.0 - u);
            continue;
        }
        total += row
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != r)
            .map(|(_, v)| (v / off - u).abs())
            .sum::<f64>();
    }
    Ok(total / c as f64)
}
