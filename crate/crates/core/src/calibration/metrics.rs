use crate::error::{Error, Result};
use crate::types::{MarkerField, PixelScale};

/// Taxels whose vectors are shorter than this many pixels in either field
/// are left out of the cosine similarity.
pub const DEFAULT_MAGNITUDE_FLOOR: f64 = 0.3;

fn paired_pixels(pred: &MarkerField, truth: &MarkerField, scale: PixelScale) -> Result<(MarkerField, MarkerField)> {
    if pred.grid != truth.grid {
        return Err(Error::GridMismatch);
    }
    Ok((pred.to_pixels(scale), truth.to_pixels(scale)))
}

/// Root mean squared per-taxel vector error, in pixels.
pub fn rmse(pred: &MarkerField, truth: &MarkerField, scale: PixelScale) -> Result<f64> {
    let (p, t) = paired_pixels(pred, truth, scale)?;
    let n = p.vectors.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut sum = crate::numeric::KahanSum::new();
    for (a, b) in p.vectors.iter().zip(&t.vectors) {
        let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
        sum.add(dx * dx + dy * dy);
    }
    Ok(libm::sqrt(sum.value() / n as f64))
}

/// Mean per-taxel cosine over taxels where both vectors are longer than
/// `floor_px` pixels. `None` when no taxel qualifies.
pub fn cosine_similarity(pred: &MarkerField, truth: &MarkerField, scale: PixelScale, floor_px: f64) -> Result<Option<f64>> {
    let (p, t) = paired_pixels(pred, truth, scale)?;
    let mut sum = crate::numeric::KahanSum::new();
    let mut count = 0usize;
    for (a, b) in p.vectors.iter().zip(&t.vectors) {
        let na2 = a[0] * a[0] + a[1] * a[1];
        let nb2 = b[0] * b[0] + b[1] * b[1];
        if libm::sqrt(na2) > floor_px && libm::sqrt(nb2) > floor_px {
            // sqrt of the product keeps identical and opposite pairs exact
            let c = (a[0] * b[0] + a[1] * b[1]) / libm::sqrt(na2 * nb2);
            sum.add(c.clamp(-1.0, 1.0));
            count += 1;
        }
    }
    Ok((count > 0).then(|| sum.value() / count as f64))
}
