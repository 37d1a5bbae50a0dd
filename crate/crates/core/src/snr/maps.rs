//! Per-pixel SNR advantage maps and the sorted percentile curve.
//!
//! A pixel's advantage is `10·log₁₀(x_i / (2X⁰/N))` dB, which equals
//! `20·log₁₀` of the amplitude ratio [`pixel_ratio`](super::analytic::pixel_ratio).

use crate::error::{invalid, Result};
use crate::scene::Scene;

use super::analytic::{pixel_ratio, to_db};

/// Advantage map over the image pixels, in dB (may contain `-inf`).
#[derive(Clone, Debug, PartialEq)]
pub struct DbMap {
    pub width: usize,
    pub height: usize,
    /// Row-major dB values.
    pub values: Vec<f64>,
}

impl DbMap {
    pub fn max_db(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Percentage of pixels strictly above 0 dB.
    pub fn percent_above_zero(&self) -> f64 {
        let above = self.values.iter().filter(|&&v| v > 0.0).count();
        100.0 * above as f64 / self.values.len() as f64
    }

    /// 16-bit grayscale rendering: `<= 0 dB` is black, the map maximum is
    /// white, linear in between. A map with no positive pixel is all black.
    pub fn to_gray16(&self) -> Vec<u16> {
        let top = self.max_db();
        if !(top.is_finite() && top > 0.0) {
            return vec![0; self.values.len()];
        }
        self.values
            .iter()
            .map(|&v| {
                if v <= 0.0 {
                    0
                } else {
                    ((v / top).min(1.0) * 65535.0).round() as u16
                }
            })
            .collect()
    }
}

/// dB advantage of every image pixel; zero pixels map to `-inf`.
pub fn pixel_db_map(scene: &Scene) -> Result<DbMap> {
    let x0 = scene.brightness();
    if x0.is_nan() || x0 <= 0.0 {
        return Err(invalid("pixel advantage map needs a scene with X0 > 0"));
    }
    let values = scene
        .usable()
        .iter()
        .map(|&x| pixel_ratio(x, x0, scene.order()).map(to_db))
        .collect::<Result<_>>()?;
    Ok(DbMap {
        width: scene.width(),
        height: scene.height(),
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    /// `rank / (image pixel count) · 100`, rank starting at 1.
    pub percent: f64,
    pub db: f64,
}

/// Pixel advantages sorted in descending order against their normalized
/// rank.
pub fn sorted_ratio_curve(scene: &Scene) -> Result<Vec<CurvePoint>> {
    let mut db = pixel_db_map(scene)?.values;
    db.sort_by(|a, b| b.total_cmp(a));
    let count = db.len() as f64;
    Ok(db
        .into_iter()
        .enumerate()
        .map(|(i, db)| CurvePoint {
            percent: 100.0 * (i + 1) as f64 / count,
            db,
        })
        .collect())
}

/// Percentage of pixels whose LCI pixel SNR is strictly higher than PAI's,
/// i.e. where the curve is still above 0 dB.
pub fn crossing_percent(curve: &[CurvePoint]) -> f64 {
    curve
        .iter()
        .take_while(|p| p.db > 0.0)
        .last()
        .map_or(0.0, |p| p.percent)
}
