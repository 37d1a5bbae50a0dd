//! Pixelized scenes: per-pixel photon intensities over one exposure
//! interval, laid out as a vector whose first entry is the reserved dark
//! pixel and whose tail is zero padding up to a power-of-two order.

use std::path::Path;

use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::pgm;
use crate::rng::RngStream;

/// Stream id used for scene synthesis, distinct from trial streams.
const SCENE_STREAM: u64 = 0x5CE7E;

/// Nonnegative photon intensities with brightness `X⁰ = Σ values`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    width: usize,
    height: usize,
    values: Vec<f64>,
    brightness: f64,
}

fn order_for(usable: usize) -> usize {
    (usable + 1).next_power_of_two().max(2)
}

impl Scene {
    /// Builds a scene from row-major image pixels: the dark pixel is
    /// prepended and the tail zero-padded to the next power of two.
    pub fn from_pixels(width: usize, height: usize, pixels: &[f64]) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        let mut values = vec![0.0; order_for(pixels.len())];
        values[1..=pixels.len()].copy_from_slice(pixels);
        Self::with_shape(width, height, values)
    }

    /// Wraps a full length-N vector; all `N − 1` non-dark entries are usable
    /// and displayed as a single row.
    pub fn from_vector(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Self::with_shape(n - 1, 1, values)
    }

    fn with_shape(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(invalid(format!("pixel {i} has invalid intensity {v}")));
        }
        if values[0] != 0.0 {
            return Err(Error::DarkPixel(values[0]));
        }
        let brightness = values.iter().sum();
        Ok(Self {
            width,
            height,
            values,
            brightness,
        })
    }

    /// Operator order N (dark pixel + image pixels + padding).
    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of image pixels, excluding the dark pixel and padding.
    pub fn usable_len(&self) -> usize {
        self.width * self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Image pixels in row-major order.
    pub fn usable(&self) -> &[f64] {
        &self.values[1..=self.usable_len()]
    }

    /// `X⁰`, the sum of all stored values.
    pub fn brightness(&self) -> f64 {
        self.brightness
    }

    pub fn mean_usable(&self) -> f64 {
        self.usable().iter().sum::<f64>() / self.usable_len() as f64
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(invalid(format!("scale factor must be > 0, got {factor}")));
        }
        let values = self.values.iter().map(|v| v * factor).collect();
        Self::with_shape(self.width, self.height, values)
    }
}

/// Loads a PGM (P2/P5) or CSV image and scales it so its mean over image
/// pixels equals `target_avg_photons`.
pub fn load_image(path: impl AsRef<Path>, target_avg_photons: f64) -> Result<Scene> {
    let path = path.as_ref();
    if !(target_avg_photons.is_finite() && target_avg_photons >= 0.0) {
        return Err(invalid(format!(
            "target average photons must be >= 0, got {target_avg_photons}"
        )));
    }
    let data = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let (width, height, raw) = if pgm::is_pgm(&data) {
        let img = pgm::decode(&data).map_err(format_err)?;
        let raw = img.pixels.iter().map(|&p| p as f64).collect();
        (img.width, img.height, raw)
    } else {
        let text = std::str::from_utf8(&data).map_err(|e| format_err(e.to_string()))?;
        parse_csv(text).map_err(format_err)?
    };

    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    let pixels: Vec<f64> = if target_avg_photons == 0.0 {
        vec![0.0; raw.len()]
    } else if mean > 0.0 {
        let k = target_avg_photons / mean;
        raw.iter().map(|v| v * k).collect()
    } else {
        return Err(format_err(
            "image is all zero and cannot be scaled to a positive photon level".into(),
        ));
    };
    Scene::from_pixels(width, height, &pixels)
}

fn parse_csv(text: &str) -> std::result::Result<(usize, usize, Vec<f64>), String> {
    let mut width = None;
    let mut values = Vec::new();
    let mut height = 0;
    for (row, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for (col, field) in line.split(',').enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| format!("row {}, column {}: '{}' is not a number", row + 1, col + 1, field.trim()))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("row {}, column {}: negative or non-finite value {v}", row + 1, col + 1));
            }
            values.push(v);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(format!("row {} has {count} values, expected {w}", row + 1))
            }
            _ => {}
        }
        height += 1;
    }
    let width = width.ok_or_else(|| "no data rows".to_string())?;
    Ok((width, height, values))
}

/// Distributes `round(x0)` photons over the `N − 1` usable pixels with
/// equal probabilities (multinomial, via conditional binomials).
pub fn synth_uniform_random(order: usize, x0: f64, seed: u64) -> Result<Scene> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(order));
    }
    if !(x0.is_finite() && x0 >= 0.0) {
        return Err(invalid(format!("X0 must be finite and >= 0, got {x0}")));
    }
    let mut rng = RngStream::new(seed, SCENE_STREAM);
    let mut remaining = x0.round() as u64;
    let cells = order - 1;
    let mut values = vec![0.0; order];
    for (i, v) in values[1..].iter_mut().enumerate() {
        let left = cells - i;
        let count = if left == 1 || remaining == 0 {
            remaining
        } else {
            Binomial::new(remaining, 1.0 / left as f64)
                .expect("valid binomial parameters")
                .sample(&mut rng)
        };
        *v = count as f64;
        remaining -= count;
    }
    Scene::from_vector(values)
}

/// Index of the pixel that carries the point source in
/// [`synth_point_source`].
pub fn point_source_index(order: usize) -> usize {
    order / 2
}

/// A single bright pixel (`peak + background`) over a flat `background`.
pub fn synth_point_source(order: usize, background: f64, peak: f64) -> Result<Scene> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(order));
    }
    if !(background.is_finite() && background >= 0.0 && peak.is_finite() && peak >= 0.0) {
        return Err(invalid("background and peak must be finite and >= 0"));
    }
    let mut values = vec![background; order];
    values[0] = 0.0;
    values[point_source_index(order)] += peak;
    Scene::from_vector(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn temp_file(contents: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents).unwrap();
        f
    }

    #[test]
    fn uniform_two_by_two_image() {
        let f = temp_file(b"P2\n2 2\n255\n1 1\n1 1\n");
        let s = load_image(f.path(), 5.0).unwrap();
        assert_eq!(s.order(), 8);
        assert_eq!(s.usable(), &[5.0; 4]);
        assert_eq!(s.brightness(), 20.0);
        assert_eq!(s.values()[0], 0.0);
        assert_eq!(&s.values()[5..], &[0.0; 3]);
        assert_eq!((s.width(), s.height()), (2, 2));
    }

    #[test]
    fn csv_image_and_target_levels() {
        let f = temp_file(b"1,2,3\n4,5,6\n");
        for target in [0.2, 5.0] {
            let s = load_image(f.path(), target).unwrap();
            assert!((s.mean_usable() - target).abs() < 1e-12);
            assert_eq!((s.width(), s.height(), s.order()), (3, 2, 8));
        }
    }

    #[test]
    fn load_errors() {
        assert!(matches!(load_image("/nonexistent/x.pgm", 1.0), Err(Error::Io { .. })));
        let neg = temp_file(b"1,-2\n");
        assert!(matches!(load_image(neg.path(), 1.0), Err(Error::Format { .. })));
        let zero = temp_file(b"P2 2 1 255\n0 0\n");
        let err = load_image(zero.path(), 1.0).unwrap_err();
        assert!(err.to_string().contains("all zero"), "{err}");
        assert!(load_image(zero.path(), 0.0).is_ok());
        let ragged = temp_file(b"1,2\n3\n");
        assert!(load_image(ragged.path(), 1.0).is_err());
    }

    #[test]
    fn order_padding() {
        let s = Scene::from_pixels(3, 1, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.order(), 4);
        let s = Scene::from_pixels(4, 1, &[1.0; 4]).unwrap();
        assert_eq!(s.order(), 8);
        let s = Scene::from_pixels(1, 1, &[1.0]).unwrap();
        assert_eq!(s.order(), 2);
    }

    #[test]
    fn rejects_invalid_vectors() {
        assert!(Scene::from_vector(vec![1.0, 2.0]).is_err());
        assert!(Scene::from_vector(vec![0.0, -2.0]).is_err());
        assert!(Scene::from_vector(vec![0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn uniform_random_zero() {
        let s = synth_uniform_random(64, 0.0, 1).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_random_large() {
        let x0 = 1e7;
        let s = synth_uniform_random(1024, x0, 3).unwrap();
        assert_eq!(s.brightness(), x0);
        let expected = x0 / 1023.0;
        let mean = s.usable().iter().sum::<f64>() / 1023.0;
        assert!((mean / expected - 1.0).abs() < 0.01);
        // each cell is Binomial(X0, 1/1023): sd ≈ 99
        assert!(s.usable().iter().all(|&v| (v - expected).abs() < 6.0 * expected.sqrt()));
    }

    #[test]
    fn point_source() {
        let s = synth_point_source(16, 0.0, 100.0).unwrap();
        assert_eq!(s.brightness(), 100.0);
        assert_eq!(s.values()[point_source_index(16)], 100.0);
        let flat = synth_point_source(16, 1.0, 0.0).unwrap();
        assert!(flat.usable().iter().all(|&v| v == 1.0));
        assert_eq!(flat.values()[0], 0.0);
    }

    #[test]
    fn scaling() {
        let s = Scene::from_pixels(2, 2, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        let t = s.scaled(3.0).unwrap();
        assert_eq!(t.brightness(), 3.0 * s.brightness());
        assert!(s.scaled(0.0).is_err());
    }

    proptest! {
        #[test]
        fn multinomial_conserves_photons(k in 1u32..12, x0 in 0.0f64..1e6, seed in any::<u64>()) {
            let s = synth_uniform_random(1 << k, x0, seed).unwrap();
            prop_assert_eq!(s.brightness(), x0.round());
            prop_assert_eq!(s.values()[0], 0.0);
        }

        #[test]
        fn brightness_is_stored_sum(pixels in proptest::collection::vec(0.0f64..1e6, 1..300)) {
            let s = Scene::from_pixels(pixels.len(), 1, &pixels).unwrap();
            prop_assert_eq!(s.brightness(), s.values().iter().sum::<f64>());
            prop_assert_eq!(s.values()[0], 0.0);
            prop_assert!(s.order().is_power_of_two());
        }
    }
}
