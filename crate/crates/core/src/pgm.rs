//! Minimal grayscale PGM (P2/P5) reader and 16-bit P5 writer.

use std::io::Write;

/// A decoded grayscale image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples.
    pub pixels: Vec<u16>,
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.data[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize, String> {
        let tok = self.token().ok_or_else(|| format!("missing {what}"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {what} '{}'", String::from_utf8_lossy(tok)))
    }
}

/// Returns true if `data` starts with a P2 or P5 magic number.
pub fn is_pgm(data: &[u8]) -> bool {
    data.len() >= 2 && data[0] == b'P' && (data[1] == b'2' || data[1] == b'5')
}

pub fn decode(data: &[u8]) -> Result<GrayImage, String> {
    if !is_pgm(data) {
        return Err("not a P2/P5 PGM file".into());
    }
    let binary = data[1] == b'5';
    let mut hdr = Header { data, pos: 2 };
    let width = hdr.number("width")?;
    let height = hdr.number("height")?;
    let maxval = hdr.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(format!("empty image {width}x{height}"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| "image dimensions overflow".to_string())?;
    let mut pixels = Vec::with_capacity(count);

    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = hdr.pos + 1;
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let raster = data
            .get(start..start + count * bytes_per)
            .ok_or_else(|| "truncated raster".to_string())?;
        if bytes_per == 1 {
            pixels.extend(raster.iter().map(|&b| b as u16));
        } else {
            pixels.extend(raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])));
        }
    } else {
        for i in 0..count {
            let v = hdr.number(&format!("sample {i}"))?;
            pixels.push(v as u16);
        }
    }
    if pixels.iter().any(|&p| p as usize > maxval) {
        return Err("sample exceeds maxval".into());
    }
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

/// Writes a P5 image with maxval 65535 (big-endian 16-bit samples).
pub fn write_p5_16<W: Write>(
    out: &mut W,
    width: usize,
    height: usize,
    pixels: &[u16],
) -> std::io::Result<()> {
    assert_eq!(pixels.len(), width * height, "raster size mismatch");
    write!(out, "P5\n{width} {height}\n65535\n")?;
    let mut raster = Vec::with_capacity(pixels.len() * 2);
    for p in pixels {
        raster.extend_from_slice(&p.to_be_bytes());
    }
    out.write_all(&raster)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_with_comments() {
        let img = decode(b"P2\n# a comment\n3 2\n# another\n255\n0 1 2\n3 4 255\n").unwrap();
        assert_eq!((img.width, img.height, img.maxval), (3, 2, 255));
        assert_eq!(img.pixels, vec![0, 1, 2, 3, 4, 255]);
    }

    #[test]
    fn binary_eight_bit() {
        let mut data = b"P5 2 2 255\n".to_vec();
        data.extend_from_slice(&[10, 20, 30, 40]);
        assert_eq!(decode(&data).unwrap().pixels, vec![10, 20, 30, 40]);
    }

    #[test]
    fn sixteen_bit_round_trip() {
        let pixels = vec![0u16, 1, 256, 65535, 1234, 4321];
        let mut buf = Vec::new();
        write_p5_16(&mut buf, 3, 2, &pixels).unwrap();
        assert!(buf.starts_with(b"P5\n3 2\n65535\n"));
        let img = decode(&buf).unwrap();
        assert_eq!((img.width, img.height, img.maxval), (3, 2, 65535));
        assert_eq!(img.pixels, pixels);
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode(b"P6 1 1 255\n\0\0\0").is_err());
        assert!(decode(b"P5 2 2 255\n\x01").is_err());
        assert!(decode(b"P2 2 1 70000\n1 2").is_err());
        assert!(decode(b"P2 2 1 10\n1 20").is_err());
        assert!(decode(b"P2 0 1 10\n").is_err());
        assert!(decode(b"P2 2 1 10\n1").is_err());
    }
}
