//! Binary input rasters (PGM, PNG) and RGB output images.

use std::io::{BufRead, Cursor, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which side of the luminance threshold counts as foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Bright pixels are foreground.
    #[default]
    Bright,
    /// Dark pixels are foreground, for dark-on-white artwork.
    Dark,
}

/// A two-level image. Row 0 is the top row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image is empty".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "{} pixels for a {width}×{height} image",
                pixels.len()
            )));
        }
        Ok(BinaryImage {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn<F>(width: usize, height: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> bool,
    {
        let pixels = (0..height)
            .flat_map(|row| (0..width).map(move |col| (col, row)))
            .map(|(c, r)| f(c, r))
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.pixels[row * self.width + col]
    }

    pub fn inverted(&self) -> Self {
        BinaryImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| !p).collect(),
        }
    }

    /// Loads a PGM (P2/P5) or PNG file, thresholding luminance at 50%.
    pub fn load(path: &Path, polarity: Polarity) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes, polarity)
    }

    pub fn decode(bytes: &[u8], polarity: Polarity) -> Result<Self> {
        let image = if bytes.starts_with(b"\x89PNG") {
            decode_png(bytes)?
        } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
            decode_pgm(bytes)?
        } else {
            return Err(Error::format("raster", "expected a PGM or PNG file"));
        };
        Ok(match polarity {
            Polarity::Bright => image,
            Polarity::Dark => image.inverted(),
        })
    }

    /// Plain-text PGM with maxval 1.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "P2\n{} {}\n1", self.width, self.height)?;
        for row in self.pixels.chunks(self.width) {
            let line: Vec<&str> = row.iter().map(|&p| if p { "1" } else { "0" }).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<BinaryImage> {
    let bad = |d: &str| Error::format("PGM", d);
    let binary = bytes.starts_with(b"P5");
    // Header tokens, skipping comments; for P5 a single whitespace byte
    // separates maxval from the pixel data.
    let mut pos = 2;
    let mut header = Vec::new();
    while header.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?;
        header.push(text.parse::<usize>().map_err(|_| bad("header number"))?);
    }
    let (width, height, maxval) = (header[0], header[1], header[2]);
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    let count = width * height;
    let levels: Vec<usize> = if binary {
        let data = &bytes[(pos + 1).min(bytes.len())..];
        let per = if maxval > 255 { 2 } else { 1 };
        if data.len() < count * per {
            return Err(bad("truncated pixel data"));
        }
        (0..count)
            .map(|i| {
                if per == 2 {
                    (data[2 * i] as usize) << 8 | data[2 * i + 1] as usize
                } else {
                    data[i] as usize
                }
            })
            .collect()
    } else {
        let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| bad("pixel text"))?;
        let values: Vec<usize> = text
            .split_ascii_whitespace()
            .take(count)
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("pixel value"))?;
        if values.len() < count {
            return Err(bad("truncated pixel data"));
        }
        values
    };
    let pixels = levels.iter().map(|&v| 2 * v > maxval).collect();
    BinaryImage::new(width, height, pixels)
}

fn decode_png(bytes: &[u8]) -> Result<BinaryImage> {
    let bad = |e: png::DecodingError| Error::format("PNG", e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(bad)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format("PNG", "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(bad)?;
    let channels = info.color_type.samples();
    let (width, height) = (info.width as usize, info.height as usize);
    let mut pixels = Vec::with_capacity(width * height);
    for row in buf.chunks(info.line_size).take(height) {
        for px in row.chunks(channels).take(width) {
            // Alpha, when present, is ignored.
            let luma = match info.color_type {
                png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => px[0] as f64,
                _ => 0.2126 * px[0] as f64 + 0.7152 * px[1] as f64 + 0.0722 * px[2] as f64,
            };
            pixels.push(luma > 127.5);
        }
    }
    BinaryImage::new(width, height, pixels)
}

/// A block "U" on a square canvas.
///
/// Stands in for the logo used in the published experiments: two vertical
/// bars joined by a half annulus, about 70% of the canvas wide.
pub fn u_logo(size: usize) -> BinaryImage {
    let s = size as f64;
    BinaryImage::from_fn(size, size, |col, row| {
        let x = (col as f64 + 0.5) / s;
        let y = (row as f64 + 0.5) / s;
        let (outer, inner, cy) = (0.35, 0.13, 0.55);
        let top = 0.12;
        if y < top {
            return false;
        }
        let dx = (x - 0.5).abs();
        if y <= cy {
            return dx <= outer && dx >= inner;
        }
        let r = ((x - 0.5).powi(2) + (y - cy).powi(2)).sqrt();
        r <= outer && r >= inner
    })
    .expect("nonempty canvas")
}

/// 8-bit RGB image for rendered figures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        RgbImage {
            width,
            height,
            data: fill.repeat(width * height),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, col: usize, row: usize, rgb: [u8; 3]) {
        let i = 3 * (row * self.width + col);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn write_png<W: Write>(&self, w: W) -> Result<()> {
        let err = |e: png::EncodingError| Error::format("PNG", e.to_string());
        let mut encoder = png::Encoder::new(w, self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(err)?;
        writer.write_image_data(&self.data).map_err(err)?;
        writer.finish().map_err(err)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_png(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read_png<R: BufRead + std::io::Seek>(r: R) -> Result<Self> {
        let bad = |e: png::DecodingError| Error::format("PNG", e.to_string());
        let mut decoder = png::Decoder::new(r);
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info().map_err(bad)?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| Error::format("PNG", "image too large"))?;
        let mut buf = vec![0u8; size];
        let info = reader.next_frame(&mut buf).map_err(bad)?;
        if info.color_type != png::ColorType::Rgb {
            return Err(Error::format("PNG", "expected an RGB image"));
        }
        let (width, height) = (info.width as usize, info.height as usize);
        let mut data = Vec::with_capacity(3 * width * height);
        for row in buf.chunks(info.line_size).take(height) {
            data.extend_from_slice(&row[..3 * width]);
        }
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_ascii_and_binary() {
        let ascii = b"P2\n# comment\n3 2\n255\n0 200 100\n255 128 127\n";
        let img = BinaryImage::decode(ascii, Polarity::Bright).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(
            (0..6).map(|i| img.get(i % 3, i / 3)).collect::<Vec<_>>(),
            vec![false, true, false, true, true, false]
        );
        let mut binary = b"P5 3 2 255\n".to_vec();
        binary.extend_from_slice(&[0, 200, 100, 255, 128, 127]);
        assert_eq!(BinaryImage::decode(&binary, Polarity::Bright).unwrap(), img);
        assert_eq!(BinaryImage::decode(&binary, Polarity::Dark).unwrap(), img.inverted());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BinaryImage::decode(b"GIF89a", Polarity::Bright).is_err());
        assert!(BinaryImage::decode(b"P2\n3 2\n255\n0 1\n", Polarity::Bright).is_err());
        assert!(BinaryImage::decode(b"P2\n0 0\n255\n", Polarity::Bright).is_err());
        assert!(BinaryImage::new(0, 3, vec![]).is_err());
    }

    #[test]
    fn pgm_write_round_trip() {
        let img = u_logo(40);
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        assert_eq!(BinaryImage::decode(&buf, Polarity::Bright).unwrap(), img);
    }

    #[test]
    fn png_round_trip() {
        let mut rgb = RgbImage::new(5, 4, [255, 255, 255]);
        rgb.set(1, 2, [0, 0, 0]);
        rgb.set(4, 0, [10, 250, 10]);
        let mut buf = Vec::new();
        rgb.write_png(&mut buf).unwrap();
        assert_eq!(RgbImage::read_png(Cursor::new(&buf)).unwrap(), rgb);
        let bin = BinaryImage::decode(&buf, Polarity::Bright).unwrap();
        assert!(!bin.get(1, 2));
        assert!(bin.get(4, 0));
        assert!(bin.get(0, 0));
    }

    #[test]
    fn u_logo_shape() {
        let img = u_logo(100);
        assert!(!img.get(50, 50), "gap between the bars");
        assert!(img.get(20, 40), "left bar");
        assert!(img.get(79, 40), "right bar");
        assert!(img.get(50, 85), "bowl");
        assert!(!img.get(50, 5), "open top");
        assert!(!img.get(2, 98));
    }

    #[test]
    fn shipped_logo_matches_generator() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/u_logo.pgm");
        let img = BinaryImage::load(&path, Polarity::Bright).unwrap();
        assert_eq!(img, u_logo(img.width()));
    }
}
