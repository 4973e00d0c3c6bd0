//! 8-bit grayscale image files: PGM (`P2` plain, `P5` raw) and PNG.
//!
//! Loading maps samples to `[0, 1]` by dividing by the file's maximum value
//! (255 for 8-bit data). Saving clamps to `[0, 1]`, scales by 255 and rounds
//! half to even.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ImageFormat {
    PgmP2,
    PgmP5,
    Png,
}

impl ImageFormat {
    /// Guess from a file extension: `.pgm` -> P5, `.png` -> PNG.
    pub fn from_extension(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(Self::PgmP5),
            "png" => Some(Self::Png),
            _ => None,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "p2" | "pgm-p2" => Some(Self::PgmP2),
            "p5" | "pgm" | "pgm-p5" => Some(Self::PgmP5),
            "png" => Some(Self::Png),
            _ => None,
        }
    }
}

/// Value in `[0, 1]` to an 8-bit sample.
pub fn quantize(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0).round_ties_even() as u8
}

pub fn load(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound {
            path: path.to_path_buf(),
        },
        _ => Error::Io(e),
    })?;
    decode(&bytes)
}

pub fn decode(bytes: &[u8]) -> Result<Image> {
    match bytes {
        [b'P', b'2', ..] => decode_pgm(bytes, false),
        [b'P', b'5', ..] => decode_pgm(bytes, true),
        [0x89, b'P', b'N', b'G', ..] => decode_png(bytes),
        [b'P', b'1' | b'3' | b'4' | b'6', ..] => Err(Error::UnsupportedFormat(
            "only grayscale netpbm (P2/P5) is supported".into(),
        )),
        _ => Err(Error::UnsupportedFormat("unrecognised magic number".into())),
    }
}

pub fn save(img: &Image, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    save_values(img.pixels(), path, format)
}

/// Writes arbitrary values, clamped into `[0, 1]` on the way out.
pub fn save_values(values: &DMatrix<f64>, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    fs::write(path, encode(values, format)?)?;
    Ok(())
}

pub fn encode(values: &DMatrix<f64>, format: ImageFormat) -> Result<Vec<u8>> {
    let (rows, cols) = values.shape();
    let samples: Vec<u8> = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| quantize(values[(i, j)]))
        .collect();
    match format {
        ImageFormat::PgmP5 => {
            let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
            out.extend_from_slice(&samples);
            Ok(out)
        }
        ImageFormat::PgmP2 => {
            let mut out = format!("P2\n{cols} {rows}\n255\n");
            for row in samples.chunks(cols) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        ImageFormat::Png => {
            let mut out = Vec::new();
            {
                let mut encoder = png::Encoder::new(&mut out, cols as u32, rows as u32);
                encoder.set_color(png::ColorType::Grayscale);
                encoder.set_depth(png::BitDepth::Eight);
                let mut writer = encoder
                    .write_header()
                    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                writer
                    .write_image_data(&samples)
                    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            }
            Ok(out)
        }
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("expected {what}")))
    }
}

fn decode_pgm(bytes: &[u8], raw: bool) -> Result<Image> {
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let cols = cur.number("width")?;
    let rows = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "only 8-bit PGM is supported (maxval {maxval})"
        )));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::MalformedHeader(format!("empty image {cols}x{rows}")));
    }
    let count = rows * cols;
    let samples: Vec<u8> = if raw {
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(cur.pos) {
            Some(c) if c.is_ascii_whitespace() => {}
            _ => return Err(Error::MalformedHeader("missing whitespace after maxval".into())),
        }
        let body = &bytes[cur.pos + 1..];
        if body.len() < count {
            return Err(Error::MalformedPayload(format!(
                "expected {count} samples, found {}",
                body.len()
            )));
        }
        body[..count].to_vec()
    } else {
        let body = std::str::from_utf8(&bytes[cur.pos..])
            .map_err(|_| Error::MalformedPayload("non-ASCII data in plain PGM".into()))?;
        let values: Vec<u8> = body
            .split_ascii_whitespace()
            .map(|t| t.parse::<u8>().map_err(|_| Error::MalformedPayload(format!("bad sample {t:?}"))))
            .collect::<Result<_>>()?;
        if values.len() != count {
            return Err(Error::MalformedPayload(format!(
                "expected {count} samples, found {}",
                values.len()
            )));
        }
        values
    };
    if let Some(bad) = samples.iter().find(|&&s| s as usize > maxval) {
        return Err(Error::MalformedPayload(format!("sample {bad} exceeds maxval {maxval}")));
    }
    let scale = maxval as f64;
    let pixels = DMatrix::from_fn(rows, cols, |i, j| samples[i * cols + j] as f64 / scale);
    Image::with_metadata(pixels, 1.0, 255.0)
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let info = reader.info();
    match (info.color_type, info.bit_depth) {
        (png::ColorType::Grayscale, png::BitDepth::Eight) => {}
        (png::ColorType::Grayscale, depth) => {
            return Err(Error::UnsupportedFormat(format!("grayscale PNG with bit depth {depth:?}")))
        }
        (color, _) => return Err(Error::NotGrayscale(format!("PNG color type {color:?}"))),
    }
    let (cols, rows) = (info.width as usize, info.height as usize);
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::MalformedHeader("PNG dimensions overflow".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::MalformedPayload(e.to_string()))?;
    let stride = frame.line_size;
    let pixels = DMatrix::from_fn(rows, cols, |i, j| buf[i * stride + j] as f64 / 255.0);
    Image::with_metadata(pixels, 1.0, 255.0)
}
