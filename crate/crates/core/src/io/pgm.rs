//! Binary PGM (P5, maxval 255).

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

fn format_err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Format {
        offset,
        message: message.into(),
    })
}

/// Exactly `"P5\n<w> <h>\n255\n"` followed by the raw row-major bytes.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.as_slice());
    out
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
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
        if start == self.pos {
            return format_err(start, format!("expected {what}"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        match text.parse() {
            Ok(v) => Ok(v),
            Err(_) => format_err(start, format!("{what} {text} out of range")),
        }
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return format_err(0, "missing P5 magic number");
    }
    let mut hdr = Header { bytes, pos: 2 };
    let width = hdr.number("width")?;
    let height = hdr.number("height")?;
    let maxval_at = {
        hdr.skip_space_and_comments();
        hdr.pos
    };
    let maxval = hdr.number("maxval")?;
    if maxval != 255 {
        return format_err(
            maxval_at,
            format!("unsupported maxval {maxval}, expected 255"),
        );
    }
    if width == 0 || height == 0 {
        return format_err(2, format!("nonpositive dimensions {width}x{height}"));
    }
    match bytes.get(hdr.pos) {
        Some(b) if b.is_ascii_whitespace() => hdr.pos += 1,
        _ => return format_err(hdr.pos, "expected a single whitespace byte after maxval"),
    }
    let need = match width.checked_mul(height) {
        Some(n) => n,
        None => return format_err(2, "image dimensions overflow"),
    };
    let payload = &bytes[hdr.pos..];
    if payload.len() < need {
        return format_err(
            bytes.len(),
            format!("truncated payload: {} of {need} bytes", payload.len()),
        );
    }
    GrayImage::from_vec(width, height, payload[..need].to_vec())
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_pgm(&std::fs::read(path)?)
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_pgm(img))?;
    Ok(())
}
