//! Netpbm greymaps, binary (P5) and plain (P2).

use crate::error::{CliError, Result};
use std::path::Path;

/// Greymap with samples scaled to [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Greymap {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<f64>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
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

    fn number(&mut self) -> Option<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).ok()?.parse().ok()
    }
}

pub fn parse(bytes: &[u8]) -> std::result::Result<Greymap, String> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err("not a PGM file (expected P5 or P2)".into()),
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number().ok_or("missing width")?;
    let height = h.number().ok_or("missing height")?;
    let maxval = h.number().ok_or("missing maxval")?;
    if width == 0 || height == 0 {
        return Err("empty image".into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    let count = width * height;
    let scale = 1.0 / maxval as f64;
    let raw: Vec<usize> = if binary {
        // exactly one whitespace byte separates the header from the raster
        let data = bytes.get(h.pos + 1..).ok_or("truncated raster")?;
        let wide = maxval > 255;
        let need = if wide { 2 * count } else { count };
        if data.len() < need {
            return Err(format!("raster has {} bytes, expected {need}", data.len()));
        }
        if wide {
            data[..need].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as usize).collect()
        } else {
            data[..need].iter().map(|&b| b as usize).collect()
        }
    } else {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            v.push(h.number().ok_or("truncated raster")?);
        }
        v
    };
    if let Some(bad) = raw.iter().find(|&&v| v > maxval) {
        return Err(format!("sample {bad} exceeds maxval {maxval}"));
    }
    Ok(Greymap {
        width,
        height,
        samples: raw.into_iter().map(|v| v as f64 * scale).collect(),
    })
}

pub fn read(path: &Path) -> Result<Greymap> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse(&bytes).map_err(|m| CliError::format(path, m))
}

/// Binary greymap with maxval 255.
pub fn encode(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel count");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Rescales a non-negative field so its maximum becomes 255.
pub fn quantize(values: &[f64], invert: bool) -> Vec<u8> {
    let max = values.iter().copied().fold(0.0, f64::max);
    values
        .iter()
        .map(|&v| {
            let q = if max > 0.0 { (v / max * 255.0).round().clamp(0.0, 255.0) as u8 } else { 0 };
            if invert {
                255 - q
            } else {
                q
            }
        })
        .collect()
}
