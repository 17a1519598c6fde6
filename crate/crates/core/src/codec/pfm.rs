//! Single-channel PFM (`Pf`) images.
//!
//! Writes little-endian data with scale `-1.0`. Scanlines are stored bottom
//! to top as the format prescribes; callers see row 0 as the top row.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub fn encode_pfm(width: usize, height: usize, top_down: &[f32]) -> Vec<u8> {
    assert_eq!(top_down.len(), width * height);
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    out.reserve(top_down.len() * 4);
    for row in top_down.chunks_exact(width).rev() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_pfm(path: impl AsRef<Path>, width: usize, height: usize, top_down: &[f32]) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pfm(width, height, top_down);
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| Error::io(path, e))
}

/// Returns `(width, height, top-down pixels)`.
pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let bad = |m: &str| Error::malformed(path, m);
    let mut pos = 0;
    let mut next_line = || -> Result<&str> {
        let rest = &bytes[pos..];
        let end = rest.iter().position(|&b| b == b'\n').ok_or_else(|| bad("truncated header"))?;
        pos += end + 1;
        std::str::from_utf8(&rest[..end])
            .map(str::trim)
            .map_err(|_| bad("header is not text"))
    };
    match next_line()? {
        "Pf" => {}
        "PF" => return Err(bad("three-channel PFM where a single channel is expected")),
        _ => return Err(bad("not a PFM file")),
    }
    let dims = next_line()?;
    let mut it = dims.split_whitespace().map(str::parse::<usize>);
    let (width, height) = match (it.next(), it.next(), it.next()) {
        (Some(Ok(w)), Some(Ok(h)), None) if w > 0 && h > 0 => (w, h),
        _ => return Err(bad("bad dimensions line")),
    };
    let scale: f32 = next_line()?.parse().map_err(|_| bad("bad scale line"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad("scale must be finite and nonzero"));
    }
    let little = scale < 0.0;
    let body = &bytes[pos..];
    if body.len() != width * height * 4 {
        return Err(bad(&format!(
            "expected {} data bytes, found {}",
            width * height * 4,
            body.len()
        )));
    }
    let mut data = vec![0f32; width * height];
    for (r, row) in body.chunks_exact(width * 4).enumerate() {
        let dst = &mut data[(height - 1 - r) * width..(height - r) * width];
        for (d, b) in dst.iter_mut().zip(row.chunks_exact(4)) {
            let b = [b[0], b[1], b[2], b[3]];
            *d = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        }
    }
    Ok((width, height, data))
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f32>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes, path)
}
