//! Binary PGM (P5, maxval 255) and the plain-text matrix format.
//!
//! The matrix format is a header line `rows cols` followed by one line per
//! row of space-separated reals. Values are written with Rust's shortest
//! round-trip formatting, so parsing a written matrix is bit-exact.

use std::fs;
use std::path::Path;

use crate::error::FormatError;
use crate::image::ImageBuffer;
use crate::matrix::DenseMatrix;

fn with_path(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: Some(path.to_path_buf()),
        source,
    }
}

/// Parses a binary P5 graymap with maxval 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<ImageBuffer, FormatError> {
    let mut pos = 0;
    let mut fields = [0usize; 3];

    let magic = bytes.get(..2).ok_or_else(|| FormatError::Pgm("truncated header".into()))?;
    if magic != b"P5" {
        return Err(FormatError::Pgm(format!(
            "unsupported magic {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    pos += 2;

    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(FormatError::Pgm("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(FormatError::Pgm("expected a decimal header field".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| FormatError::Pgm("header field out of range".into()))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(FormatError::Pgm(format!("maxval {maxval} unsupported (need 255)")));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(FormatError::Pgm("missing raster separator".into()));
    }
    pos += 1;
    let n = width * height;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or_else(|| FormatError::Pgm(format!("raster truncated: need {n} bytes")))?;
    Ok(ImageBuffer::from_u8(height, width, raster)?)
}

/// Encodes as P5 after clamping to `[0, 255]` and rounding.
pub fn encode_pgm(img: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_u8());
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<ImageBuffer, FormatError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(with_path(path))?;
    decode_pgm(&bytes)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &ImageBuffer) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(with_path(path))
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut s = format!("{} {}\n", m.rows(), m.cols());
    for row in m.entries().chunks_exact(m.cols()) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix, FormatError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| FormatError::MatrixText("empty input".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|e| FormatError::MatrixText(format!("bad header {header:?}: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(FormatError::MatrixText(format!("bad header {header:?}")));
    };
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        let before = entries.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| FormatError::MatrixText(format!("row {i}: {tok:?}: {e}")))?;
            entries.push(v);
        }
        if entries.len() - before != cols {
            return Err(FormatError::MatrixText(format!(
                "row {i} has {} values, expected {cols}",
                entries.len() - before
            )));
        }
    }
    if entries.len() != rows * cols {
        return Err(FormatError::MatrixText(format!(
            "expected {rows} rows, got {}",
            entries.len() / cols.max(1)
        )));
    }
    Ok(DenseMatrix::new(rows, cols, entries)?)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix, FormatError> {
    let path = path.as_ref();
    parse_matrix(&fs::read_to_string(path).map_err(with_path(path))?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(with_path(path))
}
