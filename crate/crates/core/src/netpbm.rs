//! PBM, PGM and `VOX3` image files.
//!
//! PBM bit `1` is read as value 1 (in PBM convention a black pixel). PGM
//! samples map to `v / maxval`. Images must be square. The first raster row is
//! `i = 1`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{BinaryImage2D, BinaryImage3D, GrayImage2D};

/// Plain (ASCII) or raw (binary) netpbm encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Plain,
    Raw,
}

/// Any image this crate can read from disk.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyImage {
    Binary(BinaryImage2D),
    Gray(GrayImage2D),
    Volume(BinaryImage3D),
}

fn format(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self.data.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format("unexpected end of file"));
        }
        Ok(&self.data[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format(format!("invalid {what}: {:?}", String::from_utf8_lossy(tok))))
    }

    /// Plain PBM pixels may be written without separators.
    fn bit(&mut self) -> Result<u8> {
        self.skip_space_and_comments();
        match self.data.get(self.pos) {
            Some(b'0') => {
                self.pos += 1;
                Ok(0)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(1)
            }
            Some(&b) => Err(format(format!("invalid PBM pixel {:?}", b as char))),
            None => Err(format("truncated PBM data")),
        }
    }

    /// Raster data of a raw file starts after exactly one whitespace byte.
    fn raster(&mut self) -> Result<&'a [u8]> {
        match self.data.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(&self.data[self.pos + 1..]),
            _ => Err(format("missing whitespace before raster data")),
        }
    }
}

fn square_side(c: &mut Cursor) -> Result<usize> {
    let w = c.number("width")?;
    let h = c.number("height")?;
    if w != h {
        return Err(format(format!("image is {w}×{h}; only square images are supported")));
    }
    Ok(w)
}

fn magic(data: &[u8]) -> Result<&[u8]> {
    data.get(..2).ok_or_else(|| format("file too short"))
}

pub fn parse_pbm(data: &[u8]) -> Result<BinaryImage2D> {
    let raw = match magic(data)? {
        b"P1" => false,
        b"P4" => true,
        m => return Err(format(format!("not a PBM file (magic {:?})", String::from_utf8_lossy(m)))),
    };
    let mut c = Cursor { data, pos: 2 };
    let n = square_side(&mut c)?;
    let mut bits = Vec::with_capacity(n * n);
    if raw {
        let body = c.raster()?;
        let row_bytes = n.div_ceil(8);
        if body.len() < row_bytes * n {
            return Err(format("truncated PBM data"));
        }
        for row in body.chunks(row_bytes).take(n) {
            bits.extend((0..n).map(|j| (row[j / 8] >> (7 - j % 8)) & 1));
        }
    } else {
        for _ in 0..n * n {
            bits.push(c.bit()?);
        }
    }
    BinaryImage2D::new(n, bits).map_err(|e| format(e.to_string()))
}

pub fn parse_pgm(data: &[u8]) -> Result<GrayImage2D> {
    let raw = match magic(data)? {
        b"P2" => false,
        b"P5" => true,
        m => return Err(format(format!("not a PGM file (magic {:?})", String::from_utf8_lossy(m)))),
    };
    let mut c = Cursor { data, pos: 2 };
    let n = square_side(&mut c)?;
    let maxval = c.number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(format(format!("maxval {maxval} outside 1..=65535")));
    }
    let scale = maxval as f64;
    let mut samples = Vec::with_capacity(n * n);
    if raw {
        let body = c.raster()?;
        let width = if maxval < 256 { 1 } else { 2 };
        if body.len() < width * n * n {
            return Err(format("truncated PGM data"));
        }
        for s in body.chunks(width).take(n * n) {
            let v = if width == 1 { s[0] as usize } else { (s[0] as usize) << 8 | s[1] as usize };
            samples.push(v);
        }
    } else {
        for _ in 0..n * n {
            samples.push(c.number("sample")?);
        }
    }
    if let Some(v) = samples.iter().find(|&&v| v > maxval) {
        return Err(format(format!("sample {v} exceeds maxval {maxval}")));
    }
    GrayImage2D::new(n, samples.into_iter().map(|v| v as f64 / scale).collect()).map_err(|e| format(e.to_string()))
}

pub fn encode_pbm(m: &BinaryImage2D, enc: Encoding) -> Vec<u8> {
    let n = m.n();
    let mut out = match enc {
        Encoding::Plain => format!("P1\n{n} {n}\n").into_bytes(),
        Encoding::Raw => format!("P4\n{n} {n}\n").into_bytes(),
    };
    for row in m.as_slice().chunks(n) {
        match enc {
            Encoding::Plain => {
                out.extend(row.iter().map(|&b| b'0' + b));
                out.push(b'\n');
            }
            Encoding::Raw => {
                for byte in row.chunks(8) {
                    out.push(byte.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | b << (7 - k)));
                }
            }
        }
    }
    out
}

/// Samples are quantized to `round(v · maxval)`.
pub fn encode_pgm(m: &GrayImage2D, maxval: u16, enc: Encoding) -> Vec<u8> {
    let n = m.n();
    let maxval = maxval.max(1);
    let q = |v: f64| (v * maxval as f64).round() as u16;
    let mut out = match enc {
        Encoding::Plain => format!("P2\n{n} {n}\n{maxval}\n").into_bytes(),
        Encoding::Raw => format!("P5\n{n} {n}\n{maxval}\n").into_bytes(),
    };
    for row in m.as_slice().chunks(n) {
        match enc {
            Encoding::Plain => {
                let line: Vec<String> = row.iter().map(|&v| q(v).to_string()).collect();
                out.extend(line.join(" ").bytes());
                out.push(b'\n');
            }
            Encoding::Raw if maxval < 256 => out.extend(row.iter().map(|&v| q(v) as u8)),
            Encoding::Raw => out.extend(row.iter().flat_map(|&v| q(v).to_be_bytes())),
        }
    }
    out
}

pub fn parse_vox3(data: &[u8]) -> Result<BinaryImage3D> {
    let text = std::str::from_utf8(data).map_err(|_| format("VOX3 file is not UTF-8"))?;
    let mut lines = text.lines().map(str::trim_end);
    if lines.next() != Some("VOX3") {
        return Err(format("missing VOX3 header"));
    }
    let n: usize =
        lines.next().and_then(|l| l.trim().parse().ok()).ok_or_else(|| format("invalid VOX3 side length"))?;
    let rows: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
    if rows.len() != n * n {
        return Err(format(format!("expected {} rows of voxels, found {}", n * n, rows.len())));
    }
    let mut bits = Vec::with_capacity(n * n * n);
    for row in rows {
        if row.len() != n {
            return Err(format(format!("voxel row {row:?} does not have {n} characters")));
        }
        for ch in row.bytes() {
            match ch {
                b'0' | b'1' => bits.push(ch - b'0'),
                _ => return Err(format(format!("invalid voxel {:?}", ch as char))),
            }
        }
    }
    BinaryImage3D::new(n, bits).map_err(|e| format(e.to_string()))
}

pub fn encode_vox3(m: &BinaryImage3D) -> Vec<u8> {
    let n = m.n();
    let mut out = format!("VOX3\n{n}\n").into_bytes();
    for (k, slice) in m.as_slice().chunks(n * n).enumerate() {
        if k > 0 {
            out.push(b'\n');
        }
        for row in slice.chunks(n) {
            out.extend(row.iter().map(|&b| b'0' + b));
            out.push(b'\n');
        }
    }
    out
}

/// Parses by magic number.
pub fn parse_any(data: &[u8]) -> Result<AnyImage> {
    match data.get(..2) {
        Some(b"P1" | b"P4") => parse_pbm(data).map(AnyImage::Binary),
        Some(b"P2" | b"P5") => parse_pgm(data).map(AnyImage::Gray),
        Some(b"VO") => parse_vox3(data).map(AnyImage::Volume),
        _ => Err(format("unrecognized image format")),
    }
}

pub fn read_any(path: impl AsRef<Path>) -> Result<AnyImage> {
    parse_any(&fs::read(path)?)
}

pub fn read_pbm(path: impl AsRef<Path>) -> Result<BinaryImage2D> {
    parse_pbm(&fs::read(path)?)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage2D> {
    parse_pgm(&fs::read(path)?)
}

pub fn read_vox3(path: impl AsRef<Path>) -> Result<BinaryImage3D> {
    parse_vox3(&fs::read(path)?)
}

pub fn write_pbm(path: impl AsRef<Path>, m: &BinaryImage2D, enc: Encoding) -> Result<()> {
    Ok(fs::write(path, encode_pbm(m, enc))?)
}

pub fn write_pgm(path: impl AsRef<Path>, m: &GrayImage2D, maxval: u16, enc: Encoding) -> Result<()> {
    Ok(fs::write(path, encode_pgm(m, maxval, enc))?)
}

pub fn write_vox3(path: impl AsRef<Path>, m: &BinaryImage3D) -> Result<()> {
    Ok(fs::write(path, encode_vox3(m))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{Pixel, Voxel};
    use proptest::prelude::*;

    #[test]
    fn plain_pbm_with_comments_and_packed_digits() {
        let data = b"P1\n# a comment\n3 3\n010\n1 1 1\n# mid\n000\n";
        let m = parse_pbm(data).unwrap();
        assert_eq!(m.get(Pixel::new(1, 2)), 1);
        assert_eq!(m.get(Pixel::new(2, 3)), 1);
        assert_eq!(m.count_ones(), 4);
    }

    #[test]
    fn raw_pbm_row_padding() {
        let m = BinaryImage2D::from_fn(10, |p| (p.i + 2 * p.j) % 3 == 0).unwrap();
        let bytes = encode_pbm(&m, Encoding::Raw);
        assert_eq!(bytes.len(), "P4\n10 10\n".len() + 2 * 10);
        assert_eq!(parse_pbm(&bytes).unwrap(), m);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(parse_pbm(b"P1\n3 4\n"), Err(Error::Format(_))));
        assert!(matches!(parse_pbm(b"P1\n2 2\n0 1 2 0"), Err(Error::Format(_))));
        assert!(matches!(parse_pbm(b"P4\n8 8\n\x00"), Err(Error::Format(_))));
        assert!(matches!(parse_pgm(b"P2\n2 2\n3\n0 1 2 4"), Err(Error::Format(_))));
        assert!(matches!(parse_any(b"GIF89a"), Err(Error::Format(_))));
        assert!(matches!(parse_vox3(b"VOX3\n2\n01\n10\n\n01\n"), Err(Error::Format(_))));
    }

    #[test]
    fn pgm_scaling() {
        let m = parse_pgm(b"P2 2 2 4 0 1 2 4").unwrap();
        assert_eq!(m.as_slice(), &[0.0, 0.25, 0.5, 1.0]);
        let wide = parse_pgm(b"P5 1 1 65535\n\xff\xff").unwrap();
        assert_eq!(wide.as_slice(), &[1.0]);
    }

    #[test]
    fn vox3_layout() {
        let m = BinaryImage3D::from_fn(2, |v| v == Voxel::new(1, 2, 2)).unwrap();
        let text = String::from_utf8(encode_vox3(&m)).unwrap();
        assert_eq!(text, "VOX3\n2\n00\n00\n\n01\n00\n");
        assert_eq!(parse_vox3(text.as_bytes()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn pbm_round_trip(n in 2usize..20, seed: u64, raw: bool) {
            let m = BinaryImage2D::from_fn(n, |p| (seed >> ((p.i * 7 + p.j) % 64)) & 1 == 1).unwrap();
            let enc = if raw { Encoding::Raw } else { Encoding::Plain };
            prop_assert_eq!(parse_pbm(&encode_pbm(&m, enc)).unwrap(), m);
        }

        #[test]
        fn pgm_round_trip_on_quantized_values(n in 1usize..12, maxval in 1u16..=65535, raw: bool, seed: u64) {
            let m = GrayImage2D::from_fn(n, |p| ((seed.rotate_left((p.i * n + p.j) as u32) % (maxval as u64 + 1)) as f64) / maxval as f64).unwrap();
            let enc = if raw { Encoding::Raw } else { Encoding::Plain };
            prop_assert_eq!(parse_pgm(&encode_pgm(&m, maxval, enc)).unwrap(), m);
        }

        #[test]
        fn vox3_bit_exact(n in 1usize..7, seed: u64) {
            let m = BinaryImage3D::from_fn(n, |v| (seed >> ((v.i + 3 * v.j + 5 * v.k) % 64)) & 1 == 1).unwrap();
            let bytes = encode_vox3(&m);
            let back = parse_vox3(&bytes).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(encode_vox3(&back), bytes);
        }
    }
}
