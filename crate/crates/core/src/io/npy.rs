//! The `.npy` v1.0 container, restricted to little-endian float32, rank 2,
//! C order.
//!
//! Layout: magic `\x93NUMPY`, version bytes `1 0`, a little-endian u16 header
//! length, then an ASCII Python dict literal such as
//! `{'descr': '<f4', 'fortran_order': False, 'shape': (2, 3), }` padded with
//! spaces and a final newline so the whole preamble is a multiple of 64
//! bytes. The row-major payload follows.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use super::{write_atomic, FormatError};
use crate::sequence::Matrix;

pub const NPY_MAGIC: &[u8; 6] = b"\x93NUMPY";

/// Largest payload `read_array` will allocate for.
pub const DEFAULT_PAYLOAD_CAP: usize = 1 << 30;

const PREAMBLE_LEN: usize = 10;
const ALIGN: usize = 64;

pub fn read_array(path: impl AsRef<Path>) -> Result<Matrix, FormatError> {
    read_array_with_cap(path, DEFAULT_PAYLOAD_CAP)
}

pub fn read_array_with_cap(path: impl AsRef<Path>, cap: usize) -> Result<Matrix, FormatError> {
    let file = File::open(path)?;
    read_array_from(BufReader::new(file), cap)
}

pub fn read_array_from<R: Read>(mut reader: R, cap: usize) -> Result<Matrix, FormatError> {
    let mut preamble = [0u8; PREAMBLE_LEN];
    let got = read_up_to(&mut reader, &mut preamble)?;
    if got < NPY_MAGIC.len() || &preamble[..6] != NPY_MAGIC {
        return Err(FormatError::BadMagic);
    }
    if got < PREAMBLE_LEN {
        return Err(FormatError::MalformedHeader("preamble is truncated".into()));
    }
    if preamble[6..8] != [1, 0] {
        return Err(FormatError::UnsupportedVersion(preamble[6], preamble[7]));
    }
    let header_len = u16::from_le_bytes([preamble[8], preamble[9]]) as usize;
    let mut header = vec![0u8; header_len];
    if read_up_to(&mut reader, &mut header)? < header_len {
        return Err(FormatError::MalformedHeader("header is truncated".into()));
    }
    let (rows, cols) = parse_header(&header)?;

    let bytes = rows as u128 * cols as u128 * 4;
    if bytes > cap as u128 {
        return Err(FormatError::TooLarge { bytes, cap });
    }
    let expected = bytes as usize;
    let mut payload = Vec::with_capacity(expected);
    let found = reader.by_ref().take(expected as u64).read_to_end(&mut payload)?;
    if found < expected {
        return Err(FormatError::TruncatedPayload { expected, found });
    }
    let mut rest = Vec::new();
    let trailing = reader.take(1 << 16).read_to_end(&mut rest)?;
    if trailing > 0 {
        return Err(FormatError::TrailingBytes(trailing));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(Matrix { rows, cols, data })
}

fn read_up_to<R: Read>(reader: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// The serialized file for `matrix`.
pub fn encode_array(matrix: &Matrix) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '<f4', 'fortran_order': False, 'shape': ({}, {}), }}",
        matrix.rows, matrix.cols
    );
    let unpadded = PREAMBLE_LEN + dict.len() + 1;
    let header_len = dict.len() + 1 + (ALIGN - unpadded % ALIGN) % ALIGN;
    let mut out = Vec::with_capacity(PREAMBLE_LEN + header_len + matrix.data.len() * 4);
    out.extend_from_slice(NPY_MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header_len as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.resize(PREAMBLE_LEN + header_len - 1, b' ');
    out.push(b'\n');
    for v in &matrix.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_array_to<W: Write>(matrix: &Matrix, mut writer: W) -> Result<(), FormatError> {
    writer.write_all(&encode_array(matrix))?;
    Ok(())
}

/// Writes atomically (temp file + rename).
pub fn write_array(matrix: &Matrix, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write_atomic(path.as_ref(), &encode_array(matrix))?;
    Ok(())
}

#[derive(Debug, PartialEq)]
enum Value {
    Str(String),
    Bool(bool),
    Tuple(Vec<u64>),
}

fn malformed(msg: impl Into<String>) -> FormatError {
    FormatError::MalformedHeader(msg.into())
}

fn parse_header(bytes: &[u8]) -> Result<(usize, usize), FormatError> {
    if !bytes.is_ascii() {
        return Err(malformed("header is not ASCII"));
    }
    let text = std::str::from_utf8(bytes).expect("ascii is utf-8");
    let entries = DictParser::new(text).parse()?;

    let mut descr = None;
    let mut fortran = None;
    let mut shape = None;
    for (key, value) in entries {
        let slot = match key.as_str() {
            "descr" => &mut descr,
            "fortran_order" => &mut fortran,
            "shape" => &mut shape,
            other => return Err(malformed(format!("unexpected key {other:?}"))),
        };
        if slot.replace(value).is_some() {
            return Err(malformed(format!("duplicate key {key:?}")));
        }
    }

    match descr {
        Some(Value::Str(d)) if d == "<f4" => {}
        Some(Value::Str(d)) => return Err(FormatError::UnsupportedDtype(d)),
        Some(_) => return Err(malformed("'descr' must be a string")),
        None => return Err(malformed("missing 'descr'")),
    }
    match fortran {
        Some(Value::Bool(false)) => {}
        Some(Value::Bool(true)) => return Err(FormatError::FortranOrder),
        Some(_) => return Err(malformed("'fortran_order' must be a boolean")),
        None => return Err(malformed("missing 'fortran_order'")),
    }
    match shape {
        Some(Value::Tuple(dims)) if dims.len() == 2 => {
            let conv = |d: u64| usize::try_from(d).map_err(|_| malformed("dimension overflows"));
            Ok((conv(dims[0])?, conv(dims[1])?))
        }
        Some(Value::Tuple(dims)) => Err(FormatError::UnsupportedRank(dims.len())),
        Some(_) => Err(malformed("'shape' must be a tuple")),
        None => Err(malformed("missing 'shape'")),
    }
}

/// Minimal reader for the dict literals numpy writes.
struct DictParser<'a> {
    s: &'a [u8],
    at: usize,
}

impl<'a> DictParser<'a> {
    fn new(text: &'a str) -> Self {
        DictParser {
            s: text.as_bytes(),
            at: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.at < self.s.len() && self.s[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.at).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), FormatError> {
        if self.peek() == Some(c) {
            self.at += 1;
            Ok(())
        } else {
            Err(malformed(format!("expected {:?} at byte {}", c as char, self.at)))
        }
    }

    fn parse(mut self) -> Result<Vec<(String, Value)>, FormatError> {
        self.expect(b'{')?;
        let mut entries = Vec::new();
        loop {
            if self.peek() == Some(b'}') {
                self.at += 1;
                break;
            }
            let key = self.string()?;
            self.expect(b':')?;
            let value = self.value()?;
            entries.push((key, value));
            match self.peek() {
                Some(b',') => self.at += 1,
                Some(b'}') => {}
                _ => return Err(malformed(format!("expected ',' or '}}' at byte {}", self.at))),
            }
        }
        if self.peek().is_some() {
            return Err(malformed("trailing characters after the dict"));
        }
        Ok(entries)
    }

    fn string(&mut self) -> Result<String, FormatError> {
        let quote = match self.peek() {
            Some(q @ (b'\'' | b'"')) => q,
            _ => return Err(malformed(format!("expected a string at byte {}", self.at))),
        };
        self.at += 1;
        let start = self.at;
        while self.at < self.s.len() && self.s[self.at] != quote {
            if self.s[self.at] == b'\\' {
                return Err(malformed("escapes are not supported"));
            }
            self.at += 1;
        }
        if self.at == self.s.len() {
            return Err(malformed("unterminated string"));
        }
        let out = String::from_utf8_lossy(&self.s[start..self.at]).into_owned();
        self.at += 1;
        Ok(out)
    }

    fn value(&mut self) -> Result<Value, FormatError> {
        match self.peek() {
            Some(b'\'' | b'"') => self.string().map(Value::Str),
            Some(b'(') => self.tuple().map(Value::Tuple),
            Some(_) => {
                let rest = &self.s[self.at..];
                if rest.starts_with(b"True") {
                    self.at += 4;
                    Ok(Value::Bool(true))
                } else if rest.starts_with(b"False") {
                    self.at += 5;
                    Ok(Value::Bool(false))
                } else {
                    Err(malformed(format!("unrecognised value at byte {}", self.at)))
                }
            }
            None => Err(malformed("missing value")),
        }
    }

    fn tuple(&mut self) -> Result<Vec<u64>, FormatError> {
        self.expect(b'(')?;
        let mut dims = Vec::new();
        loop {
            match self.peek() {
                Some(b')') => {
                    self.at += 1;
                    break;
                }
                Some(c) if c.is_ascii_digit() => {
                    let start = self.at;
                    while self.at < self.s.len() && self.s[self.at].is_ascii_digit() {
                        self.at += 1;
                    }
                    let text = std::str::from_utf8(&self.s[start..self.at]).expect("digits");
                    // Python 2 era files may carry an 'L' suffix.
                    if self.s.get(self.at) == Some(&b'L') {
                        self.at += 1;
                    }
                    dims.push(text.parse().map_err(|_| malformed("dimension overflows"))?);
                    match self.peek() {
                        Some(b',') => self.at += 1,
                        Some(b')') => {}
                        _ => return Err(malformed("bad shape tuple")),
                    }
                }
                _ => return Err(malformed("bad shape tuple")),
            }
        }
        Ok(dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header_bytes(dict: &str) -> Vec<u8> {
        let mut out = NPY_MAGIC.to_vec();
        out.extend_from_slice(&[1, 0]);
        out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
        out.extend_from_slice(dict.as_bytes());
        out
    }

    fn read(bytes: &[u8]) -> Result<Matrix, FormatError> {
        read_array_from(bytes, DEFAULT_PAYLOAD_CAP)
    }

    #[test]
    fn two_by_three_round_trip() {
        let m = Matrix::new(2, 3, vec![1.0, -2.5, 3.25, 0.0, -0.0, 1e-40]);
        let bytes = encode_array(&m);
        assert_eq!((bytes.len() - 24) % 64, 0);
        let back = read(&bytes).unwrap();
        assert_eq!(back.rows, 2);
        assert_eq!(back.cols, 3);
        let bits = |d: &[f32]| d.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.data), bits(&m.data));
    }

    #[test]
    fn header_is_aligned_and_newline_terminated() {
        for (r, c) in [(1, 1), (64, 1280), (123456, 7)] {
            let m = Matrix::new(r, c, vec![0.0; r * c]);
            let bytes = encode_array(&m);
            let hlen = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
            assert_eq!((10 + hlen) % 64, 0);
            assert_eq!(bytes[10 + hlen - 1], b'\n');
        }
    }

    #[test]
    fn float64_rejected() {
        let mut bytes = header_bytes("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1), }");
        bytes.extend_from_slice(&[0; 8]);
        assert!(matches!(read(&bytes), Err(FormatError::UnsupportedDtype(d)) if d == "<f8"));
    }

    #[test]
    fn short_payload_rejected() {
        let mut bytes = encode_array(&Matrix::new(2, 2, vec![1.0; 4]));
        bytes.truncate(bytes.len() - 4);
        assert!(matches!(
            read(&bytes),
            Err(FormatError::TruncatedPayload {
                expected: 16,
                found: 12
            })
        ));
    }

    #[test]
    fn oversize_rejected_before_allocation() {
        let bytes = header_bytes("{'descr': '<f4', 'fortran_order': False, 'shape': (4294967296, 4294967296), }");
        assert!(matches!(read(&bytes), Err(FormatError::TooLarge { .. })));
        let bytes = encode_array(&Matrix::new(4, 4, vec![0.0; 16]));
        assert!(matches!(
            read_array_from(&bytes[..], 63),
            Err(FormatError::TooLarge { .. })
        ));
    }

    #[test]
    fn reordered_keys_and_double_quotes_accepted() {
        let mut bytes = header_bytes("{\"shape\": (1,2), \"fortran_order\": False, \"descr\": \"<f4\"}\n");
        bytes.extend_from_slice(&1.5f32.to_le_bytes());
        bytes.extend_from_slice(&2.5f32.to_le_bytes());
        let m = read(&bytes).unwrap();
        assert_eq!(m.data, vec![1.5, 2.5]);
    }
}
