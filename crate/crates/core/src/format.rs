//! Embedding output formats.
//!
//! * TSV: one record per line, tab-separated decimal floats with 9
//!   significant digits (enough to round-trip any `f32`).
//! * Binary, little-endian: magic `DCTE`, `u32` version, `u32` record
//!   length, `u32` float width (always 32), then packed `f32` records.
//!
//! Values are narrowed to `f32` on output.

use std::fmt;
use std::io::{self, BufRead, Read, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"DCTE";
pub const VERSION: u32 = 1;
pub const FLOAT_WIDTH: u32 = 32;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not an embedding file (bad magic)")]
    BadMagic,
    #[error("unsupported version {0}")]
    Version(u32),
    #[error("unsupported float width {0}")]
    FloatWidth(u32),
    #[error("truncated record: {0} trailing bytes")]
    Truncated(usize),
    #[error("line {line}: {message}")]
    Tsv { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Tsv,
    Bin,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Tsv => "tsv",
            Format::Bin => "bin",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "bin" => Ok(Format::Bin),
            _ => Err(format!("unknown format {s:?} (expected tsv or bin)")),
        }
    }
}

/// Format an `f32` with 9 significant digits, `%g` style: positional
/// notation for exponents in `-5..9`, scientific otherwise, trailing zeros
/// removed.
pub fn format_sig9(v: f32) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-5..9).contains(&exp) {
        let m = trim_fraction(mantissa);
        return format!("{sign}{m}e{exp}");
    }
    let body = if exp < 0 {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let point = exp as usize + 1;
        format!("{}.{}", &digits[..point], &digits[point..])
    };
    format!("{sign}{}", trim_fraction(&body))
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Streaming writer for either format.
pub struct EmbeddingWriter<W: Write> {
    inner: W,
    format: Format,
    record_len: usize,
    line: String,
}

impl<W: Write> EmbeddingWriter<W> {
    /// Writes the binary header immediately when `format` is [`Format::Bin`].
    pub fn new(mut inner: W, format: Format, record_len: usize) -> io::Result<Self> {
        if format == Format::Bin {
            let len = u32::try_from(record_len)
                .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "record too long"))?;
            inner.write_all(&MAGIC)?;
            inner.write_all(&VERSION.to_le_bytes())?;
            inner.write_all(&len.to_le_bytes())?;
            inner.write_all(&FLOAT_WIDTH.to_le_bytes())?;
        }
        Ok(Self {
            inner,
            format,
            record_len,
            line: String::new(),
        })
    }

    pub fn write_record<T: Scalar>(&mut self, values: &[T]) -> io::Result<()> {
        if values.len() != self.record_len {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("record has {} values, expected {}", values.len(), self.record_len),
            ));
        }
        match self.format {
            Format::Tsv => {
                self.line.clear();
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        self.line.push('\t');
                    }
                    self.line.push_str(&format_sig9(v.as_f32()));
                }
                self.line.push('\n');
                self.inner.write_all(self.line.as_bytes())
            }
            Format::Bin => {
                for v in values {
                    self.inner.write_all(&v.as_f32().to_le_bytes())?;
                }
                Ok(())
            }
        }
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn read_tsv<R: BufRead>(reader: R) -> Result<Vec<Vec<f32>>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let record = line
            .split('\t')
            .map(|f| {
                f.parse::<f32>().map_err(|_| FormatError::Tsv {
                    line: i + 1,
                    message: format!("cannot parse {f:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(record);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinHeader {
    pub version: u32,
    pub record_len: u32,
    pub float_width: u32,
}

pub fn read_bin<R: Read>(mut reader: R) -> Result<(BinHeader, Vec<Vec<f32>>), FormatError> {
    let mut header = [0u8; HEADER_LEN];
    reader.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes"));
    let header = BinHeader {
        version: word(4),
        record_len: word(8),
        float_width: word(12),
    };
    if header.version != VERSION {
        return Err(FormatError::Version(header.version));
    }
    if header.float_width != FLOAT_WIDTH {
        return Err(FormatError::FloatWidth(header.float_width));
    }
    let mut body = Vec::new();
    reader.read_to_end(&mut body)?;
    let record_bytes = header.record_len as usize * 4;
    if record_bytes == 0 {
        return Ok((header, Vec::new()));
    }
    let tail = body.len() % record_bytes;
    if tail != 0 {
        return Err(FormatError::Truncated(tail));
    }
    let records = body
        .chunks_exact(record_bytes)
        .map(|rec| {
            rec.chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
                .collect()
        })
        .collect();
    Ok((header, records))
}
