use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{BitSequence, MAX_LEN};
use crate::error::{Error, Result};

/// Magic bytes opening every packed file.
pub const PACKED_MAGIC: &[u8; 4] = b"RLB1";
const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitFormat {
    /// `0`/`1` characters, ASCII whitespace ignored.
    Ascii01,
    /// `RLB1`, 8-byte little-endian length, MSB-first payload.
    Packed,
}

impl BitFormat {
    /// Packed if the bytes open with the packed magic, ascii01 otherwise.
    pub fn detect(bytes: &[u8]) -> Self {
        if bytes.starts_with(PACKED_MAGIC) {
            BitFormat::Packed
        } else {
            BitFormat::Ascii01
        }
    }

    pub fn decode(self, bytes: &[u8]) -> Result<BitSequence> {
        match self {
            BitFormat::Ascii01 => decode_ascii01(bytes),
            BitFormat::Packed => decode_packed(bytes),
        }
    }

    pub fn encode(self, seq: &BitSequence) -> Vec<u8> {
        match self {
            BitFormat::Ascii01 => encode_ascii01(seq),
            BitFormat::Packed => encode_packed(seq),
        }
    }
}

impl FromStr for BitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii01" => Ok(BitFormat::Ascii01),
            "packed" => Ok(BitFormat::Packed),
            other => Err(Error::validation(format!(
                "unknown bit format {other:?} (expected ascii01 or packed)"
            ))),
        }
    }
}

impl fmt::Display for BitFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BitFormat::Ascii01 => "ascii01",
            BitFormat::Packed => "packed",
        })
    }
}

pub fn decode_ascii01(bytes: &[u8]) -> Result<BitSequence> {
    let mut seq = BitSequence::with_capacity(bytes.len());
    for (offset, &b) in bytes.iter().enumerate() {
        match b {
            b'0' => seq.push(false),
            b'1' => seq.push(true),
            b if b.is_ascii_whitespace() => {}
            other => {
                return Err(Error::Format {
                    offset: offset as u64,
                    message: format!("unexpected byte {:?}", other as char),
                })
            }
        }
        if seq.len() == MAX_LEN {
            if let Some(extra) = bytes[offset + 1..]
                .iter()
                .position(|b| !b.is_ascii_whitespace())
            {
                return Err(Error::Format {
                    offset: (offset + 1 + extra) as u64,
                    message: "sequence exceeds maximum length".into(),
                });
            }
        }
    }
    Ok(seq)
}

pub fn encode_ascii01(seq: &BitSequence) -> Vec<u8> {
    seq.iter().map(|b| if b { b'1' } else { b'0' }).collect()
}

pub fn decode_packed(bytes: &[u8]) -> Result<BitSequence> {
    if bytes.len() < PACKED_MAGIC.len() || &bytes[..4] != PACKED_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "bad magic, expected \"RLB1\"".into(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format {
            offset: bytes.len() as u64,
            message: "truncated header".into(),
        });
    }
    let n = u64::from_le_bytes(bytes[4..HEADER_LEN].try_into().unwrap());
    if n > MAX_LEN as u64 {
        return Err(Error::Format {
            offset: 4,
            message: format!("length {n} exceeds maximum {MAX_LEN}"),
        });
    }
    let n = n as usize;
    let payload = &bytes[HEADER_LEN..];
    let expected = n.div_ceil(8);
    if payload.len() < expected {
        return Err(Error::Format {
            offset: bytes.len() as u64,
            message: format!(
                "truncated payload: expected {expected} bytes, found {}",
                payload.len()
            ),
        });
    }
    if payload.len() > expected {
        return Err(Error::Format {
            offset: (HEADER_LEN + expected) as u64,
            message: "trailing bytes after payload".into(),
        });
    }
    Ok(BitSequence::from_packed_bytes(payload.to_vec(), n))
}

pub fn encode_packed(seq: &BitSequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + seq.as_packed_bytes().len());
    out.extend_from_slice(PACKED_MAGIC);
    out.extend_from_slice(&(seq.len() as u64).to_le_bytes());
    out.extend_from_slice(seq.as_packed_bytes());
    out
}

pub fn read_bits(path: impl AsRef<Path>, format: BitFormat) -> Result<BitSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    format.decode(&bytes)
}

pub fn write_bits(seq: &BitSequence, path: impl AsRef<Path>, format: BitFormat) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format.encode(seq)).map_err(|e| Error::io(path, e))
}
