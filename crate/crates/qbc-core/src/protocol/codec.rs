//! Bit-exact wire framing.
//!
//! Every frame is `magic "QBC1" | version 0x01 | tag | payload length (u32
//! LE) | payload`, with tags 0x01 commit, 0x02 open, 0x03 verdict. All
//! multi-byte integers are little-endian; amplitudes are IEEE-754 doubles.
//!
//! Payloads:
//! - commit: `j: u32 | dim: u64 | count: u32 | count × (index: u64 | re: f64
//!   | im: f64)` with indices strictly increasing and below `dim`.
//! - open: `b: u8 | s: u32 | s × index: u64`.
//! - verdict: `accept: u8 | has_failure: u8 | failure index: u32`.

use std::io::{Read, Write};

use thiserror::Error;

use crate::tensor::Complex64;

use super::{Bit, CommitRegister, Message, ProtocolError, RegisterPayload, UnveilOpen, Verdict};

pub const MAGIC: [u8; 4] = *b"QBC1";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 10;

const TAG_COMMIT: u8 = 0x01;
const TAG_OPEN: u8 = 0x02;
const TAG_VERDICT: u8 = 0x03;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("bad magic bytes {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unknown protocol version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown message tag {0:#04x}")]
    BadTag(u8),
    #[error("frame truncated: needed {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("declared payload length {declared} does not match content length {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("{extra} trailing bytes after the frame")]
    TrailingBytes { extra: usize },
    #[error("non-finite amplitude at index {index}")]
    NonFiniteAmplitude { index: u64 },
    #[error("amplitude index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: u64, dim: u64 },
    #[error("amplitude indices are not strictly increasing")]
    NonCanonicalIndices,
    #[error("bit field holds {0}, expected 0 or 1")]
    BadBit(u8),
    #[error("flag field holds {0}, expected 0 or 1")]
    BadFlag(u8),
    #[error("an entangled register has no classical wire form")]
    EntangledPayload,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.pos + n > self.bytes.len() {
            return Err(CodecError::Truncated {
                needed: self.pos + n,
                got: self.bytes.len(),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

fn encode_payload(msg: &Message) -> Result<(u8, Vec<u8>), CodecError> {
    let mut out = Vec::new();
    let tag = match msg {
        Message::Commit(c) => {
            let (dim, amplitudes) = match &c.payload {
                RegisterPayload::Pure { dim, amplitudes } => (*dim, amplitudes),
                RegisterPayload::Entangled { .. } => return Err(CodecError::EntangledPayload),
            };
            put_u32(&mut out, c.j);
            put_u64(&mut out, dim);
            put_u32(&mut out, amplitudes.len() as u32);
            for &(index, amp) in amplitudes {
                if !amp.re.is_finite() || !amp.im.is_finite() {
                    return Err(CodecError::NonFiniteAmplitude { index });
                }
                put_u64(&mut out, index);
                put_f64(&mut out, amp.re);
                put_f64(&mut out, amp.im);
            }
            TAG_COMMIT
        }
        Message::Open(o) => {
            out.push(o.b.as_u8());
            put_u32(&mut out, o.indices.len() as u32);
            for &i in &o.indices {
                put_u64(&mut out, i);
            }
            TAG_OPEN
        }
        Message::Verdict(v) => {
            out.push(v.accept as u8);
            out.push(v.first_failure.is_some() as u8);
            put_u32(&mut out, v.first_failure.unwrap_or(0));
            TAG_VERDICT
        }
    };
    Ok((tag, out))
}

/// Encode one message as a complete frame.
pub fn encode(msg: &Message) -> Result<Vec<u8>, CodecError> {
    let (tag, payload) = encode_payload(msg)?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(tag);
    put_u32(&mut out, payload.len() as u32);
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Decode exactly one frame; trailing bytes are an error.
pub fn decode(bytes: &[u8]) -> Result<Message, CodecError> {
    let mut cur = Cursor::new(bytes);
    let magic: [u8; 4] = cur.take(4)?.try_into().unwrap();
    if magic != MAGIC {
        return Err(CodecError::BadMagic(magic));
    }
    let version = cur.u8()?;
    if version != VERSION {
        return Err(CodecError::BadVersion(version));
    }
    let tag = cur.u8()?;
    let declared = cur.u32()? as usize;
    if cur.remaining() < declared {
        return Err(CodecError::Truncated {
            needed: HEADER_LEN + declared,
            got: bytes.len(),
        });
    }
    if cur.remaining() > declared {
        return Err(CodecError::TrailingBytes {
            extra: cur.remaining() - declared,
        });
    }
    let msg = match tag {
        TAG_COMMIT => decode_commit(&mut cur, declared)?,
        TAG_OPEN => decode_open(&mut cur, declared)?,
        TAG_VERDICT => decode_verdict(&mut cur, declared)?,
        other => return Err(CodecError::BadTag(other)),
    };
    Ok(msg)
}

fn decode_commit(cur: &mut Cursor, declared: usize) -> Result<Message, CodecError> {
    let j = cur.u32()?;
    let dim = cur.u64()?;
    let count = cur.u32()? as usize;
    let expected = 16 + 24 * count;
    if declared != expected {
        return Err(CodecError::LengthMismatch {
            declared,
            actual: expected,
        });
    }
    let mut amplitudes = Vec::with_capacity(count);
    let mut last: Option<u64> = None;
    for _ in 0..count {
        let index = cur.u64()?;
        let re = cur.f64()?;
        let im = cur.f64()?;
        if index >= dim {
            return Err(CodecError::IndexOutOfRange { index, dim });
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(CodecError::NonFiniteAmplitude { index });
        }
        if let Some(prev) = last {
            if index <= prev {
                return Err(CodecError::NonCanonicalIndices);
            }
        }
        last = Some(index);
        amplitudes.push((index, Complex64::new(re, im)));
    }
    Ok(Message::Commit(CommitRegister {
        j,
        payload: RegisterPayload::Pure { dim, amplitudes },
    }))
}

fn decode_open(cur: &mut Cursor, declared: usize) -> Result<Message, CodecError> {
    let b = cur.u8()?;
    let b = match b {
        0 => Bit::Zero,
        1 => Bit::One,
        other => return Err(CodecError::BadBit(other)),
    };
    let count = cur.u32()? as usize;
    let expected = 5 + 8 * count;
    if declared != expected {
        return Err(CodecError::LengthMismatch {
            declared,
            actual: expected,
        });
    }
    let mut indices = Vec::with_capacity(count);
    for _ in 0..count {
        indices.push(cur.u64()?);
    }
    Ok(Message::Open(UnveilOpen { b, indices }))
}

fn decode_verdict(cur: &mut Cursor, declared: usize) -> Result<Message, CodecError> {
    if declared != 6 {
        return Err(CodecError::LengthMismatch {
            declared,
            actual: 6,
        });
    }
    let accept = match cur.u8()? {
        0 => false,
        1 => true,
        other => return Err(CodecError::BadFlag(other)),
    };
    let has_failure = match cur.u8()? {
        0 => false,
        1 => true,
        other => return Err(CodecError::BadFlag(other)),
    };
    let failure = cur.u32()?;
    Ok(Message::Verdict(Verdict {
        accept,
        first_failure: has_failure.then_some(failure),
    }))
}

/// Write one frame to a byte stream.
pub fn write_message(w: &mut impl Write, msg: &Message) -> Result<(), ProtocolError> {
    let frame = encode(msg)?;
    w.write_all(&frame)?;
    w.flush()?;
    Ok(())
}

/// Read one frame from a byte stream.
pub fn read_message(r: &mut impl Read) -> Result<Message, ProtocolError> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    let declared = u32::from_le_bytes(header[6..10].try_into().unwrap()) as usize;
    let mut frame = header.to_vec();
    frame.resize(HEADER_LEN + declared, 0);
    r.read_exact(&mut frame[HEADER_LEN..])?;
    Ok(decode(&frame)?)
}
