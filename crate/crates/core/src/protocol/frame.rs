//! Length-prefixed framing for the classical channel.
//!
//! ```text
//! +----------------+-----+-----------------+
//! | len: u32 (BE)  | tag | payload (len B) |
//! +----------------+-----+-----------------+
//! ```
//!
//! Tags: 0 MonitorReveal, 1 BerAnnounce, 2 SiftIndices, 3 Ack. All
//! integers and floats are big-endian.

use std::io::{self, Read, Write};

use thiserror::Error;

pub const HEADER_LEN: usize = 5;
/// Refuse payloads above this size when reading from a stream.
pub const MAX_PAYLOAD: usize = 64 << 20;

const TAG_MONITOR_REVEAL: u8 = 0;
const TAG_BER_ANNOUNCE: u8 = 1;
const TAG_SIFT_INDICES: u8 = 2;
const TAG_ACK: u8 = 3;

const MONITOR_ENTRY_LEN: usize = 9;

/// One monitored window as revealed by Alice. `outcome` is `None` when her
/// detector did not click.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonitorEntry {
    pub window: u64,
    pub outcome: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalMessage {
    MonitorReveal(Vec<MonitorEntry>),
    BerAnnounce(f64),
    SiftIndices(Vec<u64>),
    Ack,
}

impl ClassicalMessage {
    pub fn tag(&self) -> u8 {
        match self {
            ClassicalMessage::MonitorReveal(_) => TAG_MONITOR_REVEAL,
            ClassicalMessage::BerAnnounce(_) => TAG_BER_ANNOUNCE,
            ClassicalMessage::SiftIndices(_) => TAG_SIFT_INDICES,
            ClassicalMessage::Ack => TAG_ACK,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("unknown message tag {0}")]
    UnknownTag(u8),
    #[error("declared length {declared} does not match {actual} payload bytes")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("malformed payload for tag {tag}: {reason}")]
    MalformedPayload { tag: u8, reason: &'static str },
}

pub fn frame_encode(msg: &ClassicalMessage) -> Vec<u8> {
    let mut payload = Vec::new();
    match msg {
        ClassicalMessage::MonitorReveal(entries) => {
            payload.reserve(entries.len() * MONITOR_ENTRY_LEN);
            for e in entries {
                payload.extend_from_slice(&e.window.to_be_bytes());
                payload.push(match e.outcome {
                    Some(false) => 0,
                    Some(true) => 1,
                    None => 2,
                });
            }
        }
        ClassicalMessage::BerAnnounce(e) => payload.extend_from_slice(&e.to_be_bytes()),
        ClassicalMessage::SiftIndices(idx) => {
            for i in idx {
                payload.extend_from_slice(&i.to_be_bytes());
            }
        }
        ClassicalMessage::Ack => {}
    }
    let mut frame = Vec::with_capacity(HEADER_LEN + payload.len());
    frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    frame.push(msg.tag());
    frame.extend_from_slice(&payload);
    frame
}

/// Decodes exactly one frame; trailing bytes are a length mismatch.
pub fn frame_decode(bytes: &[u8]) -> Result<ClassicalMessage, FrameError> {
    if bytes.len() < HEADER_LEN {
        return Err(FrameError::Truncated {
            needed: HEADER_LEN,
            available: bytes.len(),
        });
    }
    let declared = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
    let tag = bytes[4];
    let actual = bytes.len() - HEADER_LEN;
    if actual < declared {
        return Err(FrameError::Truncated {
            needed: HEADER_LEN + declared,
            available: bytes.len(),
        });
    }
    if actual > declared {
        return Err(FrameError::LengthMismatch { declared, actual });
    }
    decode_payload(tag, &bytes[HEADER_LEN..])
}

fn decode_payload(tag: u8, p: &[u8]) -> Result<ClassicalMessage, FrameError> {
    let malformed = |reason| FrameError::MalformedPayload { tag, reason };
    match tag {
        TAG_MONITOR_REVEAL => {
            if p.len() % MONITOR_ENTRY_LEN != 0 {
                return Err(malformed("not a whole number of entries"));
            }
            p.chunks_exact(MONITOR_ENTRY_LEN)
                .map(|c| {
                    let window = u64::from_be_bytes(c[..8].try_into().expect("8 bytes"));
                    let outcome = match c[8] {
                        0 => Some(false),
                        1 => Some(true),
                        2 => None,
                        _ => return Err(malformed("outcome byte out of range")),
                    };
                    Ok(MonitorEntry { window, outcome })
                })
                .collect::<Result<_, _>>()
                .map(ClassicalMessage::MonitorReveal)
        }
        TAG_BER_ANNOUNCE => {
            let raw: [u8; 8] = p.try_into().map_err(|_| malformed("BER must be 8 bytes"))?;
            Ok(ClassicalMessage::BerAnnounce(f64::from_be_bytes(raw)))
        }
        TAG_SIFT_INDICES => {
            if p.len() % 8 != 0 {
                return Err(malformed("not a whole number of indices"));
            }
            Ok(ClassicalMessage::SiftIndices(
                p.chunks_exact(8)
                    .map(|c| u64::from_be_bytes(c.try_into().expect("8 bytes")))
                    .collect(),
            ))
        }
        TAG_ACK if p.is_empty() => Ok(ClassicalMessage::Ack),
        TAG_ACK => Err(malformed("Ack carries no payload")),
        other => Err(FrameError::UnknownTag(other)),
    }
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

pub fn write_frame<W: Write>(w: &mut W, msg: &ClassicalMessage) -> io::Result<()> {
    w.write_all(&frame_encode(msg))
}

/// Reads one frame from a byte stream.
pub fn read_frame<R: Read>(r: &mut R) -> Result<ClassicalMessage, StreamError> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    let len = u32::from_be_bytes([header[0], header[1], header[2], header[3]]) as usize;
    if len > MAX_PAYLOAD {
        return Err(FrameError::LengthMismatch {
            declared: len,
            actual: MAX_PAYLOAD,
        }
        .into());
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    Ok(decode_payload(header[4], &payload)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ack_bytes() {
        assert_eq!(frame_encode(&ClassicalMessage::Ack), vec![0, 0, 0, 0, 3]);
    }

    #[test]
    fn ber_frame() {
        let f = frame_encode(&ClassicalMessage::BerAnnounce(0.0064));
        assert_eq!(f.len(), 13);
        assert_eq!(&f[..5], &[0, 0, 0, 8, 1]);
        assert_eq!(&f[5..], &0.0064f64.to_be_bytes());
        assert_eq!(frame_decode(&f).unwrap(), ClassicalMessage::BerAnnounce(0.0064));
    }

    #[test]
    fn typed_errors() {
        assert!(matches!(frame_decode(&[0, 0]), Err(FrameError::Truncated { .. })));
        assert_eq!(frame_decode(&[0, 0, 0, 0, 9]), Err(FrameError::UnknownTag(9)));
        assert!(matches!(
            frame_decode(&[0, 0, 0, 0, 3, 7]),
            Err(FrameError::LengthMismatch { declared: 0, actual: 1 })
        ));
        assert!(matches!(frame_decode(&[0, 0, 0, 1, 3, 7]), Err(FrameError::MalformedPayload { .. })));
        assert!(matches!(frame_decode(&[0, 0, 0, 3, 1, 0, 0, 0]), Err(FrameError::MalformedPayload { .. })));
    }

    #[test]
    fn stream_round_trip() {
        let msgs = vec![
            ClassicalMessage::SiftIndices(vec![1, 5, u64::MAX]),
            ClassicalMessage::Ack,
            ClassicalMessage::MonitorReveal(vec![MonitorEntry { window: 3, outcome: None }]),
        ];
        let mut pipe = Vec::new();
        for m in &msgs {
            write_frame(&mut pipe, m).unwrap();
        }
        let mut cursor = io::Cursor::new(pipe);
        for m in &msgs {
            assert_eq!(&read_frame(&mut cursor).unwrap(), m);
        }
        assert!(matches!(read_frame(&mut cursor), Err(StreamError::Io(_))));
    }

    fn message() -> impl Strategy<Value = ClassicalMessage> {
        prop_oneof![
            Just(ClassicalMessage::Ack),
            any::<f64>()
                .prop_filter("NaN breaks equality", |x| !x.is_nan())
                .prop_map(ClassicalMessage::BerAnnounce),
            proptest::collection::vec(any::<u64>(), 0..40).prop_map(ClassicalMessage::SiftIndices),
            proptest::collection::vec((any::<u64>(), proptest::option::of(any::<bool>())), 0..40).prop_map(|v| {
                ClassicalMessage::MonitorReveal(
                    v.into_iter().map(|(window, outcome)| MonitorEntry { window, outcome }).collect(),
                )
            }),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(m in message()) {
            prop_assert_eq!(frame_decode(&frame_encode(&m)).unwrap(), m);
        }

        #[test]
        fn corrupted_length_is_an_error(m in message(), len in any::<u32>()) {
            let mut f = frame_encode(&m);
            let real = (f.len() - HEADER_LEN) as u32;
            prop_assume!(len != real);
            f[..4].copy_from_slice(&len.to_be_bytes());
            prop_assert!(frame_decode(&f).is_err());
        }

        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let _ = frame_decode(&bytes);
        }
    }
}
