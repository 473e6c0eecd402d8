//! Boundary messages and their wire encoding.
//!
//! Every frame is a little-endian record preceded by its length:
//!
//! ```text
//!   u32  length of the rest of the frame
//!   u8   protocol version (1)
//!   u8   frame type
//!   u64  iteration
//!   u32  sender region (u32::MAX for the hub)
//!   u32  tie index
//!   u8   class: 0 voltage, 1 power
//!   u16  payload count n
//!   n × f64 payload
//! ```
//!
//! Frame types: 1 hello, 2 start-iteration, 3 message, 4 barrier-ack,
//! 5 converged, 6 abort. Only message frames carry a payload.

use gridopt_partition::CouplingClass;

pub const PROTOCOL_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 1 + 1 + 8 + 4 + 4 + 1 + 2;
pub const HUB: u32 = u32::MAX;

/// Boundary values of one tie and class sent from one region to its neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub iteration: u64,
    pub sender: u32,
    pub tie: u32,
    pub class: CouplingClass,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameType {
    Hello = 1,
    Start = 2,
    Message = 3,
    BarrierAck = 4,
    Converged = 5,
    Abort = 6,
}

impl FrameType {
    fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            1 => Self::Hello,
            2 => Self::Start,
            3 => Self::Message,
            4 => Self::BarrierAck,
            5 => Self::Converged,
            6 => Self::Abort,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub kind: FrameType,
    pub iteration: u64,
    pub sender: u32,
    pub tie: u32,
    pub class: CouplingClass,
    pub payload: Vec<f64>,
}

impl Frame {
    pub fn control(kind: FrameType, iteration: u64, sender: u32) -> Self {
        Self { kind, iteration, sender, tie: 0, class: CouplingClass::Voltage, payload: Vec::new() }
    }

    pub fn from_message(m: &Message) -> Self {
        Self {
            kind: FrameType::Message,
            iteration: m.iteration,
            sender: m.sender,
            tie: m.tie,
            class: m.class,
            payload: m.values.clone(),
        }
    }

    pub fn into_message(self) -> Option<Message> {
        (self.kind == FrameType::Message).then_some(Message {
            iteration: self.iteration,
            sender: self.sender,
            tie: self.tie,
            class: self.class,
            values: self.payload,
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WireError {
    #[error("frame truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("unsupported protocol version {0}")]
    Version(u8),
    #[error("unknown frame type {0}")]
    FrameType(u8),
    #[error("unknown class tag {0}")]
    Class(u8),
    #[error("payload count {count} does not match frame length {len}")]
    Length { count: usize, len: usize },
    #[error("payload of {0} values does not fit the count field")]
    Oversized(usize),
}

/// Encodes `frame` including its length prefix.
pub fn encode(frame: &Frame) -> Result<Vec<u8>, WireError> {
    let n = frame.payload.len();
    let count = u16::try_from(n).map_err(|_| WireError::Oversized(n))?;
    let body = HEADER_LEN + 8 * n;
    let mut out = Vec::with_capacity(4 + body);
    out.extend_from_slice(&(body as u32).to_le_bytes());
    out.push(PROTOCOL_VERSION);
    out.push(frame.kind as u8);
    out.extend_from_slice(&frame.iteration.to_le_bytes());
    out.extend_from_slice(&frame.sender.to_le_bytes());
    out.extend_from_slice(&frame.tie.to_le_bytes());
    out.push(match frame.class {
        CouplingClass::Voltage => 0,
        CouplingClass::Power => 1,
    });
    out.extend_from_slice(&count.to_le_bytes());
    for v in &frame.payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Decodes the frame body that follows a length prefix.
pub fn decode_body(body: &[u8]) -> Result<Frame, WireError> {
    if body.len() < HEADER_LEN {
        return Err(WireError::Truncated { need: HEADER_LEN, have: body.len() });
    }
    if body[0] != PROTOCOL_VERSION {
        return Err(WireError::Version(body[0]));
    }
    let kind = FrameType::from_u8(body[1]).ok_or(WireError::FrameType(body[1]))?;
    let u32_at = |k: usize| u32::from_le_bytes(body[k..k + 4].try_into().expect("4 bytes"));
    let iteration = u64::from_le_bytes(body[2..10].try_into().expect("8 bytes"));
    let sender = u32_at(10);
    let tie = u32_at(14);
    let class = match body[18] {
        0 => CouplingClass::Voltage,
        1 => CouplingClass::Power,
        c => return Err(WireError::Class(c)),
    };
    let count = u16::from_le_bytes([body[19], body[20]]) as usize;
    if body.len() != HEADER_LEN + 8 * count {
        return Err(WireError::Length { count, len: body.len() });
    }
    let payload = body[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Frame { kind, iteration, sender, tie, class, payload })
}

/// Decodes one complete length-prefixed frame.
pub fn decode(bytes: &[u8]) -> Result<Frame, WireError> {
    if bytes.len() < 4 {
        return Err(WireError::Truncated { need: 4, have: bytes.len() });
    }
    let len = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    if bytes.len() != 4 + len {
        return Err(WireError::Truncated { need: 4 + len, have: bytes.len() });
    }
    decode_body(&bytes[4..])
}
