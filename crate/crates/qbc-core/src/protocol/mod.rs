//! The commit/unveil protocol as explicit two-party state machines.
//!
//! A session is strictly turn-based: Alice sends `s` quantum registers
//! (commit phase), later announces the bit and all indices (unveil phase),
//! and Bob projects every stored register onto the announced state,
//! accepting only if all projections succeed. Messages cross an abstract
//! [`Transport`](transport::Transport); the default in-process pipe moves
//! message values directly, while the byte-stream adapter speaks the
//! bit-exact frame format of [`codec`].
//!
//! The commit message carries the register's amplitudes because the
//! transport stands in for a quantum channel. An honest Bob never reads
//! them: his state machine only receives register handles and asks the
//! substrate to measure. A register that is entangled with something the
//! sender kept cannot be written down classically at all — its payload says
//! only [`RegisterPayload::Entangled`], which carries no usable information
//! and cannot cross a byte-stream transport.

pub mod codec;
mod session;
pub mod transport;

pub use session::{
    alice_unveil, run_alice_endpoint, run_bob_endpoint, run_honest_sessions, run_session,
    AliceParty, BobSession, HonestAlice, HonestReport, RegisterVerification, SessionOptions,
    SessionTranscript,
};

use rand::Rng;
use thiserror::Error;

use crate::states::StateFamilyError;
use crate::substrate::SubstrateError;
use crate::tensor::{Complex64, StateVector, TensorError};

/// Session-wide parameters: register count `s`, the finite stand-in
/// dimension `n_sim` for the unbounded register space, and the master seed
/// all per-session streams derive from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolParams {
    pub s: u32,
    pub n_sim: u32,
    pub master_seed: u64,
}

impl ProtocolParams {
    pub fn new(s: u32, n_sim: u32, master_seed: u64) -> Result<Self, ProtocolError> {
        if s == 0 {
            return Err(ProtocolError::BadRegisterCount { s });
        }
        if n_sim < 3 {
            return Err(ProtocolError::BadSimDimension { n_sim });
        }
        Ok(Self {
            s,
            n_sim,
            master_seed,
        })
    }

    /// Largest legal announced index, `n_sim − 1`.
    pub fn max_index(&self) -> u64 {
        (self.n_sim - 1) as u64
    }

    pub fn index_is_legal(&self, i: u64) -> bool {
        i >= 1 && i <= self.max_index()
    }
}

/// A single committed bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    /// The amplitude sign `(−1)^b`.
    pub fn sign(self) -> f64 {
        match self {
            Bit::Zero => 1.0,
            Bit::One => -1.0,
        }
    }

    pub fn random(rng: &mut impl Rng) -> Bit {
        if rng.random::<bool>() {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl TryFrom<u8> for Bit {
    type Error = ProtocolError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            _ => Err(ProtocolError::Codec(codec::CodecError::BadBit(value))),
        }
    }
}

impl std::fmt::Display for Bit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// The quantum payload of one commit message.
#[derive(Debug, Clone, PartialEq)]
pub enum RegisterPayload {
    /// A pure, unentangled register: its exact sparse amplitudes.
    Pure {
        dim: u64,
        amplitudes: Vec<(u64, Complex64)>,
    },
    /// A register entangled with systems the sender kept. Carries nothing a
    /// classical channel could faithfully transmit.
    Entangled { dim: u64 },
}

impl RegisterPayload {
    pub fn from_state(state: &StateVector) -> Self {
        RegisterPayload::Pure {
            dim: state.dim(),
            amplitudes: state.to_entries(),
        }
    }

    pub fn dim(&self) -> u64 {
        match self {
            RegisterPayload::Pure { dim, .. } => *dim,
            RegisterPayload::Entangled { dim } => *dim,
        }
    }

    pub fn to_state(&self) -> Result<StateVector, ProtocolError> {
        match self {
            RegisterPayload::Pure { dim, amplitudes } => {
                Ok(StateVector::sparse(*dim, amplitudes.clone())?)
            }
            RegisterPayload::Entangled { .. } => Err(ProtocolError::EntangledPayload),
        }
    }
}

/// Commit-phase message carrying register `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitRegister {
    pub j: u32,
    pub payload: RegisterPayload,
}

/// Unveil-phase announcement of the bit and all indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnveilOpen {
    pub b: Bit,
    pub indices: Vec<u64>,
}

/// Bob's final word on the session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Verdict {
    pub accept: bool,
    pub first_failure: Option<u32>,
}

/// Everything that crosses the wire.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Commit(CommitRegister),
    Open(UnveilOpen),
    Verdict(Verdict),
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Commit(_) => "commit",
            Message::Open(_) => "open",
            Message::Verdict(_) => "verdict",
        }
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("register count s must be at least 1 (got {s})")]
    BadRegisterCount { s: u32 },
    #[error("simulation dimension must be at least 3 (got {n_sim})")]
    BadSimDimension { n_sim: u32 },
    #[error("protocol order violation: expected {expected}, got {got}")]
    OrderViolation {
        expected: &'static str,
        got: &'static str,
    },
    #[error("commit index out of order: expected j = {expected}, got {got}")]
    WrongCommitIndex { expected: u32, got: u32 },
    #[error("commit register dimension {got} does not match the protocol dimension {expected}")]
    CommitDimMismatch { expected: u64, got: u64 },
    #[error("unveil announces {got} indices for {expected} registers")]
    OpenLengthMismatch { expected: u32, got: usize },
    #[error("announced index {index} is malformed (must be at least 1)")]
    MalformedIndex { index: u64 },
    #[error("payload of an entangled register cannot be read as a pure state")]
    EntangledPayload,
    #[error("transport has no message to deliver")]
    TransportExhausted,
    #[error(transparent)]
    Codec(#[from] codec::CodecError),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
    #[error(transparent)]
    States(#[from] StateFamilyError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("transport I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn params_validate_bounds() {
        assert!(ProtocolParams::new(0, 16, 1).is_err());
        assert!(ProtocolParams::new(1, 2, 1).is_err());
        let p = ProtocolParams::new(8, 256, 1).unwrap();
        assert_eq!(p.max_index(), 255);
        assert!(p.index_is_legal(1));
        assert!(p.index_is_legal(255));
        assert!(!p.index_is_legal(0));
        assert!(!p.index_is_legal(256));
    }

    #[test]
    fn bit_conversions() {
        assert_eq!(Bit::Zero.flip(), Bit::One);
        assert_eq!(Bit::One.sign(), -1.0);
        assert_eq!(Bit::try_from(1u8).unwrap(), Bit::One);
        assert!(Bit::try_from(2u8).is_err());
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let mut seen = [false; 2];
        for _ in 0..64 {
            seen[Bit::random(&mut rng).as_u8() as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn payload_round_trips_pure_states() {
        let state = crate::states::phi_minus(16, 5).unwrap();
        let payload = RegisterPayload::from_state(&state);
        assert_eq!(payload.dim(), 16);
        assert!(payload.to_state().unwrap().approx_eq(&state, 0.0));
        let e = RegisterPayload::Entangled { dim: 16 };
        assert!(matches!(e.to_state(), Err(ProtocolError::EntangledPayload)));
    }
}
