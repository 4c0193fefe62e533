//! Session driving: the honest Alice strategy, Bob's verification state
//! machine, and the referee loop that moves messages between them.

use rand::Rng;
use rayon::prelude::*;

use crate::states;
use crate::substrate::{
    Measurement, Party, ProjectiveMeasurement, QuantumWorld, RegisterId, SubstrateError,
};
use crate::tensor::StateVector;

use super::transport::{LocalPipe, Transport};
use super::{
    Bit, CommitRegister, Message, ProtocolError, ProtocolParams, RegisterPayload, UnveilOpen,
    Verdict,
};

/// One register's verification record in a transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterVerification {
    pub j: u32,
    pub announced_index: u64,
    /// False when the announced index was illegal and the register was
    /// failed without measuring.
    pub measured: bool,
    pub passed: bool,
}

/// Full session record: the message log in delivery order, Bob's
/// per-register results, optional per-register diagnostic samples, the
/// verdict, and the seeds that reproduce it all.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionTranscript {
    pub master_seed: u64,
    pub stream: u64,
    pub messages: Vec<Message>,
    pub verifications: Vec<RegisterVerification>,
    pub diagnostic_hits: Option<Vec<bool>>,
    pub verdict: Verdict,
}

/// Alice-side behavior, honest or otherwise. The driver calls `commit` once
/// per register in order, then `open` once.
pub trait AliceParty {
    fn commit(
        &mut self,
        j: u32,
        world: &mut QuantumWorld,
    ) -> Result<(CommitRegister, RegisterId), ProtocolError>;

    fn open(&mut self, world: &mut QuantumWorld) -> Result<UnveilOpen, ProtocolError>;
}

/// Builds the unveil announcement, rejecting malformed payloads the honest
/// protocol can never produce (wrong length, index 0).
pub fn alice_unveil(
    params: &ProtocolParams,
    b: Bit,
    indices: &[u64],
) -> Result<UnveilOpen, ProtocolError> {
    if indices.len() != params.s as usize {
        return Err(ProtocolError::OpenLengthMismatch {
            expected: params.s,
            got: indices.len(),
        });
    }
    for &i in indices {
        if i == 0 {
            return Err(ProtocolError::MalformedIndex { index: i });
        }
    }
    Ok(UnveilOpen {
        b,
        indices: indices.to_vec(),
    })
}

/// The honest committer: draws each index uniformly from `[1, n_sim−1]`,
/// sends `(|0⟩ + (−1)^b |i_j⟩)/√2`, and announces exactly what it did.
pub struct HonestAlice {
    params: ProtocolParams,
    b: Bit,
    indices: Vec<u64>,
}

impl HonestAlice {
    pub fn new(params: ProtocolParams, b: Bit) -> Self {
        Self {
            params,
            b,
            indices: Vec::with_capacity(params.s as usize),
        }
    }

    pub fn chosen_indices(&self) -> &[u64] {
        &self.indices
    }
}

impl AliceParty for HonestAlice {
    fn commit(
        &mut self,
        j: u32,
        world: &mut QuantumWorld,
    ) -> Result<(CommitRegister, RegisterId), ProtocolError> {
        debug_assert_eq!(j as usize, self.indices.len() + 1);
        let i = world.rng_mut().random_range(1..self.params.n_sim as u64);
        self.indices.push(i);
        let state = states::committed_state(self.params.n_sim as u64, self.b.as_u8(), i)?;
        let payload = RegisterPayload::from_state(&state);
        let register = world.create_register(Party::Alice, state)?;
        Ok((CommitRegister { j, payload }, register))
    }

    fn open(&mut self, _world: &mut QuantumWorld) -> Result<UnveilOpen, ProtocolError> {
        alice_unveil(&self.params, self.b, &self.indices)
    }
}

enum BobState {
    AwaitingCommit { next_j: u32 },
    AwaitingOpen,
    Done,
}

/// Bob's verification state machine. Registers are stored unmeasured during
/// the commit phase; at unveil every register is projected onto the
/// announced state (all of them, for diagnostics, even after a failure).
/// Announced indices outside `[1, n_sim−1]` fail their register immediately
/// — an impossible opening is treated as cheating, not as a session error.
pub struct BobSession {
    params: ProtocolParams,
    state: BobState,
    stored: Vec<RegisterId>,
}

impl BobSession {
    pub fn new(params: ProtocolParams) -> Self {
        Self {
            params,
            state: BobState::AwaitingCommit { next_j: 1 },
            stored: Vec::with_capacity(params.s as usize),
        }
    }

    pub fn stored(&self) -> &[RegisterId] {
        &self.stored
    }

    /// Accept commit `j`. With `delivered`, the register already lives in
    /// the shared world and must have been transferred to Bob; without it,
    /// the register is materialized from the wire payload.
    pub fn on_commit(
        &mut self,
        world: &mut QuantumWorld,
        msg: &CommitRegister,
        delivered: Option<RegisterId>,
    ) -> Result<RegisterId, ProtocolError> {
        let next_j = match self.state {
            BobState::AwaitingCommit { next_j } => next_j,
            BobState::AwaitingOpen => {
                return Err(ProtocolError::OrderViolation {
                    expected: "open",
                    got: "commit",
                })
            }
            BobState::Done => {
                return Err(ProtocolError::OrderViolation {
                    expected: "nothing",
                    got: "commit",
                })
            }
        };
        if msg.j != next_j {
            return Err(ProtocolError::WrongCommitIndex {
                expected: next_j,
                got: msg.j,
            });
        }
        if msg.payload.dim() != self.params.n_sim as u64 {
            return Err(ProtocolError::CommitDimMismatch {
                expected: self.params.n_sim as u64,
                got: msg.payload.dim(),
            });
        }
        let register = match delivered {
            Some(id) => {
                // The handle must really be Bob's and match the claim.
                let handle = world.handle(id)?;
                if handle.owner != Party::Bob {
                    return Err(ProtocolError::Substrate(SubstrateError::Ownership {
                        caller: Party::Bob,
                        owner: handle.owner,
                    }));
                }
                if handle.dim != msg.payload.dim() {
                    return Err(ProtocolError::CommitDimMismatch {
                        expected: msg.payload.dim(),
                        got: handle.dim,
                    });
                }
                id
            }
            None => world.create_register(Party::Bob, msg.payload.to_state()?)?,
        };
        self.stored.push(register);
        self.state = if next_j == self.params.s {
            BobState::AwaitingOpen
        } else {
            BobState::AwaitingCommit { next_j: next_j + 1 }
        };
        Ok(register)
    }

    /// Verify the announcement against every stored register.
    pub fn on_open(
        &mut self,
        world: &mut QuantumWorld,
        open: &UnveilOpen,
    ) -> Result<(Verdict, Vec<RegisterVerification>), ProtocolError> {
        match self.state {
            BobState::AwaitingOpen => {}
            BobState::AwaitingCommit { next_j } => {
                let _ = next_j;
                return Err(ProtocolError::OrderViolation {
                    expected: "commit",
                    got: "open",
                });
            }
            BobState::Done => {
                return Err(ProtocolError::OrderViolation {
                    expected: "nothing",
                    got: "open",
                })
            }
        }
        if open.indices.len() != self.params.s as usize {
            return Err(ProtocolError::OpenLengthMismatch {
                expected: self.params.s,
                got: open.indices.len(),
            });
        }
        let mut verifications = Vec::with_capacity(self.stored.len());
        for (k, (&register, &index)) in self.stored.iter().zip(&open.indices).enumerate() {
            let j = (k + 1) as u32;
            if !self.params.index_is_legal(index) {
                verifications.push(RegisterVerification {
                    j,
                    announced_index: index,
                    measured: false,
                    passed: false,
                });
                continue;
            }
            let target = states::committed_state(self.params.n_sim as u64, open.b.as_u8(), index)?;
            let check: Measurement = ProjectiveMeasurement::binary_onto(target)?.into();
            let outcome = world.measure(Party::Bob, &[register], &check)?;
            verifications.push(RegisterVerification {
                j,
                announced_index: index,
                measured: true,
                passed: outcome.index == 0,
            });
        }
        let first_failure = verifications.iter().find(|v| !v.passed).map(|v| v.j);
        self.state = BobState::Done;
        Ok((
            Verdict {
                accept: first_failure.is_none(),
                first_failure,
            },
            verifications,
        ))
    }
}

/// Session-level switches beyond the protocol itself.
#[derive(Debug, Clone, Default)]
pub struct SessionOptions {
    /// When set, the referee samples this binary check on every committed
    /// register between unveil and verification (without collapsing
    /// anything) and records the hits. Used to count how often a register
    /// carries the illegitimate uniform component.
    pub diagnostic_projector: Option<StateVector>,
}

/// Run one full session in a shared world: commit, store, unveil, verify.
/// The transcript is a pure function of `(params.master_seed, stream)` and
/// the strategy's behavior.
pub fn run_session(
    params: &ProtocolParams,
    stream: u64,
    alice: &mut dyn AliceParty,
    options: &SessionOptions,
) -> Result<SessionTranscript, ProtocolError> {
    let mut world = QuantumWorld::new(params.master_seed, stream);
    let (mut alice_end, mut bob_end) = LocalPipe::pair();
    let mut bob = BobSession::new(*params);
    let mut messages = Vec::with_capacity(params.s as usize + 2);

    for j in 1..=params.s {
        let (msg, register) = alice.commit(j, &mut world)?;
        world.transfer(Party::Alice, register, Party::Bob)?;
        alice_end.send(Message::Commit(msg))?;
        let delivered = bob_end.recv()?;
        messages.push(delivered.clone());
        match delivered {
            Message::Commit(c) => {
                bob.on_commit(&mut world, &c, Some(register))?;
            }
            other => {
                return Err(ProtocolError::OrderViolation {
                    expected: "commit",
                    got: other.kind(),
                })
            }
        }
    }

    let open = alice.open(&mut world)?;
    alice_end.send(Message::Open(open))?;
    let delivered = bob_end.recv()?;
    messages.push(delivered.clone());

    let diagnostic_hits = match &options.diagnostic_projector {
        Some(target) => Some(sample_diagnostic(&mut world, bob.stored(), target)?),
        None => None,
    };

    let (verdict, verifications) = match delivered {
        Message::Open(o) => bob.on_open(&mut world, &o)?,
        other => {
            return Err(ProtocolError::OrderViolation {
                expected: "open",
                got: other.kind(),
            })
        }
    };
    bob_end.send(Message::Verdict(verdict))?;
    let back = alice_end.recv()?;
    messages.push(back);

    Ok(SessionTranscript {
        master_seed: params.master_seed,
        stream,
        messages,
        verifications,
        diagnostic_hits,
        verdict,
    })
}

/// Sample a Bernoulli outcome of the diagnostic projector on each register
/// from its exact Born weight, without collapsing the world. Averaged over
/// sessions this reproduces the weight the registers actually carry,
/// whatever measurements the parties applied.
fn sample_diagnostic(
    world: &mut QuantumWorld,
    registers: &[RegisterId],
    target: &StateVector,
) -> Result<Vec<bool>, ProtocolError> {
    let check: Measurement = ProjectiveMeasurement::binary_onto(target.clone())?.into();
    let mut hits = Vec::with_capacity(registers.len());
    for &register in registers {
        let probs = world.born_probabilities(Party::Referee, &[register], &check)?;
        let u: f64 = world.rng_mut().random();
        hits.push(u < probs[0]);
    }
    Ok(hits)
}

/// Aggregate result of a batch of honest sessions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct HonestReport {
    pub trials: u64,
    pub acceptances: u64,
}

/// Run `trials` honest sessions (bit alternating with the stream index),
/// in parallel over independent worlds. Deterministic for fixed params.
pub fn run_honest_sessions(
    params: &ProtocolParams,
    trials: u64,
) -> Result<HonestReport, ProtocolError> {
    let acceptances = (0..trials)
        .into_par_iter()
        .map(|stream| {
            let b = if stream % 2 == 0 { Bit::Zero } else { Bit::One };
            let mut alice = HonestAlice::new(*params, b);
            run_session(params, stream, &mut alice, &SessionOptions::default())
                .map(|t| t.verdict.accept as u64)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(HonestReport {
        trials,
        acceptances,
    })
}

/// Drive the Alice side of an honest session over a remote transport:
/// commits, opens, and returns Bob's verdict.
pub fn run_alice_endpoint(
    params: &ProtocolParams,
    stream: u64,
    b: Bit,
    transport: &mut dyn Transport,
) -> Result<Verdict, ProtocolError> {
    let mut world = QuantumWorld::new(params.master_seed, stream);
    let mut alice = HonestAlice::new(*params, b);
    for j in 1..=params.s {
        let (msg, register) = alice.commit(j, &mut world)?;
        // The payload is the channel here; the local copy is surrendered.
        world.transfer(Party::Alice, register, Party::Referee)?;
        transport.send(Message::Commit(msg))?;
    }
    let open = alice.open(&mut world)?;
    transport.send(Message::Open(open))?;
    match transport.recv()? {
        Message::Verdict(v) => Ok(v),
        other => Err(ProtocolError::OrderViolation {
            expected: "verdict",
            got: other.kind(),
        }),
    }
}

/// Drive the Bob side over a remote transport: registers are materialized
/// into Bob's own world from the wire payloads.
pub fn run_bob_endpoint(
    params: &ProtocolParams,
    stream: u64,
    transport: &mut dyn Transport,
) -> Result<(Verdict, Vec<RegisterVerification>), ProtocolError> {
    let mut world = QuantumWorld::new(params.master_seed, stream);
    let mut bob = BobSession::new(*params);
    for _ in 0..params.s {
        match transport.recv()? {
            Message::Commit(c) => {
                bob.on_commit(&mut world, &c, None)?;
            }
            other => {
                return Err(ProtocolError::OrderViolation {
                    expected: "commit",
                    got: other.kind(),
                })
            }
        }
    }
    let open = match transport.recv()? {
        Message::Open(o) => o,
        other => {
            return Err(ProtocolError::OrderViolation {
                expected: "open",
                got: other.kind(),
            })
        }
    };
    let (verdict, verifications) = bob.on_open(&mut world, &open)?;
    transport.send(Message::Verdict(verdict))?;
    Ok((verdict, verifications))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    fn params(s: u32, n_sim: u32) -> ProtocolParams {
        ProtocolParams::new(s, n_sim, 0xFEED).unwrap()
    }

    #[test]
    fn honest_session_accepts() {
        let p = params(8, 64);
        for stream in 0..16 {
            for b in [Bit::Zero, Bit::One] {
                let mut alice = HonestAlice::new(p, b);
                let t = run_session(&p, stream, &mut alice, &SessionOptions::default()).unwrap();
                assert!(t.verdict.accept, "stream {stream} b {b}");
                assert_eq!(t.verdict.first_failure, None);
                assert_eq!(t.messages.len(), p.s as usize + 2);
                assert!(t.verifications.iter().all(|v| v.passed && v.measured));
            }
        }
    }

    #[test]
    fn same_seed_reproduces_the_transcript() {
        let p = params(5, 32);
        let run = |stream| {
            let mut alice = HonestAlice::new(p, Bit::One);
            run_session(&p, stream, &mut alice, &SessionOptions::default()).unwrap()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn commit_messages_carry_the_exact_state() {
        let p = params(3, 16);
        let mut alice = HonestAlice::new(p, Bit::One);
        let t = run_session(&p, 0, &mut alice, &SessionOptions::default()).unwrap();
        let mut js = Vec::new();
        for msg in &t.messages {
            if let Message::Commit(c) = msg {
                js.push(c.j);
                let state = c.payload.to_state().unwrap();
                assert_eq!(state.nnz(), 2);
                // Signs (+, −) for b = 1.
                assert!(state.amplitude(0).re > 0.0);
                let (idx, amp) = state
                    .iter_nonzero()
                    .find(|&(i, _)| i != 0)
                    .expect("second amplitude");
                assert!(amp.re < 0.0);
                assert!(p.index_is_legal(idx));
            }
        }
        assert_eq!(js, vec![1, 2, 3]);
    }

    #[test]
    fn chosen_indices_are_uniform() {
        let p = params(1, 16);
        let draws = 100_000u64;
        let mut counts = vec![0u64; (p.n_sim - 1) as usize];
        for stream in 0..draws {
            let mut alice = HonestAlice::new(p, Bit::Zero);
            let t = run_session(&p, stream, &mut alice, &SessionOptions::default()).unwrap();
            let idx = t.verifications[0].announced_index;
            counts[(idx - 1) as usize] += 1;
        }
        let chi2 = stats::chi_square_uniform(&counts);
        let threshold = stats::chi_square_threshold(counts.len(), stats::FIVE_SIGMA);
        assert!(chi2 < threshold, "chi2 {chi2} vs {threshold}");
    }

    #[test]
    fn bob_rejects_out_of_order_messages() {
        let p = params(2, 16);
        let mut world = QuantumWorld::new(1, 0);
        let mut bob = BobSession::new(p);
        // Open before any commit.
        let open = UnveilOpen {
            b: Bit::Zero,
            indices: vec![1, 2],
        };
        assert!(matches!(
            bob.on_open(&mut world, &open),
            Err(ProtocolError::OrderViolation { .. })
        ));
        // Duplicate / skipped j.
        let state = states::committed_state(16, 0, 3).unwrap();
        let msg = CommitRegister {
            j: 2,
            payload: RegisterPayload::from_state(&state),
        };
        assert!(matches!(
            bob.on_commit(&mut world, &msg, None),
            Err(ProtocolError::WrongCommitIndex {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn bob_rejects_undelivered_registers() {
        // A handle that was never transferred to Bob is not a commit.
        let p = params(1, 16);
        let mut world = QuantumWorld::new(2, 0);
        let mut bob = BobSession::new(p);
        let state = states::committed_state(16, 0, 3).unwrap();
        let msg = CommitRegister {
            j: 1,
            payload: RegisterPayload::from_state(&state),
        };
        let register = world.create_register(Party::Alice, state).unwrap();
        assert!(matches!(
            bob.on_commit(&mut world, &msg, Some(register)),
            Err(ProtocolError::Substrate(SubstrateError::Ownership { .. }))
        ));
    }

    #[test]
    fn bob_rejects_wrong_dimension_commits() {
        let p = params(1, 16);
        let mut world = QuantumWorld::new(1, 0);
        let mut bob = BobSession::new(p);
        let state = states::committed_state(8, 0, 3).unwrap();
        let msg = CommitRegister {
            j: 1,
            payload: RegisterPayload::from_state(&state),
        };
        assert!(matches!(
            bob.on_commit(&mut world, &msg, None),
            Err(ProtocolError::CommitDimMismatch { .. })
        ));
    }

    #[test]
    fn illegal_announced_index_is_a_rejection_not_an_error() {
        let p = params(2, 16);
        let mut world = QuantumWorld::new(9, 0);
        let mut bob = BobSession::new(p);
        for j in 1..=2 {
            let state = states::committed_state(16, 0, j as u64).unwrap();
            let msg = CommitRegister {
                j,
                payload: RegisterPayload::from_state(&state),
            };
            bob.on_commit(&mut world, &msg, None).unwrap();
        }
        let open = UnveilOpen {
            b: Bit::Zero,
            indices: vec![1, 99], // 99 ≥ n_sim: impossible opening
        };
        let (verdict, vs) = bob.on_open(&mut world, &open).unwrap();
        assert!(!verdict.accept);
        assert_eq!(verdict.first_failure, Some(2));
        assert!(vs[0].passed && vs[0].measured);
        assert!(!vs[1].passed && !vs[1].measured);
    }

    #[test]
    fn alice_unveil_validates_payloads() {
        let p = params(2, 16);
        assert!(alice_unveil(&p, Bit::Zero, &[1]).is_err());
        assert!(matches!(
            alice_unveil(&p, Bit::Zero, &[1, 0]),
            Err(ProtocolError::MalformedIndex { index: 0 })
        ));
        let open = alice_unveil(&p, Bit::One, &[5, 7]).unwrap();
        assert_eq!(open.indices, vec![5, 7]);
    }

    #[test]
    fn flipped_bit_same_index_never_passes_wrong_index_passes_quarter() {
        // Announce the flipped bit against an honest commit: with the same
        // index the overlap vanishes; with a different index it is 1/4.
        let p = params(1, 16);
        let trials = 40_000u64;
        let mut same_hits = 0u64;
        let mut diff_hits = 0u64;
        for stream in 0..trials {
            let mut world = QuantumWorld::new(0xAB, stream);
            let mut bob = BobSession::new(p);
            let i = 1 + (stream % 15);
            let state = states::committed_state(16, 0, i).unwrap();
            let msg = CommitRegister {
                j: 1,
                payload: RegisterPayload::from_state(&state),
            };
            bob.on_commit(&mut world, &msg, None).unwrap();
            let announce = if stream % 2 == 0 { i } else { 1 + (i % 15) };
            let open = UnveilOpen {
                b: Bit::One,
                indices: vec![announce],
            };
            let (verdict, _) = bob.on_open(&mut world, &open).unwrap();
            if verdict.accept {
                if stream % 2 == 0 {
                    same_hits += 1;
                } else {
                    diff_hits += 1;
                }
            }
        }
        let half = trials / 2;
        assert_eq!(same_hits, 0);
        let rate = diff_hits as f64 / half as f64;
        let margin = stats::sigma_margin(0.25, half, stats::FIVE_SIGMA);
        assert!((rate - 0.25).abs() < margin, "rate {rate} margin {margin}");
    }

    #[test]
    fn same_bit_wrong_index_passes_quarter() {
        let p = params(1, 16);
        let trials = 40_000u64;
        let mut hits = 0u64;
        for stream in 0..trials {
            let mut world = QuantumWorld::new(0xCD, stream);
            let mut bob = BobSession::new(p);
            let i = 1 + (stream % 15);
            let state = states::committed_state(16, 0, i).unwrap();
            let msg = CommitRegister {
                j: 1,
                payload: RegisterPayload::from_state(&state),
            };
            bob.on_commit(&mut world, &msg, None).unwrap();
            let open = UnveilOpen {
                b: Bit::Zero,
                indices: vec![1 + (i % 15)],
            };
            let (verdict, _) = bob.on_open(&mut world, &open).unwrap();
            hits += verdict.accept as u64;
        }
        let rate = hits as f64 / trials as f64;
        let margin = stats::sigma_margin(0.25, trials, stats::FIVE_SIGMA);
        assert!((rate - 0.25).abs() < margin, "rate {rate} margin {margin}");
    }

    #[test]
    fn honest_batch_accepts_everything() {
        let p = params(8, 64);
        let report = run_honest_sessions(&p, 500).unwrap();
        assert_eq!(report.acceptances, report.trials);
    }

    #[test]
    fn parallel_and_serial_batches_agree() {
        let p = params(4, 32);
        let serial: Vec<SessionTranscript> = (0..64)
            .map(|stream| {
                let b = if stream % 2 == 0 { Bit::Zero } else { Bit::One };
                let mut alice = HonestAlice::new(p, b);
                run_session(&p, stream, &mut alice, &SessionOptions::default()).unwrap()
            })
            .collect();
        let parallel: Vec<SessionTranscript> = (0..64u64)
            .into_par_iter()
            .map(|stream| {
                let b = if stream % 2 == 0 { Bit::Zero } else { Bit::One };
                let mut alice = HonestAlice::new(p, b);
                run_session(&p, stream, &mut alice, &SessionOptions::default()).unwrap()
            })
            .collect();
        assert_eq!(serial, parallel);
    }
}
