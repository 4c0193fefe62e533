//! Dishonest strategies for both parties, the measurement-device precision
//! model that limits Alice, and the experiments that measure every cheating
//! rate against its closed-form bound.
//!
//! Alice's side:
//! - [`naive_attack`]: commit honestly, announce the other bit (or other
//!   indices). The flipped-bit pass probability per register is 0 on the
//!   committed index and 1/4 on any other, so the best naive play announces
//!   wrong indices and is caught except with probability `(1/4)^s`.
//! - [`steering_attack`]: keep each register entangled with a private
//!   system α prepared in the purification `|Ω⟩`. Unveiling 0 measures α
//!   in the computational basis and always passes. Unveiling 1 steers β
//!   toward the `−` family — through the square-root POVM of the skewed
//!   basis (physical) or a hypothetical exact projection (oracle). Either
//!   way a `2/n_A` slice of every register sits on the illegitimate uniform
//!   state, bounding the pass rate by `(1−2/n_A)^s`.
//! - [`snapped_attack`]: what becomes of the steering attack when the
//!   device cannot resolve the skewed basis from the honest one: the POVM
//!   snaps to the honest basis and the `b = 1` unveil falls to the naive
//!   `(1/4)^s` level.
//!
//! Bob's side:
//! - [`helstrom_attack`]: the optimal two-outcome discrimination of the two
//!   commitment mixtures, succeeding with `1/2 + 1/(2√(n−1))` per register.
//! - [`multi_copy_distinguisher`]: exact trace distance between `s`-copy
//!   mixtures, Bob's best joint-measurement advantage at small dimensions.

mod experiments;
mod strategies;

pub use experiments::{
    helstrom_attack, helstrom_measurement, multi_copy_distinguisher, no_signaling_max_deviation,
    phi_n_exact_weight, phi_n_leak_experiment, AlphaAction, HelstromReport, LeakReport,
    MULTI_COPY_DIM_LIMIT,
};
pub use strategies::{attack_pgm, NaiveAlice, SteeringAlice, SteeringShared};

use serde::Serialize;
use thiserror::Error;

use crate::protocol::{
    run_session, AliceParty, Bit, ProtocolError, ProtocolParams, SessionOptions,
};
use crate::states::{self, StateFamilyError};
use crate::stats;
use crate::substrate::SubstrateError;
use crate::tensor::TensorError;

use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("attack dimension must be at least 3 (got {n_a})")]
    BadAttackDimension { n_a: u32 },
    #[error("attack dimension {n_a} exceeds the register dimension {n_sim}")]
    AttackExceedsRegister { n_a: u32, n_sim: u32 },
    #[error("device with delta {delta} cannot resolve the steering basis at n_A = {n_a} (max {n_a_max})")]
    DeviceCannotResolve { delta: f64, n_a: u32, n_a_max: u32 },
    #[error("device resolves the steering basis at n_A = {n_a}; nothing to snap")]
    DeviceStillResolves { n_a: u32 },
    #[error("device precision delta must lie in (0, 1] (got {delta})")]
    BadDelta { delta: f64 },
    #[error("joint dimension {joint} exceeds the dense brute-force limit {limit}")]
    DimensionOverflow { joint: u64, limit: u64 },
    #[error("mixture dimension must be at least 2 (got {n})")]
    BadMixtureDimension { n: u32 },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Substrate(#[from] SubstrateError),
    #[error(transparent)]
    States(#[from] StateFamilyError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// The measurement-device precision model: `delta` is the smallest
/// squared-overlap gap between two basis vectors the device can be
/// configured to discriminate. The honest basis and the steering basis
/// differ by a gap of `4/(n_A+2)` per vector, which shrinks with `n_A`;
/// past `n_a_max` the two settings are indistinguishable to the hardware.
/// `delta` is a configuration input, not a claimed physical constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceModel {
    delta: f64,
}

impl DeviceModel {
    pub fn new(delta: f64) -> Result<Self, AdversaryError> {
        if !(delta > 0.0 && delta <= 1.0) || !delta.is_finite() {
            return Err(AdversaryError::BadDelta { delta });
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `1 − |⟨α_{i+}|ᾱ_{i−}⟩|² = 4/(n_A+2)`, the squared-overlap gap the
    /// device must resolve to mount the steering attack at `n_a`.
    pub fn basis_gap(n_a: u32) -> f64 {
        4.0 / (n_a as f64 + 2.0)
    }

    /// Whether the two measurement settings are distinguishable at `n_a`.
    pub fn check(&self, n_a: u32) -> bool {
        Self::basis_gap(n_a) >= self.delta
    }

    /// Largest attack dimension the device resolves: `⌊4/delta − 2⌋`, with
    /// the integer boundary settled by direct gap evaluation.
    pub fn n_a_max(&self) -> u32 {
        let mut candidate = ((4.0 / self.delta) - 2.0).floor().max(0.0) as u32;
        while self.check(candidate + 1) {
            candidate += 1;
        }
        while candidate > 0 && !self.check(candidate) {
            candidate -= 1;
        }
        candidate
    }
}

/// How the naive re-declarer picks its announced indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndexRule {
    /// Announce the indices actually committed.
    Same,
    /// Announce a deterministically different index per register.
    Shifted,
    /// Announce fresh uniform indices, collisions allowed.
    UniformRandom,
}

/// Commit honestly to one bit, announce another story at unveil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveRedeclare {
    pub committed_b: Bit,
    pub announce_b: Bit,
    pub index_rule: IndexRule,
}

/// How the steering Alice projects α when unveiling 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SteeringMeasurement {
    /// The square-root POVM of the skewed-basis ensemble; physically
    /// realizable whenever the device resolves the basis.
    Pgm,
    /// Hypothetical exact projection onto the skewed basis; not a physical
    /// measurement (the basis is not orthogonal). Saturates the bound
    /// exactly, so it serves as the reference point above the POVM.
    ExactOracle,
}

/// The entangled attack: purified registers, bit chosen at unveil time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledSteering {
    pub n_a: u32,
    pub target_b: Bit,
    pub measurement: SteeringMeasurement,
    pub device: DeviceModel,
}

/// Outcome of a batch of attack sessions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub strategy: String,
    pub n_a: Option<u32>,
    pub s: u32,
    pub n_sim: u32,
    pub target_b: Option<u8>,
    pub trials: u64,
    pub acceptances: u64,
    pub acceptance_rate: f64,
    pub registers: u64,
    /// Diagnostic count of registers found carrying the illegitimate
    /// uniform component.
    pub phi_n_minus_hits: u64,
    /// The closed-form ceiling this attack is compared against.
    pub bound: f64,
    /// Wilson half-width of the empirical acceptance rate at five sigma.
    pub ci_half_width: f64,
    pub master_seed: u64,
}

impl AttackReport {
    /// Whether the empirical rate respects the bound within its confidence
    /// half-width.
    pub fn within_bound(&self) -> bool {
        self.acceptance_rate <= self.bound + self.ci_half_width
    }
}

struct BatchOutcome {
    acceptances: u64,
    registers: u64,
    diag_hits: u64,
}

/// Run `trials` attack sessions in parallel over independent worlds and
/// RNG streams, tallying acceptances and diagnostic hits.
fn attack_batch<A, F>(
    params: &ProtocolParams,
    trials: u64,
    options: &SessionOptions,
    make_alice: F,
) -> Result<BatchOutcome, AdversaryError>
where
    A: AliceParty,
    F: Fn() -> A + Sync,
{
    let tally = (0..trials)
        .into_par_iter()
        .map(|stream| -> Result<(u64, u64, u64), AdversaryError> {
            let mut alice = make_alice();
            let transcript = run_session(params, stream, &mut alice, options)?;
            let hits = transcript
                .diagnostic_hits
                .as_ref()
                .map(|h| h.iter().filter(|&&hit| hit).count() as u64)
                .unwrap_or(0);
            Ok((
                transcript.verdict.accept as u64,
                transcript.verifications.len() as u64,
                hits,
            ))
        })
        .try_reduce(
            || (0u64, 0u64, 0u64),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)),
        )?;
    Ok(BatchOutcome {
        acceptances: tally.0,
        registers: tally.1,
        diag_hits: tally.2,
    })
}

fn finish_report(
    strategy: &str,
    params: &ProtocolParams,
    n_a: Option<u32>,
    target_b: Option<Bit>,
    trials: u64,
    bound: f64,
    batch: BatchOutcome,
) -> AttackReport {
    AttackReport {
        strategy: strategy.to_string(),
        n_a,
        s: params.s,
        n_sim: params.n_sim,
        target_b: target_b.map(Bit::as_u8),
        trials,
        acceptances: batch.acceptances,
        acceptance_rate: if trials > 0 {
            batch.acceptances as f64 / trials as f64
        } else {
            0.0
        },
        registers: batch.registers,
        phi_n_minus_hits: batch.diag_hits,
        bound,
        ci_half_width: stats::wilson_half_width(batch.acceptances, trials, stats::FIVE_SIGMA),
        master_seed: params.master_seed,
    }
}

/// The naive re-declaration attack. The bound is `(1/4)^s` when the
/// announced bit differs from the committed one, 1 otherwise.
pub fn naive_attack(
    params: &ProtocolParams,
    cfg: &NaiveRedeclare,
    trials: u64,
) -> Result<AttackReport, AdversaryError> {
    let bound = if cfg.announce_b != cfg.committed_b {
        0.25f64.powi(params.s as i32)
    } else {
        1.0
    };
    let options = SessionOptions::default();
    let batch = attack_batch(params, trials, &options, || NaiveAlice::new(*params, *cfg))?;
    Ok(finish_report(
        "naive",
        params,
        None,
        Some(cfg.announce_b),
        trials,
        bound,
        batch,
    ))
}

/// The entangled steering attack. Requires the device to resolve the
/// steering basis at `n_a`; see [`snapped_attack`] for the other regime.
/// The bound is 1 for `target_b = 0` and `(1−2/n_A)^s` for `target_b = 1`.
pub fn steering_attack(
    params: &ProtocolParams,
    cfg: &EntangledSteering,
    trials: u64,
) -> Result<AttackReport, AdversaryError> {
    validate_steering(params, cfg)?;
    if !cfg.device.check(cfg.n_a) {
        return Err(AdversaryError::DeviceCannotResolve {
            delta: cfg.device.delta(),
            n_a: cfg.n_a,
            n_a_max: cfg.device.n_a_max(),
        });
    }
    run_steering(params, cfg, trials, false)
}

/// The steering attack under a device that cannot resolve the skewed basis
/// at `n_a`: the unveil-1 measurement snaps to the nearest realizable
/// setting — the honest basis — and the acceptance rate collapses to the
/// naive `(1/4)^s` level. With a device that still resolves `n_a` this is
/// exactly [`steering_attack`].
pub fn snapped_attack(
    params: &ProtocolParams,
    cfg: &EntangledSteering,
    trials: u64,
) -> Result<AttackReport, AdversaryError> {
    validate_steering(params, cfg)?;
    if cfg.device.check(cfg.n_a) {
        return run_steering(params, cfg, trials, false);
    }
    run_steering(params, cfg, trials, true)
}

fn validate_steering(
    params: &ProtocolParams,
    cfg: &EntangledSteering,
) -> Result<(), AdversaryError> {
    if cfg.n_a < 3 {
        return Err(AdversaryError::BadAttackDimension { n_a: cfg.n_a });
    }
    if cfg.n_a > params.n_sim {
        return Err(AdversaryError::AttackExceedsRegister {
            n_a: cfg.n_a,
            n_sim: params.n_sim,
        });
    }
    Ok(())
}

fn run_steering(
    params: &ProtocolParams,
    cfg: &EntangledSteering,
    trials: u64,
    snapped: bool,
) -> Result<AttackReport, AdversaryError> {
    let shared = strategies::SteeringShared::prepare(params, cfg, snapped)?;
    let options = SessionOptions {
        diagnostic_projector: Some(states::phi_n_minus_embedded(cfg.n_a, params.n_sim as u64)?),
    };
    let bound = match (cfg.target_b, snapped) {
        (Bit::Zero, _) => 1.0,
        (Bit::One, false) => (1.0 - 2.0 / cfg.n_a as f64).powi(params.s as i32),
        (Bit::One, true) => 0.25f64.powi(params.s as i32),
    };
    let batch = attack_batch(params, trials, &options, || {
        SteeringAlice::new(shared.clone())
    })?;
    Ok(finish_report(
        if snapped { "snapped" } else { "steering" },
        params,
        Some(cfg.n_a),
        Some(cfg.target_b),
        trials,
        bound,
        batch,
    ))
}

#[cfg(test)]
mod tests;
