//! Bob-side attacks and the measurement-independence experiments.

use rayon::prelude::*;
use serde::Serialize;

use crate::protocol::Bit;
use crate::states;
use crate::stats;
use crate::substrate::{
    pgm_from_ensemble, random_unitary, Measurement, Party, ProjectiveMeasurement, QuantumWorld,
};
use crate::tensor::{Complex64, DensityMatrix, Operator, StateVector, SubsystemShape, TensorError};

use super::AdversaryError;
use rand::Rng;

/// Result of the optimal per-register discrimination attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HelstromReport {
    pub n_sim: u32,
    pub trials: u64,
    pub correct: u64,
    pub success_rate: f64,
    /// Closed-form optimum `1/2 + 1/(2√(n−1))`.
    pub expected: f64,
    pub ci_half_width: f64,
    pub master_seed: u64,
}

/// The two-outcome measurement that optimally distinguishes the two
/// commitment mixtures: project onto the positive eigenvector of their
/// difference, `(|0⟩ + u)/√2` with `u` uniform over the index states.
pub fn helstrom_measurement(n_sim: u32) -> Result<ProjectiveMeasurement, AdversaryError> {
    if n_sim < 2 {
        return Err(AdversaryError::BadMixtureDimension { n: n_sim });
    }
    let dim = n_sim as u64;
    let h = 1.0 / 2.0f64.sqrt();
    let tail = h / ((n_sim - 1) as f64).sqrt();
    let mut entries = vec![(0u64, Complex64::new(h, 0.0))];
    for i in 1..dim {
        entries.push((i, Complex64::new(tail, 0.0)));
    }
    let w_plus = StateVector::sparse(dim, entries)?;
    Ok(ProjectiveMeasurement::binary_onto(w_plus)?)
}

/// Bob guesses the committed bit of each register with the Helstrom
/// measurement; per-register success is `1/2 + 1/(2√(n−1))`.
pub fn helstrom_attack(
    n_sim: u32,
    trials: u64,
    master_seed: u64,
) -> Result<HelstromReport, AdversaryError> {
    let measurement: Measurement = helstrom_measurement(n_sim)?.into();
    let dim = n_sim as u64;
    let correct = (0..trials)
        .into_par_iter()
        .map(|stream| -> Result<u64, AdversaryError> {
            let mut world = QuantumWorld::new(master_seed, stream);
            let b = Bit::random(world.rng_mut());
            let i = world.rng_mut().random_range(1..dim);
            let state = states::committed_state(dim, b.as_u8(), i)?;
            let register = world.create_register(Party::Bob, state)?;
            let outcome = world.measure(Party::Bob, &[register], &measurement)?;
            let guess = if outcome.index == 0 {
                Bit::Zero
            } else {
                Bit::One
            };
            Ok((guess == b) as u64)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(HelstromReport {
        n_sim,
        trials,
        correct,
        success_rate: if trials > 0 {
            correct as f64 / trials as f64
        } else {
            0.0
        },
        expected: 0.5 + 0.5 / ((n_sim - 1) as f64).sqrt(),
        ci_half_width: stats::wilson_half_width(correct, trials, stats::FIVE_SIGMA),
        master_seed,
    })
}

/// Dense brute-force limit for the multi-copy analysis.
pub const MULTI_COPY_DIM_LIMIT: u64 = 4096;

/// Exact trace distance between the `s`-fold copies of the two commitment
/// mixtures, `D(ρ_+^{⊗s}, ρ_−^{⊗s})`, by dense eigendecomposition.
/// Quantifies Bob's best joint-measurement advantage at small `n`.
pub fn multi_copy_distinguisher(n: u32, s: u32) -> Result<f64, AdversaryError> {
    if n < 2 {
        return Err(AdversaryError::BadMixtureDimension { n });
    }
    (n as u64)
        .checked_pow(s)
        .filter(|&d| d <= MULTI_COPY_DIM_LIMIT)
        .ok_or(AdversaryError::DimensionOverflow {
            joint: (n as u64).saturating_pow(s),
            limit: MULTI_COPY_DIM_LIMIT,
        })?;
    let plus = states::rho_plus(n)?;
    let minus = states::rho_minus(n)?;
    let mut acc_plus = plus.clone();
    let mut acc_minus = minus.clone();
    for _ in 1..s {
        acc_plus = acc_plus.tensor(&plus);
        acc_minus = acc_minus.tensor(&minus);
    }
    Ok(acc_plus.trace_distance(&acc_minus)?)
}

/// An action dishonest Alice may apply to her half of the purification
/// before the register's uniform-component weight is read out.
#[derive(Debug, Clone)]
pub enum AlphaAction {
    None,
    /// Measure α in the computational (honest) basis.
    HonestBasis,
    /// Apply the steering POVM.
    Pgm,
    /// Apply a fixed unitary.
    Unitary(Operator),
}

/// Result of the measurement-independence experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakReport {
    pub n: u32,
    pub trials: u64,
    pub hits: u64,
    pub rate: f64,
    /// The exact Born weight `2/n`, independent of the α-side action.
    pub exact: f64,
    pub master_seed: u64,
}

impl LeakReport {
    pub fn within_five_sigma(&self) -> bool {
        (self.rate - self.exact).abs()
            <= stats::sigma_margin(self.exact, self.trials, stats::FIVE_SIGMA)
    }
}

/// Prepare `|Ω⟩`, apply the α-side action, then measure the binary
/// uniform-state check on β and count hits. Whatever the action, the hit
/// rate converges to `2/n`: the β marginal cannot be signaled.
pub fn phi_n_leak_experiment(
    n: u32,
    action: &AlphaAction,
    trials: u64,
    master_seed: u64,
) -> Result<LeakReport, AdversaryError> {
    let shape = SubsystemShape::new(vec![n as u64, n as u64])?;
    let omega = states::omega(n)?;
    let check: Measurement = ProjectiveMeasurement::binary_onto(states::phi_n_minus(n)?)?.into();
    let pgm = match action {
        AlphaAction::Pgm => Some(super::strategies::attack_pgm(n)?),
        _ => None,
    };
    let hits = (0..trials)
        .into_par_iter()
        .map(|stream| -> Result<u64, AdversaryError> {
            let mut world = QuantumWorld::new(master_seed, stream);
            let ids = world.create_joint(&[Party::Alice, Party::Bob], &shape, omega.clone())?;
            match action {
                AlphaAction::None => {}
                AlphaAction::HonestBasis => {
                    let m: Measurement = ProjectiveMeasurement::computational(n as u64).into();
                    world.measure(Party::Alice, &[ids[0]], &m)?;
                }
                AlphaAction::Pgm => {
                    let m: Measurement = pgm.as_ref().expect("pgm prepared").clone().into();
                    world.measure(Party::Alice, &[ids[0]], &m)?;
                }
                AlphaAction::Unitary(u) => {
                    world.apply_unitary(Party::Alice, &[ids[0]], u)?;
                }
            }
            let outcome = world.measure(Party::Bob, &[ids[1]], &check)?;
            Ok((outcome.index == 0) as u64)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(LeakReport {
        n,
        trials,
        hits,
        rate: if trials > 0 {
            hits as f64 / trials as f64
        } else {
            0.0
        },
        exact: 2.0 / n as f64,
        master_seed,
    })
}

/// Exact Born weight of the uniform-state check on `|Ω⟩`'s β side.
pub fn phi_n_exact_weight(n: u32) -> Result<f64, AdversaryError> {
    let shape = SubsystemShape::new(vec![n as u64, n as u64])?;
    let mut world = QuantumWorld::new(0, 0);
    let ids = world.create_joint(&[Party::Alice, Party::Bob], &shape, states::omega(n)?)?;
    let check: Measurement = ProjectiveMeasurement::binary_onto(states::phi_n_minus(n)?)?.into();
    let probs = world.born_probabilities(Party::Bob, &[ids[1]], &check)?;
    Ok(probs[0])
}

/// Largest change any of `actions` random α-side channels (rotations,
/// basis measurements, and steering POVMs, cycled) makes to Bob's reduced
/// state of `|Ω⟩`, measured entrywise. Computed exactly through density
/// matrices, averaging measurement channels over their outcomes. Values at
/// floating-point noise level certify no-signaling.
pub fn no_signaling_max_deviation(
    n: u32,
    actions: u32,
    master_seed: u64,
) -> Result<f64, AdversaryError> {
    let shape = SubsystemShape::new(vec![n as u64, n as u64])?;
    let omega = states::omega(n)?.to_dense()?;
    let rho = DensityMatrix::from_pure(&omega)?;
    let baseline = rho.partial_trace(&shape, 1)?;
    let mut rng = crate::substrate::session_rng(master_seed, 0);
    let eye = Operator::identity(n as usize);
    let mut worst = 0.0f64;
    for round in 0..actions {
        let kraus: Vec<Operator> = match round % 3 {
            0 => vec![random_unitary(n as usize, &mut rng)],
            1 => {
                // A random orthonormal-basis measurement on α.
                let u = random_unitary(n as usize, &mut rng);
                (0..n as usize)
                    .map(|k| {
                        let col =
                            StateVector::dense((0..n as usize).map(|r| u.get(r, k)).collect())?;
                        Operator::projector(&col)
                    })
                    .collect::<Result<_, TensorError>>()?
            }
            _ => {
                // The square-root POVM of a random two-state ensemble,
                // applied with the minimal-disturbance update.
                let u = random_unitary(n as usize, &mut rng);
                let sa = StateVector::dense((0..n as usize).map(|r| u.get(r, 0)).collect())?;
                let sb = StateVector::dense((0..n as usize).map(|r| u.get(r, 1)).collect())?;
                let h = 1.0 / 2.0f64.sqrt();
                let mixed = sa
                    .scale(Complex64::new(h, 0.0))
                    .add(&sb.scale(Complex64::new(h, 0.0)))?;
                let povm = pgm_from_ensemble(&[sa, mixed.normalized()?], &[0.5, 0.5])?;
                povm.elements()
                    .iter()
                    .map(|e| e.sqrt_psd())
                    .collect::<Result<_, TensorError>>()?
            }
        };
        let mut moved = Operator::zeros((n * n) as usize);
        for k in &kraus {
            let joint = k.tensor(&eye);
            moved = moved.add(&rho.conjugate_by(&joint)?)?;
        }
        let after = DensityMatrix::from_operator_unchecked(moved).partial_trace(&shape, 1)?;
        worst = worst.max(after.op().max_abs_diff(baseline.op())?);
    }
    Ok(worst)
}
