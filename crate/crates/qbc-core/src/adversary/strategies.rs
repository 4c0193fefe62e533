//! Dishonest Alice implementations of the session's commit/open interface.

use std::sync::Arc;

use rand::Rng;

use crate::protocol::{
    alice_unveil, AliceParty, Bit, CommitRegister, ProtocolError, ProtocolParams, RegisterPayload,
    UnveilOpen,
};
use crate::states;
use crate::substrate::{
    pgm_from_ensemble, Measurement, Party, Povm, ProjectiveMeasurement, QuantumWorld, RegisterId,
};
use crate::tensor::{StateVector, SubsystemShape};

use super::{AdversaryError, EntangledSteering, IndexRule, NaiveRedeclare, SteeringMeasurement};

/// Commits honestly to `committed_b`, then announces `announce_b` with
/// indices chosen by the index rule.
pub struct NaiveAlice {
    params: ProtocolParams,
    cfg: NaiveRedeclare,
    committed: Vec<u64>,
}

impl NaiveAlice {
    pub fn new(params: ProtocolParams, cfg: NaiveRedeclare) -> Self {
        Self {
            params,
            cfg,
            committed: Vec::with_capacity(params.s as usize),
        }
    }
}

impl AliceParty for NaiveAlice {
    fn commit(
        &mut self,
        j: u32,
        world: &mut QuantumWorld,
    ) -> Result<(CommitRegister, RegisterId), ProtocolError> {
        let i = world.rng_mut().random_range(1..self.params.n_sim as u64);
        self.committed.push(i);
        let state =
            states::committed_state(self.params.n_sim as u64, self.cfg.committed_b.as_u8(), i)?;
        let payload = RegisterPayload::from_state(&state);
        let register = world.create_register(Party::Alice, state)?;
        Ok((CommitRegister { j, payload }, register))
    }

    fn open(&mut self, world: &mut QuantumWorld) -> Result<UnveilOpen, ProtocolError> {
        let max = self.params.max_index();
        let indices: Vec<u64> = self
            .committed
            .iter()
            .map(|&i| match self.cfg.index_rule {
                IndexRule::Same => i,
                IndexRule::Shifted => i % max + 1,
                IndexRule::UniformRandom => world.rng_mut().random_range(1..=max),
            })
            .collect();
        alice_unveil(&self.params, self.cfg.announce_b, &indices)
    }
}

/// Everything the steering strategy shares across sessions of one
/// experiment cell: the purified register state and the unveil-1
/// measurement, built once.
pub struct SteeringShared {
    params: ProtocolParams,
    n_a: u32,
    target_b: Bit,
    omega: StateVector,
    shape: SubsystemShape,
    unveil_one: UnveilOneKind,
}

enum UnveilOneKind {
    Pgm(Measurement),
    /// Device cannot resolve the skewed basis: measure the honest basis and
    /// announce a mismatched index (announcing the honest outcome under the
    /// flipped bit never passes).
    HonestBasis,
    ExactOracle,
}

impl SteeringShared {
    pub fn prepare(
        params: &ProtocolParams,
        cfg: &EntangledSteering,
        snapped: bool,
    ) -> Result<Arc<Self>, AdversaryError> {
        let n_a = cfg.n_a;
        let omega = states::omega_with_beta_dim(n_a, params.n_sim as u64)?;
        let shape = SubsystemShape::new(vec![n_a as u64, params.n_sim as u64])?;
        let unveil_one = if snapped {
            UnveilOneKind::HonestBasis
        } else {
            match cfg.measurement {
                SteeringMeasurement::Pgm => UnveilOneKind::Pgm(attack_pgm(n_a)?.into()),
                SteeringMeasurement::ExactOracle => UnveilOneKind::ExactOracle,
            }
        };
        Ok(Arc::new(Self {
            params: *params,
            n_a,
            target_b: cfg.target_b,
            omega,
            shape,
            unveil_one,
        }))
    }
}

/// The square-root POVM of the skewed-basis ensemble read off the
/// minus-family decomposition of `|Ω⟩`: states `ᾱ_{i−}` with weight
/// `(1−4/n²)/(n−1)` each and `ᾱ_{n−}` with weight `2/n`, normalized to sum
/// to one. Outcome `k ∈ [0, n−2]` points at index `k+1`; outcome `n−1` is
/// the `ᾱ_{n−}` element; a completing element (never hit on `|Ω⟩`) is last.
pub fn attack_pgm(n_a: u32) -> Result<Povm, AdversaryError> {
    let nf = n_a as f64;
    let mut ensemble: Vec<StateVector> = Vec::with_capacity(n_a as usize);
    for i in 1..n_a as u64 {
        ensemble.push(states::alpha_tilde_minus(n_a, i)?);
    }
    ensemble.push(states::alpha_tilde_n_minus(n_a)?);
    let mut weights = vec![(1.0 - 4.0 / (nf * nf)) / (nf - 1.0); (n_a - 1) as usize];
    weights.push(2.0 / nf);
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(pgm_from_ensemble(&ensemble, &weights)?)
}

/// The entangled Alice of one session. Keeps every α register and defers
/// all measurement to the unveil phase.
pub struct SteeringAlice {
    shared: Arc<SteeringShared>,
    alphas: Vec<RegisterId>,
    betas: Vec<RegisterId>,
}

impl SteeringAlice {
    pub fn new(shared: Arc<SteeringShared>) -> Self {
        let s = shared.params.s as usize;
        Self {
            shared,
            alphas: Vec::with_capacity(s),
            betas: Vec::with_capacity(s),
        }
    }

    fn unveil_index_for_one(
        &self,
        k: usize,
        world: &mut QuantumWorld,
    ) -> Result<u64, ProtocolError> {
        let n_a = self.shared.n_a;
        let alpha = self.alphas[k];
        match &self.shared.unveil_one {
            UnveilOneKind::Pgm(m) => {
                let outcome = world.measure(Party::Alice, &[alpha], m)?;
                let skew_count = (n_a - 1) as usize;
                if outcome.index < skew_count {
                    Ok(outcome.index as u64 + 1)
                } else {
                    // The ᾱ_{n−} (or completing) outcome: the register is
                    // lost to the illegitimate uniform component. Announce
                    // the index with the best conditional pass probability —
                    // a number Alice can compute classically, knowing the
                    // state she prepared and her own outcome.
                    self.best_conditional_index(k, world)
                }
            }
            UnveilOneKind::HonestBasis => {
                let m: Measurement = ProjectiveMeasurement::computational(n_a as u64).into();
                let outcome = world.measure(Party::Alice, &[alpha], &m)?;
                let i = outcome.index as u64;
                // β sits exactly on φ_{i+}; announcing (1, i) is hopeless,
                // a mismatched index keeps the 1/4 per-register chance.
                Ok(i % (n_a as u64 - 1) + 1)
            }
            UnveilOneKind::ExactOracle => {
                let i = world.rng_mut().random_range(1..n_a as u64);
                let target = states::alpha_tilde_minus(n_a, i)?;
                world.force_project_oracle(alpha, &target)?;
                Ok(i)
            }
        }
    }

    fn best_conditional_index(&self, k: usize, world: &QuantumWorld) -> Result<u64, ProtocolError> {
        let n_a = self.shared.n_a;
        let n_sim = self.shared.params.n_sim as u64;
        let beta = self.betas[k];
        let mut best = (1u64, f64::MIN);
        for i in 1..n_a as u64 {
            let target = states::committed_state(n_sim, Bit::One.as_u8(), i)?;
            let check: Measurement = ProjectiveMeasurement::binary_onto(target)?.into();
            let probs = world.born_probabilities(Party::Referee, &[beta], &check)?;
            if probs[0] > best.1 {
                best = (i, probs[0]);
            }
        }
        Ok(best.0)
    }
}

impl AliceParty for SteeringAlice {
    fn commit(
        &mut self,
        j: u32,
        world: &mut QuantumWorld,
    ) -> Result<(CommitRegister, RegisterId), ProtocolError> {
        let ids = world.create_joint(
            &[Party::Alice, Party::Alice],
            &self.shared.shape,
            self.shared.omega.clone(),
        )?;
        self.alphas.push(ids[0]);
        self.betas.push(ids[1]);
        let payload = RegisterPayload::Entangled {
            dim: self.shared.params.n_sim as u64,
        };
        Ok((CommitRegister { j, payload }, ids[1]))
    }

    fn open(&mut self, world: &mut QuantumWorld) -> Result<UnveilOpen, ProtocolError> {
        let s = self.shared.params.s as usize;
        debug_assert_eq!(self.alphas.len(), s);
        let mut indices = Vec::with_capacity(s);
        for k in 0..s {
            let i = match self.shared.target_b {
                Bit::Zero => {
                    let m: Measurement =
                        ProjectiveMeasurement::computational(self.shared.n_a as u64).into();
                    let outcome = world.measure(Party::Alice, &[self.alphas[k]], &m)?;
                    outcome.index as u64
                }
                Bit::One => self.unveil_index_for_one(k, world)?,
            };
            indices.push(i);
        }
        alice_unveil(&self.shared.params, self.shared.target_b, &indices)
    }
}
