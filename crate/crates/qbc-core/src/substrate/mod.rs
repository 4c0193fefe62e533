//! The simulated quantum world.
//!
//! A [`QuantumWorld`] owns joint quantum states grouped by entanglement,
//! tracks which party holds each register, samples measurement outcomes by
//! the Born rule from a seedable counter-based random stream, and refuses
//! any operation a party attempts on a register it does not own.
//! [`Party::Referee`] is the simulation's god view, used by session drivers
//! and diagnostics only — never by a party's strategy.
//!
//! One world instance is single-owner mutable state driven by one session at
//! a time; Monte Carlo experiments run many worlds in parallel, each with an
//! independent RNG stream derived from `(master seed, session index)`.

mod engine;
mod measurement;

pub use measurement::{pgm_from_ensemble, Measurement, Povm, ProjectiveMeasurement, PGM_CUTOFF};

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::tensor::{
    Complex64, FactorIndexer, Operator, StateVector, SubsystemShape, TensorError, TOL_NORM,
};
use measurement::ProjKind;

/// The identities that can own registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Party {
    Alice,
    Bob,
    /// The simulation driver; exempt from ownership checks.
    Referee,
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Party::Alice => write!(f, "Alice"),
            Party::Bob => write!(f, "Bob"),
            Party::Referee => write!(f, "Referee"),
        }
    }
}

/// Opaque identifier of a register within one world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegisterId(u64);

impl RegisterId {
    pub fn raw(self) -> u64 {
        self.0
    }
}

/// Snapshot view of a register's public attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterHandle {
    pub id: RegisterId,
    pub dim: u64,
    pub owner: Party,
}

/// One sampled measurement result: the outcome index, its Born probability,
/// and the group state after collapse.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub index: usize,
    pub probability: f64,
    pub post_state: StateVector,
}

#[derive(Debug, Error)]
pub enum SubstrateError {
    #[error("unknown register id {0}")]
    UnknownRegister(u64),
    #[error("{caller} cannot act on a register owned by {owner}")]
    Ownership { caller: Party, owner: Party },
    #[error("targeted registers do not belong to a single joint group")]
    NotJoint,
    #[error("no measurement targets given")]
    EmptyTargets,
    #[error("measurement family is empty")]
    EmptyMeasurement,
    #[error("measurement acts on dimension {measurement}, targets have dimension {targets}")]
    TargetDimMismatch { measurement: u64, targets: u64 },
    #[error("projector {index} is not idempotent (deviation {deviation:.3e})")]
    NotIdempotent { index: usize, deviation: f64 },
    #[error("projectors {first} and {second} are not orthogonal (deviation {deviation:.3e})")]
    NotOrthogonal {
        first: usize,
        second: usize,
        deviation: f64,
    },
    #[error("measurement elements do not sum to the identity (deviation {deviation:.3e})")]
    Incomplete { deviation: f64 },
    #[error("element {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { index: usize, min_eigenvalue: f64 },
    #[error("ensemble weight {weight} is invalid")]
    BadWeight { weight: f64 },
    #[error("ensemble carries no weight")]
    DegenerateEnsemble,
    #[error("operator does not preserve the norm (post-application norm {norm})")]
    NotUnitary { norm: f64 },
    #[error("owner list has {owners} entries for {factors} factors")]
    OwnerCountMismatch { owners: usize, factors: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Derive the deterministic RNG stream for one session: a counter-based
/// ChaCha generator keyed by the master seed, positioned on its own stream.
pub fn session_rng(master_seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

struct RegisterEntry {
    dim: u64,
    owner: Party,
    group: u64,
}

struct Group {
    /// Register ids in tensor-factor order.
    factors: Vec<RegisterId>,
    state: StateVector,
}

/// See the module docs.
pub struct QuantumWorld {
    registers: BTreeMap<u64, RegisterEntry>,
    groups: BTreeMap<u64, Group>,
    next_register: u64,
    next_group: u64,
    rng: ChaCha12Rng,
}

impl QuantumWorld {
    /// World with its RNG on the given `(master seed, stream)` position.
    pub fn new(master_seed: u64, stream: u64) -> Self {
        Self::from_rng(session_rng(master_seed, stream))
    }

    pub fn from_rng(rng: ChaCha12Rng) -> Self {
        Self {
            registers: BTreeMap::new(),
            groups: BTreeMap::new(),
            next_register: 0,
            next_group: 0,
            rng,
        }
    }

    /// The session's random stream. Party strategies draw their classical
    /// randomness from here too, so a session is one deterministic stream.
    pub fn rng_mut(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }

    /// Create a single-register group in a normalized state.
    pub fn create_register(
        &mut self,
        owner: Party,
        state: StateVector,
    ) -> Result<RegisterId, SubstrateError> {
        state.check_normalized()?;
        let gid = self.alloc_group_id();
        let rid = self.alloc_register_id();
        self.registers.insert(
            rid.0,
            RegisterEntry {
                dim: state.dim(),
                owner,
                group: gid,
            },
        );
        self.groups.insert(
            gid,
            Group {
                factors: vec![rid],
                state,
            },
        );
        Ok(rid)
    }

    /// Create one joint group over the shape's factors, with per-factor
    /// ownership. Returns the register ids in factor order.
    pub fn create_joint(
        &mut self,
        owners: &[Party],
        shape: &SubsystemShape,
        state: StateVector,
    ) -> Result<Vec<RegisterId>, SubstrateError> {
        if owners.len() != shape.num_factors() {
            return Err(SubstrateError::OwnerCountMismatch {
                owners: owners.len(),
                factors: shape.num_factors(),
            });
        }
        shape.check_joint_dim(state.dim())?;
        state.check_normalized()?;
        let gid = self.alloc_group_id();
        let mut ids = Vec::with_capacity(owners.len());
        for (k, &owner) in owners.iter().enumerate() {
            let rid = self.alloc_register_id();
            self.registers.insert(
                rid.0,
                RegisterEntry {
                    dim: shape.factors()[k],
                    owner,
                    group: gid,
                },
            );
            ids.push(rid);
        }
        self.groups.insert(
            gid,
            Group {
                factors: ids.clone(),
                state,
            },
        );
        Ok(ids)
    }

    pub fn handle(&self, id: RegisterId) -> Result<RegisterHandle, SubstrateError> {
        let entry = self.entry(id)?;
        Ok(RegisterHandle {
            id,
            dim: entry.dim,
            owner: entry.owner,
        })
    }

    pub fn owner(&self, id: RegisterId) -> Result<Party, SubstrateError> {
        Ok(self.entry(id)?.owner)
    }

    pub fn dim(&self, id: RegisterId) -> Result<u64, SubstrateError> {
        Ok(self.entry(id)?.dim)
    }

    /// Hand a register to another party. Entanglement (group membership) is
    /// unaffected; only ownership changes.
    pub fn transfer(
        &mut self,
        caller: Party,
        id: RegisterId,
        to: Party,
    ) -> Result<(), SubstrateError> {
        let owner = self.owner(id)?;
        if caller != Party::Referee && caller != owner {
            return Err(SubstrateError::Ownership { caller, owner });
        }
        self.registers
            .get_mut(&id.0)
            .expect("entry checked above")
            .owner = to;
        Ok(())
    }

    /// Sample one measurement outcome on the target registers by the Born
    /// rule and collapse the group state accordingly.
    pub fn measure(
        &mut self,
        caller: Party,
        targets: &[RegisterId],
        m: &Measurement,
    ) -> Result<Outcome, SubstrateError> {
        let (gid, idxr) = self.target_layout(caller, targets)?;
        if m.target_dim() != idxr.target_dim() {
            return Err(SubstrateError::TargetDimMismatch {
                measurement: m.target_dim(),
                targets: idxr.target_dim(),
            });
        }
        let probs = self.outcome_probabilities(gid, &idxr, m)?;
        let index = self.sample_index(&probs);
        let probability = probs[index];
        let state = &self.groups[&gid].state;
        let collapsed = match m {
            Measurement::Projective(pm) => match pm.kind() {
                ProjKind::General(ps) => engine::apply_on_targets(state, &idxr, &ps[index])?,
                ProjKind::BinaryOnto(t) => {
                    let comps = engine::bra_components(state, &idxr, t)?;
                    let pass = engine::projected_state(state, &idxr, t, &comps)?;
                    if index == 0 {
                        pass
                    } else {
                        state.sub(&pass)?
                    }
                }
                ProjKind::Computational { .. } => {
                    engine::computational_collapse(state, &idxr, index as u64)?
                }
            },
            Measurement::Povm(povm) => {
                engine::apply_on_targets(state, &idxr, povm.sqrt_element(index))?
            }
        };
        let post_state = collapsed.normalized()?;
        self.groups.get_mut(&gid).expect("group exists").state = post_state.clone();
        Ok(Outcome {
            index,
            probability,
            post_state,
        })
    }

    /// Exact outcome distribution of a measurement, without sampling or
    /// collapsing. Sums to one within `TOL_NORM`.
    pub fn born_probabilities(
        &self,
        caller: Party,
        targets: &[RegisterId],
        m: &Measurement,
    ) -> Result<Vec<f64>, SubstrateError> {
        let (gid, idxr) = self.target_layout(caller, targets)?;
        if m.target_dim() != idxr.target_dim() {
            return Err(SubstrateError::TargetDimMismatch {
                measurement: m.target_dim(),
                targets: idxr.target_dim(),
            });
        }
        self.outcome_probabilities(gid, &idxr, m)
    }

    /// Apply a unitary to the caller's registers.
    pub fn apply_unitary(
        &mut self,
        caller: Party,
        targets: &[RegisterId],
        op: &Operator,
    ) -> Result<(), SubstrateError> {
        let (gid, idxr) = self.target_layout(caller, targets)?;
        if op.dim() as u64 != idxr.target_dim() {
            return Err(SubstrateError::TargetDimMismatch {
                measurement: op.dim() as u64,
                targets: idxr.target_dim(),
            });
        }
        let state = &self.groups[&gid].state;
        let moved = engine::apply_on_targets(state, &idxr, op)?;
        let norm = moved.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SubstrateError::NotUnitary { norm });
        }
        self.groups.get_mut(&gid).expect("group exists").state = moved;
        Ok(())
    }

    /// Referee diagnostic: the joint state of the group containing `id`,
    /// with the group's registers in tensor-factor order.
    pub fn group_state(
        &self,
        id: RegisterId,
    ) -> Result<(StateVector, Vec<RegisterId>), SubstrateError> {
        let entry = self.entry(id)?;
        let group = &self.groups[&entry.group];
        Ok((group.state.clone(), group.factors.clone()))
    }

    /// Hypothetical exact projection of one register onto a pure target
    /// state: returns the Born probability and the renormalized conditional
    /// state of the rest of the group. A diagnostic oracle — it bypasses
    /// ownership and leaves the world untouched. Returns `None` for the
    /// conditional state when the projection weight vanishes.
    pub fn conditional_collapse_oracle(
        &self,
        id: RegisterId,
        target: &StateVector,
    ) -> Result<(f64, Option<StateVector>), SubstrateError> {
        let entry = self.entry(id)?;
        if target.dim() != entry.dim {
            return Err(SubstrateError::TargetDimMismatch {
                measurement: target.dim(),
                targets: entry.dim,
            });
        }
        let group = &self.groups[&entry.group];
        let shape = self.group_shape(group);
        let slot = group
            .factors
            .iter()
            .position(|r| *r == id)
            .expect("register listed in its group");
        let idxr = FactorIndexer::new(&shape, &[slot])?;
        let target_unit = target.normalized()?;
        let comps = engine::bra_components(&group.state, &idxr, &target_unit)?;
        let weight = engine::projection_weight(&comps);
        if weight <= 1e-30 {
            return Ok((weight, None));
        }
        let rest = engine::conditional_rest_state(&idxr, &comps)?;
        Ok((weight, Some(rest.normalized()?)))
    }

    /// Force one register's factor onto a pure target state, renormalizing
    /// the group. No physical measurement realizes this for non-orthogonal
    /// target families — it is the hypothetical "exact projection" used to
    /// study what perfect steering would achieve. Diagnostic only; bypasses
    /// ownership. Returns the Born weight of the projected branch.
    pub fn force_project_oracle(
        &mut self,
        id: RegisterId,
        target: &StateVector,
    ) -> Result<f64, SubstrateError> {
        let entry = self.entry(id)?;
        if target.dim() != entry.dim {
            return Err(SubstrateError::TargetDimMismatch {
                measurement: target.dim(),
                targets: entry.dim,
            });
        }
        let gid = entry.group;
        let group = &self.groups[&gid];
        let shape = self.group_shape(group);
        let slot = group
            .factors
            .iter()
            .position(|r| *r == id)
            .expect("register listed in its group");
        let idxr = FactorIndexer::new(&shape, &[slot])?;
        let target_unit = target.normalized()?;
        let comps = engine::bra_components(&group.state, &idxr, &target_unit)?;
        let weight = engine::projection_weight(&comps);
        let projected = engine::projected_state(&group.state, &idxr, &target_unit, &comps)?;
        let post = projected.normalized()?;
        self.groups.get_mut(&gid).expect("group exists").state = post;
        Ok(weight)
    }

    fn outcome_probabilities(
        &self,
        gid: u64,
        idxr: &FactorIndexer,
        m: &Measurement,
    ) -> Result<Vec<f64>, SubstrateError> {
        let state = &self.groups[&gid].state;
        let probs: Vec<f64> = match m {
            Measurement::Projective(pm) => match pm.kind() {
                ProjKind::General(ps) => {
                    let mut probs = Vec::with_capacity(ps.len());
                    for p in ps {
                        let applied = engine::apply_on_targets(state, idxr, p)?;
                        probs.push(applied.norm_sqr());
                    }
                    probs
                }
                ProjKind::BinaryOnto(t) => {
                    let comps = engine::bra_components(state, idxr, t)?;
                    let pass = engine::projection_weight(&comps);
                    vec![pass, 1.0 - pass]
                }
                ProjKind::Computational { .. } => engine::computational_probabilities(state, idxr),
            },
            Measurement::Povm(povm) => {
                let groups = engine::rest_groups(state, idxr);
                povm.elements()
                    .iter()
                    .map(|e| engine::expectation_grouped(&groups, e))
                    .collect()
            }
        };
        let probs: Vec<f64> = probs.iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOL_NORM.max(1e-9) {
            return Err(SubstrateError::Incomplete {
                deviation: (total - 1.0).abs(),
            });
        }
        Ok(probs)
    }

    fn sample_index(&mut self, probs: &[f64]) -> usize {
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (k, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                last_nonzero = k;
            }
            acc += p;
            if u < acc {
                return k;
            }
        }
        last_nonzero
    }

    fn target_layout(
        &self,
        caller: Party,
        targets: &[RegisterId],
    ) -> Result<(u64, FactorIndexer), SubstrateError> {
        if targets.is_empty() {
            return Err(SubstrateError::EmptyTargets);
        }
        let first = self.entry(targets[0])?;
        let gid = first.group;
        let group = &self.groups[&gid];
        let mut slots = Vec::with_capacity(targets.len());
        for &t in targets {
            let entry = self.entry(t)?;
            if caller != Party::Referee && entry.owner != caller {
                return Err(SubstrateError::Ownership {
                    caller,
                    owner: entry.owner,
                });
            }
            if entry.group != gid {
                return Err(SubstrateError::NotJoint);
            }
            let slot = group
                .factors
                .iter()
                .position(|r| *r == t)
                .expect("register listed in its group");
            slots.push(slot);
        }
        let shape = self.group_shape(group);
        Ok((gid, FactorIndexer::new(&shape, &slots)?))
    }

    fn group_shape(&self, group: &Group) -> SubsystemShape {
        let dims: Vec<u64> = group
            .factors
            .iter()
            .map(|r| self.registers[&r.0].dim)
            .collect();
        SubsystemShape::new(dims).expect("group dimensions are positive")
    }

    fn entry(&self, id: RegisterId) -> Result<&RegisterEntry, SubstrateError> {
        self.registers
            .get(&id.0)
            .ok_or(SubstrateError::UnknownRegister(id.0))
    }

    fn alloc_register_id(&mut self) -> RegisterId {
        let id = self.next_register;
        self.next_register += 1;
        RegisterId(id)
    }

    fn alloc_group_id(&mut self) -> u64 {
        let id = self.next_group;
        self.next_group += 1;
        id
    }
}

/// A Haar-distributed random unitary, from the QR decomposition of a
/// complex Gaussian matrix with the phase convention fixed on R's diagonal.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Operator {
    use rand_distr::{Distribution, StandardNormal};
    let normal = StandardNormal;
    let m = nalgebra::DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
        Complex64::new(normal.sample(rng), normal.sample(rng))
    });
    let qr = m.qr();
    let r = qr.r();
    let q = qr.q();
    let mut phases = Vec::with_capacity(dim);
    for k in 0..dim {
        let d = r[(k, k)];
        let norm = d.norm();
        phases.push(if norm > 0.0 {
            d / norm
        } else {
            Complex64::new(1.0, 0.0)
        });
    }
    Operator::from_fn(dim, |i, j| q[(i, j)] * phases[j])
}
