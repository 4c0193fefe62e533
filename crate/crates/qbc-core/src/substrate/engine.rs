//! Index-arithmetic kernels that apply operators and projections to a
//! chosen subset of tensor factors of a joint state, preserving sparse
//! storage where the input is sparse.
//!
//! Floating-point accumulation follows sorted index order everywhere, so
//! identical inputs produce bit-identical results across processes — the
//! determinism the transcript contract depends on.

use std::collections::{BTreeMap, HashMap};

use crate::tensor::{Complex64, FactorIndexer, Operator, StateVector, TensorError};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Apply a dense operator to the target factors: `(A ⊗ I_rest)|ψ⟩`.
pub fn apply_on_targets(
    state: &StateVector,
    idxr: &FactorIndexer,
    op: &Operator,
) -> Result<StateVector, TensorError> {
    let td = idxr.target_dim();
    if op.dim() as u64 != td {
        return Err(TensorError::DimensionMismatch {
            left: op.dim() as u64,
            right: td,
        });
    }
    if state.is_sparse() {
        let mut acc: HashMap<u64, Complex64> = HashMap::with_capacity(state.nnz() * td as usize);
        for (idx, amp) in state.iter_nonzero() {
            let (t, r) = idxr.split(idx);
            for a in 0..td {
                let c = op.get(a as usize, t as usize);
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                *acc.entry(idxr.join(a, r)).or_insert_with(zero) += c * amp;
            }
        }
        StateVector::sparse(state.dim(), acc.into_iter().collect())
    } else {
        let dim = state.dim();
        let mut out = vec![zero(); dim as usize];
        for (idx, amp) in state.iter_nonzero() {
            let (t, r) = idxr.split(idx);
            for a in 0..td {
                let c = op.get(a as usize, t as usize);
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                out[idxr.join(a, r) as usize] += c * amp;
            }
        }
        StateVector::dense(out)
    }
}

/// Nonzero amplitudes grouped by rest sub-index, as `(target sub-index,
/// amplitude)` lists. The expectation of any target-side operator needs
/// only these groups.
pub fn rest_groups(state: &StateVector, idxr: &FactorIndexer) -> Vec<Vec<(u64, Complex64)>> {
    let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
    for (idx, amp) in state.iter_nonzero() {
        let (t, r) = idxr.split(idx);
        groups.entry(r).or_default().push((t, amp));
    }
    groups.into_values().collect()
}

/// `Re ⟨ψ| (A ⊗ I_rest) |ψ⟩` from precomputed rest groups; costs the sum of
/// squared group sizes instead of a full operator application.
pub fn expectation_grouped(groups: &[Vec<(u64, Complex64)>], op: &Operator) -> f64 {
    let mut acc = zero();
    for group in groups {
        for &(t1, a1) in group {
            for &(t2, a2) in group {
                acc += a1.conj() * op.get(t1 as usize, t2 as usize) * a2;
            }
        }
    }
    acc.re
}

/// Components `c_r = Σ_t conj(target[t]) ψ[t, r]` of `(⟨target| ⊗ I)|ψ⟩`,
/// keyed by the rest sub-index.
pub fn bra_components(
    state: &StateVector,
    idxr: &FactorIndexer,
    target: &StateVector,
) -> Result<BTreeMap<u64, Complex64>, TensorError> {
    if target.dim() != idxr.target_dim() {
        return Err(TensorError::DimensionMismatch {
            left: target.dim(),
            right: idxr.target_dim(),
        });
    }
    let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
    for (idx, amp) in state.iter_nonzero() {
        let (t, r) = idxr.split(idx);
        let c = target.amplitude(t).conj();
        if c.norm_sqr() == 0.0 {
            continue;
        }
        *acc.entry(r).or_insert_with(zero) += c * amp;
    }
    Ok(acc)
}

/// Weight `Σ_r |c_r|²` of the rank-one projection `(|t⟩⟨t| ⊗ I)|ψ⟩`.
pub fn projection_weight(components: &BTreeMap<u64, Complex64>) -> f64 {
    components.values().map(|c| c.norm_sqr()).sum()
}

/// The unnormalized projected state `Σ_r c_r |target⟩ ⊗ |r⟩`.
pub fn projected_state(
    state: &StateVector,
    idxr: &FactorIndexer,
    target: &StateVector,
    components: &BTreeMap<u64, Complex64>,
) -> Result<StateVector, TensorError> {
    let mut entries = Vec::with_capacity(components.len() * target.nnz());
    for (&r, &c) in components {
        for (t, ta) in target.iter_nonzero() {
            entries.push((idxr.join(t, r), ta * c));
        }
    }
    let sparse = StateVector::sparse(state.dim(), entries)?;
    if state.is_sparse() {
        Ok(sparse)
    } else {
        sparse.to_dense()
    }
}

/// The conditional state of the rest factors given the target projection:
/// entries `(r, c_r)` over the rest dimension, unnormalized.
pub fn conditional_rest_state(
    idxr: &FactorIndexer,
    components: &BTreeMap<u64, Complex64>,
) -> Result<StateVector, TensorError> {
    StateVector::sparse(
        idxr.rest_dim(),
        components.iter().map(|(&r, &c)| (r, c)).collect(),
    )
}

/// Per-digit probabilities of a computational-basis measurement on the
/// target factors.
pub fn computational_probabilities(state: &StateVector, idxr: &FactorIndexer) -> Vec<f64> {
    let mut probs = vec![0.0f64; idxr.target_dim() as usize];
    for (idx, amp) in state.iter_nonzero() {
        let (t, _) = idxr.split(idx);
        probs[t as usize] += amp.norm_sqr();
    }
    probs
}

/// Collapse onto one computational digit of the target factors.
pub fn computational_collapse(
    state: &StateVector,
    idxr: &FactorIndexer,
    digit: u64,
) -> Result<StateVector, TensorError> {
    let entries: Vec<(u64, Complex64)> = state
        .iter_nonzero()
        .filter(|&(idx, _)| idxr.split(idx).0 == digit)
        .collect();
    let sparse = StateVector::sparse(state.dim(), entries)?;
    if state.is_sparse() {
        Ok(sparse)
    } else {
        sparse.to_dense()
    }
}
