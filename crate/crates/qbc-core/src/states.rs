//! The protocol's state families and their closed-form scalar identities.
//!
//! Two ensembles of evenly distributed states carry the committed bit:
//! `φ_{i±} = (|0⟩ ± |i⟩)/√2` for `i = 1..n−1`. A dishonest Alice who wants to
//! keep the bit open prepares the purification `|Ω⟩` whose β marginal is the
//! `+` mixture, and tries to steer β toward the `−` family by measuring her
//! half in the skewed basis `ᾱ_{i−}`. Every constructor and scalar here is a
//! direct, testable transcription of one of those objects.
//!
//! Scalar conventions worth knowing:
//!
//! - [`phi_tilde_minus`] uses the literal normalization constant
//!   [`c_prime`], which leaves the vector at norm `n/√(n²+2)` — it converges
//!   to a unit vector only as `n` grows. The overlap identity
//!   `⟨φ_{i−}|φ̃_{i−}⟩ = √(1−(2n+2)/(n²+2))` refers to exactly this scaling.
//!   [`phi_tilde_minus_normalized`] is the unit-norm ray, which is what a
//!   projection of α onto `ᾱ_{i−}` actually collapses β into.
//! - State indices live in `[1, n−1]`; index 0 is the shared `|0⟩` component.

use thiserror::Error;

use crate::tensor::{Complex64, DensityMatrix, StateVector, TensorError};

#[derive(Debug, Error)]
pub enum StateFamilyError {
    #[error("system dimension {n} is below the minimum {min}")]
    DimensionTooSmall { n: u32, min: u32 },
    #[error("state index {i} outside [1, {max}]")]
    IndexOutOfRange { i: u64, max: u64 },
    #[error("embedding dimension {beta_dim} is smaller than the family dimension {n}")]
    EmbeddingTooSmall { beta_dim: u64, n: u32 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Dimension and index parameters for one state family member.
///
/// `n ≥ 3` because the skewed-basis normalization `1/√(1−4/n²)` is singular
/// at `n = 2`; the mixtures `ρ_±` alone tolerate `n = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateFamilyParams {
    pub n: u32,
    pub i: u64,
}

impl StateFamilyParams {
    pub fn new(n: u32, i: u64) -> Result<Self, StateFamilyError> {
        check_n(n, 3)?;
        check_index(n, i)?;
        Ok(Self { n, i })
    }
}

fn check_n(n: u32, min: u32) -> Result<(), StateFamilyError> {
    if n < min {
        return Err(StateFamilyError::DimensionTooSmall { n, min });
    }
    Ok(())
}

fn check_index(n: u32, i: u64) -> Result<(), StateFamilyError> {
    if i == 0 || i > (n - 1) as u64 {
        return Err(StateFamilyError::IndexOutOfRange {
            i,
            max: (n - 1) as u64,
        });
    }
    Ok(())
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(|0⟩ + (−1)^b |i⟩)/√2` in dimension `dim` — the committed-register state
/// for bit `b` and index `i`. Exactly two nonzero amplitudes.
pub fn committed_state(dim: u64, b: u8, i: u64) -> Result<StateVector, StateFamilyError> {
    if i == 0 || i >= dim {
        return Err(StateFamilyError::IndexOutOfRange { i, max: dim - 1 });
    }
    let h = 1.0 / 2.0f64.sqrt();
    let sign = if b & 1 == 0 { 1.0 } else { -1.0 };
    Ok(StateVector::sparse(
        dim,
        vec![(0, re(h)), (i, re(sign * h))],
    )?)
}

/// `φ_{i+} = (|0⟩ + |i⟩)/√2` in dimension `n`.
pub fn phi_plus(n: u32, i: u64) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    check_index(n, i)?;
    committed_state(n as u64, 0, i)
}

/// `φ_{i−} = (|0⟩ − |i⟩)/√2` in dimension `n`.
pub fn phi_minus(n: u32, i: u64) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    check_index(n, i)?;
    committed_state(n as u64, 1, i)
}

/// The uniform superposition `φ_{n−} = (|0⟩ + Σ_{i≥1} |i⟩)/√n`. It is not a
/// legitimate committed state, and it is orthogonal to every `φ_{i−}`.
pub fn phi_n_minus(n: u32) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    let amp = re(1.0 / (n as f64).sqrt());
    Ok(StateVector::sparse(
        n as u64,
        (0..n as u64).map(|k| (k, amp)).collect(),
    )?)
}

/// Same uniform superposition embedded in a larger space of dimension
/// `beta_dim ≥ n`: entries `0..n` carry `1/√n`, the rest are zero.
pub fn phi_n_minus_embedded(n: u32, beta_dim: u64) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    if beta_dim < n as u64 {
        return Err(StateFamilyError::EmbeddingTooSmall { beta_dim, n });
    }
    let amp = re(1.0 / (n as f64).sqrt());
    Ok(StateVector::sparse(
        beta_dim,
        (0..n as u64).map(|k| (k, amp)).collect(),
    )?)
}

/// The purification `|Ω⟩ = (1/√(n−1)) Σ_{i=1}^{n−1} |α_{i+}⟩|φ_{i+}⟩` over
/// α ⊗ β, with `|α_{i+}⟩` fixed to the computational basis of an
/// `n`-dimensional α space (basis index 0 unused).
pub fn omega(n: u32) -> Result<StateVector, StateFamilyError> {
    omega_with_beta_dim(n, n as u64)
}

/// `|Ω⟩` with the β factor embedded in a space of dimension `beta_dim ≥ n`,
/// as a dishonest Alice does when the protocol register is much larger than
/// her attack dimension. Sparse with `2(n−1)` nonzero amplitudes.
pub fn omega_with_beta_dim(n: u32, beta_dim: u64) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    if beta_dim < n as u64 {
        return Err(StateFamilyError::EmbeddingTooSmall { beta_dim, n });
    }
    let norm = 1.0 / (((n - 1) as f64).sqrt() * 2.0f64.sqrt());
    let mut entries = Vec::with_capacity(2 * (n as usize - 1));
    for i in 1..n as u64 {
        entries.push((i * beta_dim, re(norm)));
        entries.push((i * beta_dim + i, re(norm)));
    }
    Ok(StateVector::sparse(n as u64 * beta_dim, entries)?)
}

/// The uniform α-side state `ᾱ_{n−} = (1/√(n−1)) Σ_{i=1}^{n−1} |α_{i+}⟩`.
pub fn alpha_tilde_n_minus(n: u32) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    let amp = re(1.0 / ((n - 1) as f64).sqrt());
    Ok(StateVector::sparse(
        n as u64,
        (1..n as u64).map(|k| (k, amp)).collect(),
    )?)
}

/// The skewed α-side state
/// `ᾱ_{i−} = (1/√(1−4/n²)) [((2−n)/n)|α_{i+}⟩ + (2/n) Σ_{i′≠i} |α_{i′+}⟩]`.
/// These are unit vectors but not mutually orthogonal, which is why steering
/// toward the `−` family takes a POVM rather than a basis measurement.
pub fn alpha_tilde_minus(n: u32, i: u64) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    check_index(n, i)?;
    let nf = n as f64;
    let norm = 1.0 / (1.0 - 4.0 / (nf * nf)).sqrt();
    let on_i = (2.0 - nf) / nf * norm;
    let off_i = 2.0 / nf * norm;
    let entries = (1..n as u64)
        .map(|k| (k, re(if k == i { on_i } else { off_i })))
        .collect();
    Ok(StateVector::sparse(n as u64, entries)?)
}

/// The literal normalization constant `c′ = √(n(n−1)(n+2)/(n²+2))` used by
/// [`phi_tilde_minus`].
pub fn c_prime(n: u32) -> Result<f64, StateFamilyError> {
    check_n(n, 3)?;
    let nf = n as f64;
    Ok((nf * (nf - 1.0) * (nf + 2.0) / (nf * nf + 2.0)).sqrt())
}

fn phi_tilde_minus_unscaled(n: u32, i: u64) -> Result<StateVector, StateFamilyError> {
    let nf = n as f64;
    let lead = (1.0 - 4.0 / (nf * nf)).sqrt() / (nf - 1.0).sqrt();
    let cross = 4.0 / (nf * nf - 4.0);
    let mut acc = phi_minus(n, i)?.scale(re(lead));
    for ip in 1..n as u64 {
        if ip == i {
            continue;
        }
        acc = acc.add(&phi_minus(n, ip)?.scale(re(-lead * cross)))?;
    }
    let tail = (2.0 / nf).sqrt() * (nf - 2.0).sqrt() / ((nf - 1.0).sqrt() * (nf + 2.0).sqrt());
    Ok(acc.add(&phi_n_minus(n)?.scale(re(tail)))?)
}

/// The steering residual `φ̃_{i−}` scaled by the literal constant
/// [`c_prime`]. Strictly orthogonal to `φ_{i+}` for every `n`, and
/// `⟨φ_{i−}|φ̃_{i−}⟩ = √(1−(2n+2)/(n²+2))`. Its norm is `n/√(n²+2)`; see
/// [`phi_tilde_minus_normalized`] for the unit-norm collapse ray.
pub fn phi_tilde_minus(n: u32, i: u64) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    check_index(n, i)?;
    Ok(phi_tilde_minus_unscaled(n, i)?.scale(re(c_prime(n)?)))
}

/// Unit-norm version of [`phi_tilde_minus`]: the state β actually collapses
/// into when α is projected onto `ᾱ_{i−}`.
pub fn phi_tilde_minus_normalized(n: u32, i: u64) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    check_index(n, i)?;
    Ok(phi_tilde_minus_unscaled(n, i)?.normalized()?)
}

/// Rebuild `|Ω⟩` from the minus-family decomposition
/// `(1/√(n−1)) Σ_i √(1−4/n²) |ᾱ_{i−}⟩|φ_{i−}⟩ + √(2/n) |ᾱ_{n−}⟩|φ_{n−}⟩`.
/// Equal to [`omega`] elementwise; the identity is what makes the steering
/// attack well-defined.
pub fn omega_reconstruction_minus(n: u32) -> Result<StateVector, StateFamilyError> {
    check_n(n, 3)?;
    let nf = n as f64;
    let lead = (1.0 - 4.0 / (nf * nf)).sqrt() / (nf - 1.0).sqrt();
    let mut acc = StateVector::sparse(n as u64 * n as u64, vec![])?;
    for i in 1..n as u64 {
        let term = alpha_tilde_minus(n, i)?.tensor(&phi_minus(n, i)?);
        acc = acc.add(&term.scale(re(lead)))?;
    }
    let tail = alpha_tilde_n_minus(n)?.tensor(&phi_n_minus(n)?);
    Ok(acc.add(&tail.scale(re((2.0 / nf).sqrt())))?)
}

/// Uniform mixture of the `+` family, `(1/(n−1)) Σ_i |φ_{i+}⟩⟨φ_{i+}|`.
/// `n = 2` is allowed: the single-pair case where the two mixtures are pure
/// and orthogonal.
pub fn rho_plus(n: u32) -> Result<DensityMatrix, StateFamilyError> {
    rho_family(n, 0)
}

/// Uniform mixture of the `−` family.
pub fn rho_minus(n: u32) -> Result<DensityMatrix, StateFamilyError> {
    rho_family(n, 1)
}

fn rho_family(n: u32, b: u8) -> Result<DensityMatrix, StateFamilyError> {
    check_n(n, 2)?;
    let w = 1.0 / (n - 1) as f64;
    let parts: Result<Vec<_>, StateFamilyError> = (1..n as u64)
        .map(|i| Ok((w, committed_state(n as u64, b, i)?)))
        .collect();
    Ok(DensityMatrix::from_mixture(&parts?)?)
}

/// The closed-form scalars attached to dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    /// `D(ρ_+, ρ_−) = 1/√(n−1)`.
    pub trace_distance: f64,
    /// `⟨φ_{i−}|φ̃_{i−}⟩ = √(1−(2n+2)/(n²+2))`, with `φ̃` scaled by `c′`.
    pub overlap_phi: f64,
    /// `|⟨α_{i+}|ᾱ_{i−}⟩|² = 1−4/(n+2)`, the basis-overlap that the device
    /// precision model keys on.
    pub overlap_alpha_sq: f64,
    /// Born weight of the `φ_{n−}` projector on `|Ω⟩`'s β side: `2/n`.
    pub collapse_weight_n_minus: f64,
}

pub fn closed_forms(n: u32) -> Result<ClosedForms, StateFamilyError> {
    check_n(n, 3)?;
    let nf = n as f64;
    Ok(ClosedForms {
        trace_distance: 1.0 / (nf - 1.0).sqrt(),
        overlap_phi: (1.0 - (2.0 * nf + 2.0) / (nf * nf + 2.0)).sqrt(),
        overlap_alpha_sq: 1.0 - 4.0 / (nf + 2.0),
        collapse_weight_n_minus: 2.0 / nf,
    })
}
