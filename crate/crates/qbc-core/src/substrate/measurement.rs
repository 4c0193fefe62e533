//! Measurement families: projective measurements (with fast paths for
//! binary pure-state checks and computational-basis readout), general POVMs,
//! and the pretty-good measurement built from a state ensemble.

use crate::tensor::{Complex64, Operator, StateVector, TensorError, TOL_EQ, TOL_NORM};

use super::SubstrateError;

/// Eigenvalues at or below this are treated as zero when pseudo-inverting
/// ensemble averages; the Gram matrices in play are well conditioned above
/// this scale for dimensions up to 64.
pub const PGM_CUTOFF: f64 = 1e-12;

/// A complete projective measurement on some target dimension.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    kind: ProjKind,
}

#[derive(Debug, Clone)]
pub(crate) enum ProjKind {
    /// Explicit projector list, validated idempotent, mutually orthogonal,
    /// and complete.
    General(Vec<Operator>),
    /// `{|t⟩⟨t|, I − |t⟩⟨t|}` for a normalized target state; outcome 0 is
    /// the pass branch. Never materializes the complement operator.
    BinaryOnto(StateVector),
    /// Full computational-basis readout of the target factors.
    Computational { dim: u64 },
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<Operator>) -> Result<Self, SubstrateError> {
        if projectors.is_empty() {
            return Err(SubstrateError::EmptyMeasurement);
        }
        let dim = projectors[0].dim();
        let mut sum = Operator::zeros(dim);
        for (k, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(SubstrateError::Tensor(TensorError::DimensionMismatch {
                    left: p.dim() as u64,
                    right: dim as u64,
                }));
            }
            p.check_hermitian().map_err(SubstrateError::Tensor)?;
            let idem = p.mul(p)?.max_abs_diff(p)?;
            if idem > TOL_EQ {
                return Err(SubstrateError::NotIdempotent {
                    index: k,
                    deviation: idem,
                });
            }
            for (k2, q) in projectors.iter().enumerate().skip(k + 1) {
                let cross = p.mul(q)?;
                let dev = cross.max_abs_diff(&Operator::zeros(dim))?;
                if dev > TOL_EQ {
                    return Err(SubstrateError::NotOrthogonal {
                        first: k,
                        second: k2,
                        deviation: dev,
                    });
                }
            }
            sum = sum.add(p)?;
        }
        let completeness = sum.max_abs_diff(&Operator::identity(dim))?;
        if completeness > TOL_EQ {
            return Err(SubstrateError::Incomplete {
                deviation: completeness,
            });
        }
        Ok(Self {
            kind: ProjKind::General(projectors),
        })
    }

    /// The binary check `{|target⟩⟨target|, I − |target⟩⟨target|}`.
    pub fn binary_onto(target: StateVector) -> Result<Self, SubstrateError> {
        target.check_normalized().map_err(SubstrateError::Tensor)?;
        Ok(Self {
            kind: ProjKind::BinaryOnto(target),
        })
    }

    /// Computational-basis readout over a `dim`-dimensional target.
    pub fn computational(dim: u64) -> Self {
        Self {
            kind: ProjKind::Computational { dim },
        }
    }

    pub(crate) fn kind(&self) -> &ProjKind {
        &self.kind
    }

    pub fn num_outcomes(&self) -> usize {
        match &self.kind {
            ProjKind::General(ps) => ps.len(),
            ProjKind::BinaryOnto(_) => 2,
            ProjKind::Computational { dim } => *dim as usize,
        }
    }

    pub fn target_dim(&self) -> u64 {
        match &self.kind {
            ProjKind::General(ps) => ps[0].dim() as u64,
            ProjKind::BinaryOnto(t) => t.dim(),
            ProjKind::Computational { dim } => *dim,
        }
    }
}

/// A positive-operator-valued measure with precomputed element square roots
/// for the minimal-disturbance post-measurement update.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<Operator>,
    sqrts: Vec<Operator>,
}

impl Povm {
    /// Validate positivity and completeness, and precompute `√E_k`.
    pub fn new(elements: Vec<Operator>) -> Result<Self, SubstrateError> {
        if elements.is_empty() {
            return Err(SubstrateError::EmptyMeasurement);
        }
        let dim = elements[0].dim();
        let mut sum = Operator::zeros(dim);
        let mut sqrts = Vec::with_capacity(elements.len());
        for (k, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(SubstrateError::Tensor(TensorError::DimensionMismatch {
                    left: e.dim() as u64,
                    right: dim as u64,
                }));
            }
            e.check_hermitian().map_err(SubstrateError::Tensor)?;
            let min = e.min_eigenvalue()?;
            if min < -crate::tensor::TOL_EIG {
                return Err(SubstrateError::NotPositive {
                    index: k,
                    min_eigenvalue: min,
                });
            }
            sum = sum.add(e)?;
            sqrts.push(e.sqrt_psd()?);
        }
        let completeness = sum.max_abs_diff(&Operator::identity(dim))?;
        if completeness > TOL_EQ {
            return Err(SubstrateError::Incomplete {
                deviation: completeness,
            });
        }
        Ok(Self { elements, sqrts })
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub(crate) fn sqrt_element(&self, k: usize) -> &Operator {
        &self.sqrts[k]
    }

    pub fn num_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn target_dim(&self) -> u64 {
        self.elements[0].dim() as u64
    }
}

/// Either measurement family, as accepted by the world's `measure`.
#[derive(Debug, Clone)]
pub enum Measurement {
    Projective(ProjectiveMeasurement),
    Povm(Povm),
}

impl Measurement {
    pub fn num_outcomes(&self) -> usize {
        match self {
            Measurement::Projective(p) => p.num_outcomes(),
            Measurement::Povm(p) => p.num_outcomes(),
        }
    }

    pub fn target_dim(&self) -> u64 {
        match self {
            Measurement::Projective(p) => p.target_dim(),
            Measurement::Povm(p) => p.target_dim(),
        }
    }
}

impl From<ProjectiveMeasurement> for Measurement {
    fn from(p: ProjectiveMeasurement) -> Self {
        Measurement::Projective(p)
    }
}

impl From<Povm> for Measurement {
    fn from(p: Povm) -> Self {
        Measurement::Povm(p)
    }
}

/// The square-root (pretty-good) measurement of an ensemble: with
/// `S = Σ w_k |s_k⟩⟨s_k|`, element `E_k = S^{−1/2} w_k |s_k⟩⟨s_k| S^{−1/2}`
/// (pseudo-inverse on the support), plus the complement of the support as a
/// completing outcome when the ensemble does not span the space. The
/// completing element, when present, is the last outcome.
pub fn pgm_from_ensemble(states: &[StateVector], weights: &[f64]) -> Result<Povm, SubstrateError> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(SubstrateError::EmptyMeasurement);
    }
    let dim = states[0].dim();
    let mut total = 0.0;
    for &w in weights {
        if w < 0.0 || !w.is_finite() {
            return Err(SubstrateError::BadWeight { weight: w });
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(SubstrateError::DegenerateEnsemble);
    }
    if (total - 1.0).abs() > TOL_NORM.max(1e-9) {
        return Err(SubstrateError::BadWeight { weight: total });
    }
    let mut average = Operator::zeros(dim as usize);
    let mut scaled: Vec<Operator> = Vec::with_capacity(states.len());
    for (s, &w) in states.iter().zip(weights) {
        s.check_normalized().map_err(SubstrateError::Tensor)?;
        let p = Operator::projector(s)?.scale(Complex64::new(w, 0.0));
        average = average.add(&p)?;
        scaled.push(p);
    }
    let root_inv = average.sqrt_inv_psd(PGM_CUTOFF)?;
    let mut elements = Vec::with_capacity(states.len() + 1);
    let mut sum = Operator::zeros(dim as usize);
    for p in &scaled {
        let e = root_inv.mul(p)?.mul(&root_inv)?;
        sum = sum.add(&e)?;
        elements.push(e);
    }
    let complement = Operator::identity(dim as usize).sub(&sum)?;
    if complement.trace().re > TOL_EQ {
        elements.push(complement);
    }
    Povm::new(elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn projective_validation_catches_bad_families() {
        let p0 = Operator::projector(&StateVector::basis_state(2, 0).unwrap()).unwrap();
        let p1 = Operator::projector(&StateVector::basis_state(2, 1).unwrap()).unwrap();
        assert!(ProjectiveMeasurement::new(vec![p0.clone(), p1.clone()]).is_ok());
        // Missing an outcome: incomplete.
        assert!(matches!(
            ProjectiveMeasurement::new(vec![p0.clone()]),
            Err(SubstrateError::Incomplete { .. })
        ));
        // Overlapping projectors are not orthogonal.
        let h = 1.0 / 2.0f64.sqrt();
        let plus = Operator::projector(&StateVector::dense_real(&[h, h]).unwrap()).unwrap();
        assert!(matches!(
            ProjectiveMeasurement::new(vec![p0, plus]),
            Err(SubstrateError::NotOrthogonal { .. })
        ));
        // A non-idempotent "projector".
        let half = Operator::identity(2).scale(c(0.5));
        assert!(matches!(
            ProjectiveMeasurement::new(vec![half.clone(), half]),
            Err(SubstrateError::NotIdempotent { .. })
        ));
    }

    #[test]
    fn povm_validation_checks_positivity_and_completeness() {
        let e0 = Operator::identity(2).scale(c(0.25));
        let e1 = Operator::identity(2).scale(c(0.75));
        assert!(Povm::new(vec![e0.clone(), e1]).is_ok());
        assert!(matches!(
            Povm::new(vec![e0.clone(), e0.clone()]),
            Err(SubstrateError::Incomplete { .. })
        ));
        let neg = Operator::identity(2).scale(c(-0.5));
        let compensate = Operator::identity(2).scale(c(1.5));
        assert!(matches!(
            Povm::new(vec![neg, compensate]),
            Err(SubstrateError::NotPositive { .. })
        ));
    }

    #[test]
    fn pgm_of_orthonormal_ensemble_is_projective() {
        let states = vec![
            StateVector::basis_state(3, 0).unwrap(),
            StateVector::basis_state(3, 1).unwrap(),
            StateVector::basis_state(3, 2).unwrap(),
        ];
        let povm = pgm_from_ensemble(&states, &[1.0 / 3.0; 3]).unwrap();
        assert_eq!(povm.num_outcomes(), 3);
        for (k, s) in states.iter().enumerate() {
            let expect = Operator::projector(s).unwrap();
            assert!(povm.elements()[k].approx_eq(&expect, 1e-10));
        }
    }

    #[test]
    fn pgm_of_single_state_gets_a_completing_element() {
        let s = StateVector::basis_state(3, 1).unwrap();
        let povm = pgm_from_ensemble(std::slice::from_ref(&s), &[1.0]).unwrap();
        assert_eq!(povm.num_outcomes(), 2);
        let expect = Operator::projector(&s).unwrap();
        assert!(povm.elements()[0].approx_eq(&expect, 1e-10));
        let complement = Operator::identity(3).sub(&expect).unwrap();
        assert!(povm.elements()[1].approx_eq(&complement, 1e-10));
    }

    #[test]
    fn pgm_rejects_degenerate_input() {
        let s = StateVector::basis_state(2, 0).unwrap();
        assert!(pgm_from_ensemble(std::slice::from_ref(&s), &[0.0]).is_err());
        assert!(pgm_from_ensemble(std::slice::from_ref(&s), &[0.5]).is_err());
        assert!(pgm_from_ensemble(&[s], &[-1.0]).is_err());
        assert!(pgm_from_ensemble(&[], &[]).is_err());
    }
}
