use super::{
    Complex64, FactorIndexer, Operator, StateVector, SubsystemShape, TensorError, TOL_EIG, TOL_EQ,
    TOL_NORM,
};

/// A density matrix: Hermitian, positive semidefinite, unit trace.
///
/// Constructors that mix or trace existing density matrices preserve those
/// properties and skip re-validation; [`DensityMatrix::from_operator`] runs
/// the full check for externally supplied entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// `|s⟩⟨s|` for a normalized state.
    pub fn from_pure(state: &StateVector) -> Result<Self, TensorError> {
        Ok(Self {
            op: Operator::projector(state)?,
        })
    }

    /// `Σ w_k |s_k⟩⟨s_k|` for nonnegative weights summing to one.
    pub fn from_mixture(parts: &[(f64, StateVector)]) -> Result<Self, TensorError> {
        if parts.is_empty() {
            return Err(TensorError::ZeroDimension);
        }
        let dim = parts[0].1.dim();
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if (total - 1.0).abs() > TOL_NORM {
            return Err(TensorError::NotUnitTrace {
                trace: total,
                tol: TOL_NORM,
            });
        }
        let mut op = Operator::zeros(dim as usize);
        for (w, s) in parts {
            if *w < 0.0 {
                return Err(TensorError::NegativeEigenvalue { value: *w });
            }
            s.check_normalized()?;
            let term = Operator::projector(s)?.scale(Complex64::new(*w, 0.0));
            op = op.add(&term)?;
        }
        Ok(Self { op })
    }

    /// Validate raw entries as a density matrix: Hermitian within `TOL_EQ`,
    /// eigenvalues ≥ −`TOL_EIG`, trace 1 within `TOL_NORM`.
    pub fn from_operator(op: Operator) -> Result<Self, TensorError> {
        op.check_hermitian()?;
        let trace = op.trace();
        if (trace.re - 1.0).abs() > TOL_NORM || trace.im.abs() > TOL_NORM {
            return Err(TensorError::NotUnitTrace {
                trace: trace.re,
                tol: TOL_NORM,
            });
        }
        let min = op.min_eigenvalue()?;
        if min < -TOL_EIG {
            return Err(TensorError::NegativeEigenvalue { value: min });
        }
        Ok(Self { op })
    }

    /// Wrap entries that are a density matrix by construction (channel
    /// outputs of validated inputs), skipping the eigenvalue check.
    pub fn from_operator_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            op: self.op.tensor(&other.op),
        }
    }

    /// `A ρ A†`, the building block of measurement channels.
    pub fn conjugate_by(&self, a: &Operator) -> Result<Operator, TensorError> {
        a.mul(&self.op)?.mul(&a.adjoint())
    }

    /// Reduced density matrix on the kept factor of `shape`, tracing out all
    /// other factors. Trace and positivity are preserved.
    pub fn partial_trace(
        &self,
        shape: &SubsystemShape,
        keep: usize,
    ) -> Result<DensityMatrix, TensorError> {
        shape.check_joint_dim(self.dim() as u64)?;
        let idxr = FactorIndexer::new(shape, &[keep])?;
        let kept_dim = idxr.target_dim() as usize;
        let rest_dim = idxr.rest_dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); kept_dim * kept_dim];
        for i in 0..kept_dim {
            for j in 0..kept_dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..rest_dim {
                    let row = idxr.join(i as u64, r) as usize;
                    let col = idxr.join(j as u64, r) as usize;
                    acc += self.op.get(row, col);
                }
                entries[i * kept_dim + j] = acc;
            }
        }
        let op = Operator::from_fn(kept_dim, |i, j| entries[i * kept_dim + j]);
        Ok(DensityMatrix { op })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, TensorError> {
        self.op.hermitian_eigenvalues()
    }

    /// Trace distance `½ tr |ρ − σ|`, computed through the Hermitian
    /// eigenvalues of the difference. Symmetric and in `[0, 1]`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64, TensorError> {
        let diff = self.op.sub(&other.op)?;
        let values = diff.hermitian_eigenvalues()?;
        Ok(0.5 * values.iter().map(|l| l.abs()).sum::<f64>())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.op.approx_eq(&other.op, tol)
    }

    /// Max deviation from the density-matrix contract, for diagnostics.
    pub fn validity_defect(&self) -> Result<f64, TensorError> {
        let herm = self.op.hermitian_deviation();
        let trace = (self.trace() - 1.0).abs();
        let min = self.op.min_eigenvalue()?;
        Ok(herm.max(trace).max((-min).max(0.0)))
    }
}

impl DensityMatrix {
    /// Projector onto the support (eigenvalues above `TOL_EQ`).
    pub fn support_projector(&self) -> Result<Operator, TensorError> {
        let eigen = self.op.hermitian_eig()?;
        let mut out = Operator::zeros(self.dim());
        for (l, v) in eigen.values.iter().zip(&eigen.vectors) {
            if *l > TOL_EQ {
                out = out.add(&Operator::outer(v, v)?)?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn plus_state(dim: u64, i: u64) -> StateVector {
        let h = 1.0 / 2.0f64.sqrt();
        StateVector::sparse(dim, vec![(0, c(h)), (i, c(h))]).unwrap()
    }

    #[test]
    fn pure_state_density_has_unit_trace() {
        let rho = DensityMatrix::from_pure(&plus_state(4, 2)).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        assert!(rho.validity_defect().unwrap() < 1e-12);
    }

    #[test]
    fn mixture_requires_weights_summing_to_one() {
        let s = plus_state(3, 1);
        assert!(DensityMatrix::from_mixture(&[(0.5, s.clone())]).is_err());
        let rho = DensityMatrix::from_mixture(&[(0.5, s.clone()), (0.5, plus_state(3, 2))]);
        assert!(rho.is_ok());
    }

    #[test]
    fn partial_trace_recovers_product_factor() {
        let a = plus_state(2, 1);
        let b = StateVector::dense_real(&[0.6, 0.0, 0.8]).unwrap();
        let rho_a = DensityMatrix::from_pure(&a).unwrap();
        let rho_b = DensityMatrix::from_pure(&b).unwrap();
        let joint = rho_a.tensor(&rho_b);
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let back_b = joint.partial_trace(&shape, 1).unwrap();
        assert!(back_b.approx_eq(&rho_b, 1e-12));
        let back_a = joint.partial_trace(&shape, 0).unwrap();
        assert!(back_a.approx_eq(&rho_a, 1e-12));
        assert!((back_a.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_inconsistent_shape() {
        let rho = DensityMatrix::from_pure(&plus_state(4, 1)).unwrap();
        let shape = SubsystemShape::new(vec![3, 2]).unwrap();
        assert!(rho.partial_trace(&shape, 0).is_err());
    }

    #[test]
    fn trace_distance_basics() {
        let rho = DensityMatrix::from_pure(&plus_state(3, 1)).unwrap();
        assert!(rho.trace_distance(&rho).unwrap() < 1e-14);
        let a = DensityMatrix::from_pure(&StateVector::basis_state(2, 0).unwrap()).unwrap();
        let b = DensityMatrix::from_pure(&StateVector::basis_state(2, 1).unwrap()).unwrap();
        assert!((a.trace_distance(&b).unwrap() - 1.0).abs() < 1e-14);
        assert!((b.trace_distance(&a).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn from_operator_validates() {
        let bad = Operator::identity(2);
        assert!(DensityMatrix::from_operator(bad).is_err());
        let ok = Operator::identity(2).scale(c(0.5));
        assert!(DensityMatrix::from_operator(ok).is_ok());
    }

    #[test]
    fn support_projector_squares_to_itself() {
        let rho = DensityMatrix::from_mixture(&[(0.5, plus_state(4, 1)), (0.5, plus_state(4, 2))])
            .unwrap();
        let p = rho.support_projector().unwrap();
        assert!(p.mul(&p).unwrap().approx_eq(&p, 1e-10));
    }
}
