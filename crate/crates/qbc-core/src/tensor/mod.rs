//! Exact finite-dimensional complex linear algebra: state vectors with dense
//! or sparse storage, dense operators, density matrices, tensor products,
//! partial traces, Hermitian eigendecomposition and trace distance.
//!
//! Everything here is pure and immutable after construction; all routines are
//! safe to call from any number of threads.

mod density;
mod operator;
mod state;

pub use density::DensityMatrix;
pub use operator::{Eigen, Operator};
pub use state::StateVector;

use thiserror::Error;

pub type Complex64 = num_complex::Complex<f64>;

/// Tolerance for unit-norm checks.
pub const TOL_NORM: f64 = 1e-10;
/// Tolerance for entrywise operator/state comparisons.
pub const TOL_EQ: f64 = 1e-10;
/// Tolerance for eigendecomposition round trips and PSD checks.
pub const TOL_EIG: f64 = 1e-9;

/// Largest dimension for which vectors are materialized densely.
pub const MAX_DENSE_DIM: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u64, right: u64 },
    #[error("subsystem shape {factors:?} has joint dimension {product}, expected {expected}")]
    InconsistentShape {
        factors: Vec<u64>,
        product: u64,
        expected: u64,
    },
    #[error("factor index {index} out of range for {count} factors")]
    FactorOutOfRange { index: usize, count: usize },
    #[error("amplitude index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: u64, dim: u64 },
    #[error("non-finite amplitude at index {index}")]
    NonFiniteAmplitude { index: u64 },
    #[error("state has norm {norm}, expected 1 within {tol}")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("operator has negative eigenvalue {value:.3e} beyond tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("operator trace is {trace}, expected 1 within {tol}")]
    NotUnitTrace { trace: f64, tol: f64 },
    #[error("dimension {dim} exceeds dense storage limit {limit}")]
    DenseTooLarge { dim: u64, limit: u64 },
    #[error("dimension must be positive")]
    ZeroDimension,
}

/// Ordered list of tensor factor dimensions describing how a joint space
/// splits into subsystems. Factor 0 is the most significant index digit, so
/// the joint index of sub-indices `(a, b)` over factors `(da, db)` is
/// `a * db + b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemShape {
    factors: Vec<u64>,
}

impl SubsystemShape {
    pub fn new(factors: Vec<u64>) -> Result<Self, TensorError> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(TensorError::ZeroDimension);
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor_dim(&self, k: usize) -> Result<u64, TensorError> {
        self.factors
            .get(k)
            .copied()
            .ok_or(TensorError::FactorOutOfRange {
                index: k,
                count: self.factors.len(),
            })
    }

    pub fn joint_dim(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn check_joint_dim(&self, dim: u64) -> Result<(), TensorError> {
        let product = self.joint_dim();
        if product != dim {
            return Err(TensorError::InconsistentShape {
                factors: self.factors.clone(),
                product,
                expected: dim,
            });
        }
        Ok(())
    }

    /// Stride of each factor in the joint index.
    pub fn strides(&self) -> Vec<u64> {
        let mut strides = vec![1u64; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factors[k + 1];
        }
        strides
    }

    /// Decompose a joint index into per-factor digits.
    pub fn split(&self, index: u64) -> Vec<u64> {
        let strides = self.strides();
        self.factors
            .iter()
            .zip(strides)
            .map(|(&d, s)| (index / s) % d)
            .collect()
    }

    /// Recombine per-factor digits into a joint index.
    pub fn join(&self, digits: &[u64]) -> u64 {
        let strides = self.strides();
        digits.iter().zip(strides).map(|(&g, s)| g * s).sum()
    }
}

/// Precomputed index arithmetic for addressing a subset of factors (the
/// measurement or operator targets) against the remaining factors.
#[derive(Debug, Clone)]
pub struct FactorIndexer {
    factor_dims: Vec<u64>,
    factor_strides: Vec<u64>,
    targets: Vec<usize>,
    rest: Vec<usize>,
    target_dim: u64,
    rest_dim: u64,
}

impl FactorIndexer {
    pub fn new(shape: &SubsystemShape, targets: &[usize]) -> Result<Self, TensorError> {
        let count = shape.num_factors();
        let mut seen = vec![false; count];
        for &t in targets {
            if t >= count {
                return Err(TensorError::FactorOutOfRange { index: t, count });
            }
            if seen[t] {
                return Err(TensorError::FactorOutOfRange { index: t, count });
            }
            seen[t] = true;
        }
        let rest: Vec<usize> = (0..count).filter(|k| !seen[*k]).collect();
        let target_dim = targets.iter().map(|&k| shape.factors()[k]).product();
        let rest_dim = rest.iter().map(|&k| shape.factors()[k]).product();
        Ok(Self {
            factor_dims: shape.factors().to_vec(),
            factor_strides: shape.strides(),
            targets: targets.to_vec(),
            rest,
            target_dim,
            rest_dim,
        })
    }

    pub fn target_dim(&self) -> u64 {
        self.target_dim
    }

    pub fn rest_dim(&self) -> u64 {
        self.rest_dim
    }

    /// Split a joint index into (target sub-index, rest sub-index), each in
    /// row-major order over its own factor list.
    pub fn split(&self, index: u64) -> (u64, u64) {
        let mut t = 0u64;
        for &k in &self.targets {
            let digit = (index / self.factor_strides[k]) % self.factor_dims[k];
            t = t * self.factor_dims[k] + digit;
        }
        let mut r = 0u64;
        for &k in &self.rest {
            let digit = (index / self.factor_strides[k]) % self.factor_dims[k];
            r = r * self.factor_dims[k] + digit;
        }
        (t, r)
    }

    /// Inverse of [`split`](Self::split).
    pub fn join(&self, mut target_sub: u64, mut rest_sub: u64) -> u64 {
        let mut index = 0u64;
        for &k in self.targets.iter().rev() {
            let d = self.factor_dims[k];
            index += (target_sub % d) * self.factor_strides[k];
            target_sub /= d;
        }
        for &k in self.rest.iter().rev() {
            let d = self.factor_dims[k];
            index += (rest_sub % d) * self.factor_strides[k];
            rest_sub /= d;
        }
        index
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_joint_dim_and_split_join() {
        let shape = SubsystemShape::new(vec![3, 4, 2]).unwrap();
        assert_eq!(shape.joint_dim(), 24);
        assert_eq!(shape.strides(), vec![8, 2, 1]);
        for idx in 0..24 {
            let digits = shape.split(idx);
            assert_eq!(shape.join(&digits), idx);
        }
        assert!(shape.check_joint_dim(24).is_ok());
        assert!(shape.check_joint_dim(25).is_err());
    }

    #[test]
    fn shape_rejects_zero_factor() {
        assert!(SubsystemShape::new(vec![3, 0]).is_err());
        assert!(SubsystemShape::new(vec![]).is_err());
    }

    #[test]
    fn indexer_round_trips_every_index() {
        let shape = SubsystemShape::new(vec![3, 2, 4]).unwrap();
        for targets in [vec![0usize], vec![1], vec![2], vec![0, 2], vec![2, 0]] {
            let idxr = FactorIndexer::new(&shape, &targets).unwrap();
            assert_eq!(idxr.target_dim() * idxr.rest_dim(), 24);
            for idx in 0..24 {
                let (t, r) = idxr.split(idx);
                assert!(t < idxr.target_dim());
                assert!(r < idxr.rest_dim());
                assert_eq!(idxr.join(t, r), idx);
            }
        }
    }

    #[test]
    fn indexer_rejects_bad_targets() {
        let shape = SubsystemShape::new(vec![3, 2]).unwrap();
        assert!(FactorIndexer::new(&shape, &[2]).is_err());
        assert!(FactorIndexer::new(&shape, &[0, 0]).is_err());
    }

    #[test]
    fn indexer_target_order_is_respected() {
        // For factors (2, 3) the joint index of (a, b) is a*3 + b. With
        // targets [1, 0] the target sub-index must be b*2 + a.
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let idxr = FactorIndexer::new(&shape, &[1, 0]).unwrap();
        let (t, r) = idxr.split(3 + 2); // (a, b) = (1, 2)
        assert_eq!(t, 2 * 2 + 1);
        assert_eq!(r, 0);
    }
}
