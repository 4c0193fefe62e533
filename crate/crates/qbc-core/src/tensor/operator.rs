use nalgebra::DMatrix;

use super::{Complex64, StateVector, TensorError, TOL_EIG, TOL_EQ};

/// A dense square operator on a finite-dimensional space, stored row-major.
///
/// The `hermitian` flag records that the entries have been verified (or
/// constructed) self-adjoint; eigendecomposition requires it.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
    hermitian: bool,
}

/// Result of a Hermitian eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        op
    }

    /// Build from an entry function; hermiticity is checked, not assumed.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        let mut op = Self {
            dim,
            data,
            hermitian: false,
        };
        op.hermitian = op.hermitian_deviation() <= TOL_EQ;
        op
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, TensorError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(TensorError::ZeroDimension);
        }
        for (i, row) in rows.iter().enumerate() {
            for a in row {
                if !a.re.is_finite() || !a.im.is_finite() {
                    return Err(TensorError::NonFiniteAmplitude { index: i as u64 });
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// `|a⟩⟨b|` as a dense operator.
    pub fn outer(a: &StateVector, b: &StateVector) -> Result<Self, TensorError> {
        if a.dim() != b.dim() {
            return Err(TensorError::DimensionMismatch {
                left: a.dim(),
                right: b.dim(),
            });
        }
        let dim = a.dim() as usize;
        let mut op = Self::zeros(dim);
        op.hermitian = false;
        for (i, x) in a.iter_nonzero() {
            for (j, y) in b.iter_nonzero() {
                op.data[i as usize * dim + j as usize] = x * y.conj();
            }
        }
        op.hermitian = op.hermitian_deviation() <= TOL_EQ;
        Ok(op)
    }

    /// Rank-one projector `|s⟩⟨s|` onto a normalized state.
    pub fn projector(state: &StateVector) -> Result<Self, TensorError> {
        state.check_normalized()?;
        let mut op = Self::outer(state, state)?;
        op.hermitian = true;
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    /// Max entrywise deviation from self-adjointness, `max |A − A†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                max = max.max(d);
            }
        }
        max
    }

    pub fn check_hermitian(&self) -> Result<(), TensorError> {
        if self.hermitian {
            return Ok(());
        }
        let deviation = self.hermitian_deviation();
        if deviation > TOL_EQ {
            return Err(TensorError::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.data[j * self.dim + i] = self.get(i, j).conj();
            }
        }
        out.hermitian = self.hermitian;
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for a in &mut out.data {
            *a *= c;
        }
        out.hermitian = self.hermitian && c.im == 0.0;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_dim(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_dim(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        out.hermitian = false;
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out.hermitian = out.hermitian_deviation() <= TOL_EQ;
        Ok(out)
    }

    fn check_same_dim(&self, other: &Self) -> Result<(), TensorError> {
        if self.dim != other.dim {
            return Err(TensorError::DimensionMismatch {
                left: self.dim as u64,
                right: other.dim as u64,
            });
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product of operators; index convention matches
    /// [`StateVector::tensor`].
    pub fn tensor(&self, other: &Self) -> Self {
        let n = self.dim * other.dim;
        let mut out = Self::zeros(n);
        for i1 in 0..self.dim {
            for j1 in 0..self.dim {
                let a = self.get(i1, j1);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for i2 in 0..other.dim {
                    for j2 in 0..other.dim {
                        let b = other.get(i2, j2);
                        if b.norm_sqr() == 0.0 {
                            continue;
                        }
                        out.data[(i1 * other.dim + i2) * n + (j1 * other.dim + j2)] = a * b;
                    }
                }
            }
        }
        out.hermitian = self.hermitian && other.hermitian;
        out
    }

    /// Apply to a state of the same dimension. The sparse input path costs
    /// `O(dim · nnz)` and returns a dense result.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector, TensorError> {
        if state.dim() != self.dim as u64 {
            return Err(TensorError::DimensionMismatch {
                left: self.dim as u64,
                right: state.dim(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (k, amp) in state.iter_nonzero() {
            let k = k as usize;
            for (i, slot) in out.iter_mut().enumerate() {
                *slot += self.data[i * self.dim + k] * amp;
            }
        }
        StateVector::dense(out)
    }

    /// `⟨state|A|state⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<Complex64, TensorError> {
        let applied = self.apply(state)?;
        state.inner(&applied)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, TensorError> {
        self.check_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        matches!(self.max_abs_diff(other), Ok(d) if d <= tol)
    }

    fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Eigendecomposition of a verified-Hermitian operator. Eigenvalues come
    /// back ascending with orthonormal eigenvectors.
    pub fn hermitian_eig(&self) -> Result<Eigen, TensorError> {
        self.check_hermitian()?;
        let se = self.to_dmatrix().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| {
            se.eigenvalues[a]
                .partial_cmp(&se.eigenvalues[b])
                .expect("eigenvalues are finite")
        });
        let mut values = Vec::with_capacity(self.dim);
        let mut vectors = Vec::with_capacity(self.dim);
        for &k in &order {
            values.push(se.eigenvalues[k]);
            let col = se.eigenvectors.column(k);
            vectors.push(StateVector::dense(col.iter().copied().collect())?);
        }
        Ok(Eigen { values, vectors })
    }

    /// Eigenvalues only, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>, TensorError> {
        self.check_hermitian()?;
        let mut values: Vec<f64> = self
            .to_dmatrix()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
        Ok(values)
    }

    fn rebuild_from_eigen(eigen: &Eigen, f: impl Fn(f64) -> f64) -> Result<Operator, TensorError> {
        let dim = eigen.vectors.len();
        let mut out = Operator::zeros(dim);
        for (lambda, v) in eigen.values.iter().zip(&eigen.vectors) {
            let fl = f(*lambda);
            if fl == 0.0 {
                continue;
            }
            let term = Operator::outer(v, v)?;
            out = out.add(&term.scale(Complex64::new(fl, 0.0)))?;
        }
        out.hermitian = true;
        Ok(out)
    }

    /// Square root of a PSD operator. Eigenvalues in `[-TOL_EIG, 0)` are
    /// clamped to zero; anything more negative is an error.
    pub fn sqrt_psd(&self) -> Result<Operator, TensorError> {
        let eigen = self.hermitian_eig()?;
        Self::check_psd_spectrum(&eigen.values)?;
        Self::rebuild_from_eigen(&eigen, |l| l.max(0.0).sqrt())
    }

    /// Pseudo-inverse square root of a PSD operator; eigenvalues at or below
    /// `cutoff` are treated as zero.
    pub fn sqrt_inv_psd(&self, cutoff: f64) -> Result<Operator, TensorError> {
        let eigen = self.hermitian_eig()?;
        Self::check_psd_spectrum(&eigen.values)?;
        Self::rebuild_from_eigen(&eigen, |l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 })
    }

    fn check_psd_spectrum(values: &[f64]) -> Result<(), TensorError> {
        if let Some(&min) = values.first() {
            if min < -TOL_EIG {
                return Err(TensorError::NegativeEigenvalue { value: min });
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue (Hermitian operators only).
    pub fn min_eigenvalue(&self) -> Result<f64, TensorError> {
        Ok(self.hermitian_eigenvalues()?[0])
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Operator::identity(self.dim), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = Operator::identity(4).hermitian_eig().unwrap();
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exchange_matrix_has_plus_minus_one() {
        let x = Operator::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let eig = x.hermitian_eig().unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = Operator::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(!m.is_hermitian_flagged());
        assert!(matches!(
            m.hermitian_eig(),
            Err(TensorError::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_inv_handles_singular_diagonal() {
        let m = Operator::from_rows(vec![
            vec![c(4.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let inv = m.sqrt_inv_psd(1e-12).unwrap();
        assert!((inv.get(0, 0).re - 0.5).abs() < 1e-14);
        assert!(inv.get(1, 1).norm() < 1e-14);
        let sqrt = m.sqrt_psd().unwrap();
        assert!((sqrt.get(0, 0).re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_inv_of_identity_is_identity() {
        let inv = Operator::identity(3).sqrt_inv_psd(1e-12).unwrap();
        assert!(inv.is_identity(1e-13));
    }

    #[test]
    fn negative_operator_is_rejected_for_sqrt() {
        let m = Operator::identity(2).scale(c(-1.0, 0.0));
        assert!(matches!(
            m.sqrt_psd(),
            Err(TensorError::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn apply_matches_manual_matvec() {
        let m = Operator::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let s = StateVector::sparse(2, vec![(1, c(1.0, 0.0))]).unwrap();
        let out = m.apply(&s).unwrap();
        assert_eq!(out.amplitude(0), c(2.0, 0.0));
        assert_eq!(out.amplitude(1), c(0.0, 0.0));
    }

    #[test]
    fn tensor_index_convention_matches_states() {
        let a = StateVector::basis_state(2, 1).unwrap();
        let b = StateVector::basis_state(3, 2).unwrap();
        let pa = Operator::projector(&a).unwrap();
        let pb = Operator::projector(&b).unwrap();
        let joint_proj = pa.tensor(&pb);
        let joint_state = a.tensor(&b);
        let expect = Operator::projector(&joint_state).unwrap();
        assert!(joint_proj.approx_eq(&expect, 1e-14));
    }

    #[test]
    fn eigendecomposition_round_trips_at_dim_256() {
        let m = random_hermitian(256, &[0.31, -0.77, 0.12, 0.54, -0.93, 0.48, 0.05, -0.26]);
        let eigen = m.hermitian_eig().unwrap();
        let rebuilt = Operator::rebuild_from_eigen(&eigen, |l| l).unwrap();
        assert!(m.max_abs_diff(&rebuilt).unwrap() < 1e-10);
    }

    // Slow: a 4096×4096 dense complex eigendecomposition. Run on demand
    // with `cargo test -- --ignored`.
    #[test]
    #[ignore]
    fn eigendecomposition_round_trips_at_dim_4096() {
        let m = random_hermitian(4096, &[0.41, -0.67, 0.22, 0.84, -0.13, 0.58, 0.95, -0.36]);
        let eigen = m.hermitian_eig().unwrap();
        let rebuilt = Operator::rebuild_from_eigen(&eigen, |l| l).unwrap();
        assert!(m.max_abs_diff(&rebuilt).unwrap() < 1e-10);
    }

    fn random_hermitian(dim: usize, seed: &[f64]) -> Operator {
        // Deterministic pseudo-random entries from the seed slice.
        let mut k = 0usize;
        let mut next = || {
            let v = seed[k % seed.len()] * ((k * 37 % 19) as f64 - 9.0) / 9.0;
            k += 1;
            v
        };
        let mut m = Operator::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let re = next();
                let im = if i == j { 0.0 } else { next() };
                m.data[i * dim + j] = c(re, im);
                m.data[j * dim + i] = c(re, -im);
            }
        }
        m.hermitian = true;
        m
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn eigendecomposition_round_trips(
            dim in 2usize..12,
            seed in proptest::collection::vec(-1.0f64..1.0, 8),
        ) {
            let m = random_hermitian(dim, &seed);
            let eigen = m.hermitian_eig().unwrap();
            // Reconstruction Σ λ |v⟩⟨v| within TOL_EIG.
            let rebuilt = Operator::rebuild_from_eigen(&eigen, |l| l).unwrap();
            prop_assert!(m.max_abs_diff(&rebuilt).unwrap() < TOL_EIG);
            // Orthonormality of eigenvectors.
            for (i, u) in eigen.vectors.iter().enumerate() {
                for (j, v) in eigen.vectors.iter().enumerate() {
                    let ov = u.inner(v).unwrap().norm();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((ov - expect).abs() < TOL_EIG);
                }
            }
        }
    }
}
