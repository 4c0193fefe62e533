use super::{Complex64, TensorError, MAX_DENSE_DIM, TOL_NORM};

/// A vector of complex amplitudes over a finite-dimensional space.
///
/// Storage is either dense (every amplitude materialized) or sparse (sorted
/// `(index, amplitude)` pairs). Honest commitment states have exactly two
/// nonzero amplitudes in a space whose dimension stands in for an unbounded
/// register, so the sparse form is the workhorse; dense form is used for
/// small joint-system experiments. The two representations compare equal
/// whenever their amplitudes do.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: u64,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<Complex64>),
    /// Sorted by index, strictly increasing.
    Sparse(Vec<(u64, Complex64)>),
}

impl StateVector {
    /// Dense state from a full amplitude vector.
    pub fn dense(amps: Vec<Complex64>) -> Result<Self, TensorError> {
        if amps.is_empty() {
            return Err(TensorError::ZeroDimension);
        }
        let dim = amps.len() as u64;
        if dim > MAX_DENSE_DIM {
            return Err(TensorError::DenseTooLarge {
                dim,
                limit: MAX_DENSE_DIM,
            });
        }
        for (i, a) in amps.iter().enumerate() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(TensorError::NonFiniteAmplitude { index: i as u64 });
            }
        }
        Ok(Self {
            dim,
            storage: Storage::Dense(amps),
        })
    }

    /// Dense state from real amplitudes.
    pub fn dense_real(amps: &[f64]) -> Result<Self, TensorError> {
        Self::dense(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Sparse state from `(index, amplitude)` entries. Entries are sorted;
    /// duplicate indices are summed; exact zeros are dropped.
    pub fn sparse(dim: u64, entries: Vec<(u64, Complex64)>) -> Result<Self, TensorError> {
        if dim == 0 {
            return Err(TensorError::ZeroDimension);
        }
        let mut entries = entries;
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u64, Complex64)> = Vec::with_capacity(entries.len());
        for (i, a) in entries {
            if i >= dim {
                return Err(TensorError::IndexOutOfRange { index: i, dim });
            }
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(TensorError::NonFiniteAmplitude { index: i });
            }
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => merged.push((i, a)),
            }
        }
        merged.retain(|&(_, a)| a != Complex64::new(0.0, 0.0));
        Ok(Self {
            dim,
            storage: Storage::Sparse(merged),
        })
    }

    /// The computational basis state `|index⟩`.
    pub fn basis_state(dim: u64, index: u64) -> Result<Self, TensorError> {
        Self::sparse(dim, vec![(index, Complex64::new(1.0, 0.0))])
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Number of explicitly stored nonzero amplitudes.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.iter().filter(|a| a.norm_sqr() > 0.0).count(),
            Storage::Sparse(e) => e.len(),
        }
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        match &self.storage {
            Storage::Dense(v) => v[index as usize],
            Storage::Sparse(e) => e
                .binary_search_by_key(&index, |&(i, _)| i)
                .map(|k| e[k].1)
                .unwrap_or_else(|_| Complex64::new(0.0, 0.0)),
        }
    }

    /// Iterate stored nonzero `(index, amplitude)` pairs in index order.
    pub fn iter_nonzero(&self) -> Box<dyn Iterator<Item = (u64, Complex64)> + '_> {
        match &self.storage {
            Storage::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm_sqr() > 0.0)
                    .map(|(i, &a)| (i as u64, a)),
            ),
            Storage::Sparse(e) => Box::new(e.iter().copied()),
        }
    }

    /// Stored entries as a sorted `(index, amplitude)` list.
    pub fn to_entries(&self) -> Vec<(u64, Complex64)> {
        self.iter_nonzero().collect()
    }

    pub fn to_dense_vec(&self) -> Result<Vec<Complex64>, TensorError> {
        if self.dim > MAX_DENSE_DIM {
            return Err(TensorError::DenseTooLarge {
                dim: self.dim,
                limit: MAX_DENSE_DIM,
            });
        }
        match &self.storage {
            Storage::Dense(v) => Ok(v.clone()),
            Storage::Sparse(e) => {
                let mut v = vec![Complex64::new(0.0, 0.0); self.dim as usize];
                for &(i, a) in e {
                    v[i as usize] = a;
                }
                Ok(v)
            }
        }
    }

    pub fn to_dense(&self) -> Result<Self, TensorError> {
        Ok(Self {
            dim: self.dim,
            storage: Storage::Dense(self.to_dense_vec()?),
        })
    }

    pub fn to_sparse(&self) -> Self {
        Self {
            dim: self.dim,
            storage: Storage::Sparse(self.to_entries()),
        }
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, TensorError> {
        if self.dim != other.dim {
            return Err(TensorError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => {
                for (x, y) in a.iter().zip(b) {
                    acc += x.conj() * y;
                }
            }
            (Storage::Sparse(a), Storage::Sparse(b)) => {
                let (mut i, mut j) = (0usize, 0usize);
                while i < a.len() && j < b.len() {
                    match a[i].0.cmp(&b[j].0) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            acc += a[i].1.conj() * b[j].1;
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
            (Storage::Sparse(a), Storage::Dense(b)) => {
                for &(i, x) in a {
                    acc += x.conj() * b[i as usize];
                }
            }
            (Storage::Dense(a), Storage::Sparse(b)) => {
                for &(i, y) in b {
                    acc += a[i as usize].conj() * y;
                }
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.iter_nonzero().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn check_normalized(&self) -> Result<(), TensorError> {
        let norm = self.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(TensorError::NotNormalized {
                norm,
                tol: TOL_NORM,
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(|a| a * c).collect()),
            Storage::Sparse(e) => Storage::Sparse(e.iter().map(|&(i, a)| (i, a * c)).collect()),
        };
        Self {
            dim: self.dim,
            storage,
        }
    }

    pub fn normalized(&self) -> Result<Self, TensorError> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(TensorError::NotNormalized {
                norm,
                tol: TOL_NORM,
            });
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, factor: Complex64) -> Result<Self, TensorError> {
        if self.dim != other.dim {
            return Err(TensorError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if let (Storage::Dense(a), Storage::Dense(b)) = (&self.storage, &other.storage) {
            let v = a.iter().zip(b).map(|(x, y)| x + factor * y).collect();
            return Ok(Self {
                dim: self.dim,
                storage: Storage::Dense(v),
            });
        }
        let mut entries = self.to_entries();
        entries.extend(other.iter_nonzero().map(|(i, a)| (i, factor * a)));
        Self::sparse(self.dim, entries)
    }

    /// Kronecker product; the result index of `(i, j)` is `i * other.dim + j`.
    pub fn tensor(&self, other: &Self) -> Self {
        let dim = self.dim * other.dim;
        if dim <= MAX_DENSE_DIM {
            if let (Storage::Dense(a), Storage::Dense(b)) = (&self.storage, &other.storage) {
                let mut v = Vec::with_capacity((dim) as usize);
                for x in a {
                    for y in b {
                        v.push(x * y);
                    }
                }
                return Self {
                    dim,
                    storage: Storage::Dense(v),
                };
            }
        }
        let mut entries = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, x) in self.iter_nonzero() {
            for (j, y) in other.iter_nonzero() {
                entries.push((i * other.dim + j, x * y));
            }
        }
        Self {
            dim,
            storage: Storage::Sparse(entries),
        }
    }

    /// Largest entrywise amplitude difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, TensorError> {
        if self.dim != other.dim {
            return Err(TensorError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut max = 0.0f64;
        let a = self.to_entries();
        let b = other.to_entries();
        let (mut i, mut j) = (0usize, 0usize);
        while i < a.len() || j < b.len() {
            let d = match (a.get(i), b.get(j)) {
                (Some(&(ia, xa)), Some(&(ib, xb))) if ia == ib => {
                    i += 1;
                    j += 1;
                    (xa - xb).norm()
                }
                (Some(&(ia, xa)), Some(&(ib, _))) if ia < ib => {
                    i += 1;
                    xa.norm()
                }
                (Some(_), Some(&(_, xb))) => {
                    j += 1;
                    xb.norm()
                }
                (Some(&(_, xa)), None) => {
                    i += 1;
                    xa.norm()
                }
                (None, Some(&(_, xb))) => {
                    j += 1;
                    xb.norm()
                }
                (None, None) => break,
            };
            max = max.max(d);
        }
        Ok(max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        matches!(self.max_abs_diff(other), Ok(d) if d <= tol)
    }

    /// How far two states are from lying on the same ray:
    /// `1 − |⟨a|b⟩| / (‖a‖·‖b‖)`. Zero means equal up to a global phase.
    pub fn ray_defect(&self, other: &Self) -> Result<f64, TensorError> {
        let ov = self.inner(other)?.norm();
        let scale = self.norm() * other.norm();
        if scale == 0.0 {
            return Err(TensorError::NotNormalized {
                norm: 0.0,
                tol: TOL_NORM,
            });
        }
        Ok(1.0 - ov / scale)
    }

    /// Equality up to a global phase (and normalization), the test-level
    /// meaning of "same physical state".
    pub fn ray_eq(&self, other: &Self, tol: f64) -> bool {
        matches!(self.ray_defect(other), Ok(d) if d.abs() <= tol)
    }

    /// Largest imaginary part in the amplitudes.
    pub fn max_imag(&self) -> f64 {
        self.iter_nonzero()
            .map(|(_, a)| a.im.abs())
            .fold(0.0, f64::max)
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
    fn sparse_and_dense_agree() {
        let d = StateVector::dense(vec![c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.8)]).unwrap();
        let s = StateVector::sparse(3, vec![(2, c(0.0, 0.8)), (0, c(0.6, 0.0))]).unwrap();
        assert!(s.is_sparse());
        assert!(d.approx_eq(&s, 0.0));
        assert_eq!(s.nnz(), 2);
        assert_eq!(d.amplitude(2), c(0.0, 0.8));
        assert_eq!(s.amplitude(1), c(0.0, 0.0));
    }

    #[test]
    fn rejects_non_finite_and_out_of_range() {
        assert!(StateVector::dense(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(StateVector::sparse(2, vec![(0, c(f64::INFINITY, 0.0))]).is_err());
        assert!(StateVector::sparse(2, vec![(2, c(1.0, 0.0))]).is_err());
        assert!(StateVector::dense(vec![]).is_err());
    }

    #[test]
    fn sparse_merges_duplicates() {
        let s = StateVector::sparse(4, vec![(1, c(0.5, 0.0)), (1, c(0.5, 0.0))]).unwrap();
        assert_eq!(s.amplitude(1), c(1.0, 0.0));
        assert_eq!(s.nnz(), 1);
    }

    #[test]
    fn inner_product_conjugates_first_argument() {
        let a = StateVector::dense(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let b = StateVector::dense(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(a.inner(&b).unwrap(), c(0.0, -1.0));
        assert_eq!(b.inner(&a).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn inner_product_rejects_dimension_mismatch() {
        let a = StateVector::basis_state(2, 0).unwrap();
        let b = StateVector::basis_state(3, 0).unwrap();
        assert!(a.inner(&b).is_err());
    }

    #[test]
    fn tensor_places_amplitudes_at_joint_indices() {
        // (|0⟩+|1⟩)/√2 ⊗ |1⟩ has weight 1/√2 at joint indices 1 and dim_b + 1.
        let h = 1.0 / 2.0f64.sqrt();
        let a = StateVector::dense_real(&[h, h]).unwrap();
        let b = StateVector::basis_state(3, 1).unwrap();
        let t = a.tensor(&b);
        assert_eq!(t.dim(), 6);
        assert!((t.amplitude(1).re - h).abs() < 1e-15);
        assert!((t.amplitude(3 + 1).re - h).abs() < 1e-15);
        assert_eq!(t.nnz(), 2);
    }

    #[test]
    fn tensor_of_basis_states_is_joint_basis_state() {
        let a = StateVector::basis_state(4, 0).unwrap();
        let b = StateVector::basis_state(4, 0).unwrap();
        let t = a.tensor(&b);
        assert!(t.ray_eq(&StateVector::basis_state(16, 0).unwrap(), 1e-15));
    }

    #[test]
    fn ray_eq_ignores_global_phase() {
        let a = StateVector::dense_real(&[0.6, 0.8]).unwrap();
        let b = a.scale(c(0.0, 1.0));
        assert!(a.ray_eq(&b, 1e-12));
        let d = StateVector::dense_real(&[0.8, 0.6]).unwrap();
        assert!(!a.ray_eq(&d, 1e-3));
    }

    proptest! {
        #[test]
        fn tensor_norm_is_multiplicative(
            re_a in proptest::collection::vec(-1.0f64..1.0, 1..6),
            re_b in proptest::collection::vec(-1.0f64..1.0, 1..6),
        ) {
            let a = StateVector::dense_real(&re_a).unwrap();
            let b = StateVector::dense_real(&re_b).unwrap();
            let t = a.tensor(&b);
            prop_assert!((t.norm() - a.norm() * b.norm()).abs() < 1e-12);
        }

        #[test]
        fn sparse_dense_round_trip(entries in proptest::collection::vec(
            (0u64..32, -1.0f64..1.0, -1.0f64..1.0), 0..10)) {
            let dim = 32;
            let sparse = StateVector::sparse(
                dim,
                entries.iter().map(|&(i, re, im)| (i, c(re, im))).collect(),
            ).unwrap();
            let dense = sparse.to_dense().unwrap();
            prop_assert!(!dense.is_sparse());
            prop_assert!(sparse.approx_eq(&dense, 0.0));
            prop_assert!(dense.to_sparse().approx_eq(&sparse, 0.0));
            prop_assert!((sparse.norm() - dense.norm()).abs() < 1e-14);
        }
    }
}
