use super::matrix::Matrix;
use super::scalar::FieldScalar;

/// A subspace of `F^n` held as a reduced row-echelon basis.
///
/// Every basis row has a leading 1 in its pivot column and zeros in the
/// pivot columns of all other rows, so coordinates of a member vector are
/// read directly off the pivot columns.
#[derive(Clone, Debug)]
pub struct Subspace<F> {
    ambient: usize,
    rows: Vec<Vec<F>>,
    pivots: Vec<usize>,
    /// pivot column → row index
    pivot_row: Vec<Option<usize>>,
}

impl<F: FieldScalar> Subspace<F> {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new(), pivot_row: vec![None; ambient] }
    }

    pub fn full(ambient: usize) -> Self {
        let mut s = Self::zero(ambient);
        for i in 0..ambient {
            let mut v = vec![F::zero(); ambient];
            v[i] = F::one();
            s.insert(v);
        }
        s
    }

    pub fn spanned_by<I: IntoIterator<Item = Vec<F>>>(ambient: usize, vectors: I) -> Self {
        let mut s = Self::zero(ambient);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// The echelon basis (in insertion order, not sorted by pivot).
    pub fn basis(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Subtracts the projection onto this subspace along the pivot columns.
    pub fn reduce(&self, v: &mut [F]) {
        debug_assert_eq!(v.len(), self.ambient);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if !c.is_zero() {
                F::axpy(v, -c, row);
            }
        }
    }

    pub fn contains(&self, v: &[F]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|x| x.is_zero())
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, mut v: Vec<F>) -> bool {
        assert_eq!(v.len(), self.ambient, "vector has wrong length");
        self.reduce(&mut v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].inv().expect("nonzero");
        F::scale(&mut v, inv);
        for row in self.rows.iter_mut() {
            let c = row[p];
            if !c.is_zero() {
                F::axpy(row, -c, &v);
            }
        }
        self.pivot_row[p] = Some(self.rows.len());
        self.rows.push(v);
        self.pivots.push(p);
        true
    }

    /// Coordinates of `v` with respect to `basis()`, if `v` is a member.
    pub fn coords(&self, v: &[F]) -> Option<Vec<F>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p]).collect())
    }

    /// Coordinates of a vector already known to lie in the subspace.
    pub fn coords_unchecked(&self, v: &[F]) -> Vec<F> {
        self.pivots.iter().map(|&p| v[p]).collect()
    }

    /// The linear combination `Σ c_k basis[k]`.
    pub fn combine(&self, coeffs: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.ambient];
        for (row, &c) in self.rows.iter().zip(coeffs) {
            F::axpy(&mut out, c, row);
        }
        out
    }

    pub fn contains_subspace(&self, other: &Subspace<F>) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    /// Canonical basis: RREF rows sorted by pivot column.
    pub fn canonical_basis(&self) -> Vec<Vec<F>> {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by_key(|&k| self.pivots[k]);
        idx.into_iter().map(|k| self.rows[k].clone()).collect()
    }

    pub fn to_matrix(&self) -> Matrix<F> {
        Matrix::from_rows(self.ambient, &self.canonical_basis())
    }

    pub fn sum(&self, other: &Subspace<F>) -> Subspace<F> {
        let mut s = self.clone();
        for v in &other.rows {
            s.insert(v.clone());
        }
        s
    }

    pub fn intersection(&self, other: &Subspace<F>) -> Subspace<F> {
        // v ∈ self ∩ other  ⇔  v annihilated by both annihilators
        let mut constraints = self.annihilator();
        constraints.extend(other.annihilator());
        if constraints.is_empty() {
            return Subspace::full(self.ambient);
        }
        Subspace::spanned_by(self.ambient, Matrix::from_rows(self.ambient, &constraints).nullspace())
    }

    /// Basis of `{w : w · v = 0 for all v in the subspace}`.
    pub fn annihilator(&self) -> Vec<Vec<F>> {
        if self.rows.is_empty() {
            return Subspace::<F>::full(self.ambient).canonical_basis();
        }
        Matrix::from_rows(self.ambient, &self.rows).nullspace()
    }

    /// The standard basis vectors at non-pivot columns: a complement.
    pub fn complement_basis(&self) -> Vec<Vec<F>> {
        (0..self.ambient)
            .filter(|&c| self.pivot_row[c].is_none())
            .map(|c| {
                let mut v = vec![F::zero(); self.ambient];
                v[c] = F::one();
                v
            })
            .collect()
    }
}

impl<F: FieldScalar> PartialEq for Subspace<F> {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.dim() == other.dim() && self.contains_subspace(other)
    }
}

impl<F: FieldScalar> Eq for Subspace<F> {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Gf3;

    fn v(xs: &[i64]) -> Vec<Gf3> {
        xs.iter().map(|&x| Gf3::from_int(x)).collect()
    }

    #[test]
    fn insert_and_contains() {
        let mut s = Subspace::zero(4);
        assert!(s.insert(v(&[1, 2, 0, 0])));
        assert!(s.insert(v(&[0, 1, 1, 0])));
        assert!(!s.insert(v(&[1, 0, 1, 0])));
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&v(&[2, 1, 0, 0])));
        assert!(!s.contains(&v(&[0, 0, 0, 1])));
    }

    #[test]
    fn coords_recombine() {
        let s = Subspace::spanned_by(3, [v(&[1, 1, 0]), v(&[0, 1, 2])]);
        let x = v(&[2, 0, 2]);
        let c = s.coords(&x).unwrap();
        assert_eq!(s.combine(&c), x);
        assert!(s.coords(&v(&[0, 0, 1])).is_none());
    }

    #[test]
    fn intersection_and_sum() {
        let a = Subspace::spanned_by(3, [v(&[1, 0, 0]), v(&[0, 1, 0])]);
        let b = Subspace::spanned_by(3, [v(&[0, 1, 0]), v(&[0, 0, 1])]);
        assert_eq!(a.intersection(&b).dim(), 1);
        assert!(a.intersection(&b).contains(&v(&[0, 2, 0])));
        assert!(a.sum(&b).is_full());
        assert_eq!(a.annihilator().len(), 1);
    }

    #[test]
    fn equality_ignores_basis_choice() {
        let a = Subspace::spanned_by(3, [v(&[1, 1, 0]), v(&[0, 1, 1])]);
        let b = Subspace::spanned_by(3, [v(&[1, 0, 2]), v(&[2, 2, 0])]);
        assert_eq!(a, b);
    }
}
