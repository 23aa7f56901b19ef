use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::scalar::FieldScalar;
use super::subspace::Subspace;
use crate::error::{Error, Result};

/// A dense row-major matrix over a characteristic-3 field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: FieldScalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn scalar(n: usize, c: F) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data has wrong length");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Matrix whose rows are the given vectors.
    pub fn from_rows(cols: usize, rows: &[Vec<F>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row has wrong length");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(rows: usize, cols: &[Vec<F>]) -> Self {
        Self::from_rows(rows, cols).transpose()
    }

    /// Entrywise image of an integer matrix.
    pub fn from_ints(rows: usize, cols: usize, ints: &[i64]) -> Self {
        Self::from_vec(rows, cols, ints.iter().map(|&n| F::from_int(n)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Entrywise image under a field embedding (e.g. GF(3) → GF(9)).
    pub fn map<G: FieldScalar>(&self, f: impl Fn(F) -> G) -> Matrix<G> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self.row(i).iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
            })
    }

    /// Whether every off-diagonal entry is zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| self.row(i).iter().enumerate().all(|(j, x)| i == j || x.is_zero()))
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        F::axpy(&mut out.data, F::one(), &other.data);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        F::axpy(&mut out.data, -F::one(), &other.data);
        out
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: F, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        F::axpy(&mut self.data, c, &other.data);
    }

    pub fn scaled(&self, c: F) -> Self {
        let mut out = self.clone();
        F::scale(&mut out.data, c);
        out
    }

    /// Matrix product. Zero entries of `self` are skipped, so sparse left
    /// factors are cheap.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "incompatible shapes for product");
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let dst = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if !a.is_zero() {
                    F::axpy(dst, a, &other.data[k * n..(k + 1) * n]);
                }
            }
        }
        out
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() {
                        acc += *a * *b;
                    }
                }
                acc
            })
            .collect()
    }

    /// `v · self` for a row vector `v`.
    pub fn vec_mul(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![F::zero(); self.cols];
        for (i, &a) in v.iter().enumerate() {
            F::axpy(&mut out, a, self.row(i));
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Reduced row-echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            // first nonzero pivot
            let Some(p) = (r..rows).find(|&i| !self.data[i * cols + c].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = self.data[r * cols + c].inv().expect("pivot is nonzero");
            F::scale(&mut self.data[r * cols..(r + 1) * cols], inv);
            let pivot_row = self.data[r * cols..(r + 1) * cols].to_vec();
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c];
                if !f.is_zero() {
                    F::axpy(&mut self.data[i * cols..(i + 1) * cols], -f, &pivot_row);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Rank over the field.
    pub fn rank(&self) -> usize {
        let (rows, cols) = (self.rows, self.cols);
        let mut m = self.data.clone();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !m[i * cols + c].is_zero()) else {
                continue;
            };
            if p != r {
                for j in c..cols {
                    m.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = m[r * cols + c].inv().expect("pivot is nonzero");
            let pivot_row: Vec<F> = m[r * cols..(r + 1) * cols].iter().map(|&x| x * inv).collect();
            for i in r + 1..rows {
                let f = m[i * cols + c];
                if !f.is_zero() {
                    F::axpy(&mut m[i * cols..(i + 1) * cols], -f, &pivot_row);
                }
            }
            r += 1;
        }
        r
    }

    /// Basis of the right kernel `{v : self · v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<F>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![F::zero(); self.cols];
            v[free] = F::one();
            for (k, &p) in pivots.iter().enumerate() {
                v[p] = -r[(k, free)];
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the left kernel `{v : v · self = 0}`.
    pub fn left_nullspace(&self) -> Vec<Vec<F>> {
        self.transpose().nullspace()
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            aug.row_mut(i)[..n].copy_from_slice(self.row(i));
            aug[(i, n + i)] = F::one();
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| aug[(i, n + j)]))
    }

    /// Least `k ≤ cap` with `self^k = I`.
    pub fn multiplicative_order(&self, cap: u64) -> Result<u64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        if self.rank() < self.rows {
            return Err(Error::Singular);
        }
        let mut acc = self.clone();
        for k in 1..=cap {
            if acc.is_identity() {
                return Ok(k);
            }
            acc = acc.mul(self);
        }
        Err(Error::OrderExceedsCap { cap })
    }

    /// Jordan type of a nilpotent matrix from the ranks of its powers:
    /// the number of blocks of size ≥ k is rank(N^{k−1}) − rank(N^k).
    pub fn jordan_type_nilpotent(&self) -> Result<JordanType> {
        assert!(self.is_square());
        let n = self.rows;
        let mut ranks = vec![n];
        let mut power = self.clone();
        loop {
            let r = power.rank();
            ranks.push(r);
            if r == 0 {
                break;
            }
            if ranks.len() > n + 1 || r == ranks[ranks.len() - 2] {
                return Err(Error::NotNilpotent);
            }
            power = self.mul(&power);
        }
        Ok(JordanType::from_power_ranks(&ranks))
    }

    /// Same as [`Matrix::jordan_type_nilpotent`], but tracks the images
    /// `N^k V` as subspaces instead of forming the powers; much cheaper when
    /// the blocks are long.
    pub fn jordan_type_by_images(&self) -> Result<JordanType> {
        assert!(self.is_square());
        let n = self.rows;
        let mut ranks = vec![n];
        let mut image = Subspace::spanned_by(n, self.transpose().to_rows());
        loop {
            let r = image.dim();
            ranks.push(r);
            if r == 0 {
                break;
            }
            if r == ranks[ranks.len() - 2] {
                return Err(Error::NotNilpotent);
            }
            image = Subspace::spanned_by(n, image.basis().iter().map(|v| self.mul_vec(v)));
        }
        Ok(JordanType::from_power_ranks(&ranks))
    }

    /// `self − I`.
    pub fn minus_identity(&self) -> Self {
        assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] -= F::one();
        }
        out
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<F: FieldScalar> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, F::NAME)?;
        for i in 0..self.rows.min(16) {
            let row: Vec<String> = self.row(i).iter().take(16).map(|x| x.to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

impl<F: FieldScalar> Serialize for Matrix<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de, F: FieldScalar> Deserialize<'de> for Matrix<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<F>>::deserialize(d)?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(Matrix::from_rows(cols, &rows))
    }
}

/// Multiset of Jordan block sizes, stored in non-increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JordanType {
    blocks: Vec<usize>,
}

impl JordanType {
    pub fn new(mut blocks: Vec<usize>) -> Self {
        blocks.retain(|&b| b > 0);
        blocks.sort_unstable_by(|a, b| b.cmp(a));
        JordanType { blocks }
    }

    /// From the sequence `rank(N^0), rank(N^1), …` ending in 0.
    pub fn from_power_ranks(ranks: &[usize]) -> Self {
        // at_least[k] = #blocks of size ≥ k
        let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
        let mut blocks = Vec::new();
        for (k, &count) in at_least.iter().enumerate() {
            let next = at_least.get(k + 1).copied().unwrap_or(0);
            for _ in 0..count - next {
                blocks.push(k + 1);
            }
        }
        JordanType::new(blocks)
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn max_block(&self) -> usize {
        self.blocks.first().copied().unwrap_or(0)
    }

    /// Disjoint union of block multisets.
    pub fn union(&self, other: &JordanType) -> JordanType {
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        JordanType::new(blocks)
    }

    /// `(size, multiplicity)` pairs, largest size first.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &b in &self.blocks {
            match out.last_mut() {
                Some((s, m)) if *s == b => *m += 1,
                _ => out.push((b, 1)),
            }
        }
        out
    }

    /// Parses the `9^26 7 3^2 1` notation produced by `Display`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for tok in s.split_whitespace() {
            let (size, mult) = match tok.split_once('^') {
                Some((a, b)) => (a, b),
                None => (tok, "1"),
            };
            let size: usize = size.parse().map_err(|_| Error::Parse(format!("bad block size {tok:?}")))?;
            let mult: usize = mult.parse().map_err(|_| Error::Parse(format!("bad multiplicity {tok:?}")))?;
            blocks.extend(std::iter::repeat_n(size, mult));
        }
        Ok(JordanType::new(blocks))
    }
}

impl fmt::Display for JordanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .multiplicities()
            .into_iter()
            .map(|(s, m)| if m == 1 { s.to_string() } else { format!("{s}^{m}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{Gf3, Gf9};
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};

    fn m3(rows: usize, cols: usize, v: &[i64]) -> Matrix<Gf3> {
        Matrix::from_ints(rows, cols, v)
    }

    fn jordan_block(n: usize) -> Matrix<Gf3> {
        Matrix::from_fn(n, n, |i, j| if j == i + 1 { Gf3::ONE } else { Gf3::ZERO })
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::<Gf3>::identity(5).rank(), 5);
        assert_eq!(Matrix::<Gf3>::zeros(4, 7).rank(), 0);
        assert_eq!(m3(2, 2, &[1, 2, 2, 1]).rank(), 1);
    }

    #[test]
    fn nullspace_examples() {
        assert!(Matrix::<Gf3>::identity(4).nullspace().is_empty());
        let z = Matrix::<Gf3>::zeros(3, 3).nullspace();
        assert_eq!(z.len(), 3);
        let ns = m3(2, 2, &[1, 1, 2, 2]).nullspace();
        assert_eq!(ns.len(), 1);
        // spans (1, 2): v1 + v2 = 0
        let v = &ns[0];
        assert_eq!(v[0] + v[1], Gf3::ZERO);
        assert!(!v[0].is_zero());
    }

    #[test]
    fn jordan_type_examples() {
        assert_eq!(jordan_block(3).jordan_type_nilpotent().unwrap().blocks(), &[3]);
        assert_eq!(Matrix::<Gf3>::zeros(6, 6).jordan_type_nilpotent().unwrap().blocks(), &[1; 6]);
        let mut m = Matrix::<Gf3>::zeros(3, 3);
        m[(0, 1)] = Gf3::ONE;
        assert_eq!(m.jordan_type_nilpotent().unwrap().blocks(), &[2, 1]);
        assert_eq!(Matrix::<Gf3>::identity(2).jordan_type_nilpotent(), Err(Error::NotNilpotent));
        assert_eq!(Matrix::<Gf3>::identity(2).jordan_type_by_images(), Err(Error::NotNilpotent));
    }

    #[test]
    fn jordan_type_by_images_matches_powers() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            // strictly upper triangular, then conjugated
            let n = 9;
            let mut m = Matrix::<Gf9>::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.3) {
                        m[(i, j)] = Gf9::random(&mut rng);
                    }
                }
            }
            let g = loop {
                let g = Matrix::<Gf9>::from_fn(n, n, |_, _| Gf9::random(&mut rng));
                if g.rank() == n {
                    break g;
                }
            };
            let c = g.mul(&m).mul(&g.inverse().unwrap());
            assert_eq!(c.jordan_type_by_images().unwrap(), m.jordan_type_nilpotent().unwrap());
        }
    }

    #[test]
    fn multiplicative_order_examples() {
        assert_eq!(Matrix::<Gf3>::identity(4).multiplicative_order(10).unwrap(), 1);
        assert_eq!(Matrix::<Gf3>::scalar(3, Gf3::TWO).multiplicative_order(10).unwrap(), 2);
        let u = Matrix::<Gf3>::identity(4).add(&jordan_block(4));
        assert_eq!(u.multiplicative_order(100).unwrap(), 9);
        assert_eq!(u.multiplicative_order(5), Err(Error::OrderExceedsCap { cap: 5 }));
        assert_eq!(Matrix::<Gf3>::zeros(2, 2).multiplicative_order(5), Err(Error::Singular));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m3(3, 3, &[1, 2, 0, 0, 1, 1, 2, 0, 1]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert!(m3(2, 2, &[1, 2, 2, 1]).inverse().is_none());
    }

    #[test]
    fn jordan_type_display_and_parse() {
        let j = JordanType::new(vec![9; 26].into_iter().chain([7, 3, 3, 1]).collect());
        assert_eq!(j.to_string(), "9^26 7 3^2 1");
        assert_eq!(JordanType::parse("9^26 7 3^2 1").unwrap(), j);
        assert_eq!(j.dimension(), 248);
    }

    #[test]
    fn json_format() {
        let m = m3(2, 2, &[0, 1, 2, 0]);
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[0,1],[2,0]]");
        let m9: Matrix<Gf9> = m.map(Gf9::from);
        assert_eq!(serde_json::to_string(&m9).unwrap(), "[[[0,0],[1,0]],[[2,0],[0,0]]]");
        let back: Matrix<Gf9> = serde_json::from_str("[[[0,0],[1,0]],[[2,0],[0,0]]]").unwrap();
        assert_eq!(back, m9);
    }
}
