//! The Chevalley Lie algebra of a root system over a characteristic-3 field.
//!
//! Basis order: `e_α` for every root in the root system's order, then
//! `h_1, …, h_rank` (the simple coroots).

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::gf::{FieldScalar, Matrix, Subspace};
use crate::rootsys::{RootSystem, RootSystemType};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// `[b_i, b_j]` as a short list of `(basis index, coefficient)`.
type SparseVec<F> = Vec<(usize, F)>;

#[derive(Debug)]
pub struct LieAlgebra<F> {
    id: u64,
    rs: Arc<RootSystem>,
    dim: usize,
    /// `table[i * dim + j] = [b_i, b_j]`
    table: Vec<SparseVec<F>>,
    /// coroot of each root over `h_1..h_rank`
    coroots: Vec<Vec<F>>,
}

/// An element of a specific Lie algebra in the fixed Chevalley basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LieElement<F> {
    algebra_id: u64,
    coeffs: Vec<F>,
}

impl<F: FieldScalar> LieElement<F> {
    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    pub fn algebra_id(&self) -> u64 {
        self.algebra_id
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut c = self.coeffs.clone();
        F::axpy(&mut c, F::one(), &other.coeffs);
        LieElement { algebra_id: self.algebra_id, coeffs: c }
    }

    pub fn scaled(&self, s: F) -> Self {
        let mut c = self.coeffs.clone();
        F::scale(&mut c, s);
        LieElement { algebra_id: self.algebra_id, coeffs: c }
    }
}

impl<F: FieldScalar> LieAlgebra<F> {
    pub fn new(rs: Arc<RootSystem>) -> Self {
        let nr = rs.num_roots();
        let rank = rs.rank();
        let dim = nr + rank;
        let coroots: Vec<Vec<F>> =
            (0..nr).map(|a| rs.coroot_coeffs(a).into_iter().map(F::from_int).collect()).collect();
        let mut table = vec![Vec::new(); dim * dim];
        for a in 0..nr {
            for b in 0..nr {
                let entry = if b == rs.neg(a) {
                    coroots[a]
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(i, &c)| (nr + i, c))
                        .collect()
                } else {
                    match rs.add(a, b) {
                        Some(s) => {
                            let n = F::from_int(rs.n(a, b));
                            if n.is_zero() {
                                Vec::new()
                            } else {
                                vec![(s, n)]
                            }
                        }
                        None => Vec::new(),
                    }
                };
                table[a * dim + b] = entry;
            }
            for i in 0..rank {
                let p = F::from_int(rs.pairing_simple(a, i));
                if !p.is_zero() {
                    // [h_i, e_α] = ⟨α, α_i∨⟩ e_α
                    table[(nr + i) * dim + a] = vec![(a, p)];
                    table[a * dim + nr + i] = vec![(a, -p)];
                }
            }
        }
        LieAlgebra { id: NEXT_ID.fetch_add(1, Ordering::Relaxed), rs, dim, table, coroots }
    }

    /// The Chevalley algebra e8 over `F`.
    pub fn e8() -> Self {
        Self::new(Arc::new(RootSystem::build(RootSystemType::E8)))
    }

    /// The Chevalley algebra f4 over `F`.
    pub fn f4() -> Self {
        Self::new(Arc::new(RootSystem::build(RootSystemType::F4)))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn root_system_arc(&self) -> Arc<RootSystem> {
        Arc::clone(&self.rs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rs.rank()
    }

    pub fn num_roots(&self) -> usize {
        self.rs.num_roots()
    }

    /// Basis index of `h_i` (0-based `i`).
    pub fn h_index(&self, i: usize) -> usize {
        self.rs.num_roots() + i
    }

    pub fn is_root_index(&self, k: usize) -> bool {
        k < self.rs.num_roots()
    }

    pub fn element(&self, coeffs: Vec<F>) -> Result<LieElement<F>> {
        if coeffs.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: coeffs.len() });
        }
        Ok(LieElement { algebra_id: self.id, coeffs })
    }

    pub fn zero(&self) -> LieElement<F> {
        LieElement { algebra_id: self.id, coeffs: vec![F::zero(); self.dim] }
    }

    pub fn basis_element(&self, k: usize) -> LieElement<F> {
        let mut c = vec![F::zero(); self.dim];
        c[k] = F::one();
        LieElement { algebra_id: self.id, coeffs: c }
    }

    /// `e_α` for the root with index `a`.
    pub fn e(&self, a: usize) -> LieElement<F> {
        self.basis_element(a)
    }

    /// `h_i` for the i-th simple coroot (0-based).
    pub fn h(&self, i: usize) -> LieElement<F> {
        self.basis_element(self.h_index(i))
    }

    /// `h_α = [e_α, e_{−α}]`, expressed over the simple coroots.
    pub fn coroot(&self, a: usize) -> LieElement<F> {
        let mut c = vec![F::zero(); self.dim];
        c[self.rs.num_roots()..].copy_from_slice(&self.coroots[a]);
        LieElement { algebra_id: self.id, coeffs: c }
    }

    /// Label of a basis vector: `e:00010000` or `h:3` (1-based).
    pub fn basis_label(&self, k: usize) -> String {
        if k < self.rs.num_roots() {
            format!("e:{}", self.rs.root(k).label())
        } else {
            format!("h:{}", k - self.rs.num_roots() + 1)
        }
    }

    pub fn basis_index(&self, label: &str) -> Result<usize> {
        if let Some(r) = label.strip_prefix("e:") {
            return self.rs.index_of_label(r);
        }
        if let Some(i) = label.strip_prefix("h:") {
            let i: usize = i.parse().map_err(|_| Error::Parse(format!("bad basis label {label:?}")))?;
            if (1..=self.rank()).contains(&i) {
                return Ok(self.h_index(i - 1));
            }
        }
        Err(Error::Parse(format!("bad basis label {label:?}")))
    }

    fn check(&self, x: &LieElement<F>) -> Result<()> {
        if x.algebra_id != self.id {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    /// `[b_i, b_j]` in sparse form.
    pub fn basis_bracket(&self, i: usize, j: usize) -> &[(usize, F)] {
        &self.table[i * self.dim + j]
    }

    /// Bracket of raw coefficient vectors.
    pub fn bracket_vec(&self, x: &[F], y: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        let ynz: Vec<(usize, F)> = y.iter().copied().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        for (i, &a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let row = &self.table[i * self.dim..(i + 1) * self.dim];
            for &(j, b) in &ynz {
                let ab = a * b;
                for &(k, c) in &row[j] {
                    out[k] += ab * c;
                }
            }
        }
        out
    }

    /// `[b_i, v]` for a basis vector `b_i`.
    pub fn ad_basis_apply(&self, i: usize, v: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        let row = &self.table[i * self.dim..(i + 1) * self.dim];
        for (j, &b) in v.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            for &(k, c) in &row[j] {
                out[k] += b * c;
            }
        }
        out
    }

    pub fn bracket(&self, x: &LieElement<F>, y: &LieElement<F>) -> Result<LieElement<F>> {
        self.check(x)?;
        self.check(y)?;
        Ok(LieElement { algebra_id: self.id, coeffs: self.bracket_vec(&x.coeffs, &y.coeffs) })
    }

    /// Matrix of `ad x = [x, −]` in the fixed basis (acting on columns).
    pub fn ad_matrix_vec(&self, x: &[F]) -> Matrix<F> {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (i, &a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for j in 0..self.dim {
                for &(k, c) in &self.table[i * self.dim + j] {
                    m[(k, j)] += a * c;
                }
            }
        }
        m
    }

    pub fn ad_matrix(&self, x: &LieElement<F>) -> Result<Matrix<F>> {
        self.check(x)?;
        Ok(self.ad_matrix_vec(&x.coeffs))
    }

    /// Span of `vectors` wrapped as a subspace of this algebra (not closed).
    pub fn span(&self, vectors: &[LieElement<F>]) -> Result<SubalgebraBasis<F>> {
        for v in vectors {
            self.check(v)?;
        }
        Ok(SubalgebraBasis {
            algebra_id: self.id,
            space: Subspace::spanned_by(self.dim, vectors.iter().map(|v| v.coeffs.clone())),
        })
    }

    pub fn whole(&self) -> SubalgebraBasis<F> {
        SubalgebraBasis { algebra_id: self.id, space: Subspace::full(self.dim) }
    }

    /// The standard Cartan subalgebra spanned by `h_1..h_rank`.
    pub fn cartan(&self) -> SubalgebraBasis<F> {
        let hs: Vec<LieElement<F>> = (0..self.rank()).map(|i| self.h(i)).collect();
        self.span(&hs).expect("same algebra")
    }

    pub fn wrap(&self, space: Subspace<F>) -> Result<SubalgebraBasis<F>> {
        if space.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: space.ambient_dim() });
        }
        Ok(SubalgebraBasis { algebra_id: self.id, space })
    }

    /// Smallest bracket-closed subspace containing `seed`.
    pub fn close_under_bracket(&self, seed: &[LieElement<F>]) -> Result<SubalgebraBasis<F>> {
        let mut space = Subspace::zero(self.dim);
        let mut elems: Vec<Vec<F>> = Vec::new();
        for s in seed {
            self.check(s)?;
            let mut r = s.coeffs.clone();
            space.reduce(&mut r);
            if space.insert(s.coeffs.clone()) {
                elems.push(r);
            }
        }
        let mut i = 0;
        while i < elems.len() {
            for j in 0..i {
                let b = self.bracket_vec(&elems[i], &elems[j]);
                let mut r = b.clone();
                space.reduce(&mut r);
                if r.iter().any(|x| !x.is_zero()) {
                    space.insert(b);
                    elems.push(r);
                }
            }
            i += 1;
        }
        Ok(SubalgebraBasis { algebra_id: self.id, space })
    }

    /// `[A, B]` for two subspaces.
    pub fn bracket_spaces(&self, a: &SubalgebraBasis<F>, b: &SubalgebraBasis<F>) -> Result<SubalgebraBasis<F>> {
        if a.algebra_id != self.id || b.algebra_id != self.id {
            return Err(Error::AlgebraMismatch);
        }
        let mut space = Subspace::zero(self.dim);
        let same = std::ptr::eq(a, b) || a.space == b.space;
        for (i, x) in a.space.basis().iter().enumerate() {
            let ad = self.ad_matrix_vec(x);
            let start = if same { i + 1 } else { 0 };
            for y in &b.space.basis()[start..] {
                space.insert(ad.mul_vec(y));
            }
        }
        Ok(SubalgebraBasis { algebra_id: self.id, space })
    }

    /// `{y : [y, s] = 0 for every s}`; the generators of a subalgebra suffice.
    pub fn centralizer(&self, elements: &[LieElement<F>]) -> Result<SubalgebraBasis<F>> {
        let mut rows = Subspace::zero(self.dim);
        for s in elements {
            self.check(s)?;
            let ad = self.ad_matrix_vec(&s.coeffs);
            for i in 0..self.dim {
                if rows.is_full() {
                    break;
                }
                let r = ad.row(i);
                if r.iter().any(|x| !x.is_zero()) {
                    rows.insert(r.to_vec());
                }
            }
        }
        let kernel = kernel_of_rows(self.dim, &rows);
        Ok(SubalgebraBasis { algebra_id: self.id, space: kernel })
    }

    pub fn centralizer_of_space(&self, s: &SubalgebraBasis<F>) -> Result<SubalgebraBasis<F>> {
        self.centralizer(&s.elements())
    }

    /// `{y : [y, s] ∈ S for every s ∈ S}`.
    pub fn normalizer(&self, s: &SubalgebraBasis<F>) -> Result<SubalgebraBasis<F>> {
        if s.algebra_id != self.id {
            return Err(Error::AlgebraMismatch);
        }
        let ann = s.space.annihilator();
        if ann.is_empty() {
            return Ok(self.whole());
        }
        // Q·v = 0 ⇔ v ∈ S; constraint rows are Q·ad(s_i)
        let qt = Matrix::from_cols(self.dim, &ann);
        let target = self.dim - s.dim();
        let mut rows = Subspace::zero(self.dim);
        'outer: for x in s.space.basis() {
            let adt = self.ad_matrix_vec(x).transpose();
            let c = adt.mul(&qt);
            for k in 0..c.cols() {
                let r = c.col(k);
                if r.iter().any(|x| !x.is_zero()) {
                    rows.insert(r);
                }
                if rows.dim() == target {
                    break 'outer;
                }
            }
        }
        Ok(SubalgebraBasis { algebra_id: self.id, space: kernel_of_rows(self.dim, &rows) })
    }

    /// `S ⊇ [S,S] ⊇ …` until the series stabilizes (the last term is
    /// repeated only if it is nonzero and perfect).
    pub fn derived_series(&self, s: &SubalgebraBasis<F>) -> Result<Vec<SubalgebraBasis<F>>> {
        let mut series = vec![s.clone()];
        loop {
            let last = series.last().expect("nonempty");
            if last.dim() == 0 {
                break;
            }
            let next = self.bracket_spaces(last, last)?;
            let stable = next.dim() == last.dim();
            series.push(next);
            if stable {
                break;
            }
        }
        Ok(series)
    }

    /// JSON map from basis label to scalar (zero coefficients omitted).
    pub fn element_to_json(&self, x: &LieElement<F>) -> Value {
        let mut map = serde_json::Map::new();
        for (k, c) in x.coeffs.iter().enumerate() {
            if !c.is_zero() {
                map.insert(self.basis_label(k), serde_json::to_value(c).expect("scalar serializes"));
            }
        }
        Value::Object(map)
    }

    pub fn element_from_json(&self, v: &Value) -> Result<LieElement<F>> {
        let map = v.as_object().ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
        let mut c = vec![F::zero(); self.dim];
        for (label, val) in map {
            let k = self.basis_index(label)?;
            c[k] = serde_json::from_value(val.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        }
        self.element(c)
    }
}

/// Kernel of the linear map whose row space is `rows`.
fn kernel_of_rows<F: FieldScalar>(dim: usize, rows: &Subspace<F>) -> Subspace<F> {
    if rows.dim() == 0 {
        return Subspace::full(dim);
    }
    Subspace::spanned_by(dim, rows.to_matrix().nullspace())
}

/// A subspace of a Lie algebra held in echelon form.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis<F> {
    algebra_id: u64,
    space: Subspace<F>,
}

impl<F: FieldScalar> PartialEq for SubalgebraBasis<F> {
    fn eq(&self, other: &Self) -> bool {
        self.algebra_id == other.algebra_id && self.space == other.space
    }
}

impl<F: FieldScalar> Eq for SubalgebraBasis<F> {}

impl<F: FieldScalar> SubalgebraBasis<F> {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &Subspace<F> {
        &self.space
    }

    pub fn algebra_id(&self) -> u64 {
        self.algebra_id
    }

    pub fn elements(&self) -> Vec<LieElement<F>> {
        self.space.basis().iter().map(|v| LieElement { algebra_id: self.algebra_id, coeffs: v.clone() }).collect()
    }

    pub fn contains(&self, x: &LieElement<F>) -> bool {
        x.algebra_id == self.algebra_id && self.space.contains(&x.coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Gf3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_element<F: FieldScalar>(l: &LieAlgebra<F>, rng: &mut ChaCha8Rng, terms: usize) -> LieElement<F> {
        let mut c = vec![F::zero(); l.dim()];
        for _ in 0..terms {
            c[rng.gen_range(0..l.dim())] = F::random(rng);
        }
        l.element(c).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(LieAlgebra::<Gf3>::e8().dim(), 248);
        assert_eq!(LieAlgebra::<Gf3>::f4().dim(), 52);
    }

    #[test]
    fn bracket_examples() {
        let l = LieAlgebra::<Gf3>::e8();
        let a1 = l.root_system().index_of_label("10000000").unwrap();
        let na1 = l.root_system().neg(a1);
        assert!(l.bracket(&l.e(a1), &l.e(a1)).unwrap().is_zero());
        assert_eq!(l.bracket(&l.e(a1), &l.e(na1)).unwrap(), l.h(0));
        assert_eq!(l.bracket(&l.h(0), &l.e(a1)).unwrap(), l.e(a1).scaled(-Gf3::ONE));
        let other = LieAlgebra::<Gf3>::e8();
        assert_eq!(l.bracket(&l.e(a1), &other.e(a1)), Err(Error::AlgebraMismatch));
    }

    #[test]
    fn jacobi_f4_random() {
        let l = LieAlgebra::<Gf3>::f4();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = random_element(&l, &mut rng, 52);
            let y = random_element(&l, &mut rng, 52);
            let z = random_element(&l, &mut rng, 52);
            let j = l
                .bracket(&x, &l.bracket(&y, &z).unwrap())
                .unwrap()
                .add(&l.bracket(&y, &l.bracket(&z, &x).unwrap()).unwrap())
                .add(&l.bracket(&z, &l.bracket(&x, &y).unwrap()).unwrap());
            assert!(j.is_zero());
        }
    }

    #[test]
    fn ad_matrix_examples() {
        let l = LieAlgebra::<Gf3>::e8();
        assert!(l.ad_matrix(&l.zero()).unwrap().is_zero());
        let a = l.root_system().index_of_label("01121000").unwrap();
        let ad = l.ad_matrix(&l.e(a)).unwrap();
        assert!(!ad.mul(&ad).is_zero());
        assert!(ad.mul(&ad).mul(&ad).is_zero());
        let h = l.h(3).add(&l.h(5));
        assert!(l.ad_matrix(&h).unwrap().is_diagonal());
    }

    #[test]
    fn closure_examples() {
        let l = LieAlgebra::<Gf3>::e8();
        assert_eq!(l.close_under_bracket(&[l.h(0)]).unwrap().dim(), 1);
        let a1 = l.root_system().index_of_label("10000000").unwrap();
        let sl2 = l.close_under_bracket(&[l.e(a1), l.e(l.root_system().neg(a1))]).unwrap();
        assert_eq!(sl2.dim(), 3);
        let series = l.derived_series(&sl2).unwrap();
        assert_eq!(series[1].dim(), 3);
        let ab = l.derived_series(&l.cartan()).unwrap();
        assert_eq!(ab.iter().map(|s| s.dim()).collect::<Vec<_>>(), vec![8, 0]);
        // all of e8 from its simple root vectors
        let rs = l.root_system();
        let gens: Vec<_> = rs.simple_indices().iter().flat_map(|&i| [l.e(i), l.e(rs.neg(i))]).collect();
        assert_eq!(l.close_under_bracket(&gens).unwrap().dim(), 248);
    }

    #[test]
    fn centralizer_and_normalizer_examples() {
        let l = LieAlgebra::<Gf3>::e8();
        assert_eq!(l.centralizer(&[l.zero()]).unwrap().dim(), 248);
        let hr = l.root_system().highest_root();
        // brute-force oracle: ad e_α̃ kills e_β unless β + α̃ is a root or β = −α̃;
        // on the Cartan, h ↦ −α̃(h) e_α̃ has rank one
        let rs = l.root_system();
        let moved = (0..rs.num_roots()).filter(|&b| rs.add(hr, b).is_some() || b == rs.neg(hr)).count();
        let expected = 248 - (moved + 1);
        assert_eq!(expected, 190);
        assert_eq!(l.centralizer(&[l.e(hr)]).unwrap().dim(), expected);
        assert_eq!(l.normalizer(&l.whole()).unwrap().dim(), 248);
        let nc = l.normalizer(&l.cartan()).unwrap();
        assert!(nc.dim() >= 8);
        assert!(nc.space().contains_subspace(l.cartan().space()));
    }

    #[test]
    fn json_roundtrip() {
        let l = LieAlgebra::<Gf3>::e8();
        let a = l.root_system().index_of_label("00010000").unwrap();
        let x = l.e(a).add(&l.h(2).scaled(Gf3::TWO));
        let j = l.element_to_json(&x);
        assert_eq!(j["e:00010000"], 1);
        assert_eq!(j["h:3"], 2);
        assert_eq!(l.element_from_json(&j).unwrap(), x);
    }
}
