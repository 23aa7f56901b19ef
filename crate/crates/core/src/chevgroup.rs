//! Root subgroups, torus and Weyl elements of the embedded F4, acting on the
//! 248-dimensional adjoint module of E8.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::{
    build_f4_basis, coroot_exponents, load_embedding, torus_row_exponents, verify_f4_relations,
    verify_f4_relations_with_map, EmbeddingTable, F4Basis,
};
use crate::error::{Error, Result};
use crate::gf::{FieldScalar, Matrix, Subspace};
use crate::liealg::{LieAlgebra, SubalgebraBasis};
use crate::rootsys::{parse_label, RootSystem};

/// `x(β, t)` for an F4 root label (possibly negative).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordFactor<F> {
    pub root: String,
    pub t: F,
}

impl<F: FieldScalar> fmt::Display for WordFactor<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x({},{})", self.root, self.t)
    }
}

/// Parses a field element written as an integer or in the field's display form (`1+2i`).
pub fn parse_scalar<F: FieldScalar>(s: &str) -> Result<F> {
    let s = s.trim();
    if let Ok(n) = s.parse::<i64>() {
        return Ok(F::from_int(n));
    }
    F::elements()
        .iter()
        .copied()
        .find(|x| x.to_string() == s)
        .ok_or_else(|| Error::Parse(format!("bad {} scalar {s:?}", F::NAME)))
}

/// Parses `x(1000,1)*x(-0010,2)`; the empty string is the empty word.
pub fn parse_word<F: FieldScalar>(text: &str) -> Result<Vec<WordFactor<F>>> {
    let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split('*')
        .map(|f| {
            let inner = f
                .strip_prefix("x(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("bad factor {f:?}")))?;
            let (root, t) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("bad factor {f:?}")))?;
            parse_label(root)?;
            Ok(WordFactor { root: root.to_string(), t: parse_scalar(t)? })
        })
        .collect()
}

pub fn format_word<F: FieldScalar>(word: &[WordFactor<F>]) -> String {
    word.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("*")
}

/// An invertible matrix with an optional word it was built from.
#[derive(Clone, Debug)]
pub struct GroupElement<F: FieldScalar> {
    matrix: Matrix<F>,
    word: Option<Vec<WordFactor<F>>>,
}

/// Equality of the matrices; provenance words are ignored.
impl<F: FieldScalar> PartialEq for GroupElement<F> {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl<F: FieldScalar> Eq for GroupElement<F> {}

impl<F: FieldScalar> GroupElement<F> {
    pub fn identity(n: usize) -> Self {
        GroupElement { matrix: Matrix::identity(n), word: Some(Vec::new()) }
    }

    pub fn from_matrix(matrix: Matrix<F>) -> Self {
        GroupElement { matrix, word: None }
    }

    pub fn matrix(&self) -> &Matrix<F> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<F> {
        self.matrix
    }

    pub fn word(&self) -> Option<&[WordFactor<F>]> {
        self.word.as_deref()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let word = match (&self.word, &other.word) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        GroupElement { matrix: self.matrix.mul(&other.matrix), word }
    }

    pub fn inverse(&self) -> Result<Self> {
        let word = self.word.as_ref().map(|w| {
            w.iter().rev().map(|f| WordFactor { root: f.root.clone(), t: -f.t }).collect()
        });
        Ok(GroupElement { matrix: self.matrix.inverse().ok_or(Error::Singular)?, word })
    }

    pub fn pow(&self, e: u64) -> Self {
        GroupElement { matrix: self.matrix.pow(e), word: None }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }
}

/// Nonzero entries `(row, col, c)` of a sparse square matrix.
type SparseEntries<F> = Vec<(usize, usize, F)>;

fn sparse_mul_vec<F: FieldScalar>(a: &SparseEntries<F>, v: &[F]) -> Vec<F> {
    let mut out = vec![F::zero(); v.len()];
    for &(k, j, c) in a {
        let x = v[j];
        if !x.is_zero() {
            out[k] += c * x;
        }
    }
    out
}

fn sparse_mul_mat<F: FieldScalar>(a: &SparseEntries<F>, m: &Matrix<F>) -> Matrix<F> {
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for &(k, j, c) in a {
        let src = m.row(j).to_vec();
        F::axpy(out.row_mut(k), c, &src);
    }
    out
}

/// The F4 of the bundled (or a supplied) table, realized inside E8 over `F`.
#[derive(Debug)]
pub struct EmbeddedF4<F> {
    e8: LieAlgebra<F>,
    table: EmbeddingTable,
    basis: F4Basis<F>,
    span: SubalgebraBasis<F>,
    /// `ad e_α` for every E8 root
    ad_e: Vec<SparseEntries<F>>,
    /// `(E8 root, coefficient)` for every F4 root
    rows: Vec<Vec<(usize, F)>>,
    half: F,
}

impl<F: FieldScalar> EmbeddedF4<F> {
    pub fn standard() -> Self {
        Self::new(load_embedding()).expect("bundled embedding is well formed")
    }

    pub fn new(table: EmbeddingTable) -> Result<Self> {
        let e8 = LieAlgebra::<F>::e8();
        let basis = build_f4_basis(&table, &e8)?;
        let span = basis.span(&e8)?;
        let n = e8.dim();
        let ad_e = (0..e8.num_roots())
            .map(|a| {
                let mut ent = Vec::new();
                for j in 0..n {
                    for &(k, c) in e8.basis_bracket(a, j) {
                        ent.push((k, j, c));
                    }
                }
                ent
            })
            .collect();
        let f4 = basis.root_system();
        let rows = (0..f4.num_roots())
            .map(|b| {
                basis.e(b).coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(a, &c)| (a, c)).collect()
            })
            .collect();
        let half = F::from_int(2).inv().ok_or(Error::DivisionByZero)?;
        Ok(EmbeddedF4 { e8, table, basis, span, ad_e, rows, half })
    }

    pub fn e8(&self) -> &LieAlgebra<F> {
        &self.e8
    }

    pub fn basis(&self) -> &F4Basis<F> {
        &self.basis
    }

    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }

    pub fn f4(&self) -> &RootSystem {
        self.basis.root_system()
    }

    /// The 52-dimensional span of the embedded f4.
    pub fn span(&self) -> &SubalgebraBasis<F> {
        &self.span
    }

    pub fn dim(&self) -> usize {
        self.e8.dim()
    }

    /// Sparse `ad e_α` for an E8 root.
    pub fn ad_root(&self, a: usize) -> &[(usize, usize, F)] {
        &self.ad_e[a]
    }

    /// `(E8 root, coefficient)` support of `e_β` for an F4 root.
    pub fn row(&self, b: usize) -> &[(usize, F)] {
        &self.rows[b]
    }

    /// `exp(t ad e_α) = I + t ad e_α + (t²/2)(ad e_α)²`.
    pub fn exp_root(&self, a: usize, t: F) -> GroupElement<F> {
        let mut m = Matrix::identity(self.dim());
        self.exp_root_left(a, t, &mut m);
        GroupElement::from_matrix(m)
    }

    /// `m ← exp(t ad e_α) m`.
    pub fn exp_root_left(&self, a: usize, t: F, m: &mut Matrix<F>) {
        if t.is_zero() {
            return;
        }
        let d1 = sparse_mul_mat(&self.ad_e[a], m);
        let d2 = sparse_mul_mat(&self.ad_e[a], &d1);
        m.add_scaled(t, &d1);
        m.add_scaled(t * t * self.half, &d2);
    }

    /// `v ← exp(t ad e_α) v`.
    pub fn exp_root_apply(&self, a: usize, t: F, v: &mut [F]) {
        if t.is_zero() {
            return;
        }
        let d1 = sparse_mul_vec(&self.ad_e[a], v);
        let d2 = sparse_mul_vec(&self.ad_e[a], &d1);
        F::axpy(v, t, &d1);
        F::axpy(v, t * t * self.half, &d2);
    }

    pub fn f4_index(&self, label: &str) -> Result<usize> {
        self.f4().index_of_label(label)
    }

    /// `v ← x_β(t) v`, the product over the row's commuting factors.
    pub fn x_f4_apply(&self, b: usize, t: F, v: &mut [F]) {
        for &(a, c) in &self.rows[b] {
            self.exp_root_apply(a, c * t, v);
        }
    }

    pub fn x_f4_left(&self, b: usize, t: F, m: &mut Matrix<F>) {
        for &(a, c) in &self.rows[b] {
            self.exp_root_left(a, c * t, m);
        }
    }

    pub fn x_f4(&self, b: usize, t: F) -> GroupElement<F> {
        let mut m = Matrix::identity(self.dim());
        self.x_f4_left(b, t, &mut m);
        GroupElement { matrix: m, word: Some(vec![WordFactor { root: self.f4().root(b).label(), t }]) }
    }

    /// The product of a word, accumulated by left multiplication from the right end.
    pub fn element_from_word(&self, word: &[WordFactor<F>]) -> Result<GroupElement<F>> {
        let idx: Vec<usize> = word.iter().map(|w| self.f4_index(&w.root)).collect::<Result<_>>()?;
        let mut m = Matrix::identity(self.dim());
        for (w, &b) in word.iter().zip(&idx).rev() {
            self.x_f4_left(b, w.t, &mut m);
        }
        Ok(GroupElement { matrix: m, word: Some(word.to_vec()) })
    }

    /// `n_β(t) = x_β(t) x_{−β}(−t⁻¹) x_β(t)`.
    pub fn n_beta(&self, b: usize, t: F) -> Result<GroupElement<F>> {
        let ti = t.inv().ok_or(Error::DivisionByZero)?;
        let lab = self.f4().root(b).label();
        let nlab = self.f4().root(self.f4().neg(b)).label();
        self.element_from_word(&[
            WordFactor { root: lab.clone(), t },
            WordFactor { root: nlab, t: -ti },
            WordFactor { root: lab, t },
        ])
    }

    /// `(n_β(t), h_β(t) = n_β(t) n_β(−1))`.
    pub fn n_and_h(&self, b: usize, t: F) -> Result<(GroupElement<F>, GroupElement<F>)> {
        let n = self.n_beta(b, t)?;
        let h = n.mul(&self.n_beta(b, -F::one())?);
        Ok((n, h))
    }

    /// The diagonal matrix of `Π_j h_{α_j}(t^{k_j})` (E8 simple coroots α_j).
    pub fn e8_torus(&self, exponents: &[i64], t: F) -> Result<Matrix<F>> {
        let rs = self.e8.root_system();
        let mut m = Matrix::identity(self.dim());
        for g in 0..rs.num_roots() {
            let mut e: i64 = 0;
            for (j, &k) in exponents.iter().enumerate() {
                e += k * rs.pairing_simple(g, j);
            }
            m[(g, g)] = field_pow(t, e)?;
        }
        Ok(m)
    }

    pub fn random_word<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Vec<WordFactor<F>> {
        (0..len)
            .map(|_| {
                let b = rng.gen_range(0..self.f4().num_roots());
                WordFactor { root: self.f4().root(b).label(), t: F::random_nonzero(rng) }
            })
            .collect()
    }

    /// A product of `len` random root elements, determined by `seed`.
    pub fn random_f4_element(&self, seed: u64, len: usize) -> GroupElement<F> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = self.random_word(&mut rng, len);
        self.element_from_word(&w).expect("labels come from the root system")
    }

    /// Does `g` map the 52-span onto itself?
    pub fn stabilizes_span(&self, g: &GroupElement<F>) -> bool {
        let sp = self.span.space();
        sp.basis().iter().all(|v| sp.contains(&g.matrix.mul_vec(v)))
    }

    /// The action on the 52-span, in the coordinates of its echelon basis.
    pub fn restrict_to_span(&self, g: &Matrix<F>) -> Result<Matrix<F>> {
        restrict(self.span.space(), g)
    }
}

/// Matrix of `g` on an invariant subspace, in echelon-basis coordinates.
pub fn restrict<F: FieldScalar>(sp: &Subspace<F>, g: &Matrix<F>) -> Result<Matrix<F>> {
    let cols: Vec<Vec<F>> = sp
        .basis()
        .iter()
        .map(|v| sp.coords(&g.mul_vec(v)).ok_or_else(|| Error::DecompositionFailure("subspace is not invariant".into())))
        .collect::<Result<_>>()?;
    Ok(Matrix::from_cols(sp.dim(), &cols))
}

/// `t^e` for any integer `e` (negative powers need `t ≠ 0`).
pub fn field_pow<F: FieldScalar>(t: F, e: i64) -> Result<F> {
    if e >= 0 {
        Ok(t.pow(e as u64))
    } else {
        Ok(t.inv().ok_or(Error::DivisionByZero)?.pow(e.unsigned_abs()))
    }
}

/// `k` with `primitive^k = x`.
pub fn discrete_log<F: FieldScalar>(x: F) -> Option<u64> {
    let g = F::primitive();
    let mut acc = F::one();
    for k in 0..F::ORDER as u64 - 1 {
        if acc == x {
            return Some(k);
        }
        acc *= g;
    }
    None
}

/// One transcribed torus line set against the independently derived one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusLineCheck {
    pub f4_root: String,
    /// `k` with `[e_β, e_{−β}] = Σ k_j h_{α_j}`
    pub derived_exponents: Vec<i64>,
    /// the same, read off the diagonal of `n_β(t) n_β(−1)` modulo `|F*|`
    pub group_exponents_mod: Vec<i64>,
    pub modulus: i64,
    pub transcribed_exponents: Vec<i64>,
    pub unreadable_factors: Vec<String>,
    pub diagonal: bool,
    /// the transcribed torus element equals the derived one on all of L(E8)
    pub matrix_match: bool,
    pub agrees: bool,
    pub note: String,
}

impl TorusLineCheck {
    /// The derived exponents reproduce the group-theoretic torus element.
    pub fn consistent(&self) -> bool {
        self.diagonal && self.derived_exponents.iter().zip(&self.group_exponents_mod).all(|(d, k)| d.rem_euclid(self.modulus) == *k)
    }
}

/// Compares every transcribed torus line with `h_β(t)` built from `n_β`.
pub fn torus_cross_check<F: FieldScalar>(g: &EmbeddedF4<F>) -> Result<Vec<TorusLineCheck>> {
    let rs = g.e8.root_system();
    let t = F::primitive();
    let modulus = F::ORDER as i64 - 1;
    let cartan = rs.cartan_matrix();
    let inv = integer_inverse(&cartan).ok_or(Error::Singular)?;
    let mut out = Vec::new();
    for row in &g.table.torus_rows {
        let b = g.f4_index(&row.f4_root)?;
        let (_, h) = g.n_and_h(b, t)?;
        let diagonal = h.matrix.is_diagonal();
        // eigenvalue on e_{α_i} is t^{(C k)_i}
        let mut ck = Vec::new();
        for i in rs.simple_indices() {
            let lg = discrete_log(h.matrix[(i, i)]).ok_or(Error::Singular)?;
            ck.push(lg as i64);
        }
        let group_k: Vec<i64> = (0..8)
            .map(|r| (0..8).map(|c| inv[r][c] * ck[c]).sum::<i64>().rem_euclid(modulus))
            .collect();
        let derived = coroot_exponents(&g.table, &row.f4_root)?;
        let (transcribed, bad) = torus_row_exponents(row);
        let consistent = derived.iter().zip(&group_k).all(|(d, k)| d.rem_euclid(modulus) == *k) && diagonal;
        let matrix_match = bad.is_empty() && g.e8_torus(&transcribed, t)? == *h.matrix();
        let agrees = consistent && matrix_match && transcribed == derived;
        let note = if agrees {
            "transcribed line agrees with the derived torus element".to_string()
        } else if !bad.is_empty() {
            let diffs: Vec<String> = derived
                .iter()
                .zip(&transcribed)
                .enumerate()
                .filter(|(_, (d, t))| d != t)
                .map(|(j, (d, t))| format!("{}: derived {d}, transcribed {t}", simple_label(j)))
                .collect();
            format!(
                "unreadable factor label(s) {:?}; corrected exponent vector {:?}; differences from the readable factors: {}",
                bad,
                derived,
                diffs.join("; ")
            )
        } else {
            format!("transcribed exponents {transcribed:?} differ from derived {derived:?}")
        };
        out.push(TorusLineCheck {
            f4_root: row.f4_root.clone(),
            derived_exponents: derived,
            group_exponents_mod: group_k,
            modulus,
            transcribed_exponents: transcribed,
            unreadable_factors: bad,
            diagonal,
            matrix_match,
            agrees,
            note,
        });
    }
    Ok(out)
}

fn simple_label(j: usize) -> String {
    (0..8).map(|i| if i == j { '1' } else { '0' }).collect()
}

/// Inverse of a unimodular integer matrix, by fraction-free elimination.
fn integer_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<i128> = r.iter().map(|&x| x as i128).collect();
            row.extend((0..n).map(|j| (i == j) as i128));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| a[r][c] != 0)?;
        a.swap(c, p);
        for r in 0..n {
            if r != c && a[r][c] != 0 {
                let (x, y) = (a[c][c], a[r][c]);
                for k in 0..2 * n {
                    a[r][k] = a[r][k] * x - a[c][k] * y;
                }
            }
        }
    }
    let mut out = vec![vec![0i64; n]; n];
    for r in 0..n {
        for k in 0..n {
            let v = a[r][n + k];
            if v % a[r][r] != 0 {
                return None;
            }
            out[r][k] = (v / a[r][r]) as i64;
        }
    }
    Some(out)
}

/// Something with root subgroups indexed by F4 roots acting on vectors, with
/// a regular semisimple element whose root values are known.
trait RootAction<F: FieldScalar> {
    fn apply(&self, rho: usize, t: F, v: &mut [F]);
    /// coefficient of the root vector of `rho` in `v`
    fn coeff(&self, v: &[F], rho: usize) -> F;
    fn regular(&self) -> &[F];
    fn root_value(&self, rho: usize) -> F;
}

struct AbstractF4<F> {
    alg: LieAlgebra<F>,
    half: F,
    h: Vec<F>,
    values: Vec<F>,
}

impl<F: FieldScalar> AbstractF4<F> {
    fn new(lambda: &[F]) -> Self {
        let alg = LieAlgebra::<F>::f4();
        let mut h = vec![F::zero(); alg.dim()];
        for (i, &l) in lambda.iter().enumerate() {
            h[alg.h_index(i)] = l;
        }
        let values = root_values(alg.root_system(), lambda, &(0..alg.num_roots()).collect::<Vec<_>>());
        AbstractF4 { half: F::from_int(2).inv().expect("odd characteristic"), alg, h, values }
    }
}

impl<F: FieldScalar> RootAction<F> for AbstractF4<F> {
    fn apply(&self, rho: usize, t: F, v: &mut [F]) {
        let d1 = self.alg.ad_basis_apply(rho, v);
        let d2 = self.alg.ad_basis_apply(rho, &d1);
        F::axpy(v, t, &d1);
        F::axpy(v, t * t * self.half, &d2);
    }
    fn coeff(&self, v: &[F], rho: usize) -> F {
        v[rho]
    }
    fn regular(&self) -> &[F] {
        &self.h
    }
    fn root_value(&self, rho: usize) -> F {
        self.values[rho]
    }
}

/// The embedded group, with the abstract root `ρ` realized as `x_{w[ρ]}`.
struct Embedded<'a, F> {
    g: &'a EmbeddedF4<F>,
    w: Vec<usize>,
    h: Vec<F>,
    values: Vec<F>,
    lead: Vec<(usize, F)>,
}

impl<'a, F: FieldScalar> Embedded<'a, F> {
    fn new(g: &'a EmbeddedF4<F>, w: Vec<usize>, lambda: &[F]) -> Self {
        let f4 = g.f4();
        let simple = f4.simple_indices();
        let mut h = vec![F::zero(); g.dim()];
        // the simple coroots of the relabelled system
        for (i, &l) in lambda.iter().enumerate() {
            F::axpy(&mut h, l, g.basis.coroot(w[simple[i]]).coeffs());
        }
        let values = root_values(f4, lambda, &(0..f4.num_roots()).collect::<Vec<_>>());
        let lead = w
            .iter()
            .map(|&b| {
                let (a, c) = g.rows[b][0];
                (a, c.inv().expect("nonzero"))
            })
            .collect();
        Embedded { g, w, h, values, lead }
    }
}

impl<F: FieldScalar> RootAction<F> for Embedded<'_, F> {
    fn apply(&self, rho: usize, t: F, v: &mut [F]) {
        self.g.x_f4_apply(self.w[rho], t, v);
    }
    fn coeff(&self, v: &[F], rho: usize) -> F {
        let (a, ci) = self.lead[rho];
        v[a] * ci
    }
    fn regular(&self) -> &[F] {
        &self.h
    }
    fn root_value(&self, rho: usize) -> F {
        self.values[rho]
    }
}

/// `ρ(H)` for `H = Σ λ_i h_i`.
fn root_values<F: FieldScalar>(rs: &RootSystem, lambda: &[F], roots: &[usize]) -> Vec<F> {
    roots
        .iter()
        .map(|&r| {
            lambda
                .iter()
                .enumerate()
                .fold(F::zero(), |acc, (i, &l)| acc + l * F::from_int(rs.pairing_simple(r, i)))
        })
        .collect()
}

/// First `λ ∈ F^4` (in element order) with `ρ(Σ λ_i h_i) ≠ 0` for every root.
fn regular_lambda<F: FieldScalar>(rs: &RootSystem) -> Option<Vec<F>> {
    let els = F::elements();
    let n = els.len();
    let all: Vec<usize> = (0..rs.num_roots()).collect();
    for code in 0..n.pow(4) {
        let lambda: Vec<F> = (0..4).map(|i| els[code / n.pow(i) % n]).collect();
        if root_values(rs, &lambda, &all).iter().all(|x| !x.is_zero()) {
            return Some(lambda);
        }
    }
    None
}

/// Writes a product of positive root elements as `Π x_ρ(c_ρ)` in height order,
/// by peeling its action on a regular semisimple element.
fn peel<F: FieldScalar, A: RootAction<F>>(act: &A, rs: &RootSystem, apply_g: impl Fn(&mut [F])) -> Result<Vec<F>> {
    let mut v = act.regular().to_vec();
    apply_g(&mut v);
    let mut coeffs = vec![F::zero(); rs.num_roots()];
    for rho in rs.positive_indices() {
        let c = act.coeff(&v, rho);
        if c.is_zero() {
            continue;
        }
        // x_ρ(c) H = H − c ρ(H) e_ρ + …
        let val = act.root_value(rho);
        let inv = val.inv().ok_or(Error::DivisionByZero)?;
        let cr = -c * inv;
        coeffs[rho] = cr;
        act.apply(rho, -cr, &mut v);
    }
    if v != act.regular() {
        return Err(Error::RelationFailure("element is not a product of positive root elements".into()));
    }
    Ok(coeffs)
}

/// Coefficients `m_{ab}` (a, b ≤ 3) with `f(s, t) = Σ m_{ab} s^a t^b` on all of `F²`.
fn fit_monomials<F: FieldScalar>(samples: &[(F, F, F)]) -> Result<Vec<Vec<F>>> {
    let rows: Vec<Vec<F>> = samples
        .iter()
        .map(|&(s, t, f)| {
            let mut r = Vec::with_capacity(17);
            for a in 0..4u64 {
                for b in 0..4u64 {
                    r.push(s.pow(a) * t.pow(b));
                }
            }
            r.push(f);
            r
        })
        .collect();
    let aug = Matrix::from_rows(17, &rows);
    let (r, piv) = aug.rref();
    if piv.contains(&16) {
        return Err(Error::RelationFailure("commutator coefficient is not a polynomial of degree ≤ 3".into()));
    }
    if piv.len() < 16 {
        return Err(Error::RelationFailure("too few sample points to separate monomials".into()));
    }
    let mut m = vec![vec![F::zero(); 4]; 4];
    for (k, &p) in piv.iter().enumerate() {
        m[p / 4][p % 4] = r[(k, 16)];
    }
    Ok(m)
}

/// One nonzero commutator term `x_{iβ+jγ}(C (−s)^i t^j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorTerm {
    pub i: u32,
    pub j: u32,
    pub root: String,
    /// constant for the embedded root elements
    pub c: String,
    /// constant in the standard Chevalley group of type F4
    pub c_standard: String,
    /// `C = ε_ρ ε_β^i ε_γ^j C_standard`
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorPair {
    pub beta: String,
    pub gamma: String,
    pub terms: Vec<CommutatorTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorBaseReport {
    pub base: Vec<String>,
    pub base_is_simple_system: bool,
    pub sign_character: Vec<i8>,
    pub trivial_sign_character: bool,
    pub commuting_pairs: usize,
    pub pairs: Vec<CommutatorPair>,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorReport {
    pub standard: CommutatorBaseReport,
    pub alternative: CommutatorBaseReport,
}

impl CommutatorReport {
    pub fn passed(&self) -> bool {
        self.standard.consistent && self.alternative.consistent && self.alternative.base_is_simple_system
    }
}

/// Extracts the commutator-formula constants of the embedded F4 for all
/// pairs of positive roots, for the standard base and for the alternative
/// base `(−0100, −1242, 1232, −0001)`.
pub fn commutator_check<F: FieldScalar>(g: &EmbeddedF4<F>) -> Result<CommutatorReport> {
    if F::ORDER < 9 {
        return Err(Error::RelationFailure("commutator constants need at least 9 scalars".into()));
    }
    let f4 = g.f4();
    let id: Vec<usize> = (0..f4.num_roots()).collect();
    let standard = commutators_for_base(g, id, vec!["1000".into(), "0100".into(), "0010".into(), "0001".into()])?;
    let alt_base: Vec<String> = ["-0100", "-1242", "1232", "-0001"].iter().map(|s| s.to_string()).collect();
    let w = base_map(f4, &alt_base)?;
    let alternative = match w {
        Some(w) => commutators_for_base(g, w, alt_base)?,
        None => CommutatorBaseReport {
            base: alt_base,
            base_is_simple_system: false,
            sign_character: Vec::new(),
            trivial_sign_character: false,
            commuting_pairs: 0,
            pairs: Vec::new(),
            consistent: false,
        },
    };
    Ok(CommutatorReport { standard, alternative })
}

/// The root map `ρ ↦ Σ ρ_i b_i` for a base `b`, if `b` is a simple system
/// with the same Cartan matrix.
pub fn base_map(rs: &RootSystem, base: &[String]) -> Result<Option<Vec<usize>>> {
    let b: Vec<usize> = base.iter().map(|l| rs.index_of_label(l)).collect::<Result<_>>()?;
    let cm = rs.cartan_matrix();
    for i in 0..b.len() {
        for j in 0..b.len() {
            if rs.pairing(b[i], b[j]) != cm[i][j] {
                return Ok(None);
            }
        }
    }
    let rank = rs.rank();
    let mut w = Vec::with_capacity(rs.num_roots());
    for r in rs.roots() {
        let mut c = vec![0i32; rank];
        for (i, &x) in r.coeffs().iter().enumerate() {
            for (k, y) in rs.root(b[i]).coeffs().iter().enumerate() {
                c[k] += x * y;
            }
        }
        match rs.index_of(&c) {
            Some(k) => w.push(k),
            None => return Ok(None),
        }
    }
    Ok(Some(w))
}

fn commutators_for_base<F: FieldScalar>(g: &EmbeddedF4<F>, w: Vec<usize>, base: Vec<String>) -> Result<CommutatorBaseReport> {
    let f4 = g.f4();
    let rel = verify_f4_relations_with_map(&g.basis, &g.e8, &w)?;
    let eps = rel.sign_character.clone();
    let lambda = regular_lambda::<F>(f4).ok_or_else(|| Error::RelationFailure("no regular element".into()))?;
    let abs = AbstractF4::<F>::new(&lambda);
    let emb = Embedded::new(g, w.clone(), &lambda);
    let points: Vec<(F, F)> =
        F::elements().iter().flat_map(|&s| F::elements().iter().map(move |&t| (s, t))).collect();
    let mut pairs = Vec::new();
    let mut commuting = 0;
    let mut consistent = true;
    for b in f4.positive_indices() {
        for c in f4.positive_indices() {
            if b == c {
                continue;
            }
            let emb_coeffs = commutator_coeffs(&emb, f4, b, c, &points)?;
            let abs_coeffs = commutator_coeffs(&abs, f4, b, c, &points)?;
            if f4.add(b, c).is_none() {
                commuting += 1;
                if emb_coeffs.iter().chain(&abs_coeffs).any(|m| m.iter().flatten().any(|x| !x.is_zero())) {
                    consistent = false;
                }
                continue;
            }
            let mut terms = Vec::new();
            for rho in f4.positive_indices() {
                let me = &emb_coeffs[rho];
                let ma = &abs_coeffs[rho];
                let ij = string_position(f4, b, c, rho);
                let nonzero = |m: &Vec<Vec<F>>| m.iter().flatten().any(|x| !x.is_zero());
                match ij {
                    None => {
                        if nonzero(me) || nonzero(ma) {
                            consistent = false;
                        }
                    }
                    Some((i, j)) => {
                        // only the monomial s^i t^j may occur
                        let single = |m: &Vec<Vec<F>>| {
                            m.iter().enumerate().all(|(a, r)| r.iter().enumerate().all(|(bb, x)| x.is_zero() || (a, bb) == (i, j)))
                        };
                        let sign = if i % 2 == 1 { -F::one() } else { F::one() };
                        let ce = me[i][j] * sign;
                        let ca = ma[i][j] * sign;
                        let mut factor = eps[rho] as i64;
                        if i % 2 == 1 {
                            factor *= eps[b] as i64;
                        }
                        if j % 2 == 1 {
                            factor *= eps[c] as i64;
                        }
                        let ok = single(me) && single(ma) && ce == ca * F::from_int(factor) && !ce.is_zero();
                        consistent &= ok;
                        terms.push(CommutatorTerm {
                            i: i as u32,
                            j: j as u32,
                            root: f4.root(w[rho]).label(),
                            c: ce.to_string(),
                            c_standard: ca.to_string(),
                            consistent: ok,
                        });
                    }
                }
            }
            pairs.push(CommutatorPair { beta: f4.root(w[b]).label(), gamma: f4.root(w[c]).label(), terms });
        }
    }
    Ok(CommutatorBaseReport {
        base,
        base_is_simple_system: true,
        trivial_sign_character: eps.iter().all(|&e| e == 1),
        sign_character: eps,
        commuting_pairs: commuting,
        pairs,
        consistent,
    })
}

/// `(i, j)` with `ρ = iβ + jγ`, `i, j > 0`.
fn string_position(rs: &RootSystem, b: usize, c: usize, rho: usize) -> Option<(usize, usize)> {
    for i in 1..4usize {
        for j in 1..4usize {
            let coeffs: Vec<i32> = rs
                .root(b)
                .coeffs()
                .iter()
                .zip(rs.root(c).coeffs())
                .map(|(x, y)| i as i32 * x + j as i32 * y)
                .collect();
            if coeffs == rs.root(rho).coeffs() {
                return Some((i, j));
            }
        }
    }
    None
}

/// For each positive root, the fitted polynomial giving its coefficient in
/// `[x_β(s), x_γ(t)] = x_β(s)⁻¹ x_γ(t)⁻¹ x_β(s) x_γ(t)`.
fn commutator_coeffs<F: FieldScalar, A: RootAction<F>>(
    act: &A,
    rs: &RootSystem,
    b: usize,
    c: usize,
    points: &[(F, F)],
) -> Result<Vec<Vec<Vec<F>>>> {
    let mut samples: Vec<Vec<(F, F, F)>> = vec![Vec::new(); rs.num_roots()];
    for &(s, t) in points {
        let coeffs = peel(act, rs, |v| {
            act.apply(c, t, v);
            act.apply(b, s, v);
            act.apply(c, -t, v);
            act.apply(b, -s, v);
        })?;
        for rho in rs.positive_indices() {
            samples[rho].push((s, t, coeffs[rho]));
        }
    }
    (0..rs.num_roots())
        .map(|rho| if samples[rho].is_empty() { Ok(vec![vec![F::zero(); 4]; 4]) } else { fit_monomials(&samples[rho]) })
        .collect()
}

/// The sign character of the bundled embedding (standard base).
pub fn sign_character<F: FieldScalar>(g: &EmbeddedF4<F>) -> Result<Vec<i8>> {
    Ok(verify_f4_relations(&g.basis, &g.e8)?.sign_character)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{Gf3, Gf9};

    #[test]
    fn words_parse_and_print() {
        let w: Vec<WordFactor<Gf3>> = parse_word("x(1000,1)*x(-0010,2)").unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].root, "-0010");
        assert_eq!(w[1].t, Gf3::TWO);
        assert_eq!(format_word(&w), "x(1000,1)*x(-0010,2)");
        assert!(parse_word::<Gf3>("").unwrap().is_empty());
        assert!(parse_word::<Gf3>("y(1000,1)").is_err());
        let w9: Vec<WordFactor<Gf9>> = parse_word("x(0001,1+2i)").unwrap();
        assert_eq!(w9[0].t, Gf9::new(1, 2));
    }

    #[test]
    fn exp_root_examples() {
        let g = EmbeddedF4::<Gf3>::standard();
        let rs = g.e8().root_system();
        let a = rs.index_of_label("00010000").unwrap();
        assert!(g.exp_root(a, Gf3::ZERO).is_identity());
        let p = g.exp_root(a, Gf3::ONE).mul(&g.exp_root(a, Gf3::ONE));
        assert_eq!(p, g.exp_root(a, Gf3::TWO));
        // fixes e_β when α + β is not a root and β ≠ −α
        let b = rs.index_of_label("00000100").unwrap();
        let m = g.exp_root(a, Gf3::ONE);
        assert_eq!(m.matrix().mul_vec(g.e8().e(b).coeffs()), g.e8().e(b).coeffs());
    }

    #[test]
    fn x_f4_examples() {
        let g = EmbeddedF4::<Gf3>::standard();
        let rs = g.e8().root_system();
        let b = g.f4_index("1000").unwrap();
        let expect = g
            .exp_root(rs.index_of_label("00010000").unwrap(), Gf3::ONE)
            .mul(&g.exp_root(rs.index_of_label("00000100").unwrap(), Gf3::ONE));
        assert_eq!(g.x_f4(b, Gf3::ONE).matrix(), expect.matrix());
        for b in 0..48 {
            let x = g.x_f4(b, Gf3::ONE);
            assert!(g.stabilizes_span(&x));
            assert!(x.pow(3).is_identity());
        }
    }

    #[test]
    fn empty_word_is_identity() {
        let g = EmbeddedF4::<Gf3>::standard();
        assert!(g.random_f4_element(1, 0).is_identity());
        assert_eq!(g.random_f4_element(5, 6), g.random_f4_element(5, 6));
    }

    #[test]
    fn torus_lines() {
        let g = EmbeddedF4::<Gf9>::standard();
        let checks = torus_cross_check(&g).unwrap();
        assert_eq!(checks.len(), 4);
        for c in &checks[..3] {
            assert!(c.agrees, "{c:?}");
        }
        assert!(!checks[3].agrees);
        assert_eq!(checks[3].derived_exponents, vec![1, 4, 3, 5, 3, 2, 1, 0]);
        assert_eq!(checks[3].group_exponents_mod, vec![1, 4, 3, 5, 3, 2, 1, 0]);
        let b = g.f4_index("0001").unwrap();
        let (_, h) = g.n_and_h(b, Gf9::primitive()).unwrap();
        assert_eq!(*h.matrix(), g.e8_torus(&[1, 4, 3, 5, 3, 2, 1, 0], Gf9::primitive()).unwrap());
    }

    #[test]
    fn integer_inverse_of_cartan() {
        let rs = RootSystem::build(crate::rootsys::RootSystemType::E8);
        let c = rs.cartan_matrix();
        let inv = integer_inverse(&c).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let x: i64 = (0..8).map(|k| c[i][k] * inv[k][j]).sum();
                assert_eq!(x, (i == j) as i64);
            }
        }
    }

    #[test]
    fn abstract_commutators_match_structure_constants() {
        // to first order the commutator is exp(st ad [e_β, e_γ])
        let rs = RootSystem::build(crate::rootsys::RootSystemType::F4);
        let lambda = regular_lambda::<Gf9>(&rs).unwrap();
        let abs = AbstractF4::<Gf9>::new(&lambda);
        let points: Vec<(Gf9, Gf9)> =
            Gf9::elements().iter().flat_map(|&s| Gf9::elements().iter().map(move |&t| (s, t))).collect();
        let b = rs.index_of_label("0100").unwrap();
        let c = rs.index_of_label("0010").unwrap();
        let s = rs.add(b, c).unwrap();
        let m = commutator_coeffs(&abs, &rs, b, c, &points).unwrap();
        assert_eq!(m[s][1][1], Gf9::from_int(rs.n(b, c)));
    }

    #[test]
    fn commutator_constants() {
        let g = EmbeddedF4::<Gf9>::standard();
        let r = commutator_check(&g).unwrap();
        assert!(r.passed());
        assert!(r.alternative.trivial_sign_character);
        assert!(!r.standard.trivial_sign_character);
    }
}
