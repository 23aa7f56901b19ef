//! The f4 subalgebra of e8: bundled root-element data and its verification.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldScalar, Matrix, Subspace};
use crate::liealg::{LieAlgebra, LieElement, SubalgebraBasis};
use crate::rootsys::{parse_label, RootSystem, RootSystemType};

const BUNDLED: &str = include_str!("../data/f4_in_e8.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct RawTable {
    format: String,
    version: u32,
    f4_simple_roots: Vec<String>,
    rows: BTreeMap<String, Vec<(String, i64)>>,
    torus_rows: BTreeMap<String, Vec<(String, i64)>>,
}

/// One `x_β(t) = Π x_{α_j}(c_j t)` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingRow {
    pub f4_root: String,
    pub summands: Vec<(String, i64)>,
}

/// One `h_β(t) = Π h_{α_j}(t^{k_j})` line, kept exactly as transcribed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusRow {
    pub f4_root: String,
    pub factors: Vec<(String, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingTable {
    pub version: u32,
    /// ordered like the positive roots of F4
    pub rows: Vec<EmbeddingRow>,
    pub torus_rows: Vec<TorusRow>,
}

/// The bundled data.
pub fn load_embedding() -> EmbeddingTable {
    EmbeddingTable::from_json(BUNDLED).expect("bundled embedding data parses")
}

impl EmbeddingTable {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTable = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.format != "f4-in-e8-embedding" {
            return Err(Error::Parse(format!("unknown format {:?}", raw.format)));
        }
        let f4 = RootSystem::build(RootSystemType::F4);
        let e8 = RootSystem::build(RootSystemType::E8);
        let mut rows = Vec::new();
        for b in f4.positive_indices() {
            let label = f4.root(b).label();
            let summands = raw
                .rows
                .get(&label)
                .ok_or_else(|| Error::Parse(format!("missing row for {label}")))?
                .clone();
            for (a, c) in &summands {
                let idx = e8.index_of_label(a)?;
                if !e8.root(idx).is_positive() {
                    return Err(Error::Parse(format!("row {label}: {a} is not a positive E8 root")));
                }
                if c.abs() != 1 {
                    return Err(Error::Parse(format!("row {label}: coefficient {c} is not ±1")));
                }
            }
            rows.push(EmbeddingRow { f4_root: label, summands });
        }
        if raw.rows.len() != rows.len() {
            return Err(Error::Parse(format!("expected {} rows, found {}", rows.len(), raw.rows.len())));
        }
        let mut torus_rows = Vec::new();
        for s in &raw.f4_simple_roots {
            if let Some(f) = raw.torus_rows.get(s) {
                torus_rows.push(TorusRow { f4_root: s.clone(), factors: f.clone() });
            }
        }
        Ok(EmbeddingTable { version: raw.version, rows, torus_rows })
    }

    pub fn to_json(&self) -> String {
        let raw = RawTable {
            format: "f4-in-e8-embedding".into(),
            version: self.version,
            f4_simple_roots: self.torus_rows.iter().map(|t| t.f4_root.clone()).collect(),
            rows: self.rows.iter().map(|r| (r.f4_root.clone(), r.summands.clone())).collect(),
            torus_rows: self.torus_rows.iter().map(|t| (t.f4_root.clone(), t.factors.clone())).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("table serializes")
    }

    pub fn row(&self, f4_label: &str) -> Option<&EmbeddingRow> {
        self.rows.iter().find(|r| r.f4_root == f4_label)
    }

    pub fn row_mut(&mut self, f4_label: &str) -> Option<&mut EmbeddingRow> {
        self.rows.iter_mut().find(|r| r.f4_root == f4_label)
    }

    /// Row as `(E8 root index, coefficient)` pairs.
    pub fn support(&self, f4_label: &str, e8: &RootSystem) -> Result<Vec<(usize, i64)>> {
        let row = self.row(f4_label).ok_or_else(|| Error::NotARoot(f4_label.to_string()))?;
        row.summands.iter().map(|(a, c)| Ok((e8.index_of_label(a)?, *c))).collect()
    }
}

/// Well-formedness of the table: commuting supports and the 2/4 summand law.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WellFormedReport {
    pub rows: usize,
    pub commuting_supports: bool,
    pub long_rows_with_two: usize,
    pub short_rows_with_four: usize,
    pub summand_law: bool,
    pub first_failure: Option<String>,
}

impl WellFormedReport {
    pub fn passed(&self) -> bool {
        self.rows == 24 && self.commuting_supports && self.summand_law
    }
}

/// Checks that the root elements within each row commute.
pub fn check_commuting_supports(table: &EmbeddingTable, e8: &RootSystem) -> Result<()> {
    for row in &table.rows {
        let idx: Vec<usize> =
            row.summands.iter().map(|(a, _)| e8.index_of_label(a)).collect::<Result<_>>()?;
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                let (a, b) = (idx[i], idx[j]);
                if a == b || e8.add(a, b).is_some() || b == e8.neg(a) {
                    return Err(Error::NonCommutingSupport {
                        row: row.f4_root.clone(),
                        first: row.summands[i].0.clone(),
                        second: row.summands[j].0.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

pub fn check_well_formed(table: &EmbeddingTable) -> WellFormedReport {
    let f4 = RootSystem::build(RootSystemType::F4);
    let e8 = RootSystem::build(RootSystemType::E8);
    let commuting = check_commuting_supports(table, &e8);
    let mut long2 = 0;
    let mut short4 = 0;
    let mut law = true;
    for row in &table.rows {
        let long = f4.index_of_label(&row.f4_root).map(|b| f4.root(b).is_long()).unwrap_or(false);
        match (long, row.summands.len()) {
            (true, 2) => long2 += 1,
            (false, 4) => short4 += 1,
            _ => law = false,
        }
    }
    WellFormedReport {
        rows: table.rows.len(),
        commuting_supports: commuting.is_ok(),
        long_rows_with_two: long2,
        short_rows_with_four: short4,
        summand_law: law && long2 == 12 && short4 == 12,
        first_failure: commuting.err().map(|e| e.to_string()),
    }
}

/// The 52 Chevalley basis elements of the embedded f4, as elements of e8.
#[derive(Clone, Debug)]
pub struct F4Basis<F> {
    f4: Arc<RootSystem>,
    /// indexed like the roots of `f4`
    e: Vec<LieElement<F>>,
    /// `[e_β, e_{−β}]` for the simple roots β
    h: Vec<LieElement<F>>,
}

pub fn build_f4_basis<F: FieldScalar>(table: &EmbeddingTable, e8: &LieAlgebra<F>) -> Result<F4Basis<F>> {
    let rs = e8.root_system();
    check_commuting_supports(table, rs)?;
    let f4 = Arc::new(RootSystem::build(RootSystemType::F4));
    let mut e = vec![e8.zero(); f4.num_roots()];
    for b in f4.positive_indices() {
        let sup = table.support(&f4.root(b).label(), rs)?;
        let mut pos = vec![F::zero(); e8.dim()];
        let mut neg = vec![F::zero(); e8.dim()];
        for (a, c) in sup {
            pos[a] = F::from_int(c);
            neg[rs.neg(a)] = F::from_int(c);
        }
        e[b] = e8.element(pos)?;
        e[f4.neg(b)] = e8.element(neg)?;
    }
    let h = f4
        .simple_indices()
        .into_iter()
        .map(|b| e8.bracket(&e[b], &e[f4.neg(b)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(F4Basis { f4, e, h })
}

impl<F: FieldScalar> F4Basis<F> {
    pub fn root_system(&self) -> &RootSystem {
        &self.f4
    }

    pub fn root_system_arc(&self) -> Arc<RootSystem> {
        Arc::clone(&self.f4)
    }

    /// `e_β` for the F4 root with index `b`.
    pub fn e(&self, b: usize) -> &LieElement<F> {
        &self.e[b]
    }

    pub fn e_label(&self, label: &str) -> Result<&LieElement<F>> {
        Ok(&self.e[self.f4.index_of_label(label)?])
    }

    pub fn h(&self, i: usize) -> &LieElement<F> {
        &self.h[i]
    }

    /// `h_β = [e_β, e_{−β}]` written over the four simple h's.
    pub fn coroot(&self, b: usize) -> LieElement<F> {
        let mut x = self.h[0].scaled(F::zero());
        for (i, c) in self.f4.coroot_coeffs(b).into_iter().enumerate() {
            x = x.add(&self.h[i].scaled(F::from_int(c)));
        }
        x
    }

    /// All 52 elements: root elements in F4 root order, then the four h's.
    pub fn elements(&self) -> Vec<LieElement<F>> {
        self.e.iter().chain(&self.h).cloned().collect()
    }

    /// Map an element of the abstract f4 (same field) into e8.
    pub fn image(&self, f4alg: &LieAlgebra<F>, x: &LieElement<F>, eps: Option<&[i8]>) -> Result<LieElement<F>> {
        if x.coeffs().len() != f4alg.dim() || f4alg.root_system().kind() != RootSystemType::F4 {
            return Err(Error::AlgebraMismatch);
        }
        let mut out = self.h[0].scaled(F::zero());
        for (k, &c) in x.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (v, s) = if k < self.f4.num_roots() {
                (&self.e[k], eps.map_or(1, |e| e[k]))
            } else {
                (&self.h[k - self.f4.num_roots()], 1)
            };
            out = out.add(&v.scaled(c * F::from_int(s as i64)));
        }
        Ok(out)
    }

    pub fn span(&self, e8: &LieAlgebra<F>) -> Result<SubalgebraBasis<F>> {
        e8.span(&self.elements())
    }
}

/// Outcome of the Chevalley-relation check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub cartan_in_e8_cartan: bool,
    pub coroot_relations: usize,
    pub cartan_action_relations: usize,
    pub root_pair_relations: usize,
    pub sign_flips: usize,
    /// ε_β ∈ {±1} with `e_β ↦ ε_β E_β` an isomorphism from the standard f4
    pub sign_character: Vec<i8>,
}

/// Checks the Chevalley relations of f4 on the embedded basis and solves for
/// the sign character relating it to the standard structure constants.
pub fn verify_f4_relations<F: FieldScalar>(basis: &F4Basis<F>, e8: &LieAlgebra<F>) -> Result<RelationReport> {
    let w: Vec<usize> = (0..basis.root_system().num_roots()).collect();
    verify_f4_relations_with_map(basis, e8, &w)
}

/// As [`verify_f4_relations`], with the abstract root `ρ` sent to the
/// embedded root `w[ρ]` (a relabelling by another base of the same system).
pub fn verify_f4_relations_with_map<F: FieldScalar>(
    basis: &F4Basis<F>,
    e8: &LieAlgebra<F>,
    w: &[usize],
) -> Result<RelationReport> {
    let f4 = basis.root_system();
    let nr = f4.num_roots();
    let lab = |b: usize| f4.root(w[b]).label();
    let fail = |s: String| Err(Error::RelationFailure(s));
    let hstart = e8.num_roots();
    let hs: Vec<LieElement<F>> = f4.simple_indices().into_iter().map(|b| basis.coroot(w[b])).collect();
    let cartan_ok = hs.iter().all(|h| h.coeffs()[..hstart].iter().all(|c| c.is_zero()));
    if !cartan_ok {
        return fail("simple h's are not in the Cartan of e8".into());
    }
    let mut coroot_rel = 0;
    for b in 0..nr {
        let hb = e8.bracket(basis.e(w[b]), basis.e(w[f4.neg(b)]))?;
        let mut expect = e8.zero();
        for (i, c) in f4.coroot_coeffs(b).into_iter().enumerate() {
            expect = expect.add(&hs[i].scaled(F::from_int(c)));
        }
        if hb != expect {
            return fail(format!("[e_{0}, e_-{0}] is not h_{0}", lab(b)));
        }
        coroot_rel += 1;
    }
    let mut action_rel = 0;
    for (i, h) in hs.iter().enumerate() {
        for g in 0..nr {
            let lhs = e8.bracket(h, basis.e(w[g]))?;
            let rhs = basis.e(w[g]).scaled(F::from_int(f4.pairing_simple(g, i)));
            if lhs != rhs {
                return fail(format!("[h_{}, e_{}]", i + 1, lab(g)));
            }
            action_rel += 1;
        }
    }
    // equations x_β + x_γ + x_{β+γ} = flip, over GF(2)
    let mut eqs: Vec<(u64, bool)> = Vec::new();
    let mut pair_rel = 0;
    for b in 0..nr {
        for g in 0..nr {
            if g == b || g == f4.neg(b) {
                continue;
            }
            let lhs = e8.bracket(basis.e(w[b]), basis.e(w[g]))?;
            match f4.add(b, g) {
                None => {
                    if !lhs.is_zero() {
                        return fail(format!("[e_{}, e_{}] should vanish", lab(b), lab(g)));
                    }
                }
                Some(s) => {
                    let n = F::from_int(f4.n(b, g));
                    let target = basis.e(w[s]);
                    let flip = if lhs == target.scaled(n) {
                        false
                    } else if lhs == target.scaled(-n) {
                        true
                    } else {
                        return fail(format!("[e_{}, e_{}] is not ±N e_{}", lab(b), lab(g), lab(s)));
                    };
                    eqs.push(((1u64 << b) | (1u64 << g) | (1u64 << s), flip));
                }
            }
            pair_rel += 1;
        }
    }
    for b in f4.positive_indices() {
        eqs.push(((1u64 << b) | (1u64 << f4.neg(b)), false));
    }
    let bits = solve_gf2(&eqs, nr).ok_or_else(|| Error::RelationFailure("no consistent sign character".into()))?;
    let sign_character: Vec<i8> = (0..nr).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect();
    Ok(RelationReport {
        cartan_in_e8_cartan: cartan_ok,
        coroot_relations: coroot_rel,
        cartan_action_relations: action_rel,
        root_pair_relations: pair_rel,
        sign_flips: eqs.iter().filter(|e| e.1).count(),
        sign_character,
    })
}

/// Solves a GF(2) system given as (variable mask, rhs); free variables are 0.
pub(crate) fn solve_gf2(eqs: &[(u64, bool)], nvars: usize) -> Option<u64> {
    let mut rows: Vec<(u64, bool)> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for &(m, r) in eqs {
        let (mut m, mut r) = (m, r);
        for (&(pm, pr), &p) in rows.iter().zip(&pivots) {
            if m >> p & 1 == 1 {
                m ^= pm;
                r ^= pr;
            }
        }
        if m == 0 {
            if r {
                return None;
            }
            continue;
        }
        let p = m.trailing_zeros() as usize;
        for (row, _) in rows.iter_mut().zip(&pivots) {
            if row.0 >> p & 1 == 1 {
                row.0 ^= m;
                row.1 ^= r;
            }
        }
        rows.push((m, r));
        pivots.push(p);
    }
    let mut x = 0u64;
    for (&(_, r), &p) in rows.iter().zip(&pivots) {
        if r {
            x |= 1 << p;
        }
    }
    debug_assert!(nvars <= 64);
    Some(x)
}

/// Joint weight spaces of the four h's acting on the 52-span.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightReport {
    pub nonzero_weight_lines: usize,
    pub nonzero_weight_spaces: usize,
    pub zero_weight_dim: usize,
    pub total_dim: usize,
}

impl WeightReport {
    pub fn passed(&self) -> bool {
        self.nonzero_weight_lines == 48 && self.nonzero_weight_spaces == 48 && self.zero_weight_dim == 4 && self.total_dim == 52
    }
}

pub fn weight_decomposition<F: FieldScalar>(basis: &F4Basis<F>, e8: &LieAlgebra<F>) -> Result<WeightReport> {
    let span = basis.span(e8)?;
    let sp = span.space();
    let d = sp.dim();
    let acts: Vec<Matrix<F>> = (0..4)
        .map(|i| {
            let cols: Vec<Vec<F>> = sp
                .basis()
                .iter()
                .map(|v| sp.coords(&e8.bracket_vec(basis.h(i).coeffs(), v)).ok_or(Error::RelationFailure("h does not preserve the span".into())))
                .collect::<Result<_>>()?;
            Ok(Matrix::from_cols(d, &cols))
        })
        .collect::<Result<_>>()?;
    // refine (weight, piece basis) one h at a time
    let mut pieces: Vec<(Vec<F>, Vec<Vec<F>>)> = vec![(Vec::new(), Subspace::<F>::full(d).canonical_basis())];
    for a in &acts {
        let mut next = Vec::new();
        for (w, piece) in &pieces {
            let p = Matrix::from_cols(d, piece);
            for &lam in F::elements() {
                let m = a.sub(&Matrix::scalar(d, lam)).mul(&p);
                let ker = m.nullspace();
                if !ker.is_empty() {
                    let vecs = ker.iter().map(|c| p.mul_vec(c)).collect();
                    let mut w2 = w.clone();
                    w2.push(lam);
                    next.push((w2, vecs));
                }
            }
        }
        pieces = next;
    }
    let mut rep = WeightReport { nonzero_weight_lines: 0, nonzero_weight_spaces: 0, zero_weight_dim: 0, total_dim: 0 };
    for (w, vecs) in &pieces {
        rep.total_dim += vecs.len();
        if w.iter().all(|x| x.is_zero()) {
            rep.zero_weight_dim += vecs.len();
        } else {
            rep.nonzero_weight_spaces += 1;
            if vecs.len() == 1 {
                rep.nonzero_weight_lines += 1;
            }
        }
    }
    Ok(rep)
}

/// Dimensions witnessing that the span is a self-normalizing subalgebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub span_dim: usize,
    pub closure_dim: usize,
    pub normalizer_dim: usize,
    pub centralizer_dim: usize,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.span_dim == 52 && self.closure_dim == 52 && self.normalizer_dim == 52 && self.centralizer_dim == 0
    }
}

pub fn verify_closure_and_maximality_witness<F: FieldScalar>(
    basis: &F4Basis<F>,
    e8: &LieAlgebra<F>,
) -> Result<ClosureReport> {
    let span = basis.span(e8)?;
    let closure = e8.close_under_bracket(&basis.elements())?;
    let normalizer = e8.normalizer(&closure)?;
    let f4 = basis.root_system();
    let gens: Vec<LieElement<F>> =
        f4.simple_indices().into_iter().flat_map(|b| [basis.e(b).clone(), basis.e(f4.neg(b)).clone()]).collect();
    let centralizer = e8.centralizer(&gens)?;
    Ok(ClosureReport {
        span_dim: span.dim(),
        closure_dim: closure.dim(),
        normalizer_dim: normalizer.dim(),
        centralizer_dim: centralizer.dim(),
    })
}

/// Integer exponents `k_j` with `[e_β, e_{−β}] = Σ k_j h_{α_j}` (E8 simple coroots),
/// obtained by summing coroots over the row. Valid because the row's roots
/// are mutually orthogonal.
pub fn coroot_exponents(table: &EmbeddingTable, f4_label: &str) -> Result<Vec<i64>> {
    let e8 = RootSystem::build(RootSystemType::E8);
    let mut k = vec![0i64; 8];
    for (a, c) in table.support(f4_label, &e8)? {
        for (i, x) in e8.coroot_coeffs(a).into_iter().enumerate() {
            k[i] += c * c * x;
        }
    }
    Ok(k)
}

/// Exponent vector of a transcribed torus row; `None` for factors whose
/// label is not an E8 simple-root label.
pub fn torus_row_exponents(row: &TorusRow) -> (Vec<i64>, Vec<String>) {
    let mut k = vec![0i64; 8];
    let mut bad = Vec::new();
    for (label, e) in &row.factors {
        match parse_label(label) {
            Ok(c) if c.len() == 8 && c.iter().filter(|&&x| x == 1).count() == 1 && c.iter().all(|&x| x == 0 || x == 1) => {
                let i = c.iter().position(|&x| x == 1).expect("one entry");
                k[i] += e;
            }
            _ => bad.push(label.clone()),
        }
    }
    (k, bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Gf3;

    #[test]
    fn bundled_rows() {
        let t = load_embedding();
        assert_eq!(t.rows.len(), 24);
        assert_eq!(t.row("1000").unwrap().summands, vec![("00010000".to_string(), 1), ("00000100".to_string(), 1)]);
        assert_eq!(t.row("0100").unwrap().summands, vec![("00100000".to_string(), -1), ("00000010".to_string(), 1)]);
        assert_eq!(t.row("2342").unwrap().summands, vec![("22343321".to_string(), 1), ("12354321".to_string(), -1)]);
        assert_eq!(EmbeddingTable::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn well_formed() {
        let r = check_well_formed(&load_embedding());
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn injected_non_commuting_pair() {
        let mut t = load_embedding();
        t.row_mut("1000").unwrap().summands[1].0 = "00001000".into();
        let e = check_commuting_supports(&t, &RootSystem::build(RootSystemType::E8)).unwrap_err();
        assert!(matches!(e, Error::NonCommutingSupport { ref row, .. } if row == "1000"));
    }

    #[test]
    fn basis_examples() {
        let e8 = LieAlgebra::<Gf3>::e8();
        let b = build_f4_basis(&load_embedding(), &e8).unwrap();
        let rs = e8.root_system();
        let a = rs.index_of_label("00010000").unwrap();
        let c = rs.index_of_label("00000100").unwrap();
        assert_eq!(*b.e_label("1000").unwrap(), e8.e(a).add(&e8.e(c)));
        assert_eq!(*b.e_label("-1000").unwrap(), e8.e(rs.neg(a)).add(&e8.e(rs.neg(c))));
        assert_eq!(*b.h(0), e8.coroot(a).add(&e8.coroot(c)));
    }

    #[test]
    fn gf2_solver() {
        assert_eq!(solve_gf2(&[(0b11, true), (0b10, true)], 2), Some(0b10));
        assert_eq!(solve_gf2(&[(0b11, true), (0b11, false)], 2), None);
    }

    #[test]
    fn torus_exponents() {
        let t = load_embedding();
        assert_eq!(coroot_exponents(&t, "0010").unwrap(), vec![1, 0, 0, 1, 2, 1, 0, 1]);
        assert_eq!(torus_row_exponents(&t.torus_rows[2]).0, vec![1, 0, 0, 1, 2, 1, 0, 1]);
        let (k, bad) = torus_row_exponents(&t.torus_rows[3]);
        assert_eq!(bad, vec!["1000000".to_string()]);
        assert_eq!(k, vec![0, 4, 3, 5, 3, 2, 1, 0]);
    }

    #[test]
    fn relations_closure_weights() {
        let e8 = LieAlgebra::<Gf3>::e8();
        let b = build_f4_basis(&load_embedding(), &e8).unwrap();
        let rel = verify_f4_relations(&b, &e8).unwrap();
        assert_eq!(rel.sign_character.len(), 48);
        let c = verify_closure_and_maximality_witness(&b, &e8).unwrap();
        assert!(c.passed(), "{c:?}");
        let e9 = LieAlgebra::<crate::gf::Gf9>::e8();
        let b9 = build_f4_basis(&load_embedding(), &e9).unwrap();
        let w = weight_decomposition(&b9, &e9).unwrap();
        assert!(w.passed(), "{w:?}");
    }
}
