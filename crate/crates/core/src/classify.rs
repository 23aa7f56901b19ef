//! Unipotent and nilpotent class signatures, and the fusion tables.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chevgroup::{format_word, EmbeddedF4, GroupElement, WordFactor};
use crate::error::{Error, Result};
use crate::gf::{FieldScalar, JordanType, Matrix, Subspace};
use crate::liealg::{LieAlgebra, LieElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Unipotent,
    Nilpotent,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassKind::Unipotent => "unipotent",
            ClassKind::Nilpotent => "nilpotent",
        })
    }
}

/// E8-side invariants of a unipotent element or nilpotent element.
///
/// For unipotents `centralizer_dim` is the fixed-space dimension on the
/// 248-space and the derived/normalizer lists are empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassSignature {
    pub kind: ClassKind,
    pub order_or_depth: u64,
    pub jordan_248: JordanType,
    pub centralizer_dim: usize,
    pub derived_dims: Vec<usize>,
    pub normalizer_dims: Vec<usize>,
}

/// `3^⌈log₃ b⌉`, the order of a unipotent with largest block `b`.
pub fn unipotent_order(max_block: usize) -> u64 {
    let mut q = 1u64;
    while (q as usize) < max_block {
        q *= 3;
    }
    q
}

fn unipotent_signature_of_matrix<F: FieldScalar>(u: &Matrix<F>) -> Result<ClassSignature> {
    let jt = u.minus_identity().jordan_type_by_images().map_err(|_| Error::NotUnipotent)?;
    Ok(ClassSignature {
        kind: ClassKind::Unipotent,
        order_or_depth: unipotent_order(jt.max_block()),
        centralizer_dim: jt.num_blocks(),
        jordan_248: jt,
        derived_dims: Vec::new(),
        normalizer_dims: Vec::new(),
    })
}

/// Order and Jordan type of `u − I` on the 248-space.
pub fn unipotent_signature<F: FieldScalar>(u: &GroupElement<F>) -> Result<ClassSignature> {
    unipotent_signature_of_matrix(u.matrix())
}

/// Jordan type of `ad x`, `dim ker ad x`, the derived series of the
/// centralizer and the normalizer of each of its terms.
pub fn nilpotent_signature<F: FieldScalar>(e8: &LieAlgebra<F>, x: &LieElement<F>) -> Result<ClassSignature> {
    let ad = e8.ad_matrix(x)?;
    let jt = ad.jordan_type_by_images()?;
    let c = e8.centralizer(std::slice::from_ref(x))?;
    let series = e8.derived_series(&c)?;
    let derived_dims: Vec<usize> = series.iter().map(|s| s.dim()).collect();
    let normalizer_dims = series.iter().map(|s| e8.normalizer(s).map(|n| n.dim())).collect::<Result<_>>()?;
    Ok(ClassSignature {
        kind: ClassKind::Nilpotent,
        order_or_depth: jt.max_block() as u64,
        centralizer_dim: c.dim(),
        jordan_248: jt,
        derived_dims,
        normalizer_dims,
    })
}

/// Matrices of the root elements `x_β(t)` on the 52-span, one per root and
/// nonzero scalar.
pub struct SpanAction<F: FieldScalar> {
    x: Vec<Vec<Matrix<F>>>,
}

impl<F: FieldScalar> SpanAction<F> {
    pub fn new(g: &EmbeddedF4<F>) -> Self {
        let sp = g.span().space();
        let x = (0..g.f4().num_roots())
            .map(|b| {
                F::elements()
                    .iter()
                    .map(|&t| {
                        let cols: Vec<Vec<F>> = sp
                            .basis()
                            .iter()
                            .map(|v| {
                                let mut w = v.clone();
                                g.x_f4_apply(b, t, &mut w);
                                sp.coords_unchecked(&w)
                            })
                            .collect();
                        Matrix::from_cols(sp.dim(), &cols)
                    })
                    .collect()
            })
            .collect();
        SpanAction { x }
    }

    pub fn x(&self, b: usize, t: F) -> &Matrix<F> {
        let k = F::elements().iter().position(|&s| s == t).expect("field element");
        &self.x[b][k]
    }

    pub fn word(&self, g: &EmbeddedF4<F>, word: &[WordFactor<F>]) -> Result<Matrix<F>> {
        let mut m = Matrix::identity(g.span().dim());
        for w in word {
            m = m.mul(self.x(g.f4_index(&w.root)?, w.t));
        }
        Ok(m)
    }
}

/// `ad x` restricted to the 52-span, for `x` in the span.
pub fn ad_on_span<F: FieldScalar>(g: &EmbeddedF4<F>, x: &[F]) -> Matrix<F> {
    let sp = g.span().space();
    let cols: Vec<Vec<F>> = sp.basis().iter().map(|v| sp.coords_unchecked(&g.e8().bracket_vec(x, v))).collect();
    Matrix::from_cols(sp.dim(), &cols)
}

/// `Σ c_β E_β` in E8 coordinates.
pub fn f4_root_sum<F: FieldScalar>(g: &EmbeddedF4<F>, terms: &[(usize, F)]) -> Vec<F> {
    let mut x = vec![F::zero(); g.dim()];
    for &(b, c) in terms {
        F::axpy(&mut x, c, g.basis().e(b).coeffs());
    }
    x
}

/// E8 roots spanning the images of the F4 simple root vectors in the f4
/// folded out of E6 (simple roots α1..α6 of E8) by its graph automorphism.
const FOLDED_SIMPLE: [&[&str]; 4] = [&["01000000"], &["00010000"], &["00100000", "00001000"], &["10000000", "00000100"]];

/// The 27-dimensional E6-module inside E8 (root spaces with α7-coefficient 1
/// and α8-coefficient 0), restricted to the folded f4, together with an
/// isomorphism carrying the embedded f4 onto the folded one.
///
/// Jordan types on this module separate the nilpotent classes A2+Ã1 and
/// Ã2+A1, which agree on the adjoint module.
pub struct MinimalModule<F: FieldScalar> {
    weights: Vec<usize>,
    coord_rows: Vec<usize>,
    coord_inv: Matrix<F>,
    /// Columns: images of the abstract f4 basis in the folded f4.
    folded: Matrix<F>,
}

impl<F: FieldScalar> MinimalModule<F> {
    pub fn new(g: &EmbeddedF4<F>) -> Result<Self> {
        let e8 = g.e8();
        let ers = e8.root_system();
        let f4alg = LieAlgebra::<F>::f4();
        let frs = f4alg.root_system();
        let nr = frs.num_roots();
        let weights: Vec<usize> = (0..ers.num_roots())
            .filter(|&a| {
                let c = ers.root(a).coeffs();
                c[6] == 1 && c[7] == 0
            })
            .collect();

        let mut img: Vec<Option<Vec<F>>> = vec![None; nr];
        for (i, &b) in frs.simple_indices().iter().enumerate() {
            for (root, sign) in [(b, ""), (frs.neg(b), "-")] {
                let mut v = vec![F::zero(); e8.dim()];
                for l in FOLDED_SIMPLE[i] {
                    v[ers.index_of_label(&format!("{sign}{l}"))?] += F::one();
                }
                img[root] = Some(v);
            }
        }
        // Fill the remaining root vectors by brackets [E_γ, E_δ] / N_{γ,δ},
        // using only constants invertible in F.
        loop {
            let mut progress = false;
            for b in 0..nr {
                if img[b].is_some() {
                    continue;
                }
                let pair = (0..nr).find_map(|c| {
                    let d = frs.sub(b, c)?;
                    let n = F::from_int(frs.n(c, d));
                    (img[c].is_some() && img[d].is_some() && !n.is_zero()).then_some((c, d, n))
                });
                if let Some((c, d, n)) = pair {
                    let mut v = e8.bracket_vec(img[c].as_ref().unwrap(), img[d].as_ref().unwrap());
                    F::scale(&mut v, n.inv().ok_or(Error::DivisionByZero)?);
                    img[b] = Some(v);
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        let mut cols: Vec<Vec<F>> =
            img.into_iter().collect::<Option<_>>().ok_or_else(|| Error::RelationFailure("folded f4 root vectors".into()))?;
        for &b in &frs.simple_indices() {
            cols.push(e8.bracket_vec(&cols[b], &cols[frs.neg(b)]));
        }
        let folded = Matrix::from_cols(e8.dim(), &cols);
        for i in 0..f4alg.dim() {
            for j in i + 1..f4alg.dim() {
                let mut lhs = vec![F::zero(); e8.dim()];
                for &(k, c) in f4alg.basis_bracket(i, j) {
                    F::axpy(&mut lhs, c, &cols[k]);
                }
                if lhs != e8.bracket_vec(&cols[i], &cols[j]) {
                    return Err(Error::RelationFailure(format!(
                        "folded f4: [{}, {}]",
                        f4alg.basis_label(i),
                        f4alg.basis_label(j)
                    )));
                }
            }
        }
        // Coordinates of the embedded f4 with respect to ε_β E_β and H_i.
        let eps = crate::chevgroup::sign_character(g)?;
        let emb: Vec<Vec<F>> = (0..f4alg.dim())
            .map(|k| Ok(g.basis().image(&f4alg, &f4alg.basis_element(k), Some(&eps))?.into_coeffs()))
            .collect::<Result<_>>()?;
        let p = Matrix::from_rows(e8.dim(), &emb);
        let (_, coord_rows) = p.rref();
        if coord_rows.len() != f4alg.dim() {
            return Err(Error::Singular);
        }
        let sub = Matrix::from_fn(f4alg.dim(), f4alg.dim(), |i, j| emb[j][coord_rows[i]]);
        let coord_inv = sub.inverse().ok_or(Error::Singular)?;
        Ok(MinimalModule { weights, coord_rows, coord_inv, folded })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// The image in the folded f4 of an element of the embedded f4.
    pub fn transport(&self, x: &[F]) -> Vec<F> {
        let xs: Vec<F> = self.coord_rows.iter().map(|&r| x[r]).collect();
        self.folded.mul_vec(&self.coord_inv.mul_vec(&xs))
    }

    /// Matrix of an element of the embedded f4 on the module.
    pub fn action(&self, e8: &LieAlgebra<F>, x: &[F]) -> Matrix<F> {
        let y = self.transport(x);
        let cols: Vec<Vec<F>> =
            self.weights.iter().map(|&w| {
                let v = e8.bracket_vec(&y, &e8.basis_element(w).into_coeffs());
                self.weights.iter().map(|&k| v[k]).collect()
            }).collect();
        Matrix::from_cols(self.dim(), &cols)
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct LabelRow {
    pub f4: String,
    pub e8: String,
    #[serde(default)]
    pub order: Option<u64>,
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct LabelData {
    pub version: u32,
    pub unipotent: Vec<LabelRow>,
    pub nilpotent: Vec<LabelRow>,
}

/// The bundled class names of both fusion tables.
pub fn load_labels() -> LabelData {
    serde_json::from_str(include_str!("../data/fusion_labels.json")).expect("bundled label data parses")
}

impl LabelData {
    pub fn rows(&self, kind: ClassKind) -> &[LabelRow] {
        match kind {
            ClassKind::Unipotent => &self.unipotent,
            ClassKind::Nilpotent => &self.nilpotent,
        }
    }
}

/// How a row got its label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelResolution {
    /// Keyed by position in centralizer-dimension order.
    Rank,
    /// The witness representative of the row has this signature.
    Witness,
    /// No witness, and tied in rank with another class without one.
    Unresolved,
}

#[derive(Clone, Debug, Serialize)]
pub struct FusionRow {
    pub f4_label: String,
    pub e8_label: String,
    pub resolution: LabelResolution,
    pub f4: F4Side,
    pub signature: ClassSignature,
    /// How often the survey met this class.
    pub hits: usize,
    /// First representative met: a word and an exponent, or a root sum.
    pub representative: String,
}

/// Classes with equal F4-side centralizer dimension, and how their labels
/// were told apart.
#[derive(Clone, Debug, Serialize)]
pub struct Ambiguity {
    pub labels: Vec<String>,
    pub resolution: LabelResolution,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SurveyConfig {
    pub seed: u64,
    /// Number of candidates examined.
    pub budget: usize,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        SurveyConfig { seed: 1, budget: 400 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveyReport {
    pub kind: ClassKind,
    pub field: String,
    pub config: SurveyConfig,
    pub candidates: usize,
    pub rows: Vec<FusionRow>,
    pub ambiguities: Vec<Ambiguity>,
    /// Witness labels whose representative was not found by the survey, or
    /// landed on a class already taken.
    pub witness_mismatches: Vec<String>,
    /// Labels whose class sits at a different position in
    /// centralizer-dimension order than the row in the table.
    pub rank_deviations: Vec<String>,
    /// Pairs of rows with equal E8 signatures.
    pub collisions: Vec<(String, String)>,
    /// Number of classes per order (unipotent) or in total (nilpotent).
    pub order_counts: BTreeMap<u64, usize>,
    /// Only for unipotent surveys.
    pub e8b6_blocks_present: Option<bool>,
    pub retracted_blocks_absent: Option<bool>,
}

/// Blocks of the order-9 class with the corrected Jordan structure.
pub const E8B6_BLOCKS: &str = "9^26 7 3^2 1";
/// The uncorrected value that must never occur.
pub const RETRACTED_E8B6_BLOCKS: &str = "9^25 8^2 2^2 1^3";

impl SurveyReport {
    pub fn expected_collision(&self) -> (&'static str, &'static str) {
        match self.kind {
            ClassKind::Unipotent => ("A2", "Ã2"),
            ClassKind::Nilpotent => ("A2+Ã1", "Ã2+A1"),
        }
    }

    pub fn count_ok(&self) -> bool {
        self.rows.len() == 15
    }

    pub fn orders_ok(&self) -> bool {
        match self.kind {
            ClassKind::Unipotent => self.order_counts == BTreeMap::from([(3, 7), (9, 7), (27, 1)]),
            ClassKind::Nilpotent => true,
        }
    }

    pub fn collisions_ok(&self) -> bool {
        let (a, b) = self.expected_collision();
        self.collisions.len() == 1 && {
            let (x, y) = &self.collisions[0];
            (x == a && y == b) || (x == b && y == a)
        }
    }

    pub fn passed(&self) -> bool {
        self.count_ok()
            && self.orders_ok()
            && self.collisions_ok()
            && self.witness_mismatches.is_empty()
            && self.ambiguities.iter().all(|a| a.resolution != LabelResolution::Unresolved)
            && self.e8b6_blocks_present.unwrap_or(true)
            && self.retracted_blocks_absent.unwrap_or(true)
    }

    /// CSV with the columns of the fusion table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f4_label,e8_label,order_or_depth,jordan_248,centralizer_dim\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.f4_label, r.e8_label, r.signature.order_or_depth, r.signature.jordan_248, r.signature.centralizer_dim
            ));
        }
        out
    }
}

/// F4-side invariants: the Jordan type of `u − I` (or `ad x`) on the
/// 52-span, and the derived series and center of the kernel `K` (a
/// subalgebra). The center tells the unipotent classes A2 and Ã2 apart.
/// Nilpotents also carry the Jordan type on the 27-dimensional module.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct F4Side {
    pub jordan_52: JordanType,
    pub centralizer_derived: Vec<usize>,
    pub centralizer_center_dim: usize,
    pub jordan_27: Option<JordanType>,
}

impl F4Side {
    pub fn centralizer_dim(&self) -> usize {
        self.jordan_52.num_blocks()
    }
}

/// F4-side invariants of a nilpotent endomorphism `n` of the 52-span that
/// is `u − I` or `ad x`.
pub fn f4_side<F: FieldScalar>(g: &EmbeddedF4<F>, n: &Matrix<F>) -> Result<F4Side> {
    let jordan_52 = n.jordan_type_by_images()?;
    let sp = g.span().space();
    let kernel = Subspace::spanned_by(g.dim(), n.nullspace().iter().map(|c| sp.combine(c)));
    let c = g.e8().wrap(kernel)?;
    let centralizer_derived = g.e8().derived_series(&c)?.iter().map(|s| s.dim()).collect();
    let centralizer_center_dim = g.e8().centralizer(&c.elements())?.space().intersection(c.space()).dim();
    Ok(F4Side { jordan_52, centralizer_derived, centralizer_center_dim, jordan_27: None })
}

/// F4-side key plus the E8 signature: what tells two classes apart.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Found {
    f4: F4Side,
    signature: ClassSignature,
}

struct Tally {
    hits: usize,
    representative: String,
}

/// Unipotent survey candidate: a 3-part of a random word, or a product of
/// root elements over a random set of positive roots.
fn unipotent_candidate<F: FieldScalar>(
    g: &EmbeddedF4<F>,
    act: &SpanAction<F>,
    rng: &mut ChaCha8Rng,
    i: usize,
) -> Result<Option<(Matrix<F>, Matrix<F>, String)>> {
    if i.is_multiple_of(2) {
        let word = g.random_word(rng, 12);
        let g52 = act.word(g, &word)?;
        let order = match g52.multiplicative_order(2000) {
            Ok(o) => o,
            Err(Error::OrderExceedsCap { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut m = order;
        while m % 3 == 0 {
            m /= 3;
        }
        if m == order {
            return Ok(None);
        }
        let u52 = g52.pow(m);
        let u = g.element_from_word(&word)?.pow(m).into_matrix();
        Ok(Some((u52, u, format!("({})^{m}", format_word(&word)))))
    } else {
        let word = random_positive_word(g, rng);
        let u52 = act.word(g, &word)?;
        let u = g.element_from_word(&word)?.into_matrix();
        Ok(Some((u52, u, format_word(&word))))
    }
}

fn random_positive_subset<F: FieldScalar>(g: &EmbeddedF4<F>, rng: &mut ChaCha8Rng) -> Vec<(usize, F)> {
    let pos: Vec<usize> = g.f4().positive_indices().into_iter().collect();
    let k = rng.gen_range(1..=8);
    let mut idx: Vec<usize> = sample(rng, pos.len(), k).into_iter().map(|j| pos[j]).collect();
    idx.sort_unstable();
    idx.into_iter().map(|b| (b, F::random_nonzero(rng))).collect()
}

fn random_positive_word<F: FieldScalar>(g: &EmbeddedF4<F>, rng: &mut ChaCha8Rng) -> Vec<WordFactor<F>> {
    random_positive_subset(g, rng)
        .into_iter()
        .map(|(b, t)| WordFactor { root: g.f4().root(b).label(), t })
        .collect()
}

fn witness_word<F: FieldScalar>(roots: &[String]) -> Vec<WordFactor<F>> {
    roots.iter().map(|r| WordFactor { root: r.clone(), t: F::one() }).collect()
}

fn format_sum<F: FieldScalar>(g: &EmbeddedF4<F>, terms: &[(usize, F)]) -> String {
    let parts: Vec<String> = terms.iter().map(|&(b, c)| format!("{c}*e({})", g.f4().root(b).label())).collect();
    parts.join(" + ")
}

fn unipotent_found<F: FieldScalar>(g: &EmbeddedF4<F>, u52: &Matrix<F>, u: &Matrix<F>) -> Result<Found> {
    let f4 = f4_side(g, &u52.minus_identity()).map_err(|_| Error::NotUnipotent)?;
    Ok(Found { f4, signature: unipotent_signature_of_matrix(u)? })
}

/// Nilpotent survey candidate: a sum over random positive roots, or (every
/// fourth draw) a random element of the positive nilradical.
fn nilpotent_terms<F: FieldScalar>(g: &EmbeddedF4<F>, rng: &mut ChaCha8Rng, i: usize) -> Vec<(usize, F)> {
    if i % 4 == 3 {
        let mut terms = Vec::new();
        for b in g.f4().positive_indices() {
            if rng.gen_bool(0.5) {
                terms.push((b, F::random_nonzero(rng)));
            }
        }
        terms
    } else {
        random_positive_subset(g, rng)
    }
}

/// Cheap F4-side key of a nilpotent, and the E8 Jordan type; the expensive
/// centralizer data is only computed once per new pair.
fn nilpotent_keys<F: FieldScalar>(g: &EmbeddedF4<F>, mm: &MinimalModule<F>, x: &[F]) -> Result<(F4Side, JordanType)> {
    let mut j52 = f4_side(g, &ad_on_span(g, x))?;
    j52.jordan_27 = Some(mm.action(g.e8(), x).jordan_type_by_images()?);
    let j248 = g.e8().ad_matrix_vec(x).jordan_type_by_images()?;
    Ok((j52, j248))
}

/// Seeded random search for the classes of `kind`, labelled from the
/// bundled tables.
pub fn survey_classes<F: FieldScalar>(g: &EmbeddedF4<F>, kind: ClassKind, config: SurveyConfig) -> Result<SurveyReport> {
    let labels = load_labels();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut found: BTreeMap<Found, Tally> = BTreeMap::new();
    let mut retracted_seen = false;
    let bad = JordanType::parse(RETRACTED_E8B6_BLOCKS)?;
    match kind {
        ClassKind::Unipotent => {
            let act = SpanAction::new(g);
            for i in 0..config.budget {
                let Some((u52, u, rep)) = unipotent_candidate(g, &act, &mut rng, i)? else { continue };
                if u52.is_identity() {
                    continue;
                }
                let f = unipotent_found(g, &u52, &u)?;
                retracted_seen |= f.signature.jordan_248 == bad;
                found.entry(f).or_insert(Tally { hits: 0, representative: rep }).hits += 1;
            }
        }
        ClassKind::Nilpotent => {
            let mut cache = BTreeMap::new();
            let mm = MinimalModule::new(g)?;
            for i in 0..config.budget {
                let terms = nilpotent_terms(g, &mut rng, i);
                if terms.is_empty() {
                    continue;
                }
                let x = f4_root_sum(g, &terms);
                let keys = nilpotent_keys(g, &mm, &x)?;
                let f4 = keys.0.clone();
                let signature = nilpotent_signature_cached(g, &mut cache, keys, &x)?;
                let f = Found { f4, signature };
                found.entry(f).or_insert_with(|| Tally { hits: 0, representative: format_sum(g, &terms) }).hits += 1;
            }
        }
    }
    if found.is_empty() {
        return Err(Error::BudgetExhausted("no classes found".into()));
    }

    let mm = MinimalModule::new(g)?;
    let witness = |roots: &[String]| witness_found(g, &mm, kind, roots);

    let table = labels.rows(kind);
    let assigned = assign_labels(kind, &found, table, witness)?;
    let mut rows: Vec<FusionRow> = assigned
        .rows
        .into_iter()
        .map(|(f, label, e8_label, resolution)| {
            let t = &found[&f];
            FusionRow {
                f4_label: label,
                e8_label,
                resolution,
                f4: f.f4,
                signature: f.signature,
                hits: t.hits,
                representative: t.representative.clone(),
            }
        })
        .collect();
    let position = |l: &str| table.iter().position(|r| r.f4 == l).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| position(&r.f4_label));

    let mut collisions = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if rows[i].signature == rows[j].signature {
                collisions.push((rows[i].f4_label.clone(), rows[j].f4_label.clone()));
            }
        }
    }
    let mut order_counts = BTreeMap::new();
    if kind == ClassKind::Unipotent {
        for r in &rows {
            *order_counts.entry(r.signature.order_or_depth).or_insert(0) += 1;
        }
    } else {
        order_counts.insert(0, rows.len());
    }
    let (e8b6, retracted) = if kind == ClassKind::Unipotent {
        let good = JordanType::parse(E8B6_BLOCKS)?;
        let present = rows.iter().any(|r| r.signature.order_or_depth == 9 && r.signature.jordan_248 == good);
        (Some(present), Some(!retracted_seen))
    } else {
        (None, None)
    };
    Ok(SurveyReport {
        kind,
        field: F::NAME.to_string(),
        config,
        candidates: config.budget,
        rows,
        ambiguities: assigned.ambiguities,
        witness_mismatches: assigned.mismatches,
        rank_deviations: assigned.deviations,
        collisions,
        order_counts,
        e8b6_blocks_present: e8b6,
        retracted_blocks_absent: retracted,
    })
}

/// Full nilpotent signatures are recomputed for the first few candidates
/// sharing a pair of Jordan types, then reused.
const NILPOTENT_RECHECKS: usize = 3;

fn nilpotent_signature_cached<F: FieldScalar>(
    g: &EmbeddedF4<F>,
    cache: &mut BTreeMap<(F4Side, JordanType), (usize, ClassSignature)>,
    keys: (F4Side, JordanType),
    x: &[F],
) -> Result<ClassSignature> {
    if let Some((n, s)) = cache.get_mut(&keys) {
        if *n >= NILPOTENT_RECHECKS {
            return Ok(s.clone());
        }
        *n += 1;
    }
    let s = nilpotent_signature(g.e8(), &g.e8().element(x.to_vec())?)?;
    cache.entry(keys).or_insert((1, s.clone()));
    Ok(s)
}

struct Assigned {
    rows: Vec<(Found, String, String, LabelResolution)>,
    ambiguities: Vec<Ambiguity>,
    mismatches: Vec<String>,
    deviations: Vec<String>,
}

/// Matches found classes to table rows within each order group. Rows with a
/// witness take the class of their witness; the rest are keyed by F4-side
/// centralizer dimension, descending. Rank ties among the rest stay
/// unresolved.
fn assign_labels(
    kind: ClassKind,
    found: &BTreeMap<Found, Tally>,
    table: &[LabelRow],
    witness: impl Fn(&[String]) -> Result<Found>,
) -> Result<Assigned> {
    let group_of = |order: u64| if kind == ClassKind::Unipotent { order } else { 0 };
    let mut groups: BTreeMap<u64, Vec<&Found>> = BTreeMap::new();
    for f in found.keys() {
        groups.entry(group_of(f.signature.order_or_depth)).or_default().push(f);
    }
    let mut table_groups: BTreeMap<u64, Vec<&LabelRow>> = BTreeMap::new();
    for r in table {
        table_groups.entry(group_of(r.order.unwrap_or(0))).or_default().push(r);
    }

    let mut out = Assigned { rows: Vec::new(), ambiguities: Vec::new(), mismatches: Vec::new(), deviations: Vec::new() };
    for (order, mut fs) in groups {
        fs.sort_by(|a, b| b.f4.centralizer_dim().cmp(&a.f4.centralizer_dim()).then(a.cmp(b)));
        let rows = table_groups.get(&order).cloned().unwrap_or_default();
        let mut label_of: Vec<Option<(usize, LabelResolution)>> = vec![None; fs.len()];

        for (k, r) in rows.iter().enumerate() {
            let Some(w) = &r.witness else { continue };
            let f = witness(w)?;
            match fs.iter().position(|x| **x == f) {
                Some(p) if label_of[p].is_none() => label_of[p] = Some((k, LabelResolution::Witness)),
                _ => out.mismatches.push(r.f4.clone()),
            }
        }
        let placed: Vec<usize> = label_of.iter().flatten().map(|(k, _)| *k).collect();
        let free_rows: Vec<usize> = (0..rows.len()).filter(|k| !placed.contains(k)).collect();
        let free: Vec<usize> = (0..fs.len()).filter(|&p| label_of[p].is_none()).collect();
        if free.len() == free_rows.len() {
            for (i, (&p, &k)) in free.iter().zip(&free_rows).enumerate() {
                let dim = fs[p].f4.centralizer_dim();
                let tied = free.iter().enumerate().any(|(j, &q)| j != i && fs[q].f4.centralizer_dim() == dim);
                let res = if tied { LabelResolution::Unresolved } else { LabelResolution::Rank };
                label_of[p] = Some((k, res));
            }
        }

        let mut i = 0;
        while i < fs.len() {
            let dim = fs[i].f4.centralizer_dim();
            let j = i + fs[i..].iter().take_while(|f| f.f4.centralizer_dim() == dim).count();
            if j - i > 1 {
                let labels = (i..j).map(|p| label_of[p].as_ref().map_or("?".into(), |(k, _)| rows[*k].f4.clone())).collect();
                let unwitnessed = (i..j).filter(|&p| !matches!(label_of[p], Some((_, LabelResolution::Witness)))).count();
                let resolution = if unwitnessed <= 1 && (i..j).all(|p| label_of[p].is_some()) {
                    LabelResolution::Witness
                } else {
                    LabelResolution::Unresolved
                };
                out.ambiguities.push(Ambiguity { labels, resolution });
            }
            i = j;
        }

        for (p, f) in fs.iter().enumerate() {
            match &label_of[p] {
                Some((k, res)) => {
                    let r = rows[*k];
                    let rank_span = fs.iter().position(|x| x.f4.centralizer_dim() == f.f4.centralizer_dim()).unwrap_or(p);
                    let width = fs.iter().filter(|x| x.f4.centralizer_dim() == f.f4.centralizer_dim()).count();
                    if *k < rank_span || *k >= rank_span + width {
                        out.deviations.push(r.f4.clone());
                    }
                    let (f4l, e8l) = if *res == LabelResolution::Unresolved {
                        (format!("{}?", r.f4), format!("{}?", r.e8))
                    } else {
                        (r.f4.clone(), r.e8.clone())
                    };
                    out.rows.push(((*f).clone(), f4l, e8l, res.clone()));
                }
                None => out.rows.push(((*f).clone(), "?".into(), "?".into(), LabelResolution::Unresolved)),
            }
        }
    }
    Ok(out)
}

fn witness_found<F: FieldScalar>(g: &EmbeddedF4<F>, mm: &MinimalModule<F>, kind: ClassKind, roots: &[String]) -> Result<Found> {
    match kind {
        ClassKind::Unipotent => {
            let act = SpanAction::new(g);
            let w = witness_word::<F>(roots);
            unipotent_found(g, &act.word(g, &w)?, g.element_from_word(&w)?.matrix())
        }
        ClassKind::Nilpotent => {
            let terms: Vec<(usize, F)> = roots.iter().map(|r| Ok((g.f4_index(r)?, F::one()))).collect::<Result<_>>()?;
            let x = f4_root_sum(g, &terms);
            let (f4, _) = nilpotent_keys(g, mm, &x)?;
            Ok(Found { f4, signature: nilpotent_signature(g.e8(), &g.e8().element(x)?)? })
        }
    }
}

/// The F4-side Jordan type and E8 signature of a table row's witness
/// representative (the regular element of the named subsystem), if any.
pub fn witness_signature<F: FieldScalar>(
    g: &EmbeddedF4<F>,
    kind: ClassKind,
    f4_label: &str,
) -> Result<Option<(F4Side, ClassSignature)>> {
    let labels = load_labels();
    let Some(row) = labels.rows(kind).iter().find(|r| r.f4 == f4_label) else {
        return Err(Error::Parse(format!("unknown class label {f4_label:?}")));
    };
    let Some(w) = &row.witness else { return Ok(None) };
    let f = witness_found(g, &MinimalModule::new(g)?, kind, w)?;
    Ok(Some((f.f4, f.signature)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{Gf3, Gf9};

    /// Orbit dimensions of the unipotent classes of E8 that occur.
    const E8_ORBIT_DIMS: [(&str, usize); 13] = [
        ("2A1", 92),
        ("4A1", 128),
        ("A2+2A1", 146),
        ("2A2", 156),
        ("2A2+A1", 160),
        ("2A2+2A1", 164),
        ("2A3", 188),
        ("A6", 210),
        ("D6(a1)", 210),
        ("D5+A2", 214),
        ("E8(b6)", 218),
        ("E8(b4)", 230),
        ("A4+2A1", 192),
    ];

    #[test]
    fn orders_from_blocks() {
        assert_eq!(unipotent_order(1), 1);
        assert_eq!(unipotent_order(2), 3);
        assert_eq!(unipotent_order(3), 3);
        assert_eq!(unipotent_order(4), 9);
        assert_eq!(unipotent_order(9), 9);
        assert_eq!(unipotent_order(27), 27);
    }

    #[test]
    fn identity_and_zero() {
        let g = EmbeddedF4::<Gf3>::standard();
        let s = unipotent_signature(&GroupElement::<Gf3>::identity(248)).unwrap();
        assert_eq!(s.order_or_depth, 1);
        assert_eq!(s.jordan_248, JordanType::new(vec![1; 248]));
        let z = nilpotent_signature(g.e8(), &g.e8().zero()).unwrap();
        assert_eq!(z.centralizer_dim, 248);
        assert_eq!(z.order_or_depth, 1);
        assert_eq!(z.derived_dims[0], 248);
    }

    #[test]
    fn semisimple_is_rejected() {
        let g = EmbeddedF4::<Gf3>::standard();
        let h = g.e8().h(0);
        assert!(nilpotent_signature(g.e8(), &h).is_err());
        let t = GroupElement::from_matrix(g.e8_torus(&[1, 0, 0, 0, 0, 0, 0, 0], Gf3::TWO).unwrap());
        if !t.is_identity() {
            assert!(matches!(unipotent_signature(&t), Err(Error::NotUnipotent)));
        }
    }

    #[test]
    fn highest_root_element() {
        // The highest root of F4 is long, so its root element lies in class A1.
        let g = EmbeddedF4::<Gf3>::standard();
        let top = g.f4_index("2342").unwrap();
        let s = unipotent_signature(&g.x_f4(top, Gf3::ONE)).unwrap();
        assert_eq!(s.order_or_depth, 3);
        assert_eq!(s.centralizer_dim, 248 - 92);
        let x = g.e8().element(f4_root_sum(&g, &[(top, Gf3::ONE)])).unwrap();
        assert_eq!(nilpotent_signature(g.e8(), &x).unwrap().centralizer_dim, 248 - 92);
    }

    #[test]
    fn unipotent_witnesses_match_orbit_dims() {
        let g = EmbeddedF4::<Gf3>::standard();
        for row in load_labels().rows(ClassKind::Unipotent) {
            let Some((_, s)) = witness_signature(&g, ClassKind::Unipotent, &row.f4).unwrap() else { continue };
            let dim = E8_ORBIT_DIMS.iter().find(|(l, _)| *l == row.e8).map(|p| p.1).unwrap();
            assert_eq!(s.centralizer_dim, 248 - dim, "{}", row.f4);
            assert_eq!(Some(s.order_or_depth), row.order, "{}", row.f4);
        }
    }

    #[test]
    fn signature_is_conjugation_invariant() {
        let g = EmbeddedF4::<Gf3>::standard();
        let u = g.element_from_word(&witness_word::<Gf3>(&["1000".into(), "0100".into()])).unwrap();
        let s = unipotent_signature(&u).unwrap();
        for seed in 0..3 {
            let c = g.random_f4_element(seed, 10);
            let v = c.mul(&u).mul(&c.inverse().unwrap());
            assert_eq!(unipotent_signature(&v).unwrap(), s);
        }
    }

    #[test]
    fn span_action_matches_group() {
        let g = EmbeddedF4::<Gf3>::standard();
        let act = SpanAction::new(&g);
        let w = witness_word::<Gf3>(&["0010".into(), "-0001".into()]);
        let direct = g.restrict_to_span(g.element_from_word(&w).unwrap().matrix()).unwrap();
        assert_eq!(act.word(&g, &w).unwrap(), direct);
    }

    fn check_minimal_module<F: FieldScalar>() {
        let g = EmbeddedF4::<F>::standard();
        let mm = MinimalModule::new(&g).unwrap();
        assert_eq!(mm.dim(), 27);
        let e8 = g.e8();
        let sp = g.span().space();
        let basis = sp.basis();
        for (i, j) in [(0, 5), (3, 40), (17, 50), (24, 30), (48, 51)] {
            let (x, y) = (&basis[i], &basis[j]);
            let xy = e8.bracket_vec(x, y);
            assert_eq!(mm.transport(&xy), e8.bracket_vec(&mm.transport(x), &mm.transport(y)));
            let ax = mm.action(e8, x);
            let ay = mm.action(e8, y);
            assert_eq!(mm.action(e8, &xy), ax.mul(&ay).sub(&ay.mul(&ax)));
        }
    }

    #[test]
    fn minimal_module_is_a_representation() {
        check_minimal_module::<Gf3>();
        check_minimal_module::<Gf9>();
    }

    #[test]
    fn minimal_module_long_root() {
        // A long root element acts on the 26 with Jordan type 2^6 1^14.
        let g = EmbeddedF4::<Gf3>::standard();
        let mm = MinimalModule::new(&g).unwrap();
        let x = f4_root_sum(&g, &[(g.f4_index("1000").unwrap(), Gf3::ONE)]);
        let jt = mm.action(g.e8(), &x).jordan_type_by_images().unwrap();
        assert_eq!(jt, JordanType::parse("2^6 1^15").unwrap());
    }

    #[test]
    fn label_table_shape() {
        let labels = load_labels();
        for kind in [ClassKind::Unipotent, ClassKind::Nilpotent] {
            let rows = labels.rows(kind);
            assert_eq!(rows.len(), 15);
            assert_eq!(rows.iter().filter(|r| r.witness.is_none()).count(), 4);
        }
        let orders = labels.rows(ClassKind::Unipotent).iter().filter_map(|r| r.order);
        let mut counts = BTreeMap::new();
        for o in orders {
            *counts.entry(o).or_insert(0) += 1;
        }
        assert_eq!(counts, BTreeMap::from([(3, 7), (9, 7), (27, 1)]));
    }
}
