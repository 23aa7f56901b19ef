//! Matrix modules: spinning, Norton irreducibility certificates, and the
//! decomposition of L(E8) under the embedded F4 and its B4 subgroup.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::chevgroup::{restrict, EmbeddedF4};
use crate::error::{Error, Result};
use crate::gf::{FieldScalar, Matrix, Subspace};

/// Generators acting on column vectors of length `dim`.
#[derive(Clone, Debug)]
pub struct MatModule<F: FieldScalar> {
    dim: usize,
    generators: Vec<Matrix<F>>,
    /// group generators (invertible) rather than algebra generators
    group: bool,
}

impl<F: FieldScalar> MatModule<F> {
    pub fn new(dim: usize, generators: Vec<Matrix<F>>, group: bool) -> Result<Self> {
        for g in &generators {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.rows() });
            }
            if group && g.rank() < dim {
                return Err(Error::Singular);
            }
        }
        Ok(MatModule { dim, generators, group })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Matrix<F>] {
        &self.generators
    }

    pub fn is_group(&self) -> bool {
        self.group
    }

    pub fn dual(&self) -> Self {
        MatModule { dim: self.dim, generators: self.generators.iter().map(|g| g.transpose()).collect(), group: self.group }
    }

    /// The action on an invariant subspace, in its echelon coordinates.
    pub fn restrict(&self, s: &Subspace<F>) -> Result<Self> {
        let gens = self.generators.iter().map(|g| restrict(s, g)).collect::<Result<_>>()?;
        Ok(MatModule { dim: s.dim(), generators: gens, group: self.group })
    }

    pub fn is_invariant(&self, s: &Subspace<F>) -> bool {
        self.generators.iter().all(|g| s.basis().iter().all(|v| s.contains(&g.mul_vec(v))))
    }

    /// A random element of the enveloping algebra: a combination of a few
    /// random words in the generators. Words are long because products of a
    /// handful of unipotent generators stay close to the identity.
    pub fn random_algebra_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix<F> {
        let mut a = Matrix::zeros(self.dim, self.dim);
        if self.generators.is_empty() {
            return Matrix::scalar(self.dim, F::random(rng));
        }
        for _ in 0..3 {
            let len = rng.gen_range(8..=16);
            let mut w = self.generators[rng.gen_range(0..self.generators.len())].clone();
            for _ in 1..len {
                w = self.generators[rng.gen_range(0..self.generators.len())].mul(&w);
            }
            a.add_scaled(F::random_nonzero(rng), &w);
        }
        a
    }
}

/// The smallest invariant subspace containing `v`.
pub fn spin<F: FieldScalar>(m: &MatModule<F>, v: &[F]) -> Result<Subspace<F>> {
    if v.iter().all(|x| x.is_zero()) {
        return Err(Error::ZeroVector);
    }
    let mut s = Subspace::zero(m.dim);
    let mut queue = vec![v.to_vec()];
    s.insert(v.to_vec());
    while let Some(x) = queue.pop() {
        if s.is_full() {
            break;
        }
        for g in &m.generators {
            let y = g.mul_vec(&x);
            if s.insert(y.clone()) {
                queue.push(y);
            }
        }
    }
    Ok(s)
}

/// Evidence for absolute irreducibility: an algebra element `A` with
/// `ker(A − λ)` one-dimensional, whose kernel vector spins to the whole
/// module and whose transposed kernel vector spins to the whole dual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NortonCertificate {
    pub attempt: usize,
    pub eigenvalue: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Irreducibility<F: FieldScalar> {
    Certified(NortonCertificate),
    /// a proper nonzero submodule
    Reducible(Subspace<F>),
    Inconclusive,
}

impl<F: FieldScalar> Irreducibility<F> {
    pub fn is_certified(&self) -> bool {
        matches!(self, Irreducibility::Certified(_))
    }
}

/// Norton's test with a budget of random algebra elements.
pub fn norton_test<F: FieldScalar, R: Rng + ?Sized>(m: &MatModule<F>, rng: &mut R, budget: usize) -> Result<Irreducibility<F>> {
    if m.dim <= 1 {
        return Ok(Irreducibility::Certified(NortonCertificate { attempt: 0, eigenvalue: "trivial".into() }));
    }
    let mut first = vec![F::zero(); m.dim];
    first[0] = F::one();
    let s = spin(m, &first)?;
    if !s.is_full() {
        return Ok(Irreducibility::Reducible(s));
    }
    let dual = m.dual();
    for attempt in 0..budget {
        let a = m.random_algebra_element(rng);
        for &lam in F::elements() {
            let b = a.sub(&Matrix::scalar(m.dim, lam));
            let ker = b.nullspace();
            if ker.len() != 1 {
                continue;
            }
            let s = spin(m, &ker[0])?;
            if !s.is_full() {
                return Ok(Irreducibility::Reducible(s));
            }
            let kt = b.transpose().nullspace();
            let sd = spin(&dual, &kt[0])?;
            if !sd.is_full() {
                // the annihilator of a dual submodule is a submodule
                let ann = Subspace::spanned_by(m.dim, sd.annihilator());
                return Ok(Irreducibility::Reducible(ann));
            }
            return Ok(Irreducibility::Certified(NortonCertificate { attempt, eigenvalue: lam.to_string() }));
        }
    }
    Ok(Irreducibility::Inconclusive)
}

/// One direct summand found by [`decompose`].
#[derive(Clone, Debug)]
pub struct Factor<F: FieldScalar> {
    pub space: Subspace<F>,
    pub irreducibility: Irreducibility<F>,
}

impl<F: FieldScalar> Factor<F> {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn irreducible(&self) -> bool {
        self.irreducibility.is_certified()
    }
}

/// Splits a multiplicity-free semisimple module into invariant summands:
/// kernel vectors of `A − λ` with one-dimensional kernel lie in a single
/// summand, so spinning them finds the summands one by one.
pub fn decompose<F: FieldScalar, R: Rng + ?Sized>(m: &MatModule<F>, rng: &mut R, budget: usize) -> Result<Vec<Factor<F>>> {
    let mut found: Vec<Subspace<F>> = Vec::new();
    let mut total = Subspace::zero(m.dim);
    let mut attempts = 0;
    while total.dim() < m.dim {
        if attempts == budget {
            return Err(Error::DecompositionFailure(format!(
                "found summands of dimensions {:?} after {budget} attempts",
                found.iter().map(|s| s.dim()).collect::<Vec<_>>()
            )));
        }
        attempts += 1;
        let a = m.random_algebra_element(rng);
        for &lam in F::elements() {
            let ker = a.sub(&Matrix::scalar(m.dim, lam)).nullspace();
            if ker.len() != 1 || total.contains(&ker[0]) {
                continue;
            }
            let s = spin(m, &ker[0])?;
            let sum = total.sum(&s);
            if sum.dim() == total.dim() + s.dim() {
                total = sum;
                found.push(s);
            }
        }
    }
    found.sort_by_key(|s| s.dim());
    found
        .into_iter()
        .map(|s| {
            let sub = m.restrict(&s)?;
            let irreducibility = match norton_test(&sub, rng, budget)? {
                Irreducibility::Reducible(_) => Irreducibility::Reducible(s.clone()),
                other => other,
            };
            Ok(Factor { space: s, irreducibility })
        })
        .collect()
}

/// Short stable digest of a subspace's canonical basis.
pub fn basis_hash<F: FieldScalar>(s: &Subspace<F>) -> String {
    let bytes = serde_json::to_vec(&s.canonical_basis()).expect("vectors serialize");
    Sha256::digest(&bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorReport {
    pub dim: usize,
    pub irreducible: bool,
    pub certificate: Option<NortonCertificate>,
    pub basis_hash: String,
}

impl FactorReport {
    pub fn from_factor<F: FieldScalar>(f: &Factor<F>) -> Self {
        FactorReport {
            dim: f.dim(),
            irreducible: f.irreducible(),
            certificate: match &f.irreducibility {
                Irreducibility::Certified(c) => Some(c.clone()),
                _ => None,
            },
            basis_hash: basis_hash(&f.space),
        }
    }
}

/// Generators `x_{±β}(1)` for a list of F4 roots, acting on L(E8).
pub fn root_generators<F: FieldScalar>(g: &EmbeddedF4<F>, roots: &[&str]) -> Result<Vec<Matrix<F>>> {
    let mut out = Vec::new();
    for r in roots {
        let b = g.f4_index(r)?;
        out.push(g.x_f4(b, F::one()).into_matrix());
        out.push(g.x_f4(g.f4().neg(b), F::one()).into_matrix());
    }
    Ok(out)
}

pub const F4_SIMPLE: [&str; 4] = ["1000", "0100", "0010", "0001"];
/// Simple roots of the B4 subsystem: the negative highest root and the
/// three long simple roots.
pub const B4_SIMPLE: [&str; 4] = ["-2342", "1000", "0100", "0010"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub field: String,
    pub seed: u64,
    pub factors: Vec<FactorReport>,
    /// the 52-dimensional summand is the span of the embedded f4
    pub small_factor_is_f4_span: bool,
}

impl DecompositionReport {
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn passed(&self) -> bool {
        self.dims() == [52, 196] && self.factors.iter().all(|f| f.irreducible) && self.small_factor_is_f4_span
    }
}

/// L(E8) under the group generated by `x_{±β}(1)`, β simple.
pub fn decompose_248<F: FieldScalar>(g: &EmbeddedF4<F>, seed: u64, budget: usize) -> Result<(DecompositionReport, Vec<Factor<F>>)> {
    let m = MatModule::new(g.dim(), root_generators(g, &F4_SIMPLE)?, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = decompose(&m, &mut rng, budget)?;
    let small = factors.first().map(|f| f.space == *g.span().space()).unwrap_or(false);
    let report = DecompositionReport {
        field: F::NAME.to_string(),
        seed,
        factors: factors.iter().map(FactorReport::from_factor).collect(),
        small_factor_is_f4_span: small,
    };
    Ok((report, factors))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct B4Report {
    pub simple_roots: Vec<String>,
    pub seed: u64,
    pub on_52: Vec<FactorReport>,
    pub on_196: Vec<FactorReport>,
}

impl B4Report {
    pub fn dims_52(&self) -> Vec<usize> {
        self.on_52.iter().map(|f| f.dim).collect()
    }

    pub fn dims_196(&self) -> Vec<usize> {
        self.on_196.iter().map(|f| f.dim).collect()
    }

    pub fn passed(&self) -> bool {
        self.dims_52() == [16, 36]
            && self.dims_196() == [84, 112]
            && self.on_52.iter().chain(&self.on_196).all(|f| f.irreducible)
    }
}

/// Restricts the two F4 summands of L(E8) to the B4 subsystem subgroup.
pub fn restrict_to_b4<F: FieldScalar>(g: &EmbeddedF4<F>, summands: &[Factor<F>], seed: u64, budget: usize) -> Result<B4Report> {
    if summands.len() != 2 {
        return Err(Error::DecompositionFailure(format!("expected two summands, got {}", summands.len())));
    }
    let gens = root_generators(g, &B4_SIMPLE)?;
    let big = MatModule::new(g.dim(), gens, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::new();
    for s in summands {
        let sub = big.restrict(&s.space)?;
        let fs = decompose(&sub, &mut rng, budget)?;
        parts.push(fs.iter().map(FactorReport::from_factor).collect::<Vec<_>>());
    }
    let on_196 = parts.pop().expect("two parts");
    let on_52 = parts.pop().expect("two parts");
    Ok(B4Report { simple_roots: B4_SIMPLE.iter().map(|s| s.to_string()).collect(), seed, on_52, on_196 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvolutionCandidate {
    pub coroot: String,
    pub plus: usize,
    pub minus: usize,
    pub plus_on_52: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvolutionReport {
    pub candidates: Vec<InvolutionCandidate>,
    /// the candidate with eigenspaces of dimensions (120, 128) on L(E8)
    /// whose fixed space on f4 has dimension 36 = dim B4
    pub selected: Option<String>,
    pub trace: i64,
}

impl InvolutionReport {
    pub fn passed(&self) -> bool {
        self.selected.is_some() && self.trace == -8
    }
}

/// `(dim ker(h − 1), dim ker(h + 1))` for an involution `h`.
pub fn eigenspace_dims<F: FieldScalar>(h: &Matrix<F>) -> Result<(usize, usize)> {
    if !h.mul(h).is_identity() {
        return Err(Error::NotInvolution);
    }
    let n = h.rows();
    let plus = n - h.sub(&Matrix::identity(n)).rank();
    let minus = n - h.add(&Matrix::identity(n)).rank();
    Ok((plus, minus))
}

/// Among `h_β(−1)` for β ∈ {1000, 0001}, the one with centralizer B4 and
/// eigenspace dimensions (120, 128).
pub fn involution_split<F: FieldScalar>(g: &EmbeddedF4<F>) -> Result<InvolutionReport> {
    let mut candidates = Vec::new();
    let mut selected = None;
    let mut trace = 0;
    for r in ["1000", "0001"] {
        let (_, h) = g.n_and_h(g.f4_index(r)?, -F::one())?;
        let (plus, minus) = eigenspace_dims(h.matrix())?;
        let on52 = restrict(g.span().space(), h.matrix())?;
        let (plus_on_52, _) = eigenspace_dims(&on52)?;
        if (plus, minus) == (120, 128) && plus_on_52 == 36 && selected.is_none() {
            selected = Some(r.to_string());
            trace = plus as i64 - minus as i64;
        }
        candidates.push(InvolutionCandidate { coroot: r.to_string(), plus, minus, plus_on_52 });
    }
    Ok(InvolutionReport { candidates, selected, trace })
}
