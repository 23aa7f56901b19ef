use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use f4e8::chevgroup::EmbeddedF4;
use f4e8::classify::unipotent_signature;
use f4e8::{FieldScalar, Gf3, Gf9, LieAlgebra, Matrix};

fn e8() -> &'static LieAlgebra<Gf3> {
    static E8: OnceLock<LieAlgebra<Gf3>> = OnceLock::new();
    E8.get_or_init(LieAlgebra::e8)
}

fn g3() -> &'static EmbeddedF4<Gf3> {
    static G: OnceLock<EmbeddedF4<Gf3>> = OnceLock::new();
    G.get_or_init(EmbeddedF4::standard)
}

fn g9() -> &'static EmbeddedF4<Gf9> {
    static G: OnceLock<EmbeddedF4<Gf9>> = OnceLock::new();
    G.get_or_init(EmbeddedF4::standard)
}

fn random_vec<F: FieldScalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<F> {
    (0..n).map(|_| F::random(rng)).collect()
}

fn random_matrix<F: FieldScalar>(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix<F> {
    Matrix::from_fn(r, c, |_, _| F::random(rng))
}

fn random_invertible<F: FieldScalar>(rng: &mut ChaCha8Rng, n: usize) -> (Matrix<F>, Matrix<F>) {
    loop {
        let p = random_matrix(rng, n, n);
        if let Some(q) = p.inverse() {
            return (p, q);
        }
    }
}

/// Strictly upper triangular with random density.
fn random_nilpotent<F: FieldScalar>(rng: &mut ChaCha8Rng, n: usize) -> Matrix<F> {
    let density = rng.gen_range(0.05..0.6);
    Matrix::from_fn(n, n, |i, j| if j > i && rng.gen_bool(density) { F::random(rng) } else { F::zero() })
}

fn check_rank_transpose<F: FieldScalar>(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r, c) = (rng.gen_range(1..12), rng.gen_range(1..12));
    let m: Matrix<F> = random_matrix(&mut rng, r, c);
    assert_eq!(m.rank(), m.transpose().rank());
    assert_eq!(m.rank() + m.nullspace().len(), c);
    let (rref, _) = m.rref();
    assert_eq!(rref.rref().0, rref);
}

fn check_jordan_conjugation<F: FieldScalar>(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..20);
    let nil: Matrix<F> = random_nilpotent(&mut rng, n);
    let (p, q) = random_invertible(&mut rng, n);
    let conj = p.mul(&nil).mul(&q);
    let jt = nil.jordan_type_nilpotent().unwrap();
    assert_eq!(jt.dimension(), n);
    assert_eq!(conj.jordan_type_nilpotent().unwrap(), jt);
    assert_eq!(conj.jordan_type_by_images().unwrap(), jt);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jacobi_identity(seed in any::<u64>()) {
        let l = e8();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z): (Vec<Gf3>, Vec<Gf3>, Vec<Gf3>) =
            (random_vec(&mut rng, 248), random_vec(&mut rng, 248), random_vec(&mut rng, 248));
        let mut s = l.bracket_vec(&x, &l.bracket_vec(&y, &z));
        Gf3::axpy(&mut s, Gf3::ONE, &l.bracket_vec(&y, &l.bracket_vec(&z, &x)));
        Gf3::axpy(&mut s, Gf3::ONE, &l.bracket_vec(&z, &l.bracket_vec(&x, &y)));
        prop_assert!(s.iter().all(|c| *c == Gf3::ZERO));
    }

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>()) {
        let l = e8();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y): (Vec<Gf3>, Vec<Gf3>) = (random_vec(&mut rng, 248), random_vec(&mut rng, 248));
        let mut s = l.bracket_vec(&x, &y);
        Gf3::axpy(&mut s, Gf3::ONE, &l.bracket_vec(&y, &x));
        prop_assert!(s.iter().all(|c| *c == Gf3::ZERO));
    }

    #[test]
    fn rank_and_rref(seed in any::<u64>()) {
        check_rank_transpose::<Gf3>(seed);
        check_rank_transpose::<Gf9>(seed);
    }

    #[test]
    fn frobenius_is_an_automorphism(a in 0usize..9, b in 0usize..9) {
        let (x, y) = (Gf9::elements()[a], Gf9::elements()[b]);
        prop_assert_eq!((x + y).frobenius(), x.frobenius() + y.frobenius());
        prop_assert_eq!((x * y).frobenius(), x.frobenius() * y.frobenius());
        prop_assert_eq!(x.frobenius() == x, Gf3::elements().iter().any(|g| Gf9::from_int(g.value() as i64) == x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ad_is_a_homomorphism(seed in any::<u64>()) {
        let l = e8();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y): (Vec<Gf3>, Vec<Gf3>) = (random_vec(&mut rng, 248), random_vec(&mut rng, 248));
        let (ax, ay) = (l.ad_matrix_vec(&x), l.ad_matrix_vec(&y));
        prop_assert_eq!(l.ad_matrix_vec(&l.bracket_vec(&x, &y)), ax.mul(&ay).sub(&ay.mul(&ax)));
    }

    #[test]
    fn random_group_elements_normalize_the_span(seed in any::<u64>()) {
        prop_assert!(g3().stabilizes_span(&g3().random_f4_element(seed, 10)));
        prop_assert!(g9().stabilizes_span(&g9().random_f4_element(seed, 10)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn one_parameter_subgroups_are_additive(b in 0usize..48, s in 0usize..9, t in 0usize..9) {
        let g = g9();
        let (s, t) = (Gf9::elements()[s], Gf9::elements()[t]);
        prop_assert_eq!(g.x_f4(b, s).mul(&g.x_f4(b, t)), g.x_f4(b, s + t));
    }

    #[test]
    fn e8_root_subgroups_are_additive(a in 0usize..240, s in 0usize..3, t in 0usize..3) {
        let g = g3();
        let (s, t) = (Gf3::elements()[s], Gf3::elements()[t]);
        prop_assert_eq!(g.exp_root(a, s).mul(&g.exp_root(a, t)), g.exp_root(a, s + t));
    }

    #[test]
    fn jordan_type_is_conjugation_invariant(seed in any::<u64>()) {
        check_jordan_conjugation::<Gf3>(seed);
        check_jordan_conjugation::<Gf9>(seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn unipotent_signature_is_conjugation_invariant(b in 0usize..48, seed in any::<u64>()) {
        let g = g3();
        let u = g.x_f4(b, Gf3::ONE);
        let c = g.random_f4_element(seed, 8);
        let v = c.mul(&u).mul(&c.inverse().unwrap());
        prop_assert_eq!(unipotent_signature(&v).unwrap(), unipotent_signature(&u).unwrap());
    }
}
