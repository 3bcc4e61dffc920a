use focklab::classify::{
    conjugation_for_normal, find_c_selfadjoint_witness, is_c_selfadjoint, is_cohyponormal, is_hermitian, is_normal,
    CLASSIFY_TOL,
};
use focklab::conjugation::{apply_conjugation, ConjugationOperator};
use focklab::fock::kernel_tail;
use focklab::harness::{random_symbols, trial_rng, Stratum};
use focklab::operator::{adjoint_symbols, build_matrix, injectivity_probe, kernel_action_adjoint};
use focklab::quadrature::DEFAULT_ORDER;
use focklab::symbols::{compose_symbols, validate_conjugation};
use focklab::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn disc(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(m, t)| C64::from_polar(m, t))
}

fn symbols(r: f64) -> impl Strategy<Value = Symbols> {
    (disc(2.0), complex(r), complex(r).prop_filter("C != 0", |z| z.norm() > 1e-3), complex(r))
        .prop_map(|(a, b, cc, d)| Symbols::new(a, b, cc, d).unwrap())
}

fn poly(max_len: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(complex(1.0), 1..=max_len).prop_map(FockVector::new)
}

fn grid() -> &'static QuadratureGrid<f64> {
    use std::sync::OnceLock;
    static G: OnceLock<QuadratureGrid<f64>> = OnceLock::new();
    G.get_or_init(|| QuadratureGrid::new(DEFAULT_ORDER).unwrap())
}

#[test]
fn basis_is_orthonormal() {
    for m in 0..200 {
        for n in 0..200 {
            let ip = inner_product(&Vector::basis(m, 200), &Vector::basis(n, 200));
            assert_eq!(ip, c(if m == n { 1.0 } else { 0.0 }, 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_inner_product_matches_quadrature(p in poly(13), q in poly(13)) {
        let exact = inner_product(&p, &q);
        let quad = quadrature_inner(|z| evaluate(&p, z), |z| evaluate(&q, z), grid()).unwrap();
        prop_assert!((exact - quad).norm() / exact.norm().max(1.0) < 1e-9, "{exact} vs {quad}");
    }

    #[test]
    fn kernel_reproduces_point_values(f in poly(48), z in disc(6.0)) {
        let k = kernel_vector(KernelSpec::plain(z), f.trunc()).unwrap();
        prop_assert_eq!(inner_product(&f, &k), evaluate(&f, z));
    }

    #[test]
    fn kernel_norm_within_tail(z in disc(5.0), n in 8usize..160) {
        let k = kernel_vector(KernelSpec::plain(z), n).unwrap();
        let full = z.norm_sqr().exp();
        let err = (k.norm_sqr() - full).abs();
        prop_assert!(err <= kernel_tail(z, n) * (1.0 + 1e-12) + 1e-14 * full, "err {err} tail {}", kernel_tail(z, n));
    }

    #[test]
    fn point_evaluation_bound(f in poly(40), z in disc(5.0)) {
        let bound = f.norm() * (0.5 * z.norm_sqr()).exp();
        prop_assert!(evaluate(&f, z).norm() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn adjoint_symbols_are_an_involution(s in symbols(3.0)) {
        prop_assert_eq!(adjoint_symbols(&adjoint_symbols(&s)), s);
    }

    #[test]
    fn gaussian_composition_follows_operator_composition(
        outer in symbols(1.0),
        inner in symbols(1.0),
        alpha in complex(0.4),
        beta in complex(1.0),
        gamma in complex(1.0),
    ) {
        let g = Gaussian::new(alpha, beta, gamma);
        let lhs = compose_gaussian(&compose_symbols(&outer, &inner).unwrap(), &g);
        let rhs = compose_gaussian(&outer, &compose_gaussian(&inner, &g));
        let close = |x: C64, y: C64| (x - y).norm() <= 1e-12 * x.norm().max(y.norm()).max(1.0);
        prop_assert!(close(lhs.quad, rhs.quad));
        prop_assert!(close(lhs.linear, rhs.linear));
        // constants agree modulo the branch of log C
        prop_assert!(close(lhs.constant.exp(), rhs.constant.exp()));
    }

    #[test]
    fn conjugation_is_anti_linear(
        theta in 0.0..std::f64::consts::TAU,
        r in 0.0f64..2.0,
        lambda in complex(2.0),
        f in poly(24),
        g in poly(24),
    ) {
        let t = make_conjugation(theta, r).unwrap();
        let op = ConjugationOperator::new(t, 64).unwrap();
        let (f, g) = (f.resized(24), g.resized(24));
        let lhs = apply_conjugation(&op, &f.scale(lambda).add(&g)).unwrap();
        let rhs = apply_conjugation(&op, &f).unwrap().scale(lambda.conj()).add(&apply_conjugation(&op, &g).unwrap());
        let dev = lhs.sub(&rhs).coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-10, "{dev}");
    }

    #[test]
    fn kernel_consistency(s in symbols(0.8), f in poly(9), z in disc(1.0)) {
        let n = 96;
        let f = f.resized(n);
        let wf = build_matrix(&s, n).unwrap().apply(&f).unwrap();
        let lhs = inner_product(&wf, &kernel_vector(KernelSpec::plain(z), n).unwrap());
        let rhs = inner_product(&f, &kernel_action_adjoint(&s, KernelSpec::plain(z), n).unwrap());
        let point = s.psi(z) * evaluate(&f, s.phi(z));
        let scale = point.norm().max(1.0);
        prop_assert!((lhs - rhs).norm() / scale < 1e-9, "{lhs} vs {rhs}");
        prop_assert!((rhs - point).norm() / scale < 1e-9, "{rhs} vs {point}");
    }

    #[test]
    fn normal_witness_is_sound(a in disc(2.0), b in complex(2.0), cc in complex(2.0)) {
        prop_assume!((a - 1.0).norm() > 1e-6 && cc.norm() > 1e-3);
        let d = b.conj() * (c(1.0, 0.0) - a) / (c(1.0, 0.0) - a.conj());
        let s = Symbols::new(a, b, cc, d).unwrap();
        let t = conjugation_for_normal(&s, &CLASSIFY_TOL).unwrap();
        prop_assert!(validate_conjugation(*t.rotation(), *t.shift(), *t.scale(), &CLASSIFY_TOL).is_ok());
        prop_assert!(is_c_selfadjoint(&s, &t, &CLASSIFY_TOL));
    }

    #[test]
    fn general_witness_is_sound(s in symbols(2.0)) {
        prop_assume!((s.slope() - 1.0).norm() > 1e-6);
        let t = find_c_selfadjoint_witness(&s, CLASSIFY_TOL).expect("A != 1 always admits a witness");
        prop_assert!(validate_conjugation(*t.rotation(), *t.shift(), *t.scale(), &CLASSIFY_TOL).is_ok());
        prop_assert!(is_c_selfadjoint(&s, &t, &CLASSIFY_TOL));
    }
}

#[test]
fn implication_chain_on_random_draws() {
    for k in 0..10_000usize {
        let mut rng = trial_rng(11, k as u64);
        let s = random_symbols(&mut rng, Stratum::of_trial(k));
        // project a third of the draws onto the normal branch so the chain is exercised
        let s = if k % 3 == 0 && (s.slope() - 1.0).norm() > 1e-9 {
            let a = *s.slope();
            s.with_weight_rate(s.offset().conj() * (c(1.0, 0.0) - a) / (c(1.0, 0.0) - a.conj()))
        } else {
            s
        };
        let tol = CLASSIFY_TOL;
        if is_normal(&s, &tol) {
            assert!(is_cohyponormal(&s, &tol), "{s:?}");
            assert!(conjugation_for_normal(&s, &tol).is_ok(), "{s:?}");
        }
        if is_hermitian(&s, &tol) {
            assert!(is_normal(&s, &tol), "{s:?}");
        }
    }
}

#[test]
fn make_conjugation_on_full_grid() {
    for i in 0..100 {
        for j in 0..100 {
            let theta = std::f64::consts::TAU * i as f64 / 100.0;
            let r = 2.0 * j as f64 / 99.0;
            let t = make_conjugation(theta, r).unwrap();
            validate_conjugation(*t.rotation(), *t.shift(), *t.scale(), &CLASSIFY_TOL).unwrap();
        }
    }
}

#[test]
fn injectivity_on_random_polynomials() {
    for k in 0..30usize {
        let s = random_symbols(&mut trial_rng(5, k as u64), Stratum::of_trial(k));
        let worst = injectivity_probe(&s, 100, 16, k as u64).unwrap();
        assert!(worst > 0.0, "{s:?}: {worst}");
    }
}
