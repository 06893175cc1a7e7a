use num_complex::Complex64;
use proptest::prelude::*;

use frame_lr::fock_sim::{car_check, fock_representation_expectation, mode_operators, quasifree_expectation, ModeBasis};
use frame_lr::format::sig15;
use frame_lr::frame_analysis::{neumann_certificate, CertificateTuning};
use frame_lr::interactions::{density_density, Factor, Interaction, MonomialDescriptor};
use frame_lr::lattice::{LatticeParams, Site, Window};
use frame_lr::linalg::CMatrix;
use frame_lr::magnetic_frame::{overlap, MagneticParams};

fn site() -> impl Strategy<Value = Site> {
    (0u32..3, -6i64..=6, -6i64..=6).prop_map(|(r, i, j)| Site::new(r, i, j))
}

fn chain(n: i64, alpha: f64) -> (Window, MagneticParams) {
    let lat = LatticeParams::new(alpha, alpha, 0, 0.0).unwrap();
    let w = Window::from_sites(lat, (0..n).map(|i| Site::new(0, i, 0))).unwrap();
    let p = MagneticParams::for_window(&w, 1.0).unwrap();
    (w, p)
}

proptest! {
    #[test]
    fn site_text_round_trip(s in site()) {
        let back: Site = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn sig15_round_trip(x in -1e12f64..1e12) {
        let back: f64 = sig15(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-14 * x.abs());
    }

    #[test]
    fn overlap_is_hermitian_and_gaussian(a in site(), b in site(), alpha in 0.5f64..2.5, ell in 0.5f64..2.0) {
        let p = MagneticParams::new(ell, alpha, alpha, 40).unwrap();
        let ab = overlap(&a, &b, &p);
        let ba = overlap(&b, &a, &p);
        prop_assert!((ab - ba.conj()).norm() < 1e-15);
        if a.r == b.r {
            let (x, y) = (p.position(&a), p.position(&b));
            let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
            prop_assert!((ab.norm() - (-d2 / (4.0 * ell * ell)).exp()).abs() < 1e-14);
        } else {
            prop_assert_eq!(ab, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn certificate_rate_is_admissible(
        lambda in 0.05f64..2.0,
        ratio in 0.05f64..1.0,
        s_max in 0.5f64..5.0,
        m_eps in 1.0f64..200.0,
        p in 1u32..4,
    ) {
        let t = CertificateTuning::defaults(1.0, lambda);
        let c = neumann_certificate(&t, ratio * s_max, s_max, p, m_eps).unwrap();
        prop_assert!(c.lambda_p > 0.0 && c.lambda_p <= t.theta);
        prop_assert!(c.r_p >= 0.0 && c.r_p < 1.0);
        prop_assert!(c.a_p >= 2.0 / s_max.powi(p as i32) * (1.0 - 1e-12));
    }

    #[test]
    fn interaction_text_round_trip(n in 2i64..6, f0 in 0.1f64..3.0, mu in 0.1f64..3.0) {
        let (w, _) = chain(n, 1.0);
        let i = density_density(f0, mu, &w).unwrap();
        let text = i.to_text();
        let back = Interaction::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.len(), (n * (n - 1) / 2) as usize);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn car_holds_for_random_chains(n in 2i64..6, alpha in 0.4f64..2.5) {
        let (w, p) = chain(n, alpha);
        let basis = ModeBasis::from_window(&w, &p).unwrap();
        let r = car_check(&mode_operators(&basis).unwrap());
        prop_assert!(r.mixed < 1e-12 && r.same < 1e-12, "{:?}", r);
    }

    #[test]
    fn quasifree_matches_fock(
        seed in proptest::collection::vec(-1.0f64..1.0, 32),
        rank in 1usize..4,
        picks in proptest::collection::vec(0usize..4, 4),
        n in 1usize..3,
    ) {
        let (w, p) = chain(4, 1.0);
        let basis = ModeBasis::from_window(&w, &p).unwrap();
        let m = basis.n_modes();
        let a = CMatrix::from_fn(m, m, |i, j| Complex64::new(seed[(i * m + j) % 32], seed[(i * m + j + 7) % 32]));
        let q = (a + CMatrix::identity(m, m) * Complex64::new(2.5, 0.0)).qr().q();
        let cols = q.columns(0, rank.min(m)).into_owned();
        let proj = &cols * cols.adjoint();
        let mut f: Vec<Factor> = (0..n).map(|k| Factor { site: w.sites()[picks[k]], dagger: true }).collect();
        f.extend((0..n).map(|k| Factor { site: w.sites()[picks[3 - k]], dagger: false }));
        let mono = MonomialDescriptor::new(f).unwrap();
        let det = quasifree_expectation(&proj, &basis, &mono).unwrap();
        let fock = fock_representation_expectation(&proj, &basis, &mono).unwrap();
        prop_assert!((det - fock).norm() < 1e-10);
    }
}
