mod common;

use common::*;
use proptest::prelude::*;
use telesim::channels::{classify, CanonicalClass, CanonicalForm, GaussianChannel};
use telesim::convergence::{
    b1_witness_bound, decide_uniform, diamond_upper_bound, logspace, nonuniform_witness, InputFrame,
};
use telesim::Tolerances;

const FULL_RANK: [CanonicalClass; 6] = [
    CanonicalClass::A1,
    CanonicalClass::A2,
    CanonicalClass::B2,
    CanonicalClass::CAtt,
    CanonicalClass::CAmp,
    CanonicalClass::D,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn uniform_iff_full_rank_noise(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (form, ch) = random_channel(&mut g);
        let verdict = decide_uniform(&ch).unwrap();
        let rank = ch.n().symmetric_eigenvalues().iter().filter(|&&l| l > 1e-10 * ch.n().abs().max().max(1.0)).count();
        prop_assert_eq!(verdict.uniform, rank == 2);
        prop_assert_eq!(verdict.uniform, !matches!(form.class, CanonicalClass::B1 | CanonicalClass::B2Id));
        prop_assert_eq!(verdict.class, form.class);
    }

    #[test]
    fn bound_decreases_and_vanishes(seed in any::<u64>()) {
        let mut g = rng(seed);
        let class = FULL_RANK[(seed % 6) as usize];
        let mut form = random_form_of(class, &mut g);
        // ω ≤ 10 with a bounded input frame
        form.noise_param = form.noise_param.min(4.5);
        let ch = conjugate(&form, &mut g);
        let grid = logspace(1.1, 1e6, 25);
        let bounds: Vec<f64> = grid.iter().map(|&mu| diamond_upper_bound(&ch, mu, InputFrame::Derived).unwrap()).collect();
        prop_assert!(bounds.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{bounds:?}");
        let at_1e5 = diamond_upper_bound(&ch, 1e5, InputFrame::Derived).unwrap();
        prop_assert!(at_1e5 < 1e-2, "{class} {form:?} -> {at_1e5}");
    }

    #[test]
    fn derived_frame_matches_explicit_squeezing(seed in any::<u64>(), log_mu in 0.1f64..6.0) {
        let mut g = rng(seed);
        let class = [CanonicalClass::CAtt, CanonicalClass::CAmp, CanonicalClass::D][(seed % 3) as usize];
        let form = random_form_of(class, &mut g);
        let s_a = random_symplectic1(&mut g, 2.0);
        let bm = telesim::symplectic::bloch_messiah_2x2(&s_a).unwrap();
        let c = GaussianChannel::from_canonical(&form);
        let ch = GaussianChannel::raw(c.t() * to_matrix2(s_a.matrix()), *c.n(), *c.d());
        let mu = 10f64.powf(log_mu);
        let derived = diamond_upper_bound(&ch, mu, InputFrame::Derived).unwrap();
        let explicit = diamond_upper_bound(&ch, mu, InputFrame::Squeezing(bm.r)).unwrap();
        prop_assert!((derived - explicit).abs() < 1e-7 * (1.0 + explicit), "{derived} vs {explicit}");
    }
}

#[test]
fn rank_deficient_channels_have_large_witnesses() {
    for mu in [1.5, 5.0, 50.0, 1e3] {
        assert!(nonuniform_witness(mu, 1e6).unwrap() > 1.9, "identity at {mu}");
        // the B1 fidelity decays only as μ̃^(-1/4), with a prefactor growing like 1/ξ
        assert!(b1_witness_bound(mu, 1e10, 1.0, 0.0).unwrap() > 1.9, "B1 at {mu}");
    }
    for mu in [1.25, 1.5] {
        assert!(b1_witness_bound(mu, 1e6, 1.0, 0.0).unwrap() > 1.9, "B1 at {mu}");
    }
    let b1 = GaussianChannel::from_canonical(&CanonicalForm::new(CanonicalClass::B1, 1.0, 0.0).unwrap());
    assert!(!decide_uniform(&b1).unwrap().uniform);
    assert!(diamond_upper_bound(&b1, 10.0, InputFrame::Derived).unwrap_err().is_unsupported());
}

#[test]
fn table_rows_classify_and_decide() {
    let tol = Tolerances::default();
    for class in CanonicalClass::ALL {
        let form = random_form_of(class, &mut rng(7));
        let ch = GaussianChannel::from_canonical(&form);
        assert_eq!(classify(&ch, &tol).unwrap().class, class);
        assert_eq!(decide_uniform(&ch).unwrap().uniform, !matches!(class, CanonicalClass::B1 | CanonicalClass::B2Id));
    }
}
