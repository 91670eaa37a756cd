//! Seeded random generators shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use telesim::channels::{CanonicalClass, CanonicalForm, GaussianChannel};
use telesim::symplectic::{GaussianState, SymplecticMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_matrix2(m: &DMatrix<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// Rotation, squeezing in `[1/max_squeeze, max_squeeze]`, rotation.
pub fn random_symplectic1(rng: &mut impl Rng, max_squeeze: f64) -> SymplecticMatrix {
    let r = max_squeeze.powf(rng.gen_range(-1.0..=1.0));
    let a = SymplecticMatrix::rotation(rng.gen_range(0.0..std::f64::consts::TAU));
    let b = SymplecticMatrix::rotation(rng.gen_range(0.0..std::f64::consts::TAU));
    a.then_after(&SymplecticMatrix::squeezer(r).unwrap()).then_after(&b)
}

pub fn random_symplectic2x2(rng: &mut impl Rng) -> Matrix2<f64> {
    to_matrix2(random_symplectic1(rng, 2.0).matrix())
}

/// Local operations, a beam splitter and a two-mode squeezer, for one or two modes.
pub fn random_symplectic(modes: usize, rng: &mut impl Rng) -> SymplecticMatrix {
    match modes {
        1 => random_symplectic1(rng, 2.0),
        2 => {
            let local = |rng: &mut _| random_symplectic1(rng, 1.5).direct_sum(&random_symplectic1(rng, 1.5));
            let bs = SymplecticMatrix::beam_splitter(rng.gen_range(0.0..=1.0)).unwrap();
            let tms = SymplecticMatrix::two_mode_squeezer(rng.gen_range(-0.6..0.6));
            local(rng).then_after(&bs).then_after(&local(rng)).then_after(&tms)
        }
        _ => panic!("only one or two modes"),
    }
}

/// `S diag(ν) Sᵀ` with `ν ∈ [1, max_nu]` and a normally distributed mean.
pub fn random_state(modes: usize, max_nu: f64, rng: &mut impl Rng) -> GaussianState {
    let s = random_symplectic(modes, rng);
    let mut d = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        let nu = rng.gen_range(1.0..=max_nu);
        d[(2 * k, 2 * k)] = nu;
        d[(2 * k + 1, 2 * k + 1)] = nu;
    }
    let cm = s.matrix() * d * s.matrix().transpose();
    let cm = 0.5 * (&cm + cm.transpose());
    let mean = DVector::from_fn(2 * modes, |_, _| rng.gen_range(-1.5..1.5));
    GaussianState::new(mean, cm).unwrap()
}

pub fn random_form_of(class: CanonicalClass, rng: &mut impl Rng) -> CanonicalForm {
    let nbar = rng.gen_range(0.0..2.0);
    let (tau, noise) = match class {
        CanonicalClass::CAtt => (rng.gen_range(0.05..0.95), nbar),
        CanonicalClass::CAmp => (rng.gen_range(1.05..3.0), nbar),
        CanonicalClass::D => (rng.gen_range(-2.0..-0.05), nbar),
        CanonicalClass::A1 | CanonicalClass::A2 => (0.0, nbar),
        CanonicalClass::B1 | CanonicalClass::B2Id => (1.0, 0.0),
        CanonicalClass::B2 => (1.0, rng.gen_range(0.05..2.0)),
    };
    CanonicalForm::new(class, tau, noise).unwrap()
}

pub fn random_form(rng: &mut impl Rng) -> CanonicalForm {
    let class = CanonicalClass::ALL[rng.gen_range(0..CanonicalClass::ALL.len())];
    random_form_of(class, rng)
}

/// `U_B ∘ C ∘ U_A` plus a random displacement.
pub fn conjugate(form: &CanonicalForm, rng: &mut impl Rng) -> GaussianChannel {
    let c = GaussianChannel::from_canonical(form);
    let (sa, sb) = (random_symplectic2x2(rng), random_symplectic2x2(rng));
    let n = sb * c.n() * sb.transpose();
    let d = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    GaussianChannel::raw(sb * c.t() * sa, 0.5 * (n + n.transpose()), d)
}

pub fn random_channel(rng: &mut impl Rng) -> (CanonicalForm, GaussianChannel) {
    let form = random_form(rng);
    let ch = conjugate(&form, rng);
    (form, ch)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}
