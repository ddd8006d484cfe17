use std::f64::consts::PI;

use proptest::prelude::*;
use qsflow::sphere::{random_band_limited, real_harmonic, SpectralCoefficients};
use qsflow::{ScalarField, SphereGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(l_max: usize, seed: u64) -> ScalarField {
    let grid = SphereGrid::with_band_limit(l_max).unwrap();
    random_band_limited(&grid, 0, l_max, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_is_identity(l_max in 2usize..20, seed in any::<u64>()) {
        let f = field(l_max, seed);
        let back = ScalarField::from_coefficients(f.grid(), &f.coefficients());
        prop_assert!((&back - &f).norm_inf() <= 1e-12 * (1.0 + f.norm_inf()));
    }

    #[test]
    fn laplacian_integrates_to_zero(l_max in 2usize..20, seed in any::<u64>()) {
        let f = field(l_max, seed);
        prop_assert!(f.laplacian().integrate().abs() <= 1e-10 * f.norm_inf());
    }

    #[test]
    fn harmonics_are_eigenfunctions(l_max in 2usize..20, pick in 0.0f64..1.0, mpick in 0.0f64..1.0) {
        let grid = SphereGrid::with_band_limit(l_max).unwrap();
        let l = ((l_max + 1) as f64 * pick) as usize;
        let m = ((2 * l + 1) as f64 * mpick) as i64 - l as i64;
        let y = ScalarField::harmonic(&grid, l, m);
        let resid = (&y.laplacian() + &y.scale((l * (l + 1)) as f64)).norm_inf();
        prop_assert!(resid <= 1e-10 * y.norm_inf(), "l={} m={} resid={}", l, m, resid);
    }

    #[test]
    fn coefficients_are_inner_products(l_max in 2usize..10, seed in any::<u64>()) {
        let f = field(l_max, seed);
        let c = f.coefficients();
        for (l, m, value) in c.iter() {
            let y = ScalarField::harmonic(f.grid(), l, m);
            prop_assert!(((&f * &y).integrate() - value).abs() <= 1e-12 * (1.0 + f.norm_inf()));
        }
    }

    #[test]
    fn laplacian_is_self_adjoint(l_max in 2usize..16, a in any::<u64>(), b in any::<u64>()) {
        let f = field(l_max, a);
        let g = field(l_max, b);
        let lhs = (&f.laplacian() * &g).integrate();
        let rhs = (&f * &g.laplacian()).integrate();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }
}

#[test]
fn product_of_band_limited_fields_integrates_exactly() {
    // Products have degree up to 2L, which the grid still integrates.
    let grid = SphereGrid::with_band_limit(6).unwrap();
    let y = ScalarField::harmonic(&grid, 6, 4);
    assert!(((&y * &y).integrate() - 1.0).abs() < 1e-13);
    let z = ScalarField::harmonic(&grid, 5, -3);
    assert!((&y * &z).integrate().abs() < 1e-13);
}

#[test]
fn projection_drops_high_degrees() {
    let grid = SphereGrid::with_band_limit(4).unwrap();
    let high = ScalarField::from_fn(&grid, |t, p| real_harmonic(6, 2, t, p));
    let low = ScalarField::harmonic(&grid, 2, 1);
    let (p, residual) = (&high + &low).project_with_residual();
    assert!((&p - &low).norm_inf() < 1e-12);
    assert!((residual - 0.5).abs() < 1e-10);
    let mut c = SpectralCoefficients::zeros(4);
    c.set(0, 0, (4.0 * PI).sqrt());
    let one = ScalarField::from_coefficients(&grid, &c);
    assert!(one.add_scalar(-1.0).norm_inf() < 1e-14);
}
