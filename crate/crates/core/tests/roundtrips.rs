use num_complex::Complex64;
use proptest::prelude::*;

use tomophase::ct_recon::ct_reconstruct_detailed;
use tomophase::io::Codec;
use tomophase::schemes::{check_strong_ct, random_scheme, DEFAULT_DISTINCT_TOLERANCE};
use tomophase::spectral::{fourier_slice_residual, frequency_grid};
use tomophase::{project, random_object, Family, Object3D, ObjectKind, Projection2D};

fn family(i: u8) -> Family {
    [Family::X, Family::Y, Family::Z][i as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reconstruction_inverts_projection(n in 2usize..=4, fam in 0u8..3, seed in any::<u64>(), theta in -3.0f64..3.0) {
        let p = 2 * n - 1;
        let s = random_scheme(n, family(fam), seed).unwrap();
        prop_assume!(check_strong_ct(&s, DEFAULT_DISTINCT_TOLERANCE).pass);
        let f = random_object(n, p, &ObjectKind::ComplexGaussian, seed ^ 1).unwrap();
        let data: Vec<Projection2D> = s.directions().iter().map(|d| project(&f, d).unwrap()).collect();
        let r = ct_reconstruct_detailed(&data, &s, DEFAULT_DISTINCT_TOLERANCE).unwrap();
        let tol = 1e-8 * f64::max(1.0, r.max_condition / 1e6);
        prop_assert!(r.object.max_abs_diff(&f) <= tol);

        // projecting the reconstruction gives back the data
        for (d, g) in s.directions().iter().zip(&data) {
            prop_assert!(project(&r.object, d).unwrap().max_abs_diff(g) <= tol * p as f64);
        }

        let phase = Complex64::from_polar(1.0, theta);
        let rotated: Vec<Projection2D> = data.iter().map(|g| g.scaled(phase)).collect();
        let h = ct_reconstruct_detailed(&rotated, &s, DEFAULT_DISTINCT_TOLERANCE).unwrap().object;
        prop_assert!(h.max_abs_diff(&f.scaled(phase)) <= tol);
    }

    #[test]
    fn slice_theorem_holds_for_any_odd_padding(n in 2usize..=4, extra in 0usize..3, fam in 0u8..3,
                                               a in -1.0f64..=1.0, b in -1.0f64..=1.0, seed in any::<u64>()) {
        let p = 2 * n - 1 + 2 * extra;
        let f = random_object(n, p, &ObjectKind::ComplexGaussian, seed).unwrap();
        let d = tomophase::Direction::new(family(fam), a, b).unwrap();
        prop_assert!(fourier_slice_residual(&f, &d, &frequency_grid(p)).unwrap() <= 1e-9);
    }

    #[test]
    fn artifacts_round_trip(n in 1usize..=4, seed in any::<u64>()) {
        let f = random_object(n.max(2), 2 * n.max(2) - 1, &ObjectKind::UnitPhases, seed).unwrap();
        let back = Object3D::decode(&f.encode()).unwrap();
        prop_assert_eq!(back.values().len(), f.values().len());
        for (x, y) in back.values().iter().zip(f.values()) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}
