use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use mcf_core::ambient::{
    background_frame, tcc_estimate, Ambient, Factor, FlatPseudoEuclidean, NeutralTangentBundle, ProductMetric, Region,
};
use mcf_core::linalg::random::{random_onm, random_rotation};
use mcf_core::linalg::{
    check_onm, frame_norm_bounds, inertia, onm_normal_form, reconstruct, FramePair, PseudoOrthogonalMatrix, Signature,
};
use mcf_core::radial::{radial_run, signature_classify, RadialFunction, RadialProfile};
use mcf_core::submanifold::{init, Grid};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sig() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5, 1usize..=3)
}

fn product(a: &PseudoOrthogonalMatrix, b: &PseudoOrthogonalMatrix) -> PseudoOrthogonalMatrix {
    // Composition in the assembled (n+m) x (n+m) form: A eta B.
    let eta = a.sig.eta();
    let full = a.assemble() * eta * b.assemble();
    PseudoOrthogonalMatrix::from_assembled(a.sig, &full).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_form_round_trips((n, m) in sig(), seed in any::<u64>(), rap in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mat = random_onm(&mut rng, Signature::new(n, m).unwrap(), rap);
        let nf = onm_normal_form(&mat).unwrap();
        prop_assert!(reconstruct(&nf).max_abs_diff(&mat) <= 1e-10);
        prop_assert!(nf.pythagorean_defect() <= 1e-10);
        prop_assert!(nf.trace_defect() <= 1e-10);
        for r in [&nf.r_tan, &nf.r_nor, &nf.s_tan, &nf.s_nor] {
            let k = r.nrows();
            prop_assert!((r.transpose() * r - DMatrix::<f64>::identity(k, k)).amax() <= 1e-12);
        }
    }

    #[test]
    fn group_is_closed_and_tilt_is_at_least_root_m((n, m) in sig(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Signature::new(n, m).unwrap();
        let a = random_onm(&mut rng, s, 1.0);
        let b = random_onm(&mut rng, s, 1.0);
        let ab = product(&a, &b);
        prop_assert!(check_onm(&ab, 1e-9), "deviation {}", ab.onm_deviation());
        prop_assert!(ab.tilt() >= (m as f64).sqrt() - 1e-12);
    }

    #[test]
    fn adapted_frames_obey_norm_bounds((n, m) in (1usize..=4, 1usize..=3), seed in any::<u64>(), rap in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Signature::new(n, m).unwrap();
        let space = FlatPseudoEuclidean::new(n, m).unwrap();
        let p = DVector::zeros(s.dim());
        let mat = random_onm(&mut rng, s, rap);
        let fp = FramePair::from_background(s, p.clone(), space.metric(&p), background_frame(&space, &p).unwrap(), &mat).unwrap();
        prop_assert!(fp.orthonormality_defect() <= 1e-8);
        prop_assert!(frame_norm_bounds(&fp).bounds_hold);
    }

    #[test]
    fn radial_signature_is_inertia_of_the_induced_form(h in -2.0f64..2.0, h1 in -2.0f64..2.0) {
        let class = signature_classify(h, h1);
        let (pos, neg, _) = inertia(&DMatrix::from_diagonal(&DVector::from_row_slice(&[h1, h, h])), 0.0);
        prop_assert_eq!((class.positive as usize, class.negative as usize), (pos, neg));
        prop_assert_eq!(signature_classify(3.0 * h, 0.5 * h1), class);
    }

    #[test]
    fn product_curvature_has_tensor_symmetries(t1 in 0.3f64..2.8, p1 in -3.0f64..3.0, t2 in 0.3f64..2.8, p2 in -3.0f64..3.0) {
        let space = ProductMetric::new(Factor::Sphere { radius: 1.0 }, Factor::Sphere { radius: SQRT_2 }).unwrap();
        let x = DVector::from_row_slice(&[t1, p1, t2, p2]);
        prop_assert!(space.curvature(&x).symmetry_defect() <= 1e-10);
    }

    #[test]
    fn flat_ambients_have_zero_timelike_curvature(seed in any::<u64>(), (n, m) in (1usize..=3, 1usize..=3)) {
        let space = FlatPseudoEuclidean::new(n, m).unwrap();
        let region = Region::new(vec![-1.0; n + m], vec![1.0; n + m]).unwrap();
        prop_assert!(tcc_estimate(&space, &region, 50, 1.5, seed).unwrap().k_est.abs() <= 1e-12);
        let neutral = NeutralTangentBundle::new(n).unwrap();
        let region = Region::new(vec![-1.0; 2 * n], vec![1.0; 2 * n]).unwrap();
        prop_assert!(tcc_estimate(&neutral, &region, 50, 1.5, seed).unwrap().k_est.abs() <= 1e-12);
    }

    #[test]
    fn rotations_preserve_the_tilt((n, m) in sig(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mat = random_onm(&mut rng, Signature::new(n, m).unwrap(), 1.5);
        let rotated = mat.rotated(
            &random_rotation(&mut rng, n),
            &random_rotation(&mut rng, m),
            &random_rotation(&mut rng, n),
            &random_rotation(&mut rng, m),
        );
        prop_assert!((rotated.tilt() - mat.tilt()).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_radial_profiles_are_stationary(a in 0.3f64..3.0) {
        let f = RadialFunction::Linear { a };
        let prof = RadialProfile::sample(&f, 0.5, 2.0, 21).unwrap();
        let run = radial_run(prof.clone(), 20, None, 0.2, &f).unwrap();
        let last = run.profiles.last().unwrap();
        let drift = last.h.iter().zip(&prof.h).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(drift <= 1e-10);
    }

    #[test]
    fn positive_norms_are_nonnegative(amp in 0.0f64..0.4, sx in -0.3f64..0.3, wave in 1u8..3) {
        let grid = Grid::periodic(2, 12, 2.0 * PI).unwrap();
        let slope = DMatrix::from_row_slice(1, 2, &[sx, 0.0]);
        let ambient: Arc<dyn Ambient> = Arc::new(FlatPseudoEuclidean::new(2, 1).unwrap());
        let patch = init::sine_graph(ambient, grid, &[0.0; 3], &[amp], wave as f64, &slope).unwrap();
        let geom = patch.geometry().unwrap();
        for (fr, cv) in geom.frames.iter().zip(&geom.curvature) {
            prop_assert!(cv.h2 >= 0.0 && cv.a2 >= 0.0);
            prop_assert!(fr.tilt >= 1.0 - 1e-12);
        }
    }
}
