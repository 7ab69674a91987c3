use nalgebra::{DMatrix, DVector};

use super::*;

/// Exposes only the metric and time functions of a space, so that the
/// connection and curvature go through the finite-difference defaults.
struct MetricOnly<A>(A);

impl<A: Ambient> Ambient for MetricOnly<A> {
    fn name(&self) -> String {
        format!("fd[{}]", self.0.name())
    }
    fn signature(&self) -> Signature {
        self.0.signature()
    }
    fn metric(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0.metric(x)
    }
    fn time_functions(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.time_functions(x)
    }
    fn time_gradients(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0.time_gradients(x)
    }
}

fn spheres() -> ProductMetric {
    ProductMetric::new(
        Factor::Sphere { radius: 1.0 },
        Factor::Sphere { radius: 2f64.sqrt() },
    )
    .unwrap()
}

fn point(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

#[test]
fn flat_and_neutral_are_flat() {
    let flat = FlatPseudoEuclidean::new(2, 1).unwrap();
    let x = point(&[0.3, -1.0, 2.0]);
    assert_eq!(flat.curvature(&x).max_abs(), 0.0);
    let neutral = NeutralTangentBundle::new(3).unwrap();
    let y = point(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
    assert_eq!(neutral.christoffel(&y), Christoffel::zeros(6));
    // The finite-difference path agrees on a constant metric.
    assert!(christoffel_fd(&neutral, &y, H_AMB).max_abs_diff(&Christoffel::zeros(6)) < 1e-12);
    let (p, n, z) = crate::linalg::inertia(&neutral.metric(&y), 1e-12);
    assert_eq!((p, n, z), (3, 3, 0));
}

#[test]
fn product_curvature_splits() {
    let s = spheres();
    let x = point(&[1.1, 0.4, 1.9, -0.7]);
    let r = s.curvature(&x);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for e in 0..4 {
                    let f = [a, b, c, e].iter().filter(|&&i| i < 2).count();
                    if f != 0 && f != 4 {
                        assert_eq!(r.get(a, b, c, e), 0.0, "mixed component {a}{b}{c}{e}");
                    }
                }
            }
        }
    }
    assert!(r.symmetry_defect() < 1e-14);
}

#[test]
fn sphere_sign_convention() {
    let s = spheres();
    let th: f64 = 0.9;
    let x = point(&[th, 0.0, 1.2, 0.0]);
    let r = s.curvature(&x);
    let e1 = point(&[1.0, 0.0, 0.0, 0.0]);
    let e2 = point(&[0.0, 1.0 / th.sin(), 0.0, 0.0]);
    assert!((r.eval(&e1, &e2, &e1, &e2) - 1.0).abs() < 1e-14);
    // Second factor carries -g2 with g2 of curvature 1/2.
    let t1 = point(&[0.0, 0.0, 1.0 / 2f64.sqrt(), 0.0]);
    let t2 = point(&[0.0, 0.0, 0.0, 1.0 / (2f64.sqrt() * 1.2f64.sin())]);
    assert!((r.eval(&t1, &t2, &t1, &t2) + 0.5).abs() < 1e-14);
}

#[test]
fn finite_difference_curvature_matches_analytic() {
    let s = spheres();
    let fd = MetricOnly(s);
    for x in [point(&[1.1, 0.4, 1.9, -0.7]), point(&[0.6, 2.0, 1.3, 0.2])] {
        let exact = s.curvature(&x);
        let approx = fd.curvature(&x);
        let err = exact
            .data
            .iter()
            .zip(&approx.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Outer step 1e-3 on top of 1e-4 inner differences: O(1e-6) truncation.
        assert!(err < 1e-5, "curvature error {err:e}");
        assert!(approx.symmetry_defect() < 1e-5);
    }
}

#[test]
fn finite_difference_christoffels_converge_at_second_order() {
    let s = spheres();
    let x = point(&[0.8, 0.1, 2.1, 0.5]);
    let exact = s.christoffel(&x);
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| christoffel_fd(&s, &x, h).max_abs_diff(&exact))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.8, "order {order} from {errs:?}");
    }
}

#[test]
fn multitime_frames() {
    let flat = FlatPseudoEuclidean::new(2, 2).unwrap();
    let x = point(&[0.0, 1.0, 2.0, 3.0]);
    let mt = multitime_frame(&flat, &x).unwrap();
    assert_eq!(mt.psi, vec![1.0, 1.0]);
    assert_eq!(mt.t[0], point(&[0.0, 0.0, 1.0, 0.0]));

    let neutral = NeutralTangentBundle::new(3).unwrap();
    let y = DVector::from_element(6, 0.3);
    let mt = multitime_frame(&neutral, &y).unwrap();
    let g = neutral.metric(&y);
    for a in 0..3 {
        assert!((mt.psi[a] - 1.0).abs() < 1e-15);
        for b in 0..3 {
            let want = if a == b { -1.0 } else { 0.0 };
            assert!((mt.t[a].dot(&(&g * &mt.t[b])) - want).abs() < 1e-14);
        }
        assert!(mt.t[a][3 + a] > 0.0);
    }

    let s = spheres();
    let z = point(&[1.0, 0.0, 0.7, 0.0]);
    let mt = multitime_frame(&s, &z).unwrap();
    assert!((mt.psi[0] - 2f64.sqrt()).abs() < 1e-14);
    assert!((mt.psi[1] - 2f64.sqrt() * 0.7f64.sin()).abs() < 1e-14);
}

#[test]
fn background_frames_are_orthonormal() {
    let spaces: Vec<(Box<dyn Ambient>, DVector<f64>)> = vec![
        (Box::new(FlatPseudoEuclidean::new(3, 2).unwrap()), DVector::zeros(5)),
        (Box::new(NeutralTangentBundle::new(2).unwrap()), point(&[0.1, 0.2, 0.3, 0.4])),
        (Box::new(spheres()), point(&[1.0, 0.3, 2.0, 0.1])),
    ];
    for (space, x) in spaces {
        let bg = background_frame(space.as_ref(), &x).unwrap();
        let g = space.metric(&x);
        let eta = space.signature().eta();
        for a in 0..bg.len() {
            for b in 0..bg.len() {
                assert!((bg[a].dot(&(&g * &bg[b])) - eta[(a, b)]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn covariant_hessian_of_time_on_spheres() {
    // t = theta_2: Hess t = -Gamma^theta_{ab}, only (phi, phi) is nonzero.
    let s = spheres();
    let th: f64 = 1.2;
    let x = point(&[1.0, 0.0, th, 0.0]);
    let h = covariant_time_hessians(&s, &x);
    assert!((h[0][(3, 3)] - th.sin() * th.cos()).abs() < 1e-14);
    assert_eq!(h[0][(2, 2)], 0.0);
    let flat = FlatPseudoEuclidean::new(2, 1).unwrap();
    assert_eq!(covariant_time_hessians(&flat, &DVector::zeros(3))[0].amax(), 0.0);
}

#[test]
fn tcc_flat_is_zero() {
    let flat = FlatPseudoEuclidean::new(2, 2).unwrap();
    let region = Region::new(vec![-1.0; 4], vec![1.0; 4]).unwrap();
    let est = tcc_estimate(&flat, &region, 200, DEFAULT_MAX_RAPIDITY, 1).unwrap();
    assert_eq!(est.k_est, 0.0);
    let neutral = NeutralTangentBundle::new(2).unwrap();
    let est = tcc_estimate(&neutral, &region, 200, DEFAULT_MAX_RAPIDITY, 1).unwrap();
    assert_eq!(est.k_est, 0.0);
}

#[test]
fn tcc_rejects_bad_input() {
    let s = spheres();
    let region = Region::new(vec![0.5; 4], vec![2.5; 4]).unwrap();
    assert!(tcc_estimate(&s, &region, 0, 1.0, 0).is_err());
    let outside = Region::new(vec![-0.5; 4], vec![1.0; 4]).unwrap();
    assert!(matches!(
        tcc_estimate(&s, &outside, 10, 1.0, 0),
        Err(Error::OutsideDomain { .. })
    ));
}
