use super::*;

#[test]
fn signature_table() {
    let cells = [
        ((-1.0, -1.0), "-3"),
        ((-1.0, 0.0), "(0,2)"),
        ((-1.0, 1.0), "(1,2)"),
        ((0.0, -1.0), "(0,1)"),
        ((0.0, 0.0), "0"),
        ((0.0, 1.0), "(1,0)"),
        ((1.0, -1.0), "(2,1)"),
        ((1.0, 0.0), "(2,0)"),
        ((1.0, 1.0), "+3"),
    ];
    for ((h, h1), want) in cells {
        assert_eq!(signature_classify(h, h1).to_string(), want, "H={h}, H'={h1}");
    }
}

#[test]
fn closed_form_values() {
    // H = aR: exact cancellation.
    assert_eq!(mean_curvature_factor(2.0, 3.0, 1.5, 0.0), Some(0.0));
    // H = R + R^3 at R = 1: H = 2, H' = 4, H'' = 6, numerator 28.
    let f = RadialFunction::PlusCubic { c: 1.0 };
    assert_eq!(numerator(1.0, f.value(1.0), f.d1(1.0), f.d2(1.0)), 28.0);
    let c = mean_curvature_factor(1.0, 2.0, 4.0, 6.0).unwrap();
    assert!((c + 28.0 / 128.0).abs() < 1e-15);
    // The flow is -2 H' times the factor.
    assert!((flow_rhs(1.0, 2.0, 4.0, 6.0).unwrap() + 2.0 * 4.0 * c).abs() < 1e-15);
    assert_eq!(mean_curvature_factor(1.0, 0.0, 1.0, 0.0), None);
}

#[test]
fn discrete_factor_converges() {
    let f = RadialFunction::PlusCubic { c: 1.0 };
    let mut errs = Vec::new();
    for (nodes, stride) in [(17, 1), (33, 2), (65, 4)] {
        let prof = RadialProfile::sample(&f, 0.5, 2.0, nodes).unwrap();
        // Compare on the nodes shared by all three grids.
        let err = closed_form_mean_curvature(&prof)
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride == 0)
            .filter_map(|(i, c)| c.map(|(c, _)| (i, c)))
            .map(|(i, c)| {
                let r = prof.r[i];
                (c - mean_curvature_factor(r, f.value(r), f.d1(r), f.d2(r)).unwrap()).abs()
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.8, "{errs:?}");
    }
}

#[test]
fn linear_profile_is_stationary() {
    let f = RadialFunction::Linear { a: 1.0 };
    let prof = RadialProfile::sample(&f, 0.5, 2.0, 41).unwrap();
    let run = radial_run(prof.clone(), 100, None, 0.2, &f).unwrap();
    let last = run.profiles.last().unwrap();
    let drift = last.h.iter().zip(&prof.h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-10, "drift {drift:e}");
}

#[test]
fn bump_relaxes_toward_linear() {
    let bump = RadialFunction::SineBump { amp: 0.1, r_min: 0.5, r_max: 2.0 };
    let prof = RadialProfile::sample(&bump, 0.5, 2.0, 16).unwrap();
    let run = radial_run(prof, 4000, None, 0.2, &RadialFunction::Linear { a: 1.0 }).unwrap();
    let devs: Vec<f64> = run.monitor.iter().map(|r| r.sup_dev).collect();
    assert!(devs.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!(devs.last().unwrap() < &(0.5 * devs[0]));
    assert!(run.monitor.iter().all(|r| r.min_h > 0.0 && r.min_h_prime > 0.0));
}

#[test]
fn oversized_step_is_halved() {
    let f = RadialFunction::PlusCubic { c: 0.2 };
    let prof = RadialProfile::sample(&f, 0.5, 2.0, 31).unwrap();
    let limit = prof.cfl_limit(0.2);
    let out = radial_flow_step(&prof, 4.0 * limit, 0.2, 0.0).unwrap();
    assert_eq!(out.rejections, 2);
    assert!(out.dt <= limit);
    assert!(radial_flow_step(&prof, 1e6 * limit, 0.2, 0.0).is_err());
}
