use super::*;
use crate::problem::{block_problem, random_problem};
use crate::splitting::{diag_multiple, default_triangular_splitting, shift_splitting, trivial_splitting};

fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    vec_norm2(&d) / vec_norm2(x).max(vec_norm2(y)).max(f64::MIN_POSITIVE)
}

fn assert_same_trajectory(p: &MethodPreset, q: &MethodPreset, b: &Matrix, c: &[f64], x0: &[f64], y0: &[f64]) {
    let s = p.trajectory(b, c, x0, y0, 50).unwrap();
    let t = q.trajectory(b, c, x0, y0, 50).unwrap();
    for (k, (u, v)) in s.iter().zip(&t).enumerate() {
        assert!(rel_diff(u, v) <= 1e-12, "{} vs {} differ at step {k}: {}", p.name, q.name, rel_diff(u, v));
    }
}

#[test]
fn residual_examples() {
    let p = block_problem(5, 5).unwrap();
    let x = p.x_star.clone().unwrap();
    assert!(residual(&p.a, &p.b, &p.c, &x).unwrap() <= 1e-15);
    let zero = vec![0.0; 25];
    assert_eq!(residual(&p.a, &p.b, &p.c, &zero).unwrap(), 1.0);
    assert!(matches!(
        residual(&p.a, &p.b, &zero, &x),
        Err(Error::ZeroRightHandSide { absolute }) if absolute > 0.0
    ));
}

#[test]
fn linear_case_converges_in_one_step() {
    let a = Matrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 5.0, 2.0], [0.0, 2.0, 6.0]]);
    let b = Matrix::zeros(3, 3);
    let c = vec![1.0, -2.0, 3.0];
    let cfg = collapsed_config(trivial_splitting(&a).unwrap()).unwrap();
    let r = gnms_solve(&cfg, &a, &b, &c, &[0.0; 3], &c).unwrap();
    assert_eq!(r.iterations, 1);
    assert!(r.converged());
    assert_eq!(r.residual_history.len(), 2);

    let r = fpi_solve(&a, &b, &c, 0.7, &[0.0; 3], &c, 1e-8, 100).unwrap();
    assert_eq!(r.iterations, 1);
    let r = rms_solve(&trivial_splitting(&a).unwrap(), &a, &b, &c, 0.7, &[0.0; 3], &c, 1e-8, 100).unwrap();
    assert_eq!(r.iterations, 1);
}

#[test]
fn two_by_two_reaches_constructed_solution() {
    let a = Matrix::from_rows(&[[3.0, 0.0], [0.0, 3.0]]);
    let b = Matrix::from_rows(&[[-2.0, 1.0], [1.0, 2.0]]);
    // c = A(1, −1) − B|(1, −1)| = (3+2−1, −3−1−2)
    let c = vec![4.0, -6.0];
    let p = preset_picard(&a).unwrap();
    let r = p.solve(&b, &c, Some(&[0.0, 0.0]), None).unwrap();
    assert!(r.converged());
    assert!(rel_diff(&r.x_final, &[1.0, -1.0]) < 1e-8);
    let g = preset_gnms(&a, 1.0).unwrap();
    let r = g.solve(&b, &c, Some(&[0.0, 0.0]), None).unwrap();
    assert!(rel_diff(&r.x_final, &[1.0, -1.0]) < 1e-8);
}

#[test]
fn two_forms_of_the_update_agree() {
    for seed in 0..5 {
        let p = random_problem(20, seed, 0.5).unwrap();
        for tau in [0.3, 1.0, 1.7] {
            let g = preset_gnms(&p.a, tau).unwrap();
            let Scheme::Gnms(cfg) = &g.scheme else { unreachable!() };
            let h = MethodPreset {
                scheme: Scheme::GnmsReformulated(cfg.clone()),
                ..g.clone()
            };
            let x0 = default_start(20);
            assert_same_trajectory(&g, &h, &p.b, &p.c, &x0, &p.c);
        }
    }
    let p = block_problem(10, 10).unwrap();
    let g = preset_gnms(&p.a, 0.5).unwrap();
    let Scheme::Gnms(cfg) = &g.scheme else { unreachable!() };
    let x0 = default_start(100);
    let r1 = gnms_solve(cfg, &p.a, &p.b, &p.c, &x0, &p.c).unwrap();
    let r2 = gnms_solve_reformulated(cfg, &p.a, &p.b, &p.c, &x0, &p.c).unwrap();
    assert_eq!(r1.iterations, r2.iterations);
    assert_eq!(r1.termination, r2.termination);
    assert!(rel_diff(&r1.x_final, &r2.x_final) <= 1e-12);
}

#[test]
fn reduction_chain() {
    for seed in 10..13 {
        let p = random_problem(20, seed, 0.5).unwrap();
        let a = &p.a;
        let x0 = default_start(20);
        let omega = diag_multiple(a, 0.5);
        let zero = Matrix::banded_zeros(20, 0, 0);
        let inner = default_triangular_splitting(a).unwrap();

        // GNMS with Q = Q1 = I, Q2 = 0, τ = 1, M = M̄ + Ω, N = N̄ + Ω is NMS
        let nms_split = crate::splitting::nms_splitting(&inner, &omega).unwrap();
        let gnms = preset_gnms_with(a, nms_split, identity_splitting_for(20), 1.0).unwrap();
        let nms = preset_nms(a, &inner, &omega).unwrap();
        assert_same_trajectory(&gnms, &nms, &p.b, &p.c, &x0, &p.c);

        // NMS with M̄ = A, N̄ = 0 is MN
        let nms_trivial = preset_nms(a, &trivial_splitting(a).unwrap(), &omega).unwrap();
        let mn = preset_mn(a, &omega).unwrap();
        assert_same_trajectory(&nms_trivial, &mn, &p.b, &p.c, &x0, &p.c);

        // MN with Ω = 0 is Picard
        let mn0 = preset_mn(a, &zero).unwrap();
        let picard = preset_picard(a).unwrap();
        assert_same_trajectory(&mn0, &picard, &p.b, &p.c, &x0, &p.c);

        // RNMS at θ = 1 is NMS; RMN at θ = 1 is MN
        let rnms = preset_rnms(a, &inner, 1.0, &omega).unwrap();
        assert_same_trajectory(&rnms, &nms, &p.b, &p.c, &x0, &p.c);
        let rmn = preset_rmn(a, 1.0, &omega).unwrap();
        assert_same_trajectory(&rmn, &mn, &p.b, &p.c, &x0, &p.c);

        // literal SSMN is NMS with M̄ = (A + Ω̃)/2, N̄ = (Ω̃ − A)/2, Ω = 0
        let ssmn = preset_ssmn(a, &omega).unwrap();
        let half = shift_splitting(a, &omega).unwrap();
        let nms_shift = preset_nms(a, &half, &zero).unwrap();
        assert_same_trajectory(&ssmn, &nms_shift, &p.b, &p.c, &x0, &p.c);
    }
}

fn identity_splitting_for(n: usize) -> Splitting {
    crate::splitting::identity_splitting(n).unwrap()
}

#[test]
fn rms_at_unit_tau_is_lagged_picard() {
    let p = random_problem(15, 4, 0.6).unwrap();
    let x0 = default_start(15);
    let rms = preset_rms(&p.a, trivial_splitting(&p.a).unwrap(), 1.0).unwrap();
    let picard = preset_picard(&p.a).unwrap();
    let s = rms.trajectory(&p.b, &p.c, &x0, &p.c, 30).unwrap();
    let t = picard.trajectory(&p.b, &p.c, &s[0], &p.c, 29).unwrap();
    for (u, v) in s[1..].iter().zip(&t) {
        assert!(rel_diff(u, v) <= 1e-12);
    }
}

#[test]
fn converged_reports_pass_the_residual_check() {
    let p = block_problem(12, 12).unwrap();
    let registry = MethodRegistry::with_builtins();
    for name in registry.names() {
        let m = registry.build(name, &p.a, &MethodParams::default()).unwrap();
        let r = m.solve(&p.b, &p.c, None, None).unwrap();
        assert!(r.converged(), "{name}: {:?}", r.termination);
        assert_eq!(r.residual_history.len(), r.iterations + 1);
        assert!(residual(&p.a, &p.b, &p.c, &r.x_final).unwrap() <= DEFAULT_TOL);
        assert_eq!(r.final_residual(), residual(&p.a, &p.b, &p.c, &r.x_final).unwrap());
        assert!(rel_diff(&r.x_final, p.x_star.as_ref().unwrap()) < 1e-6);
        assert_eq!(r.y_final.is_some(), m.scheme.uses_y());
    }
}

#[test]
fn divergence_and_iteration_cap() {
    let a = Matrix::identity(2);
    let b = Matrix::from_rows(&[[3.0, 0.0], [0.0, 3.0]]);
    let c = vec![1.0, 1.0];
    let r = preset_picard(&a).unwrap().solve(&b, &c, Some(&[1.0, 1.0]), None).unwrap();
    assert_eq!(r.termination, Termination::Diverged);
    assert!(r.final_residual() > DIVERGENCE_THRESHOLD);

    let p = block_problem(6, 6).unwrap();
    let m = preset_mn(&p.a, &diag_multiple(&p.a, 2.0)).unwrap().with_stop(StopRule { tol: 1e-8, max_iter: 3 });
    let r = m.solve(&p.b, &p.c, None, None).unwrap();
    assert_eq!(r.termination, Termination::MaxIter);
    assert_eq!(r.iterations, 3);
}

#[test]
fn bad_inputs() {
    let a = Matrix::identity(2);
    assert!(matches!(preset_gnms(&a, 0.0), Err(Error::InvalidParameter(_))));
    assert!(matches!(preset_fpi(&a, -1.0), Err(Error::InvalidParameter(_))));
    let p = preset_picard(&a).unwrap();
    assert!(matches!(
        p.solve(&a, &[1.0, 2.0, 3.0], None, None),
        Err(Error::DimensionMismatch { .. })
    ));
    let registry = MethodRegistry::with_builtins();
    assert!(matches!(registry.get("newton"), Err(Error::UnknownMethod(_))));
    assert!(registry.get("GNMS").is_ok());
    let tau = MethodParams {
        tau: Some(1.0),
        ..Default::default()
    };
    assert!(registry.build("picard", &a, &tau).is_err());
}

#[test]
fn benchmark_counts_at_small_scale() {
    // m = 20 counts from an independent dense re-implementation of each scheme
    let p = block_problem(20, 20).unwrap();
    let r = preset_gnms(&p.a, 1.0).unwrap().solve(&p.b, &p.c, None, None).unwrap();
    assert_eq!(r.iterations, 9);
    let r = preset_fpi(&p.a, 0.8).unwrap().solve(&p.b, &p.c, None, None).unwrap();
    assert_eq!(r.iterations, 17);
    let r = preset_rms_default(&p.a, 0.99).unwrap().solve(&p.b, &p.c, None, None).unwrap();
    assert_eq!(r.iterations, 12);
}
