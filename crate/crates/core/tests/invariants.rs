use proptest::prelude::*;

use rmdom::phase::{build_scatter_matrices, PhaseFunction};
use rmdom::quadrature::{gauss_legendre, DirectionSet, QuadratureKind};
use rmdom::response::{
    assemble, beam_boundary, eigendecompose, interior, response_matrix, solve_boundary, BoundaryData,
};
use rmdom::solver::{direction_set, solve, BoundarySource, IntensityPart, SlabProblem};

fn kernel(beta1: f64) -> PhaseFunction {
    if beta1 == 0.0 {
        PhaseFunction::isotropic()
    } else {
        PhaseFunction::linear(beta1).unwrap()
    }
}

fn quad(radau: bool) -> QuadratureKind {
    if radau {
        QuadratureKind::Radau
    } else {
        QuadratureKind::Gauss
    }
}

/// Root of `(ω ν / 2) ln((ν + 1)/(ν − 1)) = 1` on `ν > 1`, by bisection.
fn dispersion_root(omega: f64) -> f64 {
    let g = |nu: f64| 0.5 * omega * nu * ((nu + 1.0) / (nu - 1.0)).ln() - 1.0;
    let (mut lo, mut hi) = (1.0 + 1e-12, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn slowest_mode_matches_dispersion_relation() {
    let nu0 = dispersion_root(0.5);
    assert!((nu0 - 1.044382).abs() < 5e-7);
    let dirs = direction_set(QuadratureKind::Gauss, 48, &[]).unwrap();
    let sc = build_scatter_matrices(&PhaseFunction::isotropic(), &dirs, 0.5).unwrap();
    let es = eigendecompose(&assemble(&sc, &dirs).unwrap()).unwrap();
    let slowest = es.lambdas_pos[0];
    assert!((slowest - 1.0 / nu0).abs() < 1e-9, "{slowest} vs {}", 1.0 / nu0);
    assert!((es.lambdas_neg[es.n() - 1] + 1.0 / nu0).abs() < 1e-9);
    assert!((slowest - 0.957504).abs() < 1e-6);
}

#[test]
fn cloud_kernel_normalization_with_gauss_rule() {
    let Ok(pf) = PhaseFunction::cloudc1() else {
        eprintln!("cloud kernel coefficients absent; skipped");
        return;
    };
    let half = QuadratureKind::Gauss.half_rule(pf.order() / 2 + 1).unwrap();
    let total: f64 = half
        .nodes()
        .iter()
        .zip(half.weights())
        .map(|(&mu, &w)| w * (pf.eval(1.0, mu).unwrap() + pf.eval(1.0, -mu).unwrap()))
        .sum();
    assert!((total - 1.0).abs() < 1e-9, "{total}");
}

#[test]
fn cloud_benchmark_point_values() {
    let Ok(pf) = PhaseFunction::cloudc1() else {
        eprintln!("cloud kernel coefficients absent; skipped");
        return;
    };
    let mus = [-1.0, -0.6, -0.2, 0.2, 1.0];
    let problem = SlabProblem::normal_beam(64.0, 1.0, pf).unwrap();
    let sol = solve(&problem, direction_set(QuadratureKind::Radau, 300, &mus).unwrap()).unwrap();
    let at = |mu: f64, tau: f64| sol.values_at(&[mu], &[tau], IntensityPart::Diffuse).unwrap()[0][0];
    let rounds_to = |v: f64, s: &str| assert_eq!(rmdom::bench::sci(v, 8), s);
    rounds_to(at(-1.0, 0.0), "1.0636984E+00");
    rounds_to(at(-0.6, 0.0), "8.2471232E-01");
    rounds_to(at(-0.2, 32.0), "6.1617674E-01");
    rounds_to(at(1.0, 12.8), "1.2605960E+00");
    rounds_to(at(1.0, 3.2), "8.0745964E+01");
    // without removing the uncollided beam the same cell is dominated by it
    let total = sol.values_at(&[1.0], &[3.2], IntensityPart::Total).unwrap()[0][0];
    assert!(total > 1e3);
    // all response entries stay modest in the thick slab
    let es = sol.eigensystem();
    let r = response_matrix(es, 0.0, 64.0).unwrap();
    assert!(r.r.norm_max() < 1e3);
}

#[test]
fn uniform_edits_point_value() {
    let Ok(pf) = PhaseFunction::cloudc1() else {
        eprintln!("cloud kernel coefficients absent; skipped");
        return;
    };
    let problem = SlabProblem::normal_beam(64.0, 1.0, pf).unwrap();
    let sol = solve(&problem, direction_set(QuadratureKind::Radau, 350, &[-1.0]).unwrap()).unwrap();
    let v = sol.values_at(&[-1.0], &[51.2], IntensityPart::Diffuse).unwrap()[0][0];
    assert_eq!(rmdom::bench::sci(v, 9), "1.90467611E-01");
}

#[test]
fn pure_absorber_interior_is_analytic() {
    for n in [3, 8, 20] {
        let dirs = direction_set(QuadratureKind::Radau, n, &[0.5]).unwrap();
        let sc = build_scatter_matrices(&PhaseFunction::isotropic(), &dirs, 0.0).unwrap();
        let es = eigendecompose(&assemble(&sc, &dirs).unwrap()).unwrap();
        let bd = BoundaryData::new(vec![1.0; dirs.n()], vec![0.0; dirs.n()]).unwrap();
        let taus = [0.0, 0.3, 0.9, 2.0];
        let sol = interior(&es, &bd, 0.0, 2.0, &taus).unwrap();
        for (k, &tau) in taus.iter().enumerate() {
            for (m, &mu) in dirs.nodes().iter().enumerate() {
                let want = (-tau / mu).exp();
                assert!((sol[k].0[m] - want).abs() <= 1e-13 * want, "n={n} tau={tau} mu={mu}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_is_symmetric(n in 2usize..24, omega in 0.0f64..0.999, beta1 in -1.0f64..2.5, radau: bool) {
        let dirs = direction_set(quad(radau), n, &[]).unwrap();
        let sc = build_scatter_matrices(&kernel(beta1), &dirs, omega).unwrap();
        let es = eigendecompose(&assemble(&sc, &dirs).unwrap()).unwrap();
        let mut neg: Vec<f64> = es.lambdas_neg.iter().map(|l| -l).collect();
        neg.sort_by(f64::total_cmp);
        for (p, q) in es.lambdas_pos.iter().zip(&neg) {
            prop_assert!((p - q).abs() <= 1e-10 * p.abs());
        }
        prop_assert!(es.lambdas_neg.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(es.lambdas_pos.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn faux_directions_leave_real_nodes_alone(
        n in 3usize..20,
        omega in 0.1f64..0.99,
        beta1 in -1.0f64..2.0,
        edits in proptest::collection::vec(0.01f64..0.99, 1..6),
        radau: bool,
    ) {
        let kind = quad(radau);
        let bare = direction_set(kind, n, &[]).unwrap();
        let rich = direction_set(kind, n, &edits).unwrap();
        let problem = SlabProblem::new(0.0, 1.7, omega, kernel(beta1), BoundarySource::Uniform { plus: 1.0, minus: 0.25 }).unwrap();
        let a = solve(&problem, bare.clone()).unwrap();
        let b = solve(&problem, rich.clone()).unwrap();
        for tau in [0.0, 0.6, 1.7] {
            let (ap, am) = a.intensities(tau).unwrap();
            let (bp, bm) = b.intensities(tau).unwrap();
            for (m, &mu) in bare.nodes().iter().enumerate() {
                let k = rich.index_of(mu).unwrap();
                for (x, y) in [(ap[m], bp[k]), (am[m], bm[k])] {
                    prop_assert!((x - y).abs() <= 1e-11 * x.abs().max(y.abs()).max(1e-300));
                }
            }
        }
    }

    #[test]
    fn conservative_slab_conserves_current(n in 2usize..32, tau1 in 0.1f64..20.0, beta1 in -1.0f64..2.0) {
        let problem = SlabProblem::normal_beam(tau1, 1.0, kernel(beta1)).unwrap();
        let sol = solve(&problem, direction_set(QuadratureKind::Radau, n, &[]).unwrap()).unwrap();
        let (out, inc) = sol.partial_currents().unwrap();
        prop_assert!((out - inc).abs() <= 1e-9 * inc);
    }

    #[test]
    fn isotropic_intensities_are_non_negative(n in 2usize..24, omega in 0.0f64..1.0, tau1 in 0.05f64..30.0, radau: bool) {
        let problem = SlabProblem::new(0.0, tau1, omega, PhaseFunction::isotropic(), BoundarySource::Uniform { plus: 1.0, minus: 0.0 }).unwrap();
        let sol = solve(&problem, direction_set(quad(radau), n, &[]).unwrap()).unwrap();
        for k in 0..=10 {
            let (p, m) = sol.intensities((tau1 * k as f64 / 10.0).min(tau1)).unwrap();
            prop_assert!(p.iter().chain(&m).all(|v| *v >= -1e-12));
        }
    }

    #[test]
    fn interior_faces_match_response(n in 2usize..16, omega in 0.0f64..0.99, tau1 in 0.1f64..50.0, beta1 in -1.0f64..2.0) {
        let dirs = direction_set(QuadratureKind::Radau, n, &[]).unwrap();
        let sc = build_scatter_matrices(&kernel(beta1), &dirs, omega).unwrap();
        let es = eigendecompose(&assemble(&sc, &dirs).unwrap()).unwrap();
        let bd = beam_boundary(&dirs, 1.0, 0.5).unwrap();
        let (out_plus, out_minus) = solve_boundary(&response_matrix(&es, 0.0, tau1).unwrap(), &bd).unwrap();
        let faces = interior(&es, &bd, 0.0, tau1, &[0.0, tau1]).unwrap();
        let scale = bd.in_plus.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scale;
        for m in 0..n {
            prop_assert!(close(faces[0].0[m], bd.in_plus[m]));
            prop_assert!(close(faces[0].1[m], out_minus[m]));
            prop_assert!(close(faces[1].0[m], out_plus[m]));
            prop_assert!(close(faces[1].1[m], bd.in_minus[m]));
        }
    }

    #[test]
    fn phase_symmetry_and_normalization(betas in proptest::collection::vec(-2.0f64..2.0, 0..8), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let mut coeffs = vec![1.0];
        coeffs.extend(betas);
        let pf = PhaseFunction::new(coeffs).unwrap();
        prop_assert_eq!(pf.eval(-a, -b).unwrap(), pf.eval(a, b).unwrap());
        prop_assert_eq!(pf.eval(a, -b).unwrap(), pf.eval(-a, b).unwrap());
        let rule = gauss_legendre(pf.order() + 1, -1.0, 1.0).unwrap();
        let total = rule.integrate(|mu| pf.eval(a, mu).unwrap());
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn faux_edits_keep_moments(n in 2usize..40, edits in proptest::collection::vec(0.001f64..1.0, 0..12), radau: bool) {
        let rule = quad(radau).half_rule(n).unwrap();
        let dirs = DirectionSet::build(&rule, &edits).unwrap();
        for k in 0..4 {
            let plain: f64 = rule.nodes().iter().zip(rule.weights()).map(|(m, w)| w * m.powi(k)).sum();
            let merged: f64 = dirs.nodes().iter().zip(dirs.weights()).map(|(m, w)| w * m.powi(k)).sum();
            prop_assert!((plain - merged).abs() <= 1e-15);
        }
        prop_assert!(dirs.nodes().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(rule.weights().iter().all(|w| *w > 0.0));
    }
}
