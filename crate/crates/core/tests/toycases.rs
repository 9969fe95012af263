//! Analytical toy cases: pipeline values against closed forms and the
//! qualitative behaviour of the curves.

use gsa_core::allocation::ANALYTIC_ZERO_TOL;
use gsa_core::gaussian::{rho_grid, ToyCase};

fn pipeline(case: ToyCase) -> (Vec<f64>, Vec<f64>) {
    let (sh, pme) = case.pipeline_allocations(ANALYTIC_ZERO_TOL).unwrap();
    (sh.shares, pme.shares)
}

fn reference(case: ToyCase) -> (Vec<f64>, Vec<f64>) {
    let (sh, pme) = case.reference_allocations().unwrap();
    (sh.shares, pme.shares)
}

fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{what}: {a:?} vs {b:?}");
    }
}

fn curve(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    rho_grid().into_iter().map(|r| (r, f(r))).collect()
}

fn argmax(c: &[(f64, f64)]) -> f64 {
    c.iter()
        .copied()
        .fold(
            (0.0, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 { b } else { a },
        )
        .0
}

fn argmin(c: &[(f64, f64)]) -> f64 {
    c.iter()
        .copied()
        .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
        .0
}

fn second_differences(c: &[(f64, f64)]) -> Vec<f64> {
    c.windows(3)
        .map(|w| w[0].1 - 2.0 * w[1].1 + w[2].1)
        .collect()
}

#[test]
fn every_case_matches_its_closed_form() {
    for rho in rho_grid() {
        let mut cases = vec![
            ToyCase::ExogenousLinear { rho },
            ToyCase::ShapleyJoke { rho },
        ];
        for beta in [-3.0, 0.5, 2.0, 10.0] {
            cases.push(ToyCase::UnbalancedLinear { rho, beta });
        }
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            cases.push(ToyCase::InteractionLinear { rho, alpha });
        }
        for case in cases {
            let (sh, pme) = pipeline(case);
            let (rsh, rpme) = reference(case);
            assert_close(&sh, &rsh, 1e-9, &format!("Shapley {case:?}"));
            assert_close(&pme, &rpme, 1e-9, &format!("PME {case:?}"));
        }
    }
}

#[test]
fn independence_splits_evenly() {
    let (sh, pme) = pipeline(ToyCase::ExogenousLinear { rho: 0.0 });
    assert_close(&sh, &[0.5, 0.5, 0.0], 1e-12, "Shapley");
    assert_close(&pme, &[0.5, 0.5, 0.0], 1e-12, "PME");
}

#[test]
fn unbalanced_beta2_shapes() {
    let beta = 2.0;
    let pme2 = curve(|rho| pipeline(ToyCase::UnbalancedLinear { rho, beta }).1[1]);
    let pme3 = curve(|rho| pipeline(ToyCase::UnbalancedLinear { rho, beta }).1[2]);
    let sh2 = curve(|rho| pipeline(ToyCase::UnbalancedLinear { rho, beta }).0[1]);
    let sh3 = curve(|rho| pipeline(ToyCase::UnbalancedLinear { rho, beta }).0[2]);

    assert!(
        pme2.windows(2).all(|w| w[1].1 > w[0].1),
        "PME2 increases in rho"
    );
    assert!(
        pme3.windows(2).all(|w| w[1].1 > w[0].1),
        "PME3 increases in rho"
    );
    assert!(
        pme2.iter().zip(&pme3).all(|(a, b)| a.1 > b.1),
        "PME2 > PME3"
    );

    // Sh2 peaks near -0.24, Sh3 bottoms out near -0.54.
    assert!(
        (argmax(&sh2) + 0.24).abs() <= 0.011,
        "Sh2 peak at {}",
        argmax(&sh2)
    );
    assert!(
        (argmin(&sh3) + 0.54).abs() <= 0.011,
        "Sh3 trough at {}",
        argmin(&sh3)
    );

    assert!(
        second_differences(&sh2).iter().all(|&s| s < 0.0),
        "Sh2 concave"
    );
    assert!(
        second_differences(&pme2).iter().all(|&s| s < 0.0),
        "PME2 concave"
    );
    assert!(
        second_differences(&sh3).iter().all(|&s| s > 0.0),
        "Sh3 convex"
    );
    assert!(
        second_differences(&pme3).iter().all(|&s| s < 0.0),
        "PME3 concave"
    );

    // Near |rho| = 1 the two correlated inputs get nearly equal Shapley effects.
    for rho in [-0.99, 0.99] {
        let (sh, _) = pipeline(ToyCase::UnbalancedLinear { rho, beta });
        assert!((sh[1] - sh[2]).abs() < 0.05, "rho {rho}: {sh:?}");
    }
}

#[test]
fn unbalanced_beta10_pme_is_nearly_flat() {
    for rho in rho_grid() {
        let (_, pme) = pipeline(ToyCase::UnbalancedLinear { rho, beta: 10.0 });
        assert!(pme[1] > 0.97, "rho {rho}: {pme:?}");
        assert!(pme[0] < 0.03 && pme[2] < 0.03);
    }
    let (sh, pme) = pipeline(ToyCase::UnbalancedLinear {
        rho: 0.99,
        beta: 10.0,
    });
    assert!((pme[1] - 0.982).abs() < 1e-3);
    assert!((sh[1] - sh[2]).abs() < 0.05);
}

#[test]
fn interaction_pme_ignores_rho() {
    for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (_, at0) = pipeline(ToyCase::InteractionLinear { rho: 0.0, alpha });
        for rho in rho_grid() {
            let (_, pme) = pipeline(ToyCase::InteractionLinear { rho, alpha });
            assert_close(&pme, &at0, 1e-9, &format!("alpha {alpha}, rho {rho}"));
        }
    }
}

#[test]
fn interaction_alpha_trends() {
    let alphas: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    for rho in [-0.5, 0.0, 0.3] {
        let rows: Vec<(Vec<f64>, Vec<f64>)> = alphas
            .iter()
            .map(|&alpha| pipeline(ToyCase::InteractionLinear { rho, alpha }))
            .collect();
        for w in rows.windows(2) {
            assert!(
                w[1].1[0] > w[0].1[0] && w[1].1[1] < w[0].1[1],
                "PME trend at rho {rho}"
            );
        }
    }
    // PME1 goes from one half to two thirds.
    let (_, first) = pipeline(ToyCase::InteractionLinear {
        rho: 0.4,
        alpha: 0.0,
    });
    let (_, last) = pipeline(ToyCase::InteractionLinear {
        rho: 0.4,
        alpha: 1.0,
    });
    assert!((first[0] - 0.5).abs() < 1e-12 && (last[0] - 2.0 / 3.0).abs() < 1e-12);

    let (sh, _) = pipeline(ToyCase::InteractionLinear {
        rho: 0.0,
        alpha: 1.0,
    });
    assert_close(&sh, &[0.75, 0.25], 1e-12, "Shapley at (0, 1)");
    // Near |rho| = 1 the Shapley effects split evenly whatever alpha is.
    for alpha in [0.0, 0.5, 1.0] {
        let (sh, _) = pipeline(ToyCase::InteractionLinear { rho: 0.99, alpha });
        assert!((sh[0] - 0.5).abs() < 0.02, "alpha {alpha}: {sh:?}");
    }
}

#[test]
fn joke_gives_everything_to_the_used_input() {
    for rho in rho_grid() {
        let (sh, pme) = pipeline(ToyCase::ShapleyJoke { rho });
        assert_close(
            &sh,
            &[1.0 - rho * rho / 2.0, rho * rho / 2.0],
            1e-9,
            "Shapley",
        );
        assert_eq!(pme, vec![1.0, 0.0]);
    }
}
