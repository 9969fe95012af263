//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

mod common;

use std::time::{Duration, Instant};

use common::*;
use gsa_core::allocation::{
    proportional_values, pv_permutation_oracle, shapley_coalitional, shapley_permutation,
    ANALYTIC_ZERO_TOL, ESTIMATED_ZERO_TOL,
};
use gsa_core::estimators::{
    estimate_all_total_indices, estimate_variance, replicate_with_ci, DataSet, IndexSource,
    McBudget, ReplicationScheme,
};
use gsa_core::games::{random_game_with_nulls, random_monotone_game};
use gsa_core::gaussian::{rho_grid, GaussianLinearModel, ToyCase};
use gsa_core::models::{sample_robot_inputs, GaussianSampler, Ishigami, IshigamiConfig, RobotArm};
use gsa_core::nalgebra::{DMatrix, DVector};
use gsa_core::{Coalition, GameTable};
use rand::Rng;

type Outcome = Result<String, String>;

const GOLDEN_TOL: f64 = 1e-9;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(outcome: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    let detail = |d: String| {
        format!(
            "{d}; {:.2} s (limit {} s)",
            elapsed.as_secs_f64(),
            limit.as_secs()
        )
    };
    match outcome {
        Ok(d) if elapsed < limit => Ok(detail(d)),
        Ok(d) => Err(detail(d)),
        Err(d) => Err(detail(d)),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let outcome = f();
    within_time(outcome, start.elapsed(), limit)
}

fn pipeline(case: ToyCase) -> (Vec<f64>, Vec<f64>) {
    let (sh, pme) = case
        .pipeline_allocations(ANALYTIC_ZERO_TOL)
        .expect("valid toy case");
    (sh.shares, pme.shares)
}

fn exogenous_goldens() -> Outcome {
    let mut worst: f64 = 0.0;
    for rho in rho_grid() {
        let r2 = rho * rho;
        let (sh, pme) = pipeline(ToyCase::ExogenousLinear { rho });
        worst = worst.max(max_abs_diff(&sh, &[0.5 - r2 / 4.0, 0.5, r2 / 4.0]));
        worst = worst.max(max_abs_diff(&pme, &[0.5, 0.5, 0.0]));
    }
    check(worst < GOLDEN_TOL, format!("max deviation {worst:.1e}"))
}

fn unbalanced_goldens() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [2.0, 10.0] {
        let b2 = beta * beta;
        for rho in rho_grid() {
            let var_y = 2.0 + b2 + 2.0 * rho * beta;
            let spread = 0.5 * rho * rho * (1.0 - b2);
            let sh = [1.0, b2 + beta * rho + spread, 1.0 + beta * rho - spread].map(|v| v / var_y);
            let inner = 1.0 + b2 + 2.0 * rho * beta;
            let pme = [1.0, b2 * inner / (1.0 + b2), inner / (1.0 + b2)].map(|v| v / var_y);
            let (got_sh, got_pme) = pipeline(ToyCase::UnbalancedLinear { rho, beta });
            worst = worst.max(max_abs_diff(&got_sh, &sh));
            worst = worst.max(max_abs_diff(&got_pme, &pme));
        }
    }
    let (sh, pme) = pipeline(ToyCase::UnbalancedLinear {
        rho: 0.99,
        beta: 10.0,
    });
    let gap = (sh[1] - sh[2]).abs();
    check(
        worst < GOLDEN_TOL && pme[1] > 0.97 && gap < 0.05,
        format!(
            "max deviation {worst:.1e}; at rho=0.99, beta=10: PME2 {:.4}, |Sh2-Sh3| {gap:.4}",
            pme[1]
        ),
    )
}

fn interaction_goldens() -> Outcome {
    let mut worst: f64 = 0.0;
    for step in 0..=20 {
        let alpha = step as f64 / 20.0;
        let c2 = (1.0 - alpha).powi(2);
        let expected = [2.0 / (3.0 + c2), (c2 + 1.0) / (3.0 + c2)];
        for rho in rho_grid() {
            let (_, pme) = pipeline(ToyCase::InteractionLinear { rho, alpha });
            worst = worst.max(max_abs_diff(&pme, &expected));
        }
    }
    let (sh, _) = pipeline(ToyCase::InteractionLinear {
        rho: 0.0,
        alpha: 1.0,
    });
    let sh_gap = max_abs_diff(&sh, &[0.75, 0.25]);
    check(
        worst < GOLDEN_TOL && sh_gap < GOLDEN_TOL,
        format!("PME max deviation {worst:.1e}; Shapley at (0, 1) deviation {sh_gap:.1e}"),
    )
}

fn joke_goldens() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pme_exact = true;
    for rho in rho_grid() {
        let r2 = rho * rho;
        let (sh, pme) = pipeline(ToyCase::ShapleyJoke { rho });
        worst = worst.max(max_abs_diff(&sh, &[1.0 - r2 / 2.0, r2 / 2.0]));
        pme_exact &= pme == [1.0, 0.0];
    }
    check(
        worst < GOLDEN_TOL && pme_exact,
        format!("Shapley max deviation {worst:.1e}; PME = (1, 0): {pme_exact}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(5);
    let (mut sh_gap, mut pv_gap): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let d = r.random_range(1..=6);
        let g = random_monotone_game(d, &mut r);
        let perm = shapley_permutation(&g).map_err(|e| e.to_string())?;
        sh_gap = sh_gap.max(max_abs_diff(&shapley_coalitional(&g).shares, &perm.shares));
        let pv = proportional_values(&g).map_err(|e| e.to_string())?;
        let oracle = pv_permutation_oracle(&g).map_err(|e| e.to_string())?;
        pv_gap = pv_gap.max(max_abs_diff(&pv.shares, &oracle.shares));
    }
    check(
        sh_gap < GOLDEN_TOL && pv_gap < GOLDEN_TOL,
        format!("50 games: Shapley gap {sh_gap:.1e}, PV gap {pv_gap:.1e}"),
    )
}

/// `v` with every null nonempty coalition lifted to `eps`.
fn lifted(g: &GameTable, eps: f64) -> GameTable {
    GameTable::from_fn(g.players(), |c| {
        let v = g.value(c);
        if c.is_empty() || v > 0.0 {
            v
        } else {
            eps
        }
    })
    .expect("valid lifted game")
}

fn pv0_continuity() -> Outcome {
    let mut r = rng(6);
    let (mut failures, mut exact) = (0, 0);
    let (mut worst_small, mut worst_large): (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..20 {
        let d = r.random_range(2..=5);
        let g = random_game_with_nulls(d, &mut r);
        let target = pv0(&g).shares;
        let gap = |eps: f64| -> std::result::Result<f64, String> {
            let pv = proportional_values(&lifted(&g, eps)).map_err(|e| e.to_string())?;
            Ok(max_abs_diff(&pv.shares, &target))
        };
        let (small, large) = (gap(1e-6)?, gap(1e-3)?);
        // Symmetric games can make PV(v_eps) equal PV0 for every eps.
        if small == 0.0 && large == 0.0 {
            exact += 1;
        } else if !(small < 1e-3 && small < large) {
            failures += 1;
        }
        worst_small = worst_small.max(small);
        if large > 0.0 {
            worst_large = worst_large.min(large);
        }
    }
    check(
        failures == 0,
        format!(
            "20 games: max gap at 1e-6 {worst_small:.1e}, min nonzero gap at 1e-3 {worst_large:.1e}, \
             {exact} with zero gap at both, {failures} failures"
        ),
    )
}

fn axiom_suites() -> Outcome {
    const GAMES: u64 = 60;
    let mut failed: Vec<&str> = Vec::new();
    let mut record = |name: &'static str, ok: bool| {
        if !ok && !failed.contains(&name) {
            failed.push(name);
        }
    };
    let mut r = rng(7);
    for _ in 0..GAMES {
        let d = r.random_range(2..=6);
        let g = random_monotone_game(d, &mut r);
        let z = random_game_with_nulls(d, &mut r);
        let sh = shapley_coalitional(&g);
        let pv = proportional_values(&g).expect("positive game");
        let zero = pv0(&z);

        record(
            "efficiency",
            efficiency_gap(&sh, &g) < AXIOM_TOL
                && efficiency_gap(&pv, &g) < AXIOM_TOL
                && efficiency_gap(&zero, &z) < AXIOM_TOL,
        );
        record(
            "nonnegativity",
            sh.shares
                .iter()
                .chain(&pv.shares)
                .chain(&zero.shares)
                .all(|&s| s >= -AXIOM_TOL),
        );

        let at = r.random_range(0..=d);
        let with_null = with_null_player(&g, at);
        record(
            "null player",
            shapley_coalitional(&with_null).shares[at].abs() < AXIOM_TOL
                && proportional_values(&with_null).is_err()
                && pv0(&with_null).shares[at] == 0.0,
        );

        let i = r.random_range(0..d);
        let j = (i + r.random_range(1..d)) % d;
        let sym = symmetrized(&g, i, j);
        let sym_z = symmetrized(&z, i, j);
        let pairs = [
            shapley_coalitional(&sym).shares,
            proportional_values(&sym).expect("positive game").shares,
            pv0(&sym_z).shares,
        ];
        record(
            "symmetry",
            pairs.iter().all(|s| (s[i] - s[j]).abs() < AXIOM_TOL),
        );

        record(
            "Shapley self-duality",
            max_abs_diff(&sh.shares, &shapley_coalitional(&g.dual()).shares) < AXIOM_TOL,
        );
        record(
            "balanced contributions",
            balanced_contributions_gap(&g) < AXIOM_TOL,
        );
        record("equal proportional gains", equal_gains_gap(&g) < AXIOM_TOL);

        let c = r.random_range(0.01..100.0);
        let scaled = |v: &[f64]| v.iter().map(|x| c * x).collect::<Vec<_>>();
        let tol = AXIOM_TOL * c.max(1.0);
        let gc = g.scaled(c).expect("positive scale");
        let zc = z.scaled(c).expect("positive scale");
        record(
            "positive homogeneity",
            max_abs_diff(&shapley_coalitional(&gc).shares, &scaled(&sh.shares)) < tol
                && max_abs_diff(
                    &proportional_values(&gc).expect("positive game").shares,
                    &scaled(&pv.shares),
                ) < tol
                && max_abs_diff(&pv0(&zc).shares, &scaled(&zero.shares)) < tol,
        );
    }
    check(
        failed.is_empty(),
        if failed.is_empty() {
            format!("8 axioms on {GAMES} games each")
        } else {
            format!("violated: {}", failed.join(", "))
        },
    )
}

fn ishigami_desk_scale() -> Outcome {
    let rhos = [-0.9, -0.5, 0.0, 0.5, 0.9];
    let mut sh4 = Vec::new();
    let mut problems = Vec::new();
    let mut lines = Vec::new();
    for rho in rhos {
        let law = IshigamiConfig::new(rho)
            .and_then(|c| c.input_law())
            .map_err(|e| e.to_string())?;
        let budget = McBudget::new(20_000, 500, 100, 0).map_err(|e| e.to_string())?;
        let source = IndexSource::MonteCarlo {
            model: &Ishigami,
            law: &law,
            budget,
        };
        let s = replicate_with_ci(
            &source,
            20,
            ReplicationScheme::IndependentSeeds,
            0.9,
            ESTIMATED_ZERO_TOL,
            2024,
        )
        .map_err(|e| e.to_string())?;
        let (sh, pme) = (&s.shapley.mean, &s.pme.mean);
        if pme[3] > 0.02 {
            problems.push(format!("PME4 {:.4} at rho {rho}", pme[3]));
        }
        if (sh[1] - pme[1]).abs() > 0.03 {
            problems.push(format!(
                "|Sh2-PME2| {:.4} at rho {rho}",
                (sh[1] - pme[1]).abs()
            ));
        }
        lines.push(format!(
            "rho {rho}: Sh4 {:.4} PME4 {:.4} Sh2 {:.4} PME2 {:.4}",
            sh[3], pme[3], sh[1], pme[1]
        ));
        sh4.push(sh[3]);
    }
    let at0 = sh4[2];
    if at0 > 0.02 {
        problems.push(format!("Sh4 {at0:.4} at rho 0"));
    }
    if sh4[0] < at0 || sh4[4] < at0 {
        problems.push("Sh4 at |rho| = 0.9 below Sh4 at rho 0".into());
    }
    let detail = lines.join("; ");
    check(
        problems.is_empty(),
        if problems.is_empty() {
            detail
        } else {
            format!("{}; {detail}", problems.join(", "))
        },
    )
}

fn robot_arm_given_data() -> Outcome {
    const L1: usize = 4;
    let data = DataSet::from_model(sample_robot_inputs(2000, 2024), &RobotArm)
        .map_err(|e| e.to_string())?;
    let source = IndexSource::GivenData { data: &data, k: 6 };
    let s = replicate_with_ci(
        &source,
        100,
        ReplicationScheme::Subsample80,
        0.9,
        ESTIMATED_ZERO_TOL,
        2024,
    )
    .map_err(|e| e.to_string())?;
    let top = |v: &[f64]| {
        (0..v.len())
            .max_by(|&a, &b| v[a].total_cmp(&v[b]))
            .expect("nonempty")
    };
    let (sh, pme) = (s.shapley.mean[L1], s.pme.mean[L1]);
    let rank_ok = top(&s.shapley.mean) == L1 && top(&s.pme.mean) == L1;
    let gap_ok = pme - sh >= 0.05;
    let sh_ok = (sh - 0.354).abs() <= 0.06;
    let pme_ok = (pme - 0.48).abs() <= 0.06;
    check(
        rank_ok && gap_ok && sh_ok && pme_ok,
        format!(
            "L1 ranked first: {rank_ok}; Sh(L1) {sh:.4} [{:.4}, {:.4}], PME(L1) {pme:.4} [{:.4}, {:.4}], PME-Sh {:.4}",
            s.shapley.low[L1],
            s.shapley.high[L1],
            s.pme.low[L1],
            s.pme.high[L1],
            pme - sh
        ),
    )
}

fn random_gaussian_model(r: &mut impl Rng) -> GaussianLinearModel {
    let d = r.random_range(2..=4);
    let l = DMatrix::from_fn(d, d, |i, j| {
        if j <= i {
            r.random_range(-1.0..1.0)
        } else {
            0.0
        }
    });
    let sigma = &l * l.transpose() + DMatrix::identity(d, d) * 0.2;
    let beta = DVector::from_fn(d, |_, _| {
        let magnitude: f64 = r.random_range(0.3..2.0);
        if r.random_bool(0.5) {
            magnitude
        } else {
            -magnitude
        }
    });
    GaussianLinearModel::new(beta, DVector::zeros(d), sigma).expect("positive definite covariance")
}

fn mc_consistency() -> Outcome {
    let mut r = rng(10);
    let mut misses = Vec::new();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for m in 0..10 {
        let model = random_gaussian_model(&mut r);
        let d = model.dim();
        let law = GaussianSampler::from_model(&model).map_err(|e| e.to_string())?;
        let analytic = model.total_table().map_err(|e| e.to_string())?;
        let budget = McBudget::new(5_000, 200, 30, 1000 + m).map_err(|e| e.to_string())?;
        let source = IndexSource::MonteCarlo {
            model: &model,
            law: &law,
            budget,
        };
        let primary = estimate_all_total_indices(&source).map_err(|e| e.to_string())?;
        let reps = replicate_with_ci(
            &source,
            20,
            ReplicationScheme::IndependentSeeds,
            0.9,
            ESTIMATED_ZERO_TOL,
            77 + m,
        )
        .map_err(|e| e.to_string())?;
        for bits in 0..1u32 << d {
            let c = Coalition::new(bits, d).expect("in range");
            let values: Vec<f64> = reps.tables.iter().map(|t| t.value(c)).collect();
            let se = estimate_variance(&values)
                .map_err(|e| e.to_string())?
                .sqrt();
            let gap = (primary.table.value(c) - analytic.value(c)).abs();
            checked += 1;
            if se > 0.0 {
                worst = worst.max(gap / se);
            }
            if gap > 3.0 * se + 1e-12 {
                misses.push(format!("model {m} coalition {}", c.to_label()));
            }
        }
    }
    check(
        misses.is_empty(),
        format!(
            "{checked} indices, largest gap {worst:.2} se; outside 3 se: [{}]",
            misses.join(", ")
        ),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        (
            "toy-case goldens (exogenous input)",
            Box::new(move || timed(secs(5), exogenous_goldens)),
        ),
        (
            "toy-case goldens (unbalanced coefficients)",
            Box::new(move || timed(secs(5), unbalanced_goldens)),
        ),
        (
            "toy-case goldens (interaction)",
            Box::new(interaction_goldens),
        ),
        ("Shapley's joke", Box::new(joke_goldens)),
        (
            "oracle equivalence",
            Box::new(move || timed(secs(30), oracle_equivalence)),
        ),
        ("PV0 continuity", Box::new(pv0_continuity)),
        ("axiom suites", Box::new(axiom_suites)),
        (
            "Ishigami at desk scale",
            Box::new(move || timed(secs(600), ishigami_desk_scale)),
        ),
        (
            "robot arm given data",
            Box::new(move || timed(secs(900), robot_arm_given_data)),
        ),
        ("Monte Carlo consistency", Box::new(mc_consistency)),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.into_iter().enumerate() {
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail}", n + 1);
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
