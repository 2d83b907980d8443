/*
Copyright 2026 The vmpladmm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

mod common;

use std::sync::Arc;

use common::{audited_config, consensus_problem, gaussian_matrix, gaussian_vector, l0_instance, lasso_instance, v};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vmpladmm::diagnostics::{reg_lagrangian, CertificateKind, Certificates, Outcome, TraceRecord};
use vmpladmm::oracles::{LeastSquares, Quadratic, ZeroSmooth};
use vmpladmm::problems::{consensus_toy, make_sparse_regression, InstanceData, LambdaSpec, PenaltyKind};
use vmpladmm::reference::{best_subset_oracle, prox_gradient_reference, support};
use vmpladmm::solver::{metric_next, y_update, z_update, DIVERGENCE_THRESHOLD};
use vmpladmm::{
    solve, solve_batch, step, DiagonalMetric, Error, Execution, InitialPoint, IterateState, LinearOperator,
    MetricSchedule, Penalty, ProblemSpec, SolveStatus, SolverConfig, Vector,
};

fn record(q1: f64, passed: bool) -> TraceRecord {
    let mut certificates = Certificates::default();
    certificates.set(
        CertificateKind::DescentX,
        if passed { Outcome::Pass { slack: 0.0 } } else { Outcome::Fail { slack: -1.0 } },
    );
    TraceRecord {
        k: 0,
        lagrangian: 0.0,
        reg_lagrangian: 0.0,
        objective: 0.0,
        delta_x: 0.0,
        delta_y: 0.0,
        delta_z: 0.0,
        residual_norm: 0.0,
        d_norm: 0.0,
        d_bound: 0.0,
        s_norm: 0.0,
        s_bound: 0.0,
        q1,
        q2: 1.0,
        certificates,
    }
}

fn adaptive(q1_init: f64) -> MetricSchedule {
    MetricSchedule::AdaptiveScaledIdentity {
        q1_init,
        q1_inf: 1.0,
        q1_sup: 16.0,
        q2: 1.0,
    }
}

#[test]
fn fixed_schedule_is_constant() {
    let s = MetricSchedule::fixed(3.0, 2.0);
    for k in [0, 1, 1000] {
        let (q1, q2) = metric_next(&s, k, &[]).unwrap();
        assert_eq!((q1, q2), (DiagonalMetric::Scalar(3.0), DiagonalMetric::Scalar(2.0)));
    }
}

#[test]
fn adaptive_schedule_halves_after_a_pass_streak() {
    let history: Vec<_> = (0..5).map(|_| record(4.0, true)).collect();
    let (q1, _) = metric_next(&adaptive(4.0), 5, &history).unwrap();
    assert_eq!(q1, DiagonalMetric::Scalar(2.0));
    let (q1, _) = metric_next(&adaptive(4.0), 4, &history[..4]).unwrap();
    assert_eq!(q1, DiagonalMetric::Scalar(4.0));
}

#[test]
fn adaptive_schedule_clamps_at_both_ends() {
    let floor: Vec<_> = (0..8).map(|_| record(1.0, true)).collect();
    assert_eq!(metric_next(&adaptive(1.0), 8, &floor).unwrap().0, DiagonalMetric::Scalar(1.0));
    let ceiling = vec![record(16.0, false)];
    assert_eq!(metric_next(&adaptive(16.0), 1, &ceiling).unwrap().0, DiagonalMetric::Scalar(16.0));
    let doubled = vec![record(4.0, false)];
    assert_eq!(metric_next(&adaptive(4.0), 1, &doubled).unwrap().0, DiagonalMetric::Scalar(8.0));
}

#[test]
fn schedule_contract_is_enforced() {
    let out_of_bounds = vec![record(64.0, true)];
    assert!(matches!(
        metric_next(&adaptive(4.0), 1, &out_of_bounds),
        Err(Error::ScheduleContract { .. })
    ));
}

#[test]
fn y_update_satisfies_its_optimality_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bmat = gaussian_matrix(5, 4, 11);
    let amat = gaussian_matrix(5, 3, 12);
    let d = gaussian_matrix(6, 4, 13);
    let prob = ProblemSpec::new(
        Arc::new(Penalty::Zero),
        Arc::new(ZeroSmooth::new(3)),
        Arc::new(LeastSquares::new(d, gaussian_vector(6, &mut rng)).unwrap()),
        LinearOperator::dense(amat),
        LinearOperator::dense(bmat.clone()),
        gaussian_vector(5, &mut rng),
    );
    let st = IterateState::initial(
        &prob,
        gaussian_vector(3, &mut rng),
        gaussian_vector(4, &mut rng),
        gaussian_vector(5, &mut rng),
    )
    .unwrap();
    let x_new = gaussian_vector(3, &mut rng);
    let (alpha, q2) = (2.5, DiagonalMetric::Diagonal(v(&[0.5, 1.0, 2.0, 4.0])));
    let cfg = SolverConfig {
        alpha,
        ..SolverConfig::default()
    };
    let y = y_update(&st, &x_new, &prob, &q2, &cfg).unwrap();
    // grad h(y^k) + alpha B*(B y + A x_new + z/alpha + c) + Q2 (y - y^k) = 0
    let inner = &bmat * &y + prob.a.forward(&x_new).unwrap() + &st.z / alpha + &prob.c;
    let residual = prob.h.gradient(&st.y) + bmat.transpose() * inner * alpha + q2.apply(&(&y - &st.y));
    assert!(residual.norm() <= 1e-8, "{}", residual.norm());
}

#[test]
fn consensus_toy_converges_to_its_stationary_point() {
    let inst = consensus_toy(v(&[1.0])).unwrap();
    let cfg = SolverConfig {
        alpha: 4.0,
        schedule: MetricSchedule::fixed(8.0, 1.0),
        tol_delta: 1e-10,
        tol_residual: 1e-10,
        ..SolverConfig::default()
    };
    let out = solve(&inst.problem, &cfg, &InitialPoint::zeros(&inst.problem)).unwrap();
    assert_eq!(out.status, SolveStatus::Converged);
    assert!((out.state.x[0] - 1.0).abs() < 1e-9);
    assert!((out.state.y[0] - 1.0).abs() < 1e-9);
    assert!(out.state.z[0].abs() < 1e-9);
    assert_eq!(out.violation_count(), 0);
}

#[test]
fn multiplier_update_identity_holds_within_ulps() {
    let inst = lasso_instance();
    let cfg = SolverConfig {
        max_iter: 200,
        ..audited_config(&inst.problem, 1.3)
    };
    let mut st = IterateState::zeros(&inst.problem).unwrap();
    for _ in 0..cfg.max_iter {
        st = step(&st, &inst.problem, &cfg).unwrap();
        let dz = &st.z - &st.z_prev;
        let expected = &st.residual * (cfg.alpha * cfg.beta);
        for i in 0..dz.len() {
            let ulp = f64::EPSILON * st.z[i].abs().max(st.z_prev[i].abs()).max(f64::MIN_POSITIVE);
            assert!((dz[i] - expected[i]).abs() <= 4.0 * ulp);
        }
        assert_eq!(st.z, z_update(&st.z_prev, &st.residual, cfg.alpha, cfg.beta));
    }
}

#[test]
fn lasso_split_matches_proximal_gradient() {
    let inst = lasso_instance();
    let reference = prox_gradient_reference(&inst.problem, 1e-12).unwrap();
    let cfg = audited_config(&inst.problem, 1.0);
    let out = solve(&inst.problem, &cfg, &InitialPoint::zeros(&inst.problem)).unwrap();
    let obj = inst.problem.objective(&out.state.x, &out.state.y);
    assert_eq!(out.status, SolveStatus::Converged);
    assert!((obj - reference.value).abs() <= 1e-6 * reference.value.abs());
}

#[test]
fn l0_support_matches_best_subset() {
    let inst = l0_instance();
    let InstanceData::SparseRegression { design, target, penalty, .. } = &inst.data else {
        unreachable!()
    };
    let oracle = best_subset_oracle(design, target, penalty.lambda(), 12).unwrap();
    assert_eq!(support(&oracle.argmin).len(), 3);
    let out = solve(&inst.problem, &audited_config(&inst.problem, 1.0), &InitialPoint::zeros(&inst.problem)).unwrap();
    assert_eq!(support(&out.state.x), support(&oracle.argmin));
}

#[test]
fn regularized_lagrangian_decreases_after_a_step() {
    let inst = make_sparse_regression(50, 75, 8, 0.01, PenaltyKind::L1, LambdaSpec::FractionOfMax { fraction_of_max: 0.1 }, 1)
        .unwrap();
    let prob = &inst.problem;
    let cfg = audited_config(prob, 1.0);
    let mut st = IterateState::zeros(prob).unwrap();
    for _ in 0..20 {
        let next = step(&st, prob, &cfg).unwrap();
        if st.k > 0 {
            assert!(reg_lagrangian(prob, &cfg, &next).unwrap() <= reg_lagrangian(prob, &cfg, &st).unwrap());
        }
        st = next;
    }
}

#[test]
fn converged_runs_have_vanishing_and_summable_differences() {
    let inst = lasso_instance();
    let cfg = audited_config(&inst.problem, 1.0);
    let out = solve(&inst.problem, &cfg, &InitialPoint::zeros(&inst.problem)).unwrap();
    assert_eq!(out.status, SolveStatus::Converged);
    assert!(out.trace.last().unwrap().delta_sum() < cfg.tol_delta);
    let sums: Vec<f64> = out.trace.iter().map(|r| r.delta_sum()).collect();
    let total: f64 = sums.iter().sum();
    let tail: f64 = sums[sums.len() - sums.len() / 10..].iter().sum();
    assert!(total.is_finite() && tail < 0.01 * total);
}

#[test]
fn concave_objective_diverges_gracefully() {
    let n = 2;
    let prob = ProblemSpec::new(
        Arc::new(Penalty::Zero),
        Arc::new(ZeroSmooth::new(n)),
        Arc::new(Quadratic::new(-vmpladmm::Matrix::identity(n, n) * 3.0).unwrap()),
        LinearOperator::identity(n),
        LinearOperator::neg_identity(n),
        Vector::zeros(n),
    );
    let cfg = SolverConfig {
        alpha: 1.0,
        schedule: MetricSchedule::fixed(2.0, 1.0),
        max_iter: 100_000,
        ..SolverConfig::default()
    };
    let init = InitialPoint {
        x: v(&[1.0, 1.0]),
        y: v(&[1.0, 1.0]),
        z: Vector::zeros(n),
    };
    let out = solve(&prob, &cfg, &init).unwrap();
    assert_eq!(out.status, SolveStatus::Diverged);
    assert!(out.state.y.norm() > DIVERGENCE_THRESHOLD);
}

#[test]
fn non_finite_iterates_are_reported() {
    #[derive(Debug)]
    struct Poisoned;
    impl vmpladmm::SmoothFunction for Poisoned {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, _: &Vector) -> f64 {
            0.0
        }
        fn gradient(&self, x: &Vector) -> Vector {
            if x[0] > 0.25 {
                v(&[f64::NAN])
            } else {
                v(&[-1.0])
            }
        }
        fn lipschitz(&self) -> f64 {
            1.0
        }
    }
    let prob = consensus_problem(Penalty::Zero, Arc::new(Poisoned), 1);
    let cfg = SolverConfig {
        alpha: 1.0,
        schedule: MetricSchedule::fixed(2.0, 1.0),
        ..SolverConfig::default()
    };
    let err = solve(&prob, &cfg, &InitialPoint::zeros(&prob)).unwrap_err();
    assert!(matches!(err, Error::Numerical { iteration } if iteration >= 2));
}

#[test]
fn batch_solves_match_single_solves_in_both_modes() {
    let inst = lasso_instance();
    let jobs: Vec<_> = [0.5, 1.0, 1.5]
        .iter()
        .map(|&beta| {
            let cfg = SolverConfig {
                max_iter: 300,
                ..audited_config(&inst.problem, beta)
            };
            (inst.problem.clone(), cfg, InitialPoint::zeros(&inst.problem))
        })
        .collect();
    let seq = solve_batch(&jobs, Execution::Sequential);
    let par = solve_batch(&jobs, Execution::Parallel);
    for ((s, p), (prob, cfg, init)) in seq.into_iter().zip(par).zip(&jobs) {
        let (s, p) = (s.unwrap(), p.unwrap());
        let single = solve(prob, cfg, init).unwrap();
        assert_eq!(s.state, p.state);
        assert_eq!(s.trace, single.trace);
    }
}

#[test]
fn invalid_configs_are_rejected_before_iterating() {
    let inst = consensus_toy(v(&[1.0])).unwrap();
    let init = InitialPoint::zeros(&inst.problem);
    let bad_beta = SolverConfig {
        beta: 1.99,
        ..SolverConfig::default()
    };
    assert!(matches!(solve(&inst.problem, &bad_beta, &init), Err(Error::BetaGuard { .. })));
    let bad_metric = SolverConfig {
        schedule: MetricSchedule::fixed(0.0, 1.0),
        ..SolverConfig::default()
    };
    assert!(solve(&inst.problem, &bad_metric, &init).is_err());
}
