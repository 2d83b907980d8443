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

use common::gaussian_matrix;
use proptest::prelude::*;
use vmpladmm::linops::{GramSide, MatrixFree, Mode};
use vmpladmm::reference::{jacobi_eigen, singular_values};
use vmpladmm::{LinearOperator, Matrix, Vector};

fn operators() -> Vec<LinearOperator> {
    vec![
        LinearOperator::identity(4),
        LinearOperator::neg_identity(4),
        LinearOperator::scaled_identity(4, -2.5),
        LinearOperator::diagonal(&[1.0, -4.0, 2.0, 0.5]),
        LinearOperator::dense(gaussian_matrix(4, 4, 1)),
        LinearOperator::dense(gaussian_matrix(6, 4, 2)),
        LinearOperator::dense(gaussian_matrix(3, 4, 3)),
    ]
}

fn vector_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adjoint_is_consistent(u in vector_strategy(4), w in vector_strategy(6)) {
        for op in operators() {
            let u = Vector::from_column_slice(&u);
            let w = Vector::from_column_slice(&w[..op.rows()]);
            let lhs = op.forward(&u).unwrap().dot(&w);
            let rhs = u.dot(&op.adjoint(&w).unwrap());
            let scale = u.norm() * w.norm() * op.op_norm_default().unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn norm_and_gram_bound_rayleigh_quotients(u in vector_strategy(4)) {
        let u = Vector::from_column_slice(&u);
        prop_assume!(u.norm() > 1e-6);
        for op in operators() {
            let ratio = op.forward(&u).unwrap().norm() / u.norm();
            prop_assert!(op.op_norm_default().unwrap() >= ratio - 1e-8);
            prop_assert!(op.gram_min_eig(GramSide::Gram).unwrap() <= ratio * ratio + 1e-8);
        }
    }
}

#[test]
fn spectral_bounds_are_ordered() {
    for op in operators() {
        let b = op.spectral_bounds().unwrap();
        let sq = b.op_norm * b.op_norm;
        assert!(b.gram_min_eig >= 0.0 && b.gram_min_eig <= sq * (1.0 + 1e-12));
        assert!(b.cogram_min_eig >= 0.0 && b.cogram_min_eig <= sq * (1.0 + 1e-12));
    }
}

#[test]
fn power_iteration_matches_jacobi_svd() {
    let m = gaussian_matrix(5, 5, 7);
    let estimate = LinearOperator::dense(m.clone()).op_norm_default().unwrap();
    let oracle = singular_values(&m)[0];
    assert!((estimate - oracle).abs() <= 1e-6, "{estimate} vs {oracle}");
}

#[test]
fn gram_min_eig_matches_jacobi() {
    let m = gaussian_matrix(6, 4, 11);
    let op = LinearOperator::dense(m.clone());
    let (gram, _) = jacobi_eigen(&(m.transpose() * &m));
    assert!((op.gram_min_eig(GramSide::Gram).unwrap() - gram[0]).abs() <= 1e-10);
    // the 6x6 cogram of a rank-4 map is singular
    assert!(op.gram_min_eig(GramSide::Cogram).unwrap() <= 1e-10);
}

#[test]
fn matrix_free_uses_declared_values() {
    let m = gaussian_matrix(3, 3, 5);
    let (fwd, adj) = (m.clone(), m.transpose());
    let op = LinearOperator::MatrixFree(
        MatrixFree::new(3, 3, std::sync::Arc::new(move |v| &fwd * v), std::sync::Arc::new(move |v| &adj * v))
            .with_norm(9.0)
            .with_gram_min_eig(0.25)
            .with_cogram_min_eig(0.25),
    );
    assert_eq!(op.op_norm_default().unwrap(), 9.0);
    assert_eq!(op.gram_min_eig(GramSide::Gram).unwrap(), 0.25);
    let u = Vector::from_column_slice(&[1.0, 2.0, 3.0]);
    assert_eq!(op.apply(&u, Mode::Forward).unwrap(), &m * &u);
    assert_eq!(op.apply(&u, Mode::Adjoint).unwrap(), m.transpose() * &u);
}

#[test]
fn csv_loaded_operator_applies() {
    let op = LinearOperator::from_csv_reader("0,1\n1,0\n".as_bytes()).unwrap();
    let u = Vector::from_column_slice(&[2.0, 5.0]);
    assert_eq!(op.adjoint(&u).unwrap(), Vector::from_column_slice(&[5.0, 2.0]));
    assert_eq!(op.to_dense().unwrap(), Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
}
