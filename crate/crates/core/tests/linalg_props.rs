mod common;

use noisy_consensus::graphs::{laplacian, make_erdos_renyi};
use noisy_consensus::linalg::{kron, pseudoinverse_psd, solve, sym_eigen, DenseMatrix};
use proptest::prelude::*;
use rand::Rng;

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn random_symmetric(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let a = random_matrix(n, n, rng);
    DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] + a[(j, i)])
}

#[test]
fn eigen_reconstruction_on_random_symmetric() {
    let mut rng = common::rng(11);
    for case in 0..100 {
        let n = 1 + (case * 199) / 99;
        let a = random_symmetric(n, &mut rng);
        let s = sym_eigen(&a).unwrap();
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.residual <= 1e-8, "n = {n}, residual {}", s.residual);

        let v = s.eigenvectors.as_ref().unwrap();
        let vl = DenseMatrix::from_fn(n, n, |i, j| v[(i, j)] * s.eigenvalues[j]);
        let recon = vl.matmul(&v.transpose()).unwrap();
        assert!(recon.sub(&a).unwrap().frobenius_norm() <= 1e-8 * a.frobenius_norm());

        let gram = v.transpose().matmul(v).unwrap();
        assert!(gram.max_abs_diff(&DenseMatrix::identity(n)) <= 1e-8);
    }
}

#[test]
fn eigen_residual_at_1024() {
    let mut rng = common::rng(12);
    let a = random_symmetric(1024, &mut rng);
    let s = sym_eigen(&a).unwrap();
    assert!(s.residual <= 1e-8, "{}", s.residual);
}

#[test]
fn eigen_is_deterministic() {
    let mut rng = common::rng(13);
    let a = random_symmetric(40, &mut rng);
    assert_eq!(sym_eigen(&a).unwrap(), sym_eigen(&a).unwrap());
}

#[test]
fn kron_vec_identity() {
    let mut rng = common::rng(21);
    for _ in 0..20 {
        let a = random_matrix(3, 3, &mut rng);
        let b = random_matrix(3, 3, &mut rng);
        let c = random_matrix(3, 3, &mut rng);
        let lhs = a.matmul(&b).unwrap().matmul(&c).unwrap().vec();
        let rhs = kron(&c.transpose(), &a).unwrap().matvec(&b.vec()).unwrap();
        for (x, y) in lhs.iter().zip(&rhs) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn kron_mixed_product() {
    let mut rng = common::rng(22);
    for _ in 0..20 {
        let [a, b, c, d] = [0; 4].map(|_| random_matrix(3, 3, &mut rng));
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }
}

#[test]
fn solve_random_spd_20() {
    let mut rng = common::rng(31);
    let m = random_matrix(20, 20, &mut rng);
    let a = m.transpose().matmul(&m).unwrap().add_scaled(&DenseMatrix::identity(20), 1.0).unwrap();
    let x: Vec<f64> = (0..20).map(|_| rng.random_range(-5.0..5.0)).collect();
    let rhs = a.matvec(&x).unwrap();
    let got = solve(&a, &rhs).unwrap();
    for (g, w) in got.iter().zip(&x) {
        assert!((g - w).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_residual_on_spd(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = common::rng(seed);
        let m = random_matrix(n, n, &mut rng);
        let a = m.transpose().matmul(&m).unwrap().add_scaled(&DenseMatrix::identity(n), 0.5).unwrap();
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = solve(&a, &rhs).unwrap();
        let ax = a.matvec(&x).unwrap();
        let res: f64 = ax.iter().zip(&rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let rn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        // condition of a is at most (largest eigenvalue + 0.5) / 0.5
        let cond = (m.frobenius_norm().powi(2) + 0.5) / 0.5;
        prop_assert!(res <= 1e-9 * rn.max(1e-300) * cond.max(1.0));
    }

    #[test]
    fn pseudoinverse_penrose_on_random_graphs(seed in any::<u64>(), n in 2usize..=20, p_er in 0.1f64..1.0) {
        let g = make_erdos_renyi(n, p_er, seed, false, 1).unwrap().graph;
        let l = laplacian(&g).matrix;
        let lp = pseudoinverse_psd(&l).unwrap();
        let l_lp = l.matmul(&lp).unwrap();
        let lp_l = lp.matmul(&l).unwrap();
        prop_assert!(l_lp.matmul(&l).unwrap().max_abs_diff(&l) <= 1e-9);
        prop_assert!(lp_l.matmul(&lp).unwrap().max_abs_diff(&lp) <= 1e-9);
        prop_assert!(l_lp.max_abs_diff(&l_lp.transpose()) <= 1e-9);
        prop_assert!(lp_l.max_abs_diff(&lp_l.transpose()) <= 1e-9);
    }
}
