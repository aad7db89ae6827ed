mod common;

use noisy_consensus::graphs::{laplacian_spectrum, make_complete, make_path, make_star, Family};
use noisy_consensus::noise_index::{
    exact_noise_index, family_bounds, generic_bounds, noise_report, ridl_bounds, ReportOptions,
};
use noisy_consensus::ridl::{expected_p, expected_p_squared, ExpectedOperators, KForm, KOptions, RidlConfig};
use noisy_consensus::exec::Exec;
use noisy_consensus::tol::SANDWICH_SLACK;

const PS: [f64; 3] = [0.3, 0.5, 0.9];
const KS: [f64; 2] = [0.4, 0.8];

#[test]
fn bound_chain_holds_across_families() {
    for (fam, g) in common::family_instances(30) {
        for p in PS {
            for k in KS {
                let cfg = RidlConfig::from_k(&g, p, k, 1.0).unwrap();
                let r = noise_report(&g, &cfg, &ReportOptions::default()).unwrap();
                if let Err(msg) = r.check_chain(SANDWICH_SLACK) {
                    panic!("{fam} n={} p={p} k={k}: {msg}", g.n());
                }
                assert!(r.j_exact.unwrap() > 0.0 && r.j_lb > 0.0 && r.j_ub.is_finite());
            }
        }
    }
}

#[test]
fn deterministic_activation_collapses_bounds() {
    for (fam, g) in common::family_instances(20) {
        let cfg = RidlConfig::from_k(&g, 1.0, 0.8, 1.0).unwrap();
        let r = noise_report(&g, &cfg, &ReportOptions::default()).unwrap();
        assert!((r.j_ub - r.j_lb).abs() <= 1e-10, "{fam}");
        assert!((r.j_exact.unwrap() - r.j_lb).abs() <= 1e-9, "{fam}");
    }
}

#[test]
fn deterministic_index_equals_spectral_sum() {
    let g = make_path(7).unwrap();
    let cfg = RidlConfig::from_k(&g, 1.0, 0.6, 2.0).unwrap();
    let ops = ExpectedOperators::from_moments(&g, &cfg, &KOptions::default()).unwrap();
    let spec = noisy_consensus::linalg::sym_eigen(&ops.p_bar).unwrap().eigenvalues;
    let want: f64 = 2.0 / 7.0 * spec[..6].iter().map(|l| 1.0 / (1.0 - l * l)).sum::<f64>();
    assert!((exact_noise_index(&ops, 2.0).unwrap() - want).abs() <= 1e-10);
}

#[test]
fn star_exact_matches_enumeration_route() {
    let g = make_star(5).unwrap();
    let cfg = RidlConfig::from_k(&g, 0.9, 0.8, 1.0).unwrap();
    let moments = ExpectedOperators::from_moments(&g, &cfg, &KOptions::default()).unwrap();
    let enumerated = ExpectedOperators::from_enumeration(&g, &cfg, KForm::OmegaFirst, Exec::default()).unwrap();
    let a = exact_noise_index(&moments, 1.0).unwrap();
    let b = exact_noise_index(&enumerated, 1.0).unwrap();
    assert!((a - b).abs() <= 1e-10 * b);
}

#[test]
fn laplacian_bounds_equal_generic_bounds() {
    for (fam, g) in common::family_instances(30) {
        for p in PS {
            for k in KS {
                let cfg = RidlConfig::from_k(&g, p, k, 1.3).unwrap();
                let spectral = ridl_bounds(&laplacian_spectrum(&g).unwrap(), &cfg).unwrap();
                let generic = generic_bounds(&expected_p(&g, &cfg), &expected_p_squared(&g, &cfg), 1.3).unwrap();
                let tol = 1e-10 * generic.upper.max(1.0);
                assert!((spectral.lower - generic.lower).abs() <= tol, "{fam} n={}", g.n());
                assert!((spectral.upper - generic.upper).abs() <= tol, "{fam} n={}", g.n());
            }
        }
    }
}

#[test]
fn path_closed_form_matches_spectral() {
    for n in 3..=100 {
        let g = make_path(n).unwrap();
        let cfg = RidlConfig::from_k(&g, 0.9, 0.8, 1.0).unwrap();
        let spectral = ridl_bounds(&laplacian_spectrum(&g).unwrap(), &cfg).unwrap();
        let closed = family_bounds::path(n, &cfg);
        assert!((spectral.lower - closed.lower).abs() <= 1e-10 * closed.lower.max(1.0));
        assert!((spectral.upper - closed.upper).abs() <= 1e-10 * closed.upper.max(1.0));
    }
}

#[test]
fn sparse_families_grow_with_n() {
    for m in [5, 10, 20] {
        for (make, name) in [(make_star as fn(usize) -> _, "star"), (make_path, "path")] {
            let small = make(m).unwrap();
            let large = make(2 * m).unwrap();
            let j = |g: &noisy_consensus::graphs::UndirectedGraph| {
                let cfg = RidlConfig::from_k(g, 0.9, 0.8, 1.0).unwrap();
                noise_report(g, &cfg, &ReportOptions::default()).unwrap().j_exact.unwrap()
            };
            assert!(j(&large) > j(&small), "{name} m={m}");
        }
    }
}

#[test]
fn complete_graph_index_is_flat() {
    let j = |n| {
        let g = make_complete(n).unwrap();
        let cfg = RidlConfig::from_k(&g, 0.9, 0.8, 1.0).unwrap();
        noise_report(&g, &cfg, &ReportOptions::default()).unwrap().j_exact.unwrap()
    };
    let (a, b) = (j(20), j(40));
    assert!(((b - a) / a).abs() < 0.05, "{a} vs {b}");
}

#[test]
fn resistance_lower_bound_relaxes_laplacian_lower_bound() {
    for (fam, g) in common::family_instances(30) {
        for p in PS {
            for k in KS {
                let cfg = RidlConfig::from_k(&g, p, k, 1.0).unwrap();
                let r = noise_report(&g, &cfg, &ReportOptions { exact_cap: 0, ..Default::default() }).unwrap();
                assert!(r.j_res_lb <= r.j_lb + SANDWICH_SLACK, "{fam}");
                assert!(r.j_ub <= r.j_res_ub + SANDWICH_SLACK, "{fam}");
            }
        }
    }
}

#[test]
fn asymptotic_envelope_brackets_bounds() {
    use noisy_consensus::noise_index::family_asymptotics;
    for (fam, n) in [(Family::Star, 40), (Family::Path, 40), (Family::Grid2d, 36), (Family::Grid3d, 27), (Family::Complete, 40)] {
        let d_max = match fam {
            Family::Star | Family::Complete => n - 1,
            Family::Path => 2,
            Family::Grid2d => 4,
            _ => 6,
        };
        let cfg = RidlConfig::new(0.9, 0.8 / d_max as f64, 1.0).unwrap();
        let a = family_asymptotics(fam, n, &cfg).unwrap();
        assert!((a.k - 0.8).abs() < 1e-12);
        assert!(a.resistance_envelope.lower < a.resistance_envelope.upper);
    }
}
