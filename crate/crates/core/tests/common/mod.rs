#![allow(dead_code)]

use noisy_consensus::graphs::{make_complete, make_grid, make_path, make_star, Family, UndirectedGraph};

/// Representative members of each family with at most `max_n` nodes.
pub fn family_instances(max_n: usize) -> Vec<(Family, UndirectedGraph)> {
    let mut out = Vec::new();
    for n in [3, 4, 5, 6, 8, 10, 12, 16, 20, 25, 30] {
        if n > max_n {
            break;
        }
        out.push((Family::Star, make_star(n).unwrap()));
        out.push((Family::Path, make_path(n).unwrap()));
        out.push((Family::Complete, make_complete(n).unwrap()));
    }
    for dims in [&[2usize, 2][..], &[2, 3], &[3, 3], &[2, 5], &[4, 4], &[5, 5], &[2, 2, 2], &[3, 3, 3]] {
        let n: usize = dims.iter().product();
        if n > max_n {
            continue;
        }
        let fam = if dims.len() == 2 { Family::Grid2d } else { Family::Grid3d };
        out.push((fam, make_grid(dims).unwrap()));
    }
    out
}

/// Fixed-seed LCG-free deterministic pseudo random numbers for matrix tests.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
