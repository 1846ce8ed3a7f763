//! Fixtures shared by the unit tests.

use crate::instance::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Four points on a line at x = 0,1,2,3 with alternating colors a,b,a,b.
pub fn line_abab() -> Instance {
    Instance::from_coords(
        vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
        vec![0, 1, 0, 1],
        2,
    )
    .unwrap()
}

/// Two well-separated groups on a line: a,b,a at x = 0,1,2 and b,a,b at
/// x = 10,11,12.
pub fn two_groups_line() -> Instance {
    Instance::from_coords(
        vec![
            vec![0.0],
            vec![1.0],
            vec![2.0],
            vec![10.0],
            vec![11.0],
            vec![12.0],
        ],
        vec![0, 1, 0, 1, 0, 1],
        2,
    )
    .unwrap()
}

/// Two tight rainbow triples plus three surplus a-colored points:
/// a,b,c,a near 0 and a,b,c,a,a near 10; l = 3.
pub fn two_triples_extra_a() -> Instance {
    Instance::from_coords(
        vec![
            vec![0.0],
            vec![0.1],
            vec![0.2],
            vec![0.3],
            vec![10.0],
            vec![10.1],
            vec![10.2],
            vec![10.3],
            vec![10.4],
        ],
        vec![0, 1, 2, 0, 0, 1, 2, 0, 0],
        3,
    )
    .unwrap()
}

/// Stream of random instances with points in the unit square, colors uniform.
pub fn rng_instance(seed: u64, n: usize, k: usize, l: usize) -> impl FnMut() -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || {
        let coords = (0..n)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let colors = (0..n).map(|_| rng.random_range(0..k)).collect();
        Instance::from_coords(coords, colors, l).unwrap()
    }
}
