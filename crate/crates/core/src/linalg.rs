//! Small dense-vector kernels shared by the solvers.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C64 = Complex64;

/// `⟨u|v⟩`, conjugating `u`.
pub fn dot(u: &[C64], v: &[C64]) -> C64 {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        acc += a.conj() * b;
    }
    acc
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += a x`.
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(v: &mut [C64], factor: C64) {
    v.iter_mut().for_each(|x| *x *= factor);
}

/// Normalizes in place and returns the previous norm.
pub fn normalize(v: &mut [C64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        scale(v, C64::new(1.0 / n, 0.0));
    }
    n
}

/// Removes the components along each (orthonormal) vector in `basis`.
/// Classical Gram-Schmidt, applied twice.
pub fn orthogonalize<'a, I>(v: &mut [C64], basis: I)
where
    I: IntoIterator<Item = &'a [C64]> + Clone,
{
    for _ in 0..2 {
        for u in basis.clone() {
            let c = dot(u, v);
            axpy(-c, u, v);
        }
    }
}

/// Deterministic unit vector with components uniform in the unit square.
pub fn random_unit_vector(dimension: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dimension)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    v
}

/// `‖a − b‖`.
pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
