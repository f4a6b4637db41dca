#![allow(dead_code)]

use qnet::linalg::{conj, from_quarters, frobenius, ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| C64::new(gauss(rng), gauss(rng)))
}

/// Random `(A D; conj(D) conj(A))` with antihermitian `A`, symmetric `D`,
/// rescaled to Frobenius norm `norm`.
pub fn physical_generator(rng: &mut impl Rng, n: usize, norm: f64) -> ComplexMatrix {
    let x = complex(rng, n);
    let a = (&x - x.adjoint()) * C64::new(0.5, 0.0);
    let y = complex(rng, n);
    let d = (&y + y.transpose()) * C64::new(0.5, 0.0);
    let k = from_quarters(&a, &d, &conj(&d), &conj(&a));
    let scale = norm / frobenius(&k);
    k * C64::new(scale, 0.0)
}

/// Random passive generator `diag(A, conj(A))`.
pub fn passive_generator(rng: &mut impl Rng, n: usize, norm: f64) -> ComplexMatrix {
    let x = complex(rng, n);
    let a = (&x - x.adjoint()) * C64::new(0.5, 0.0);
    let z = ComplexMatrix::zeros(n, n);
    let k = from_quarters(&a, &z, &z, &conj(&a));
    let scale = norm / frobenius(&k);
    k * C64::new(scale, 0.0)
}
