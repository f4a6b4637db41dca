//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (orders 3, 5, 7, 9, 13).

use crate::linalg::{self, ComplexMatrix, C64};
use crate::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(m: &ComplexMatrix, x: f64) -> ComplexMatrix {
    m * C64::new(x, 0.0)
}

/// `(V - U)^{-1} (V + U)`
fn pade_quotient(u: ComplexMatrix, v: ComplexMatrix) -> ComplexMatrix {
    let num = &v + &u;
    let den = v - u;
    den.lu().solve(&num).expect("Padé denominator is nonsingular within the theta bounds")
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> ComplexMatrix {
    let dim = a.nrows();
    let id = linalg::identity(dim);
    let a2 = a * a;
    let mut power = id.clone();
    let mut u = ComplexMatrix::zeros(dim, dim);
    let mut v = ComplexMatrix::zeros(dim, dim);
    for pair in b.chunks(2) {
        v += scaled(&power, pair[0]);
        u += scaled(&power, pair[1]);
        power = &power * &a2;
    }
    pade_quotient(a * u, v)
}

fn pade_13(a: &ComplexMatrix) -> ComplexMatrix {
    let b = &B13;
    let id = linalg::identity(a.nrows());
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a * (&a6 * inner_u
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(&id, b[1]));
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * inner_v
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&id, b[0]);
    pade_quotient(u, v)
}

/// Matrix exponential of a square matrix.
pub fn expm(k: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !k.is_square() {
        return Err(Error::InvalidDimension(format!(
            "expm needs a square matrix, got {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    linalg::ensure_finite(k)?;
    Ok(expm_unchecked(k))
}

pub(crate) fn expm_unchecked(k: &ComplexMatrix) -> ComplexMatrix {
    let norm = one_norm(k);
    for (order, theta) in THETA {
        if norm <= theta {
            let b: &[f64] = match order {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(k, b);
        }
    }
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = scaled(k, 0.5f64.powi(squarings));
    let mut r = pade_13(&a);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}
