// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra on small generators: the matrix
//! exponential and a full eigendecomposition.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

type CMat = DMatrix<Complex64>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Induced 1-norm (max column sum).
pub fn norm1(a: &CMat) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
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

// Largest 1-norms for which the Padé approximant of each degree meets unit
// roundoff in double precision.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152e0;

/// `exp(A)` by scaling and squaring with a diagonal Padé approximant.
pub fn matrix_exponential(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::ConvergenceFailure(format!(
            "matrix is {}x{}, not square",
            n,
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential input".into()));
    }
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }

    let norm = norm1(a);
    let id = CMat::identity(n, n);
    let a2 = a * a;

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            // even powers of A up to A^(m-1)
            let mut powers = vec![id.clone(), a2.clone()];
            while powers.len() < m.div_ceil(2) {
                let next = powers.last().unwrap() * &a2;
                powers.push(next);
            }
            let mut u_inner = CMat::zeros(n, n);
            let mut v = CMat::zeros(n, n);
            for (k, p) in powers.iter().enumerate() {
                u_inner += p * c(coeffs[2 * k + 1]);
                v += p * c(coeffs[2 * k]);
            }
            let u = a * u_inner;
            return pade_solve(&u, &v);
        }
    }

    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = c(0.5f64.powi(s));
    let a1 = a * scale;
    let a2 = &a2 * (scale * scale);
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;

    let w1 = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let w2 = &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &id * c(b[1]);
    let u = &a1 * (&a6 * w1 + w2);
    let z1 = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let z2 = &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &id * c(b[0]);
    let v = &a6 * z1 + z2;

    let mut x = pade_solve(&u, &v)?;
    for _ in 0..s {
        x = &x * &x;
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ConvergenceFailure("overflow while squaring".into()));
    }
    Ok(x)
}

fn pade_solve(u: &CMat, v: &CMat) -> Result<CMat> {
    let num = v + u;
    let den = v - u;
    den.lu()
        .solve(&num)
        .ok_or_else(|| Error::ConvergenceFailure("singular Padé denominator".into()))
}

/// Eigendecomposition `A = V diag(λ) V⁻¹` of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<Complex64>,
    /// Right eigenvectors as unit-norm columns.
    pub vectors: CMat,
    pub inverse: CMat,
    /// `‖V‖_F ‖V⁻¹‖_F`.
    pub condition: f64,
}

/// Diagonalize via the complex Schur form `A = Q T Q†` and back
/// substitution on the triangular factor.
pub fn eigendecompose(a: &CMat) -> Result<Eigen> {
    let n = a.nrows();
    let scale = norm1(a).max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(a.clone(), 1e-15 * scale, 10_000)
        .ok_or_else(|| Error::ConvergenceFailure("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let values = DVector::from_fn(n, |k, _| t[(k, k)]);
    let small = f64::EPSILON * scale;

    let mut x = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = c(1.0);
        for j in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * x[(l, k)];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < small {
                d = c(small);
            }
            x[(j, k)] = -acc / d;
        }
    }
    let mut vectors = q * x;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= c(nrm);
        }
    }
    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditionedEigenbasis(f64::INFINITY))?;
    let condition = vectors.norm() * inverse.norm();
    Ok(Eigen {
        values,
        vectors,
        inverse,
        condition,
    })
}
