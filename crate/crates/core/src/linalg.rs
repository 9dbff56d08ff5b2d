//! Dense real matrix exponential for the small conserved-sector blocks of
//! quadratic bosonic generators.

use ndarray::Array2;

use crate::scalar::Real;

fn norm_one<T: Real>(a: &Array2<T>) -> T {
    a.columns()
        .into_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, &x| acc + x.abs()))
        .fold(T::zero(), T::max)
}

/// `exp(a)` by scaling and squaring with a truncated Taylor series.
///
/// The scaled matrix has 1-norm at most 1/2, so the series terminates once a
/// term drops below machine epsilon relative to the partial sum.
pub fn expm<T: Real>(a: &Array2<T>) -> Array2<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Array2::zeros((0, 0));
    }

    let norm = norm_one(a);
    let half = T::lit(0.5);
    let squarings = if norm > half {
        (norm / half).log2().ceil().to_i32().unwrap_or(0).max(0)
    } else {
        0
    };
    let scaled = a.mapv(|x| x / T::lit(2.0).powi(squarings));

    let mut result = Array2::<T>::eye(n);
    let mut term = Array2::<T>::eye(n);
    for k in 1..=40 {
        term = term.dot(&scaled).mapv(|x| x / T::from_usize_lossy(k));
        result += &term;
        if norm_one(&term) <= T::epsilon() * norm_one(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}
