//! Gauss rules and generalized Laguerre polynomials.

use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};

use crate::scalar::Real;

/// Nodes and weights for `∫ f(x) N(0, 1)(x) dx`, i.e. Gauss–Hermite rescaled to
/// the standard normal density. Weights sum to one.
pub fn standard_normal_rule<T: Real>(nodes: usize) -> Vec<(T, T)> {
    let n = NonZeroUsize::new(nodes).expect("at least one node");
    let rule = GaussHermite::new(n);
    let scale = std::f64::consts::SQRT_2;
    let norm = std::f64::consts::PI.sqrt();
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (T::lit(x * scale), T::lit(w / norm)))
        .collect()
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn unit_interval_rule<T: Real>(nodes: usize) -> Vec<(T, T)> {
    let n = NonZeroUsize::new(nodes).expect("at least one node");
    let rule = GaussLegendre::new(n);
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (T::lit(0.5 * (x + 1.0)), T::lit(0.5 * w)))
        .collect()
}

/// Generalized Laguerre polynomial `L_n^(alpha)(x)` by three-term recurrence.
pub fn laguerre<T: Real>(n: usize, alpha: T, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() + alpha - x;
    for k in 1..n {
        let kf = T::from_usize_lossy(k);
        let next = ((T::lit(2.0) * kf + T::one() + alpha - x) * cur - (kf + alpha) * prev)
            / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}
