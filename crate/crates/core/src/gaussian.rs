//! Analytic backend: two-mode Gaussian Wigner functions of twin-beam type,
//! their thermal evolution, and ordered moments by two independent routes.
//!
//! Conventions: `a = x + iy`, so the vacuum has `⟨x²⟩ = ⟨y²⟩ = 1/4`. The widths
//! `Σ±` are in vacuum units: `(x1+x2)/√2` and `(y1−y2)/√2` have variance
//! `Σ+/4`, while `(x1−x2)/√2` and `(y1+y2)/√2` have variance `Σ−/4`.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;

use crate::environment::{non_negative, EnvironmentParams};
use crate::error::{Error, Result};
use crate::fock::{SqueezeParams, MAX_DEGREE};
use crate::ops::{normal_order_with, Ladder, Monomial, NormalOrderMemo, OperatorPoly};
use crate::quadrature::{laguerre, standard_normal_rule};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeGaussianState<T> {
    sigma_plus: T,
    sigma_minus: T,
    /// Quadrature means `(x1, y1, x2, y2)`.
    mean: [T; 4],
}

impl<T: Real> TwoModeGaussianState<T> {
    pub fn new(sigma_plus: T, sigma_minus: T) -> Result<Self> {
        for (name, v) in [("sigma_plus", sigma_plus), ("sigma_minus", sigma_minus)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(crate::error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self { sigma_plus, sigma_minus, mean: [T::zero(); 4] })
    }

    pub fn vacuum() -> Self {
        Self { sigma_plus: T::one(), sigma_minus: T::one(), mean: [T::zero(); 4] }
    }

    /// Pure twin beam, `σ± = e^{±2r}`. Only real squeezing is supported.
    pub fn from_squeezing(params: SqueezeParams<T>) -> Result<Self> {
        if params.theta != T::zero() {
            return Err(Error::UnsupportedPhase { theta: params.theta.as_f64() });
        }
        let e = (T::lit(2.0) * params.r.abs()).exp();
        Self::new(e, T::one() / e)
    }

    pub fn with_mean(mut self, mean: [T; 4]) -> Self {
        self.mean = mean;
        self
    }

    /// Shifts mode amplitudes so that `⟨a1⟩ = alpha1`, `⟨a2⟩ = alpha2`.
    pub fn with_amplitudes(self, alpha1: Complex<T>, alpha2: Complex<T>) -> Self {
        self.with_mean([alpha1.re, alpha1.im, alpha2.re, alpha2.im])
    }

    pub fn sigma_plus(&self) -> T {
        self.sigma_plus
    }

    pub fn sigma_minus(&self) -> T {
        self.sigma_minus
    }

    pub fn mean(&self) -> [T; 4] {
        self.mean
    }

    /// Thermal channel for time `t`:
    /// `Σ±(t) = (2M+1)(1 − e^{−λt}) + Σ± e^{−λt}`, means damped by `e^{−λt/2}`.
    pub fn evolve(&self, env: &EnvironmentParams<T>, t: T) -> Result<Self> {
        non_negative("lambda", env.lambda)?;
        non_negative("M", env.m)?;
        non_negative("t", t)?;
        let lt = env.lambda * t;
        let heat = -(-lt).exp_m1();
        let keep = (-lt).exp();
        let asymptote = T::lit(2.0) * env.m + T::one();
        let damp = (-lt / T::lit(2.0)).exp();
        Ok(Self {
            sigma_plus: asymptote * heat + self.sigma_plus * keep,
            sigma_minus: asymptote * heat + self.sigma_minus * keep,
            mean: self.mean.map(|m| m * damp),
        })
    }

    /// Symmetric covariance of `(x1, y1, x2, y2)`.
    pub fn covariance(&self) -> Array2<T> {
        let eight = T::lit(8.0);
        let diag = (self.sigma_plus + self.sigma_minus) / eight;
        let cross = (self.sigma_plus - self.sigma_minus) / eight;
        let mut v = Array2::zeros((4, 4));
        for i in 0..4 {
            v[[i, i]] = diag;
        }
        v[[0, 2]] = cross;
        v[[2, 0]] = cross;
        v[[1, 3]] = -cross;
        v[[3, 1]] = -cross;
        v
    }

    /// `⟨a†a⟩` per mode and `⟨a1 a2⟩` for the zero-mean state.
    pub fn normal_two_point(&self) -> (T, T) {
        let four = T::lit(4.0);
        (
            (self.sigma_plus + self.sigma_minus) / four - T::lit(0.5),
            (self.sigma_plus - self.sigma_minus) / four,
        )
    }

    /// `δ = (Σ+Σ− − 1)/4 = N² + N − C²`; zero exactly on pure twin beams.
    pub fn purity_defect(&self) -> T {
        self.sigma_plus.mul_add(self.sigma_minus, -T::one()) / T::lit(4.0)
    }
}

/// `δ` for a twin beam of squeezing `r` after a thermal channel with product
/// `λt`, written without cancellations so it stays accurate as `λt → 0`.
pub fn twin_beam_defect<T: Real>(r: T, m: T, lambda_t: T) -> Result<T> {
    non_negative("M", m)?;
    non_negative("lambda_t", lambda_t)?;
    let two = T::lit(2.0);
    let a = -(-lambda_t).exp_m1();
    let s = two * m + T::one();
    let ch = (two * r).cosh();
    // s·cosh2r − 1 = 2M cosh2r + 2 sinh²r
    let k = two * m * ch + two * r.sinh().powi(2);
    Ok(a * (two * (k - s * a * ch) + a * (s * s + T::one())) / T::lit(4.0))
}

/// `(⟨Δ²⟩, ⟨Δ⁴⟩)` for `Δ = N1 − N2` on a zero-mean twin-beam Gaussian with
/// defect `δ`.
pub fn number_difference_moments_closed<T: Real>(delta: T) -> (T, T) {
    let two = T::lit(2.0);
    (two * delta, T::lit(24.0) * delta * delta + two * delta)
}

/// `(a1†)^{n1} a1^{m1} (a2†)^{n2} a2^{m2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WignerMonomial {
    pub n1: usize,
    pub m1: usize,
    pub n2: usize,
    pub m2: usize,
}

impl WignerMonomial {
    pub const fn new(n1: usize, m1: usize, n2: usize, m2: usize) -> Self {
        Self { n1, m1, n2, m2 }
    }

    pub const fn degree(&self) -> usize {
        self.n1 + self.m1 + self.n2 + self.m2
    }

    pub fn to_monomial(&self) -> Monomial {
        let rep = |l: Ladder, k: usize| std::iter::repeat_n(l, k);
        Monomial::new(
            rep(Ladder::create(0), self.n1)
                .chain(rep(Ladder::annihilate(0), self.m1))
                .chain(rep(Ladder::create(1), self.n2))
                .chain(rep(Ladder::annihilate(1), self.m2)),
        )
    }

    /// Inverse of [`to_monomial`](Self::to_monomial) for canonical
    /// normal-ordered two-mode words.
    pub fn from_normal_word(m: &Monomial) -> Option<Self> {
        if !m.is_normal_ordered() {
            return None;
        }
        let mut w = Self::new(0, 0, 0, 0);
        for l in m.ops() {
            match (l.mode, l.dagger) {
                (0, true) => w.n1 += 1,
                (0, false) => w.m1 += 1,
                (1, true) => w.n2 += 1,
                (1, false) => w.m2 += 1,
                _ => return None,
            }
        }
        Some(w)
    }
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::DegreeTooHigh { degree, max: MAX_DEGREE });
    }
    Ok(())
}

fn quadrature_coefficients<T: Real>(l: Ladder) -> [Complex<T>; 4] {
    let mut c = [Complex::new(T::zero(), T::zero()); 4];
    let sign = if l.dagger { -T::one() } else { T::one() };
    c[2 * l.mode] = Complex::new(T::one(), T::zero());
    c[2 * l.mode + 1] = Complex::new(T::zero(), sign);
    c
}

/// Expectation of a normal-ordered word by Wick's theorem with means: sum
/// over partial pairings of normal-ordered contractions, unpaired operators
/// replaced by their means.
fn wick_normal<T: Real>(state: &TwoModeGaussianState<T>, word: &[Ladder]) -> Complex<T> {
    let v = state.covariance();
    let coeffs: Vec<[Complex<T>; 4]> = word.iter().map(|&l| quadrature_coefficients(l)).collect();
    let means: Vec<Complex<T>> = coeffs
        .iter()
        .map(|c| c.iter().zip(state.mean).map(|(ci, m)| *ci * m).sum())
        .collect();
    let k = word.len();
    let mut contraction = vec![Complex::new(T::zero(), T::zero()); k * k];
    for i in 0..k {
        for j in 0..k {
            let mut s = Complex::new(T::zero(), T::zero());
            for p in 0..4 {
                for q in 0..4 {
                    s += coeffs[i][p] * coeffs[j][q] * v[[p, q]];
                }
            }
            if word[i].mode == word[j].mode && word[i].dagger != word[j].dagger {
                s -= T::lit(0.5);
            }
            contraction[i * k + j] = s;
        }
    }
    let zero_mean = means.iter().all(|m| m.norm() == T::zero());
    let remaining: Vec<usize> = (0..k).collect();
    pairings(&remaining, &contraction, k, &means, zero_mean)
}

fn pairings<T: Real>(
    rem: &[usize],
    contraction: &[Complex<T>],
    k: usize,
    means: &[Complex<T>],
    zero_mean: bool,
) -> Complex<T> {
    let Some((&first, rest)) = rem.split_first() else {
        return Complex::new(T::one(), T::zero());
    };
    let mut acc = Complex::new(T::zero(), T::zero());
    if !zero_mean {
        acc += means[first] * pairings(rest, contraction, k, means, zero_mean);
    }
    if zero_mean && rem.len() % 2 == 1 {
        return acc;
    }
    for (j, &other) in rest.iter().enumerate() {
        let c = contraction[first * k + other];
        if c.norm() == T::zero() {
            continue;
        }
        let mut sub = Vec::with_capacity(rest.len() - 1);
        sub.extend_from_slice(&rest[..j]);
        sub.extend_from_slice(&rest[j + 1..]);
        acc += c * pairings(&sub, contraction, k, means, zero_mean);
    }
    acc
}

/// Ordered moment `Tr[ρ (a1†)^{n1} a1^{m1} (a2†)^{n2} a2^{m2}]` from pairwise
/// covariances.
pub fn isserlis_moment<T: Real>(state: &TwoModeGaussianState<T>, w: WignerMonomial) -> Result<Complex<T>> {
    check_degree(w.degree())?;
    Ok(wick_normal(state, w.to_monomial().ops()))
}

/// `⟨P⟩` for an arbitrary two-mode operator polynomial, in any ordering: words
/// are normal ordered symbolically, then evaluated by Wick's theorem.
pub fn isserlis_expectation<T: Real>(state: &TwoModeGaussianState<T>, p: &OperatorPoly<T>) -> Result<Complex<T>> {
    check_degree(p.degree())?;
    if let Some(k) = p.max_mode().filter(|&k| k > 1) {
        return Err(Error::InvalidModeIndex { index: k, modes: 2 });
    }
    let mut memo = NormalOrderMemo::new();
    let mut values: BTreeMap<Monomial, Complex<T>> = BTreeMap::new();
    let mut total = Complex::new(T::zero(), T::zero());
    for (m, c) in p.terms() {
        for (word, weight) in normal_order_with(m.ops(), &mut memo) {
            let v = *values.entry(word.clone()).or_insert_with(|| wick_normal(state, word.ops()));
            total += *c * v * T::lit(weight as f64);
        }
    }
    Ok(total)
}

/// Tensor Gauss–Hermite rule for the Wigner integral, aligned with the
/// principal axes of the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes_per_axis: 48 }
    }
}

impl QuadratureSpec {
    pub fn new(nodes_per_axis: usize) -> Self {
        Self { nodes_per_axis }
    }

    /// Nodes per axis for which the rule is exact on a polynomial integrand
    /// of the given total degree: `2n − 1 ≥ degree`.
    pub fn required_nodes(degree: usize) -> usize {
        (degree + 2) / 2
    }
}

/// Normal-ordered single-mode Glauber kernel: the phase-space function whose
/// Wigner average is `⟨(a†)^n a^m⟩`.
fn glauber_kernel<T: Real>(n: usize, m: usize, z: Complex<T>) -> Complex<T> {
    let x = T::lit(2.0) * z.norm_sqr();
    let half = T::lit(-0.5);
    let fact = |k: usize| (1..=k).fold(T::one(), |acc, i| acc * T::from_usize_lossy(i));
    if m >= n {
        let scale = fact(n) * half.powi(n as i32) * laguerre(n, T::from_usize_lossy(m - n), x);
        z.powu((m - n) as u32) * scale
    } else {
        let scale = fact(m) * half.powi(m as i32) * laguerre(m, T::from_usize_lossy(n - m), x);
        z.conj().powu((n - m) as u32) * scale
    }
}

/// Moment by direct quadrature of the Glauber–Laguerre integral over the
/// four-dimensional Wigner function.
pub fn glauber_moment<T: Real>(
    state: &TwoModeGaussianState<T>,
    w: WignerMonomial,
    quad: &QuadratureSpec,
) -> Result<Complex<T>> {
    Ok(glauber_moments(state, &[w], quad)?[0])
}

/// Several moments from a single pass over the quadrature grid.
pub fn glauber_moments<T: Real>(
    state: &TwoModeGaussianState<T>,
    monomials: &[WignerMonomial],
    quad: &QuadratureSpec,
) -> Result<Vec<Complex<T>>> {
    let degree = monomials.iter().map(WignerMonomial::degree).max().unwrap_or(0);
    check_degree(degree)?;
    let required = QuadratureSpec::required_nodes(degree);
    if quad.nodes_per_axis < required {
        return Err(Error::QuadratureUnderResolved { nodes: quad.nodes_per_axis, required });
    }
    let rule = standard_normal_rule::<T>(quad.nodes_per_axis);
    let n = rule.len();

    let mut kernels1: Vec<(usize, usize)> = monomials.iter().map(|w| (w.n1, w.m1)).collect();
    let mut kernels2: Vec<(usize, usize)> = monomials.iter().map(|w| (w.n2, w.m2)).collect();
    kernels1.sort_unstable();
    kernels1.dedup();
    kernels2.sort_unstable();
    kernels2.dedup();
    let slot = |ks: &[(usize, usize)], key| ks.binary_search(&key).expect("kernel listed");
    let index: Vec<(usize, usize)> = monomials
        .iter()
        .map(|w| (slot(&kernels1, (w.n1, w.m1)), slot(&kernels2, (w.n2, w.m2))))
        .collect();

    // Principal axes: u± = (x1 ± x2)/√2, v± = (y1 ± y2)/√2.
    let quarter = T::lit(0.25);
    let sd_plus = (state.sigma_plus * quarter).sqrt();
    let sd_minus = (state.sigma_minus * quarter).sqrt();
    let r2 = T::SQRT_2().recip();
    let [mx1, my1, mx2, my2] = state.mean;
    let zero = Complex::new(T::zero(), T::zero());

    let partial: Vec<Vec<Complex<T>>> = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (xu, wu) = rule[ij / n];
            let (xd, wd) = rule[ij % n];
            let up = sd_plus * xu;
            let um = sd_minus * xd;
            let x1 = (up + um) * r2 + mx1;
            let x2 = (up - um) * r2 + mx2;
            let mut sums = vec![zero; monomials.len()];
            let mut k1 = vec![zero; kernels1.len()];
            let mut k2 = vec![zero; kernels2.len()];
            for &(yp_node, wp) in &rule {
                let vp = sd_minus * yp_node;
                for &(ym_node, wm) in &rule {
                    let vm = sd_plus * ym_node;
                    let z1 = Complex::new(x1, (vp + vm) * r2 + my1);
                    let z2 = Complex::new(x2, (vp - vm) * r2 + my2);
                    for (slot, &(a, b)) in k1.iter_mut().zip(&kernels1) {
                        *slot = glauber_kernel(a, b, z1);
                    }
                    for (slot, &(a, b)) in k2.iter_mut().zip(&kernels2) {
                        *slot = glauber_kernel(a, b, z2);
                    }
                    let weight = wp * wm;
                    for (s, &(i1, i2)) in sums.iter_mut().zip(&index) {
                        *s += k1[i1] * k2[i2] * weight;
                    }
                }
            }
            let outer = wu * wd;
            sums.into_iter().map(|s| s * outer).collect()
        })
        .collect();

    let mut total = vec![zero; monomials.len()];
    for row in partial {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(r: f64) -> TwoModeGaussianState<f64> {
        TwoModeGaussianState::from_squeezing(SqueezeParams::real(r).unwrap()).unwrap()
    }

    #[test]
    fn squeezing_widths() {
        let v = sq(0.0);
        assert_eq!((v.sigma_plus(), v.sigma_minus()), (1.0, 1.0));
        let s = sq(2.0);
        assert!((s.sigma_plus() - 54.598150033144236).abs() < 1e-12);
        assert!((s.sigma_minus() - 0.018315638888734).abs() < 1e-14);
        assert!((s.sigma_plus() * s.sigma_minus() - 1.0).abs() < 1e-14);
        let twisted = SqueezeParams::new(1.0, 0.5).unwrap();
        assert!(matches!(
            TwoModeGaussianState::from_squeezing(twisted),
            Err(Error::UnsupportedPhase { .. })
        ));
    }

    #[test]
    fn evolve_examples() {
        let s = sq(2.0);
        let env = EnvironmentParams::dimensionless(1.0, 0.0).unwrap();
        assert_eq!(s.evolve(&env, 0.0).unwrap(), s);
        let far = s.evolve(&EnvironmentParams::dimensionless(1.0, 1.5).unwrap(), 60.0).unwrap();
        assert!((far.sigma_plus() - 4.0).abs() < 1e-12 && (far.sigma_minus() - 4.0).abs() < 1e-12);
        let e = s.evolve(&env, 1e-3).unwrap();
        let expect = (1.0 - (-1e-3f64).exp()) + 4f64.exp() * (-1e-3f64).exp();
        assert!((e.sigma_plus() - expect).abs() < 1e-12);
        assert!((e.sigma_plus() - 54.54458).abs() < 1e-5);
        assert!(s.evolve(&env, -1.0).is_err());
    }

    #[test]
    fn two_point_functions() {
        let s = sq(1.0);
        let (n, c) = s.normal_two_point();
        assert!((n - 1f64.sinh().powi(2)).abs() < 1e-14);
        assert!((c - 1f64.sinh() * 1f64.cosh()).abs() < 1e-14);
        let n_is = isserlis_moment(&s, WignerMonomial::new(1, 1, 0, 0)).unwrap();
        let c_is = isserlis_moment(&s, WignerMonomial::new(0, 1, 0, 1)).unwrap();
        assert!((n_is.re - 1.381098).abs() < 1e-6);
        assert!((c_is.re - 1.813430).abs() < 1e-6);
        let vac = isserlis_moment(&TwoModeGaussianState::<f64>::vacuum(), WignerMonomial::new(1, 1, 0, 0)).unwrap();
        assert!(vac.norm() < 1e-15);
    }

    #[test]
    fn stable_defect_matches_direct() {
        for &(r, m, lt) in &[(0.5, 0.0, 0.1), (2.0, 1.0, 1e-3), (1.2, 2.0, 0.7)] {
            let env = EnvironmentParams::dimensionless(lt, m).unwrap();
            let st = sq(r).evolve(&env, 1.0).unwrap();
            let direct = st.purity_defect();
            let stable = twin_beam_defect(r, m, lt).unwrap();
            assert!((direct - stable).abs() < 1e-12 * direct.abs().max(1.0));
        }
        assert_eq!(twin_beam_defect(1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(twin_beam_defect(0.0_f64, 0.0, 0.3).unwrap().abs() < 1e-17);
    }

    #[test]
    fn closed_moments_match_wick() {
        let env = EnvironmentParams::dimensionless(0.2, 0.5).unwrap();
        let st = sq(0.8).evolve(&env, 1.0).unwrap();
        let dn = &OperatorPoly::<f64>::number(0) - &OperatorPoly::number(1);
        let m2 = isserlis_expectation(&st, &dn.pow(2)).unwrap().re;
        let m4 = isserlis_expectation(&st, &dn.pow(4)).unwrap().re;
        let (c2, c4) = number_difference_moments_closed(st.purity_defect());
        assert!((m2 - c2).abs() < 1e-12 * c2);
        assert!((m4 - c4).abs() < 1e-12 * c4);
    }

    #[test]
    fn means_shift_moments() {
        let alpha = Complex::new(0.6, -0.3);
        let coh = TwoModeGaussianState::<f64>::vacuum().with_amplitudes(alpha, Complex::new(0.0, 0.0));
        let n = isserlis_moment(&coh, WignerMonomial::new(1, 1, 0, 0)).unwrap();
        assert!((n.re - alpha.norm_sqr()).abs() < 1e-15);
        let a2 = isserlis_moment(&coh, WignerMonomial::new(0, 2, 0, 0)).unwrap();
        assert!((a2 - alpha * alpha).norm() < 1e-15);
        let g = glauber_moment(&coh, WignerMonomial::new(2, 1, 0, 0), &QuadratureSpec::new(4)).unwrap();
        assert!((g - alpha.conj() * alpha.norm_sqr()).norm() < 1e-13);
    }

    #[test]
    fn required_nodes_are_exactness_bound() {
        for d in 0..=8usize {
            let n = QuadratureSpec::required_nodes(d);
            assert!(2 * n > d, "degree {d}");
            assert!(n == 1 || 2 * (n - 1) < d + 1, "degree {d}");
        }
    }

    #[test]
    fn glauber_vacuum_and_squeezed() {
        let q = QuadratureSpec::new(8);
        let vac = glauber_moment(&TwoModeGaussianState::<f64>::vacuum(), WignerMonomial::new(1, 1, 0, 0), &q).unwrap();
        assert!(vac.norm() < 1e-12);
        let s = sq(0.8);
        let w = WignerMonomial::new(1, 1, 0, 0);
        let g = glauber_moment(&s, w, &q).unwrap();
        let i = isserlis_moment(&s, w).unwrap();
        assert!((g - i).norm() < 1e-10);
        assert!((g.re - 0.8f64.sinh().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn glauber_rejects_coarse_grid() {
        let w = WignerMonomial::new(2, 2, 2, 2);
        let err = glauber_moment(&sq(0.3), w, &QuadratureSpec::new(4)).unwrap_err();
        assert_eq!(err, Error::QuadratureUnderResolved { nodes: 4, required: 5 });
        let big = WignerMonomial::new(5, 4, 0, 0);
        assert!(matches!(isserlis_moment(&sq(0.3), big), Err(Error::DegreeTooHigh { .. })));
    }
}
