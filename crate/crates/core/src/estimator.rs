//! Photon-number-difference statistics, the phase-averaged correlation
//! estimator, and the normalized uncertainty `ΔE/ΔE_cl` from each backend.

use std::fmt;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::environment::{non_negative, EnvironmentParams};
use crate::error::{invalid, Error, Result};
use crate::fock::{
    build_coherent, build_twb, build_twb_with_tolerance, expectation_poly, interferometer_input,
    number_difference_moment, CoherentInput, FockCutoff, MultiModeFockState, PhaseConfig,
    SqueezeParams, FOUR_MODE_TAIL_TOL,
};
use crate::gaussian::{
    isserlis_expectation, number_difference_moments_closed, twin_beam_defect, TwoModeGaussianState,
};
use crate::modccr::{build_twb_prime, DeformationParams};
use crate::ops::OperatorPoly;
use crate::scalar::Real;
use crate::sector::PropagatorCache;

/// Magnitude below which a correlation denominator counts as vanishing.
pub const DENOM_FLOOR: f64 = 1e-8;
/// Default phase-noise width, radians.
pub const DEFAULT_PHASE_SIGMA: f64 = 1e-2;
/// Minimum Monte-Carlo sample count.
pub const MIN_SAMPLES: usize = 1000;
const SHARD: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    GaussianFull,
    GaussianClosedForm,
    GaussianApprox,
    FockOracle,
    AnalyticModccr,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::GaussianFull => "gaussian_full",
            Self::GaussianClosedForm => "gaussian_closed_form",
            Self::GaussianApprox => "gaussian_approx",
            Self::FockOracle => "fock_oracle",
            Self::AnalyticModccr => "analytic_modccr",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintyResult<T> {
    /// `ΔE/ΔE_cl`, never negative.
    pub ratio: T,
    pub backend: Backend,
    pub inputs: Vec<(&'static str, T)>,
}

impl<T: Real> UncertaintyResult<T> {
    fn new(ratio: T, backend: Backend, inputs: Vec<(&'static str, T)>) -> Self {
        Self { ratio, backend, inputs }
    }
}

fn guard_denominator<T: Real>(value: T) -> Result<T> {
    if !(value.abs() > T::lit(DENOM_FLOOR)) {
        return Err(Error::DegenerateDenominator { value: value.as_f64(), floor: DENOM_FLOOR });
    }
    Ok(value)
}

fn check_four_mode<T: Real>(state: &MultiModeFockState<T>) -> Result<()> {
    if state.mode_count() != 4 {
        return Err(invalid("state", "expects modes ordered (a1, b1, a2, b2)"));
    }
    Ok(())
}

/// `TWB(r) ⊗ |μ⟩ ⊗ |μ⟩` in mode order `(a1, b1, a2, b2)`.
pub fn interferometer_state<T: Real>(r: T, mu: Complex<T>, cutoff: FockCutoff) -> Result<MultiModeFockState<T>> {
    let twb = build_twb_with_tolerance(SqueezeParams::real(r)?, cutoff, FOUR_MODE_TAIL_TOL)?;
    let b = build_coherent(CoherentInput::new(mu), cutoff)?;
    interferometer_input(&twb, &b, &b)
}

fn output_moments<T: Real>(
    state: &MultiModeFockState<T>,
    phases: &PhaseConfig<T>,
    cache: &mut PropagatorCache<T>,
) -> Result<(T, T)> {
    check_four_mode(state)?;
    let s = cache.beam_splitter(phases.phi1).apply(state, 0, 1)?;
    let s = cache.beam_splitter(phases.phi2).apply(&s, 2, 3)?;
    Ok((number_difference_moment(&s, 2)?, number_difference_moment(&s, 4)?))
}

/// `⟨(N_c1 − N_c2)²⟩` after both interferometers.
pub fn delta_n_expectation<T: Real>(state: &MultiModeFockState<T>, phases: &PhaseConfig<T>) -> Result<T> {
    let mut cache = PropagatorCache::new(state.cutoff());
    Ok(output_moments(state, phases, &mut cache)?.0)
}

/// Quantum variance of `ΔN = (N_c1 − N_c2)²` at the given phases.
pub fn delta_n_variance<T: Real>(state: &MultiModeFockState<T>, phases: &PhaseConfig<T>) -> Result<T> {
    let mut cache = PropagatorCache::new(state.cutoff());
    let (m2, m4) = output_moments(state, phases, &mut cache)?;
    Ok((m4 - m2 * m2).max(T::zero()))
}

/// `N_c1 − N_c2` in terms of the input modes, `c = a cos(φ/2) + b sin(φ/2)`.
pub fn output_difference_operator<T: Real>(phases: &PhaseConfig<T>) -> OperatorPoly<T> {
    let port = |a: usize, b: usize, phi: T| {
        let (s, c) = (phi / T::lit(2.0)).sin_cos();
        let hop = &(&OperatorPoly::create(a) * &OperatorPoly::annihilate(b))
            + &(&OperatorPoly::create(b) * &OperatorPoly::annihilate(a));
        &(&OperatorPoly::number(a).scale_real(c * c) + &OperatorPoly::number(b).scale_real(s * s))
            + &hop.scale_real(s * c)
    };
    &port(0, 1, phases.phi1) - &port(2, 3, phases.phi2)
}

/// Same quantity as [`delta_n_expectation`] without beam-splitter unitaries:
/// the Heisenberg-picture operator is applied to the input state directly.
pub fn delta_n_expectation_heisenberg<T: Real>(
    state: &MultiModeFockState<T>,
    phases: &PhaseConfig<T>,
) -> Result<T> {
    check_four_mode(state)?;
    let v = state.apply_poly(&output_difference_operator(phases))?;
    Ok(v.norm_sqr())
}

/// `⟨ΔN(φ1, φ2)⟩` as an exact trigonometric polynomial of degree two in each
/// phase, recovered from a 5×5 grid of Fock evaluations.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseResponse<T> {
    coeffs: [[Complex<T>; 5]; 5],
}

impl<T: Real> PhaseResponse<T> {
    /// Samples come from the Heisenberg route, which is a trigonometric
    /// polynomial even on a truncated basis.
    pub fn from_state(state: &MultiModeFockState<T>) -> Result<Self> {
        check_four_mode(state)?;
        let angle = |p: usize| T::TAU() * T::from_usize_lossy(p) / T::lit(5.0);
        let mut samples = [[T::zero(); 5]; 5];
        for (p, row) in samples.iter_mut().enumerate() {
            for (q, slot) in row.iter_mut().enumerate() {
                *slot = delta_n_expectation_heisenberg(state, &PhaseConfig::at(angle(p), angle(q)))?;
            }
        }
        let mut coeffs = [[Complex::new(T::zero(), T::zero()); 5]; 5];
        for (j, row) in coeffs.iter_mut().enumerate() {
            for (k, c) in row.iter_mut().enumerate() {
                let (fj, fk) = (Self::freq(j), Self::freq(k));
                for (p, srow) in samples.iter().enumerate() {
                    for (q, &v) in srow.iter().enumerate() {
                        let phase = -(fj * angle(p) + fk * angle(q));
                        *c += Complex::from_polar(v, phase);
                    }
                }
                *c /= T::lit(25.0);
            }
        }
        Ok(Self { coeffs })
    }

    fn freq(j: usize) -> T {
        T::from_usize_lossy(j) - T::lit(2.0)
    }

    pub fn eval(&self, phi1: T, phi2: T) -> T {
        self.sum(phi1, phi2, |_, _| T::one())
    }

    /// `∂φ1 ∂φ2 ⟨ΔN⟩`, exact for the polynomial.
    pub fn mixed_derivative(&self, phi1: T, phi2: T) -> T {
        self.sum(phi1, phi2, |fj, fk| -(fj * fk))
    }

    fn sum(&self, phi1: T, phi2: T, weight: impl Fn(T, T) -> T) -> T {
        let mut acc = T::zero();
        for (j, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                let (fj, fk) = (Self::freq(j), Self::freq(k));
                let e = Complex::from_polar(T::one(), fj * phi1 + fk * phi2);
                acc += (*c * e).re * weight(fj, fk);
            }
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Configuration {
    Parallel,
    Orthogonal,
}

/// Bivariate Gaussian phase noise around the central phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseNoiseModel<T> {
    pub sigma1: T,
    pub sigma2: T,
    pub rho: T,
    pub configuration: Configuration,
}

impl<T: Real> PhaseNoiseModel<T> {
    pub fn parallel(sigma1: T, sigma2: T, rho: T) -> Result<Self> {
        non_negative("sigma1", sigma1)?;
        non_negative("sigma2", sigma2)?;
        if !(rho.abs() <= T::one()) {
            return Err(invalid("rho", format!("{rho} outside [-1, 1]")));
        }
        Ok(Self { sigma1, sigma2, rho, configuration: Configuration::Parallel })
    }

    /// Uncorrelated noise with the same marginals.
    pub fn orthogonal(sigma1: T, sigma2: T) -> Result<Self> {
        let mut m = Self::parallel(sigma1, sigma2, T::zero())?;
        m.configuration = Configuration::Orthogonal;
        Ok(m)
    }

    pub fn counterpart(&self) -> Self {
        Self { rho: T::zero(), configuration: Configuration::Orthogonal, ..*self }
    }

    /// Phase deviations from a pair of independent standard normals.
    fn deviations(&self, z1: T, z2: T) -> (T, T) {
        let rho = match self.configuration {
            Configuration::Parallel => self.rho,
            Configuration::Orthogonal => T::zero(),
        };
        let tail = (T::one() - rho * rho).max(T::zero()).sqrt();
        (self.sigma1 * z1, self.sigma2 * (rho * z1 + tail * z2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub samples: usize,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, o: Self) -> Self {
        Self { n: self.n + o.n, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    fn estimate<T: Real>(&self) -> MonteCarloEstimate<T> {
        let mean = self.sum / self.n;
        let var = ((self.sum_sq - self.n * mean * mean) / (self.n - 1.0)).max(0.0);
        MonteCarloEstimate { mean: T::lit(mean), std_error: T::lit((var / self.n).sqrt()), samples: self.n as usize }
    }
}

/// Runs `f` on `samples` standard-normal pairs. Shards draw from independent
/// ChaCha streams of one seed and are combined in shard order, so results do
/// not depend on thread scheduling.
fn sharded<const K: usize>(samples: usize, seed: u64, f: impl Fn(f64, f64) -> [f64; K] + Sync) -> [Moments; K] {
    let shards = samples.div_ceil(SHARD);
    let parts: Vec<[Moments; K]> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let count = SHARD.min(samples - shard * SHARD);
            let mut acc = [Moments::default(); K];
            for _ in 0..count {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                for (a, x) in acc.iter_mut().zip(f(z1, z2)) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    parts.into_iter().fold([Moments::default(); K], |acc, p| {
        let mut out = acc;
        for (o, x) in out.iter_mut().zip(p) {
            *o = o.merge(x);
        }
        out
    })
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples { samples, min: MIN_SAMPLES });
    }
    Ok(())
}

/// Monte-Carlo `E_α[⟨ΔN⟩]` over the noise model, centred on the central phases.
pub fn phase_averaged_response<T: Real>(
    noise: &PhaseNoiseModel<T>,
    response: &PhaseResponse<T>,
    center: &PhaseConfig<T>,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate<T>> {
    check_samples(samples)?;
    let [m] = sharded(samples, seed, |z1, z2| {
        let (d1, d2) = noise.deviations(T::lit(z1), T::lit(z2));
        [response.eval(center.phi1_0 + d1, center.phi2_0 + d2).as_f64()]
    });
    Ok(m.estimate())
}

pub fn phase_averaged_expectation<T: Real>(
    noise: &PhaseNoiseModel<T>,
    state: &MultiModeFockState<T>,
    center: &PhaseConfig<T>,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate<T>> {
    phase_averaged_response(noise, &PhaseResponse::from_state(state)?, center, samples, seed)
}

/// `(E_∥ − E_⊥) / ⟨∂φ1∂φ2 ΔN⟩`.
pub fn correlation_estimate<T: Real>(e_par: T, e_perp: T, denom: T) -> Result<T> {
    Ok((e_par - e_perp) / guard_denominator(denom)?)
}

fn mixed_difference<T: Real>(
    state: &MultiModeFockState<T>,
    phases: &PhaseConfig<T>,
    h: T,
    cache: &mut PropagatorCache<T>,
) -> Result<T> {
    let mut f = |s1: T, s2: T| {
        let p = PhaseConfig::at(phases.phi1_0 + s1 * h, phases.phi2_0 + s2 * h);
        output_moments(state, &p, cache).map(|m| m.0)
    };
    let one = T::one();
    let sum = f(one, one)? - f(one, -one)? - f(-one, one)? + f(-one, -one)?;
    Ok(sum / (T::lit(4.0) * h * h))
}

/// `⟨∂φ1∂φ2 ΔN⟩` at the central phases by central differences at `h` and `h/2`,
/// Richardson-combined. The two step sizes must agree within 1%.
pub fn mixed_derivative_denominator<T: Real>(
    state: &MultiModeFockState<T>,
    phases: &PhaseConfig<T>,
    h: T,
) -> Result<T> {
    if h > T::lit(1e-2) {
        return Err(Error::StepTooLarge { h: h.as_f64() });
    }
    if !(h >= T::lit(1e-4)) {
        return Err(Error::StepTooSmall { h: h.as_f64() });
    }
    let mut cache = PropagatorCache::new(state.cutoff());
    let coarse = mixed_difference(state, phases, h, &mut cache)?;
    let fine = mixed_difference(state, phases, h / T::lit(2.0), &mut cache)?;
    let value = guard_denominator((T::lit(4.0) * fine - coarse) / T::lit(3.0))?;
    if (coarse - fine).abs() > T::lit(0.01) * fine.abs() {
        return Err(Error::FiniteDifferenceUnstable { coarse: coarse.as_f64(), fine: fine.as_f64() });
    }
    Ok(value)
}

/// `⟨∂φ1∂φ2 ΔN⟩` at zero phases from the Gaussian backend, with coherent
/// b-ports of amplitudes `mu1`, `mu2`:
/// `−½ ⟨(μ1 a1† + μ1* a1)(μ2 a2† + μ2* a2)⟩`.
pub fn gaussian_mixed_derivative<T: Real>(
    state: &TwoModeGaussianState<T>,
    mu1: Complex<T>,
    mu2: Complex<T>,
) -> Result<T> {
    let quad = |mode: usize, mu: Complex<T>| {
        &OperatorPoly::create(mode).scale(mu) + &OperatorPoly::annihilate(mode).scale(mu.conj())
    };
    let v = isserlis_expectation(state, &(&quad(0, mu1) * &quad(1, mu2)))?;
    Ok(-v.re / T::lit(2.0))
}

/// Monte-Carlo chain from injected phase correlations to the recovered
/// `E_∥[δφ1 δφ2]`, with the uncertainty `ΔE` at the central phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineResult<T> {
    pub e_parallel: MonteCarloEstimate<T>,
    pub e_orthogonal: MonteCarloEstimate<T>,
    /// Standard error of `E_∥ − E_⊥` from paired samples.
    pub difference_std_error: T,
    pub denominator: T,
    pub recovered: T,
    pub recovered_std_error: T,
    pub injected: T,
    /// `[2 Var_∥(ΔN)]^{1/2} / |⟨∂φ1∂φ2 ΔN⟩|` at the central phases.
    pub delta_e: T,
}

/// Both configurations use the same normal draws, so their difference has
/// small variance.
pub fn correlation_pipeline<T: Real>(
    state: &MultiModeFockState<T>,
    center: &PhaseConfig<T>,
    noise: &PhaseNoiseModel<T>,
    samples: usize,
    seed: u64,
    h: T,
) -> Result<PipelineResult<T>> {
    check_samples(samples)?;
    let response = PhaseResponse::from_state(state)?;
    let par = PhaseNoiseModel { configuration: Configuration::Parallel, ..*noise };
    let perp = noise.counterpart();
    let [mp, mo, md] = sharded(samples, seed, |z1, z2| {
        let eval = |m: &PhaseNoiseModel<T>| {
            let (d1, d2) = m.deviations(T::lit(z1), T::lit(z2));
            response.eval(center.phi1_0 + d1, center.phi2_0 + d2).as_f64()
        };
        let (a, b) = (eval(&par), eval(&perp));
        [a, b, a - b]
    });
    let (e_parallel, e_orthogonal, diff) = (mp.estimate(), mo.estimate(), md.estimate::<T>());
    let denominator = mixed_derivative_denominator(state, center, h)?;
    let recovered = correlation_estimate(e_parallel.mean, e_orthogonal.mean, denominator)?;
    let central = PhaseConfig::at(center.phi1_0, center.phi2_0);
    let variance = delta_n_variance(state, &central)?;
    Ok(PipelineResult {
        e_parallel,
        e_orthogonal,
        difference_std_error: diff.std_error,
        denominator,
        recovered,
        recovered_std_error: diff.std_error / denominator.abs(),
        injected: par.rho * par.sigma1 * par.sigma2,
        delta_e: (T::lit(2.0) * variance).sqrt() / denominator.abs(),
    })
}

fn check_squeezing<T: Real>(r: T) -> Result<()> {
    if r < T::zero() {
        return Err(Error::NegativeParameter { name: "r", value: r.as_f64() });
    }
    Ok(())
}

fn evolved_twin_beam<T: Real>(r: T, m: T, lambda_tau: T) -> Result<TwoModeGaussianState<T>> {
    check_squeezing(r)?;
    let env = EnvironmentParams::dimensionless(lambda_tau, m)?;
    TwoModeGaussianState::from_squeezing(SqueezeParams::real(r)?)?.evolve(&env, T::one())
}

fn quadrature_product<T: Real>() -> OperatorPoly<T> {
    let x = |m: usize| &OperatorPoly::create(m) + &OperatorPoly::annihilate(m);
    &x(0) * &x(1)
}

/// `2 [⟨Δ𝒩⁴⟩ − ⟨Δ𝒩²⟩²]^{1/2} / ⟨(a1†+a1)(a2†+a2)⟩` on the thermally evolved
/// twin beam, every moment taken from normal ordering plus Wick's theorem.
/// The coherent ports only normalize the result, so `mu` is validated and
/// echoed but does not change the ratio.
pub fn uncertainty_env_full<T: Real>(r: T, m: T, lambda_tau: T, mu: Complex<T>) -> Result<UncertaintyResult<T>> {
    classical_uncertainty(mu)?;
    let state = evolved_twin_beam(r, m, lambda_tau)?;
    let dn = &OperatorPoly::number(0) - &OperatorPoly::number(1);
    let m2 = isserlis_expectation(&state, &dn.pow(2))?.re;
    let m4 = isserlis_expectation(&state, &dn.pow(4))?.re;
    let den = guard_denominator(isserlis_expectation(&state, &quadrature_product())?.re)?;
    let ratio = T::lit(2.0) * (m4 - m2 * m2).max(T::zero()).sqrt() / den.abs();
    Ok(UncertaintyResult::new(
        ratio,
        Backend::GaussianFull,
        vec![("r", r), ("M", m), ("lambda_tau", lambda_tau), ("mu", mu.norm())],
    ))
}

/// Same quantity from closed-form twin-beam moments,
/// `Var = 2δ + 20δ²` and `⟨(a1†+a1)(a2†+a2)⟩ = (Σ+ − Σ−)/2`, with `δ`
/// evaluated without cancellation. Accurate down to `λτ` near underflow.
pub fn uncertainty_env_closed_form<T: Real>(r: T, m: T, lambda_tau: T) -> Result<UncertaintyResult<T>> {
    let state = evolved_twin_beam(r, m, lambda_tau)?;
    let delta = twin_beam_defect(r, m, lambda_tau)?;
    let (m2, m4) = number_difference_moments_closed(delta);
    let den = guard_denominator((state.sigma_plus() - state.sigma_minus()) / T::lit(2.0))?;
    let var = T::lit(20.0) * delta * delta + T::lit(2.0) * delta;
    debug_assert!((m4 - m2 * m2 - var).abs() <= T::lit(1e-9) * var.abs().max(T::epsilon()));
    let ratio = T::lit(2.0) * var.max(T::zero()).sqrt() / den.abs();
    Ok(UncertaintyResult::new(
        ratio,
        Backend::GaussianClosedForm,
        vec![("r", r), ("M", m), ("lambda_tau", lambda_tau)],
    ))
}

/// Lowest-order weak-coupling form
/// `8 √(λτ) [(2M+1) cosh 2r − 1]^{1/2} / sinh 2r`.
pub fn uncertainty_env_approx<T: Real>(r: T, m: T, lambda_tau: T) -> Result<UncertaintyResult<T>> {
    check_squeezing(r)?;
    non_negative("M", m)?;
    non_negative("lambda_tau", lambda_tau)?;
    let two = T::lit(2.0);
    let den = guard_denominator((two * r).sinh())?;
    let k = two * m * (two * r).cosh() + two * r.sinh().powi(2);
    let ratio = T::lit(8.0) * lambda_tau.sqrt() * k.sqrt() / den;
    Ok(UncertaintyResult::new(
        ratio,
        Backend::GaussianApprox,
        vec![("r", r), ("M", m), ("lambda_tau", lambda_tau)],
    ))
}

/// `8 r |ε| / sinh 2r`, first order in the deformation.
pub fn uncertainty_modccr_analytic<T: Real>(r: T, epsilon: T) -> Result<UncertaintyResult<T>> {
    check_squeezing(r)?;
    let den = guard_denominator((T::lit(2.0) * r).sinh())?;
    let ratio = T::lit(8.0) * r * epsilon.abs() / den;
    Ok(UncertaintyResult::new(ratio, Backend::AnalyticModccr, vec![("r", r), ("epsilon", epsilon)]))
}

/// Ratio evaluated on the renormalized first-order state in the Fock basis of
/// the auxiliary modes; the denominator uses the undeformed twin beam.
pub fn uncertainty_modccr_fock<T: Real>(params: DeformationParams<T>, cutoff: FockCutoff) -> Result<UncertaintyResult<T>> {
    if params.r > T::lit(1.2) || params.epsilon.abs() > T::lit(0.1) {
        return Err(invalid("deformation", "oracle covers r ≤ 1.2 and |ε| ≤ 0.1"));
    }
    let psi = build_twb_prime(params, cutoff)?;
    let twb = build_twb(SqueezeParams::real(params.r)?, cutoff)?;
    let m2 = number_difference_moment(&psi, 2)?;
    let m4 = number_difference_moment(&psi, 4)?;
    let den = guard_denominator(expectation_poly(&twb, &quadrature_product())?.re)?;
    let ratio = T::lit(2.0) * (m4 - m2 * m2).max(T::zero()).sqrt() / den.abs();
    Ok(UncertaintyResult::new(
        ratio,
        Backend::FockOracle,
        vec![("r", params.r), ("epsilon", params.epsilon), ("n_max", T::from_usize_lossy(cutoff.n_max()))],
    ))
}

/// Shot-noise baseline `√2/|μ|²`.
pub fn classical_uncertainty<T: Real>(mu: Complex<T>) -> Result<T> {
    let n = mu.norm_sqr();
    if n == T::zero() {
        return Err(Error::ZeroAmplitude);
    }
    Ok(T::SQRT_2() / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    #[test]
    fn correlation_estimate_examples() {
        assert_eq!(correlation_estimate(2.0, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(correlation_estimate(3.0, 1.0, 2.0).unwrap(), 1.0);
        assert!(matches!(correlation_estimate(3.0, 1.0, 1e-9), Err(Error::DegenerateDenominator { .. })));
    }

    #[test]
    fn classical_examples() {
        assert!((classical_uncertainty(Complex::new(1.0_f64, 0.0)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let a = classical_uncertainty(Complex::new(0.3_f64, 0.4)).unwrap();
        let b = classical_uncertainty(Complex::new(0.6_f64, 0.8)).unwrap();
        assert!((a / b - 4.0).abs() < 1e-12);
        let big = classical_uncertainty(Complex::new(1000.0_f64, 0.0)).unwrap();
        assert!((big - 1.41421e-6).abs() < 1e-11);
        assert_eq!(classical_uncertainty(Complex::new(0.0_f64, 0.0)), Err(Error::ZeroAmplitude));
    }

    #[test]
    fn approx_examples() {
        assert_eq!(uncertainty_env_approx(1.0_f64, 0.5, 0.0).unwrap().ratio, 0.0);
        let oracle = |m: f64| 8.0 * 1e-3f64.sqrt() * ((2.0 * m + 1.0) * 4f64.cosh() - 1.0).sqrt() / 4f64.sinh();
        let a = uncertainty_env_approx(2.0_f64, 0.0, 1e-3).unwrap().ratio;
        assert!((a - oracle(0.0)).abs() < 1e-15);
        assert!((a - 0.0475481).abs() < 1e-7);
        let b = uncertainty_env_approx(2.0_f64, 1.0, 1e-3).unwrap().ratio;
        assert!((b - oracle(1.0)).abs() < 1e-15);
        assert!((b - 0.0833928).abs() < 1e-7);
        assert!(matches!(uncertainty_env_approx(0.0_f64, 0.0, 1e-3), Err(Error::DegenerateDenominator { .. })));
    }

    #[test]
    fn modccr_analytic_examples() {
        assert_eq!(uncertainty_modccr_analytic(1.0_f64, 0.0).unwrap().ratio, 0.0);
        let v = uncertainty_modccr_analytic(1.0_f64, 0.05).unwrap().ratio;
        assert!((v - 0.4 / 2f64.sinh()).abs() < 1e-15);
        assert!((v - 0.110288).abs() < 1e-6);
        let tiny = uncertainty_modccr_analytic(1e-4_f64, 0.05).unwrap().ratio;
        assert!((tiny - 4.0 * 0.05).abs() < 1e-8);
        assert!(uncertainty_modccr_analytic(0.0_f64, 0.05).is_err());
    }

    #[test]
    fn env_full_vanishes_without_coupling() {
        let res = uncertainty_env_full(1.0_f64, 1.0, 0.0, Complex::new(1.0, 0.0)).unwrap();
        assert!(res.ratio < 1e-6);
        assert_eq!(res.backend, Backend::GaussianFull);
        let closed = uncertainty_env_closed_form(1.0_f64, 1.0, 0.0).unwrap();
        assert_eq!(closed.ratio, 0.0);
    }

    #[test]
    fn env_full_matches_closed_form() {
        for &(r, m, lt) in &[(2.0_f64, 0.0, 1e-3), (0.7, 1.0, 1e-2), (1.2, 2.0, 0.3)] {
            let full = uncertainty_env_full(r, m, lt, Complex::new(1.0, 0.0)).unwrap().ratio;
            let closed = uncertainty_env_closed_form(r, m, lt).unwrap().ratio;
            assert!((full / closed - 1.0).abs() < 1e-6, "{r} {m} {lt}: {full} vs {closed}");
        }
    }

    #[test]
    fn heisenberg_route_matches() {
        let s = interferometer_state(0.6_f64, Complex::new(0.8, 0.0), c(12)).unwrap();
        let p = PhaseConfig::at(0.2, 0.2);
        let a = delta_n_expectation(&s, &p).unwrap();
        let b = delta_n_expectation_heisenberg(&s, &p).unwrap();
        assert!((a - b).abs() < 1e-6 * a.abs(), "{a} vs {b}");
        assert!(a > 0.0);
    }

    #[test]
    fn transparent_and_vacuum() {
        let s = interferometer_state(0.6_f64, Complex::new(0.8, 0.0), c(12)).unwrap();
        assert!(delta_n_expectation(&s, &PhaseConfig::at(0.0, 0.0)).unwrap().abs() < 1e-15);
        let v = MultiModeFockState::<f64>::vacuum(4, c(3)).unwrap();
        assert_eq!(delta_n_expectation(&v, &PhaseConfig::at(0.7, -1.1)).unwrap(), 0.0);
        let err = mixed_derivative_denominator(&v, &PhaseConfig::at(0.0, 0.0), 1e-3).unwrap_err();
        assert!(matches!(err, Error::DegenerateDenominator { .. }));
    }

    #[test]
    fn phase_response_is_exact() {
        let s = interferometer_state(0.5_f64, Complex::new(0.7, 0.1), c(12)).unwrap();
        let resp = PhaseResponse::from_state(&s).unwrap();
        for &(p1, p2) in &[(0.3, -0.2), (1.7, 2.9), (-2.2, 0.05)] {
            let p = PhaseConfig::at(p1, p2);
            let heisenberg = delta_n_expectation_heisenberg(&s, &p).unwrap();
            assert!((resp.eval(p1, p2) - heisenberg).abs() < 1e-12 * heisenberg.max(1.0));
            let direct = delta_n_expectation(&s, &p).unwrap();
            assert!((resp.eval(p1, p2) - direct).abs() < 1e-5 * direct);
        }
    }

    #[test]
    fn step_bounds() {
        let s = interferometer_state(0.6_f64, Complex::new(0.8, 0.0), c(12)).unwrap();
        let p = PhaseConfig::at(0.0, 0.0);
        assert!(matches!(mixed_derivative_denominator(&s, &p, 0.05), Err(Error::StepTooLarge { .. })));
        assert!(matches!(mixed_derivative_denominator(&s, &p, 1e-5), Err(Error::StepTooSmall { .. })));
    }

    #[test]
    fn denominator_matches_gaussian_backend() {
        let mu = Complex::new(0.8_f64, 0.0);
        let s = interferometer_state(0.6, mu, c(12)).unwrap();
        let p = PhaseConfig::at(0.0, 0.0);
        let fd = mixed_derivative_denominator(&s, &p, 1e-3).unwrap();
        let g = TwoModeGaussianState::from_squeezing(SqueezeParams::real(0.6).unwrap()).unwrap();
        let analytic = gaussian_mixed_derivative(&g, mu, mu).unwrap();
        assert!((fd / analytic - 1.0).abs() < 0.01, "{fd} vs {analytic}");
        assert!((analytic + 0.5 * 0.64 * 1.2f64.sinh()).abs() < 1e-12);
        let exact = PhaseResponse::from_state(&s).unwrap().mixed_derivative(0.0, 0.0);
        assert!((fd / exact - 1.0).abs() < 1e-4);
    }

    #[test]
    fn noise_model_invariants() {
        let m = PhaseNoiseModel::parallel(0.01, 0.01, 0.5).unwrap();
        let o = m.counterpart();
        assert_eq!(o.rho, 0.0);
        assert_eq!((o.sigma1, o.sigma2), (m.sigma1, m.sigma2));
        assert!(PhaseNoiseModel::parallel(0.01, 0.01, 1.5).is_err());
        assert!(PhaseNoiseModel::<f64>::orthogonal(-0.01, 0.01).is_err());
    }

    #[test]
    fn zero_width_noise_is_pointwise() {
        let s = interferometer_state(0.6_f64, Complex::new(0.8, 0.0), c(12)).unwrap();
        let center = PhaseConfig::centered(0.3, -0.2);
        let noise = PhaseNoiseModel::parallel(0.0, 0.0, 0.0).unwrap();
        let est = phase_averaged_expectation(&noise, &s, &center, 1000, 7).unwrap();
        let point = delta_n_expectation(&s, &PhaseConfig::at(0.3, -0.2)).unwrap();
        let exact = delta_n_expectation_heisenberg(&s, &PhaseConfig::at(0.3, -0.2)).unwrap();
        assert!((est.mean - exact).abs() < 1e-12 * exact);
        assert!((est.mean - point).abs() < 1e-5 * point);
        assert!(est.std_error < 1e-12 * point);
        assert!(matches!(
            phase_averaged_expectation(&noise, &s, &center, 10, 7),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn denominator_symmetric_under_label_swap() {
        let s = interferometer_state(0.6_f64, Complex::new(0.8, 0.0), c(12)).unwrap();
        let swapped = s.permute_modes(&[2, 3, 0, 1]).unwrap();
        let p = PhaseConfig::at(0.0, 0.0);
        let a = mixed_derivative_denominator(&s, &p, 1e-3).unwrap();
        let b = mixed_derivative_denominator(&swapped, &p, 1e-3).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn uncorrelated_configurations_agree() {
        let s = interferometer_state(0.6_f64, Complex::new(0.8, 0.0), c(12)).unwrap();
        let center = PhaseConfig::centered(0.0, 0.0);
        let noise = PhaseNoiseModel::parallel(0.01, 0.01, 0.0).unwrap();
        let res = correlation_pipeline(&s, &center, &noise, 2000, 3, 1e-3).unwrap();
        assert_eq!(res.e_parallel, res.e_orthogonal);
        assert_eq!(res.recovered, 0.0);
        let a = phase_averaged_expectation(&noise, &s, &center, 2000, 11).unwrap();
        let b = phase_averaged_expectation(&noise.counterpart(), &s, &center, 2000, 12).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() < 3.0 * se);
    }
}
