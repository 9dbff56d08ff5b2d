//! Constant deformation of the canonical commutators,
//! `[a1,a2] = [a1,a2†] = ε`, `[a_i,a_i†] = 1+ε`, realised on standard
//! auxiliary oscillators `A_i`, and the first-order corrected twin beam.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::fock::{build_twb, FockCutoff, MultiModeFockState, TWO_MODE_TAIL_TOL};
use crate::ops::{Ladder, Monomial, OperatorPoly};
use crate::quadrature::unit_interval_rule;
use crate::scalar::Real;
use crate::sector::PairPropagator;

/// Largest admissible `|ε|`.
pub const EPSILON_BOUND: f64 = 0.2;
/// Largest squeezing accepted by the perturbative constructions.
pub const R_BOUND: f64 = 1.5;
/// Gauss–Legendre nodes for the Duhamel integral; validated against twice as many.
pub const DUHAMEL_NODES: usize = 16;
const DUHAMEL_DOUBLING_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationParams<T> {
    pub epsilon: T,
    pub r: T,
}

impl<T: Real> DeformationParams<T> {
    pub fn new(epsilon: T, r: T) -> Result<Self> {
        if !(epsilon.abs() <= T::lit(EPSILON_BOUND)) {
            return Err(invalid("epsilon", format!("|{epsilon}| exceeds {EPSILON_BOUND}")));
        }
        if !(r >= T::zero()) {
            return Err(Error::NegativeParameter { name: "r", value: r.as_f64() });
        }
        Ok(Self { epsilon, r })
    }
}

/// Coefficients of `a1`, `a2` on `(A1, A1†, A2, A2†)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxiliaryModeMap<T> {
    pub epsilon: T,
    pub coefficients: [[T; 4]; 2],
}

impl<T: Real> AuxiliaryModeMap<T> {
    /// `a1 = √(1+ε) A1 + k (A2 − A2†)`, `a2 = √(1+ε) A2 + k (A1 + A1†)`,
    /// `k = ε / (2√(1+ε))`.
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > -T::one()) {
            return Err(invalid("epsilon", "must exceed -1"));
        }
        let s = (T::one() + epsilon).sqrt();
        let k = epsilon / (T::lit(2.0) * s);
        Ok(Self { epsilon, coefficients: Self::pattern(s, k) })
    }

    /// `∂/∂ε` of the map at `ε = 0`: `δa1 = (A1 + A2 − A2†)/2`,
    /// `δa2 = (A1 + A1† + A2)/2`.
    pub fn first_order_shift() -> Self {
        let half = T::lit(0.5);
        Self { epsilon: T::zero(), coefficients: Self::pattern(half, half) }
    }

    fn pattern(s: T, k: T) -> [[T; 4]; 2] {
        let z = T::zero();
        [[s, z, k, -k], [k, k, s, z]]
    }

    /// `a_i` as a polynomial in the auxiliary ladder operators.
    pub fn mode(&self, i: usize) -> OperatorPoly<T> {
        let row = self.coefficients[i];
        let ladders = [Ladder::annihilate(0), Ladder::create(0), Ladder::annihilate(1), Ladder::create(1)];
        let mut p = OperatorPoly::zero();
        for (c, l) in row.iter().zip(ladders) {
            if *c != T::zero() {
                p.add_term(Complex::new(*c, T::zero()), Monomial::new([l]));
            }
        }
        p
    }
}

/// Largest deviations of the commutators built from the map, measured on
/// number states with both occupations at most `n_max − 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorReport<T> {
    pub a1_a2: T,
    pub a1_a2dag: T,
    pub a1_a1dag: T,
    pub a2_a2dag: T,
}

impl<T: Real> CommutatorReport<T> {
    pub fn max(&self) -> T {
        self.a1_a2.max(self.a1_a2dag).max(self.a1_a1dag).max(self.a2_a2dag)
    }
}

pub fn deformed_commutator_check<T: Real>(
    map: &AuxiliaryModeMap<T>,
    cutoff: FockCutoff,
) -> Result<CommutatorReport<T>> {
    if cutoff.n_max() < 3 {
        return Err(Error::CutoffTooSmall { discarded: 1.0, tail_tol: 0.0 });
    }
    let a1 = map.mode(0);
    let a2 = map.mode(1);
    let eps = map.epsilon;
    let checks = [
        (a1.commutator(&a2), eps),
        (a1.commutator(&a2.adjoint()), eps),
        (a1.commutator(&a1.adjoint()), T::one() + eps),
        (a2.commutator(&a2.adjoint()), T::one() + eps),
    ];
    let guard = cutoff.n_max() - 2;
    let mut dev = [T::zero(); 4];
    for n1 in 0..=guard {
        for n2 in 0..=guard {
            let e = MultiModeFockState::<T>::basis(cutoff, &[n1, n2])?;
            for (slot, (comm, expected)) in dev.iter_mut().zip(&checks) {
                let v = e.apply_poly(comm)?.sub(&e.scaled(Complex::new(*expected, T::zero())))?;
                let worst = v.amplitudes().iter().map(|z| z.norm()).fold(T::zero(), T::max);
                *slot = slot.max(worst);
            }
        }
    }
    Ok(CommutatorReport { a1_a2: dev[0], a1_a2dag: dev[1], a1_a1dag: dev[2], a2_a2dag: dev[3] })
}

/// `r (A1†A2† − A1A2)`.
pub fn squeeze_generator<T: Real>(r: T) -> OperatorPoly<T> {
    let one = Complex::new(r, T::zero());
    let mut p = OperatorPoly::zero();
    p.add_term(one, Monomial::new([Ladder::create(0), Ladder::create(1)]));
    p.add_term(-one, Monomial::new([Ladder::annihilate(0), Ladder::annihilate(1)]));
    p
}

/// First-order change `ℬ` of the squeeze generator `r a1†a2† − r a1a2` when
/// the deformed modes are expanded around the auxiliary ones, normal ordered.
pub fn perturbation_generator<T: Real>(r: T) -> OperatorPoly<T> {
    let shift = AuxiliaryModeMap::<T>::first_order_shift();
    let (da1, da2) = (shift.mode(0), shift.mode(1));
    let a1 = OperatorPoly::annihilate(0);
    let a2 = OperatorPoly::annihilate(1);
    let raise = &(&da1.adjoint() * &a2.adjoint()) + &(&a1.adjoint() * &da2.adjoint());
    let lower = &(&da1 * &a2) + &(&a1 * &da2);
    (&raise - &lower).scale_real(r).normal_ordered()
}

fn check_r<T: Real>(r: T, cutoff: FockCutoff) -> Result<()> {
    if !(r >= T::zero() && r <= T::lit(R_BOUND)) {
        return Err(invalid("r", format!("{r} outside [0, {R_BOUND}]")));
    }
    let tail = r.tanh().as_f64().powi(2 * (cutoff.n_max() as i32 + 1));
    if tail > TWO_MODE_TAIL_TOL {
        return Err(Error::CutoffTooSmall { discarded: tail, tail_tol: TWO_MODE_TAIL_TOL });
    }
    Ok(())
}

fn duhamel_with_nodes<T: Real>(
    r: T,
    b: &OperatorPoly<T>,
    cutoff: FockCutoff,
    nodes: usize,
) -> Result<MultiModeFockState<T>> {
    let vacuum = MultiModeFockState::<T>::vacuum(2, cutoff)?;
    let mut acc = vacuum.scaled(Complex::new(T::zero(), T::zero()));
    for (u, w) in unit_interval_rule::<T>(nodes) {
        let forward = PairPropagator::squeezer(u * r, cutoff).apply(&vacuum, 0, 1)?;
        let kicked = forward.apply_poly(b)?;
        let back = PairPropagator::squeezer(-u * r, cutoff).apply(&kicked, 0, 1)?;
        acc = acc.add(&back.scaled(Complex::new(w, T::zero())))?;
    }
    PairPropagator::squeezer(r, cutoff).apply(&acc, 0, 1)
}

/// `e^{𝒜} ∫₀¹ e^{−u𝒜} ℬ e^{u𝒜} du |0⟩` with `𝒜 = r(A1†A2† − A1A2)`, on the
/// truncated space. The u-integral uses a 16-node Gauss–Legendre rule and is
/// rejected if a 32-node rule differs by more than 1e-10 relative.
pub fn duhamel_first_order<T: Real>(
    r: T,
    b: &OperatorPoly<T>,
    cutoff: FockCutoff,
) -> Result<MultiModeFockState<T>> {
    check_r(r, cutoff)?;
    if let Some(k) = b.max_mode().filter(|&k| k > 1) {
        return Err(Error::InvalidModeIndex { index: k, modes: 2 });
    }
    let coarse = duhamel_with_nodes(r, b, cutoff, DUHAMEL_NODES)?;
    let fine = duhamel_with_nodes(r, b, cutoff, 2 * DUHAMEL_NODES)?;
    let diff = coarse.sub(&fine)?.norm_sqr().sqrt();
    let scale = fine.norm_sqr().sqrt().max(T::min_positive_value());
    if diff > T::lit(DUHAMEL_DOUBLING_TOL) * scale.max(T::one()) {
        return Err(Error::QuadratureUnderResolved { nodes: DUHAMEL_NODES, required: 2 * DUHAMEL_NODES });
    }
    Ok(fine)
}

/// Coefficient of `ε` in the corrected twin beam:
/// `r e^{𝒜} (½(A1† + A2†)² − 1)|0⟩`.
pub fn twb_prime_correction<T: Real>(r: T, cutoff: FockCutoff) -> Result<MultiModeFockState<T>> {
    check_r(r, cutoff)?;
    let p_dag = &OperatorPoly::<T>::create(0) + &OperatorPoly::create(1);
    let seed = &(&p_dag * &p_dag).scale_real(T::lit(0.5)) - &OperatorPoly::identity();
    let vacuum = MultiModeFockState::<T>::vacuum(2, cutoff)?;
    let v = vacuum.apply_poly(&seed.scale_real(r))?;
    PairPropagator::squeezer(r, cutoff).apply(&v, 0, 1)
}

/// `|TWB⟩ + ε r e^{𝒜}(½(A1†+A2†)² − 1)|0⟩`, renormalized. The correction
/// changes the norm at `O(ε²)` only.
pub fn build_twb_prime<T: Real>(params: DeformationParams<T>, cutoff: FockCutoff) -> Result<MultiModeFockState<T>> {
    let twb = build_twb(crate::fock::SqueezeParams::real(params.r)?, cutoff)?;
    if params.epsilon == T::zero() {
        return Ok(twb);
    }
    let corr = twb_prime_correction(params.r, cutoff)?;
    Ok(twb.add(&corr.scaled(Complex::new(params.epsilon, T::zero())))?.normalized())
}

/// Relative norm of the part of `correction` outside
/// `e^{𝒜} span{|0,0⟩, |2,0⟩, |1,1⟩, |0,2⟩}`.
pub fn correction_span_residual<T: Real>(
    r: T,
    correction: &MultiModeFockState<T>,
) -> Result<T> {
    let pulled = PairPropagator::squeezer(-r, correction.cutoff()).apply(correction, 0, 1)?;
    let inside = [[0, 0], [2, 0], [1, 1], [0, 2]];
    let total = pulled.norm_sqr();
    let kept: T = inside.iter().map(|occ| pulled.amplitude(occ).norm_sqr()).sum();
    Ok(((total - kept).max(T::zero()) / total).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_bounds() {
        assert!(DeformationParams::new(0.2, 1.0).is_ok());
        assert!(DeformationParams::new(-0.2, 1.0).is_ok());
        assert!(DeformationParams::new(0.21, 1.0).is_err());
        assert!(DeformationParams::new(0.1, -1.0).is_err());
    }

    #[test]
    fn map_coefficients() {
        let m = AuxiliaryModeMap::new(0.21_f64).unwrap();
        let s = 1.1;
        let k = 0.21 / 2.2;
        assert!((m.coefficients[0][0] - s).abs() < 1e-15);
        assert!((m.coefficients[0][2] - k).abs() < 1e-15);
        assert!((m.coefficients[0][3] + k).abs() < 1e-15);
        assert!((m.coefficients[1][1] - k).abs() < 1e-15);
    }

    #[test]
    fn symbolic_commutators_are_exact() {
        // [a1, a2] = ε and friends hold identically as operator identities.
        let eps = 0.07_f64;
        let m = AuxiliaryModeMap::new(eps).unwrap();
        let (a1, a2) = (m.mode(0), m.mode(1));
        let id = OperatorPoly::<f64>::identity();
        let close = |p: OperatorPoly<f64>, c: f64| {
            let d = (&p.normal_ordered() - &id.scale_real(c)).pruned(1e-14);
            d.is_empty()
        };
        assert!(close(a1.commutator(&a2), eps));
        assert!(close(a1.commutator(&a2.adjoint()), eps));
        assert!(close(a1.commutator(&a1.adjoint()), 1.0 + eps));
        assert!(close(a2.commutator(&a2.adjoint()), 1.0 + eps));
    }

    #[test]
    fn perturbation_generator_closed_form() {
        let r = 0.8_f64;
        let p = &OperatorPoly::<f64>::create(0) + &OperatorPoly::create(1);
        let q = &OperatorPoly::<f64>::annihilate(0) + &OperatorPoly::annihilate(1);
        let expected = &(&(&p * &p) - &(&q * &q)).scale_real(r / 2.0) - &OperatorPoly::identity().scale_real(r);
        let diff = (&perturbation_generator(r) - &expected.normal_ordered()).pruned(1e-14);
        assert!(diff.is_empty(), "{diff:?}");
    }

    #[test]
    fn commutator_check_examples() {
        let cut = FockCutoff::new(12).unwrap();
        let zero = deformed_commutator_check(&AuxiliaryModeMap::new(0.0_f64).unwrap(), cut).unwrap();
        assert!(zero.max() < 1e-14);
        let r = deformed_commutator_check(&AuxiliaryModeMap::new(0.1_f64).unwrap(), cut).unwrap();
        assert!(r.a1_a1dag < 1e-10 && r.max() < 1e-10);
        assert!(deformed_commutator_check(&AuxiliaryModeMap::new(0.1_f64).unwrap(), FockCutoff::new(2).unwrap()).is_err());
    }

    #[test]
    fn duhamel_zero_perturbation() {
        let cut = FockCutoff::new(30).unwrap();
        let v = duhamel_first_order(0.5_f64, &OperatorPoly::zero(), cut).unwrap();
        assert_eq!(v.norm_sqr(), 0.0);
    }

    #[test]
    fn twb_prime_limits() {
        let cut = FockCutoff::new(30).unwrap();
        let twb = build_twb(crate::fock::SqueezeParams::real(0.8_f64).unwrap(), cut).unwrap();
        assert_eq!(build_twb_prime(DeformationParams::new(0.0, 0.8).unwrap(), cut).unwrap(), twb);
        let flat = build_twb_prime(DeformationParams::new(0.05_f64, 0.0).unwrap(), cut).unwrap();
        assert!((flat.amplitude(&[0, 0]).re - 1.0).abs() < 1e-15);
        let p = build_twb_prime(DeformationParams::new(0.05, 0.8).unwrap(), cut).unwrap();
        let overlap = twb.inner(&p).norm_sqr();
        assert!((1.0 - overlap).abs() < 4.0 * 0.05 * 0.05);
        assert!(1.0 - overlap > 0.0);
    }
}
