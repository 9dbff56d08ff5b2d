//! Thermal-environment parameters for the two-mode Lindblad channel.
//!
//! The Kossakowski matrix is indexed by the operator four-vector
//! `(a1, a1†, a2, a2†)`. The free Hamiltonian `ω Σ a†a` only rotates phases
//! globally and is dropped, i.e. everything is in the interaction picture.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck mass in GeV (`√(ħc/G)`, rounded to three digits).
pub const PLANCK_MASS_GEV: f64 = 1.22e19;
const GEV_PER_EV: f64 = 1e-9;

/// Microscopic origin of `M` and `τ`, when known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Provenance<T> {
    pub beta: T,
    pub omega: T,
    pub length: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvironmentParams<T> {
    /// Coupling rate λ.
    pub lambda: T,
    /// Effective thermal occupation M.
    pub m: T,
    /// Photon flight time τ.
    pub tau: T,
    pub provenance: Option<Provenance<T>>,
}

impl<T: Real> EnvironmentParams<T> {
    pub fn new(lambda: T, m: T, tau: T) -> Result<Self> {
        non_negative("lambda", lambda)?;
        non_negative("M", m)?;
        non_negative("tau", tau)?;
        Ok(Self { lambda, m, tau, provenance: None })
    }

    /// Unit flight time, so `lambda` is the dimensionless product λτ.
    pub fn dimensionless(lambda_tau: T, m: T) -> Result<Self> {
        Self::new(lambda_tau, m, T::one())
    }

    /// Derives `M` from the bath temperature and `τ` from the arm length (SI).
    pub fn from_provenance(lambda: T, beta: T, omega: T, length: T) -> Result<Self> {
        Self::from_provenance_with_c(lambda, beta, omega, length, T::lit(SPEED_OF_LIGHT))
    }

    pub fn from_provenance_with_c(lambda: T, beta: T, omega: T, length: T, c: T) -> Result<Self> {
        let m = boltzmann_factor(beta, omega)?;
        let tau = flight_time_with_c(length, c)?;
        let mut env = Self::new(lambda, m, tau)?;
        env.provenance = Some(Provenance { beta, omega, length });
        Ok(env)
    }

    pub fn lambda_tau(&self) -> T {
        self.lambda * self.tau
    }
}

pub(crate) fn non_negative<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value >= T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeParameter { name, value: value.as_f64() })
    }
}

/// Bose occupation `1/(e^{βω} − 1)`.
pub fn boltzmann_factor<T: Real>(beta: T, omega: T) -> Result<T> {
    let x = beta * omega;
    if !(x > T::zero()) {
        return Err(Error::NonPositiveExponent { value: x.as_f64() });
    }
    Ok(T::one() / x.exp_m1())
}

#[derive(Clone, Debug, PartialEq)]
pub struct KossakowskiMatrix<T> {
    pub entries: Array2<T>,
}

impl<T: Real> KossakowskiMatrix<T> {
    /// The matrix is diagonal, so its eigenvalues are the diagonal entries.
    pub fn eigenvalues(&self) -> Vec<T> {
        self.entries.diag().to_vec()
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        let off_diag_zero = self
            .entries
            .indexed_iter()
            .all(|((i, j), &v)| i == j || v == T::zero());
        off_diag_zero && self.eigenvalues().iter().all(|&e| e >= T::zero())
    }
}

/// `λ · diag(1+M, M, 1+M, M)`.
pub fn kossakowski<T: Real>(env: &EnvironmentParams<T>) -> KossakowskiMatrix<T> {
    let hi = env.lambda * (T::one() + env.m);
    let lo = env.lambda * env.m;
    KossakowskiMatrix { entries: Array2::from_diag(&ndarray::arr1(&[hi, lo, hi, lo])) }
}

/// Drift `λ/2` and diffusion `λ(2M+1)/2` of the Wigner Fokker–Planck equation.
pub fn fokker_planck_coefficients<T: Real>(env: &EnvironmentParams<T>) -> (T, T) {
    let two = T::lit(2.0);
    (env.lambda / two, env.lambda * (two * env.m + T::one()) / two)
}

/// Round-trip flight time `4L/c` in seconds for an arm length in metres.
pub fn flight_time<T: Real>(length: T) -> Result<T> {
    flight_time_with_c(length, T::lit(SPEED_OF_LIGHT))
}

pub fn flight_time_with_c<T: Real>(length: T, c: T) -> Result<T> {
    if !(length > T::zero()) {
        return Err(Error::NonPositiveLength { value: length.as_f64() });
    }
    Ok(T::lit(4.0) * length / c)
}

/// Planck-suppressed coupling `λτ ≈ ω_γ/M_P` for a photon energy in eV.
pub fn planck_coupling_estimate<T: Real>(omega_gamma_ev: T) -> Result<T> {
    non_negative("omega_gamma", omega_gamma_ev)?;
    Ok(omega_gamma_ev * T::lit(GEV_PER_EV / PLANCK_MASS_GEV))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boltzmann_examples() {
        assert_eq!(boltzmann_factor(1.0, 800.0).unwrap(), 0.0);
        assert!((boltzmann_factor(1.0, 2f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        let m = boltzmann_factor(1.0_f64, 1.0).unwrap();
        assert!((m - 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((m - 0.581977).abs() < 1e-6);
        assert!(matches!(boltzmann_factor(0.0, 1.0), Err(Error::NonPositiveExponent { .. })));
        assert!(matches!(boltzmann_factor(1.0, -1.0), Err(Error::NonPositiveExponent { .. })));
    }

    #[test]
    fn kossakowski_examples() {
        let k = kossakowski(&EnvironmentParams::new(1.0, 0.0, 1.0).unwrap());
        assert_eq!(k.eigenvalues(), vec![1.0, 0.0, 1.0, 0.0]);
        let k = kossakowski(&EnvironmentParams::new(0.0, 3.0, 1.0).unwrap());
        assert!(k.entries.iter().all(|&x| x == 0.0));
        let k = kossakowski(&EnvironmentParams::new(2.0, 0.5, 1.0).unwrap());
        assert_eq!(k.eigenvalues(), vec![3.0, 1.0, 3.0, 1.0]);
        assert!(k.is_positive_semidefinite());
    }

    #[test]
    fn fokker_planck_examples() {
        let fp = |l: f64, m: f64| fokker_planck_coefficients(&EnvironmentParams::new(l, m, 1.0).unwrap());
        assert_eq!(fp(1.0, 0.0), (0.5, 0.5));
        assert_eq!(fp(0.0, 2.0), (0.0, 0.0));
        let (d, f) = fp(1e-3, 1.0);
        assert!((d - 5e-4).abs() < 1e-18 && (f - 1.5e-3).abs() < 1e-18);
    }

    #[test]
    fn flight_time_examples() {
        assert_eq!(flight_time_with_c(0.25, 1.0).unwrap(), 1.0);
        let t = flight_time(40.0_f64).unwrap();
        assert!((t - 160.0 / 299_792_458.0).abs() < 1e-20);
        assert!((t - 5.3370e-7).abs() < 1e-11);
        assert_eq!(flight_time(80.0_f64).unwrap(), 2.0 * t);
        assert!(matches!(flight_time(0.0_f64), Err(Error::NonPositiveLength { .. })));
    }

    #[test]
    fn planck_estimate() {
        let x = planck_coupling_estimate(1.0_f64).unwrap();
        assert!((x - 1e-9 / 1.22e19).abs() < 1e-40);
        assert!((x / 8.2e-29 - 1.0).abs() < 0.01);
        assert_eq!(planck_coupling_estimate(0.0_f64).unwrap(), 0.0);
    }

    #[test]
    fn provenance_closure() {
        let env = EnvironmentParams::from_provenance(0.1, 2.0, 0.7, 40.0).unwrap();
        assert_eq!(env.m, boltzmann_factor(2.0, 0.7).unwrap());
        assert_eq!(env.tau, flight_time(40.0).unwrap());
        assert!(env.provenance.is_some());
        assert!(EnvironmentParams::new(-1.0, 0.0, 1.0).is_err());
    }
}
