//! Truncated Fock-space engine: state construction, ladder-operator action,
//! beam splitters and exact expectation values. Serves as the brute-force
//! reference for the Gaussian backend.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::ops::{Ladder, Monomial, OperatorPoly};
use crate::scalar::Real;
use crate::sector::PairPropagator;

/// Leakage tolerated when truncating two-mode states.
pub const TWO_MODE_TAIL_TOL: f64 = 1e-10;
/// Leakage tolerated when truncating four-mode interferometer inputs.
pub const FOUR_MODE_TAIL_TOL: f64 = 1e-6;
/// Largest operator degree accepted by [`expectation`].
pub const MAX_DEGREE: usize = 8;

/// Maximum occupation per mode (inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockCutoff {
    n_max: usize,
}

impl FockCutoff {
    pub const TWO_MODE_DEFAULT: usize = 40;
    pub const FOUR_MODE_DEFAULT: usize = 12;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        Ok(Self { n_max })
    }

    pub fn two_mode_default() -> Self {
        Self { n_max: Self::TWO_MODE_DEFAULT }
    }

    pub fn four_mode_default() -> Self {
        Self { n_max: Self::FOUR_MODE_DEFAULT }
    }

    /// Smallest cutoff whose twin-beam tail mass `tanh(r)^{2(n_max+1)}` is at
    /// most `tail_tol`.
    pub fn for_twb(r: f64, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(invalid("tail_tol", "must lie in (0, 1)"));
        }
        let t2 = r.tanh().powi(2);
        if t2 == 0.0 {
            return Self::new(1);
        }
        let needed = (tail_tol.ln() / t2.ln()).ceil() as usize;
        Self::new(needed.saturating_sub(1).max(1))
    }

    pub fn n_max(self) -> usize {
        self.n_max
    }

    /// Single-mode dimension `n_max + 1`.
    pub fn dim(self) -> usize {
        self.n_max + 1
    }
}

/// Real squeezing magnitude and phase, `ζ = r e^{iθ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParams<T> {
    pub r: T,
    pub theta: T,
}

impl<T: Real> SqueezeParams<T> {
    pub fn new(r: T, theta: T) -> Result<Self> {
        if !(r >= T::zero()) || !r.is_finite() {
            return Err(Error::NegativeParameter { name: "r", value: r.as_f64() });
        }
        if !(theta >= T::zero() && theta < T::TAU()) {
            return Err(invalid("theta", format!("{theta} outside [0, 2π)")));
        }
        Ok(Self { r, theta })
    }

    pub fn real(r: T) -> Result<Self> {
        Self::new(r, T::zero())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentInput<T> {
    pub mu: Complex<T>,
}

impl<T: Real> CoherentInput<T> {
    pub fn new(mu: Complex<T>) -> Self {
        Self { mu }
    }

    pub fn real(mu: T) -> Self {
        Self { mu: Complex::new(mu, T::zero()) }
    }
}

/// Interferometer phases and their central values.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PhaseConfig<T> {
    pub phi1: T,
    pub phi2: T,
    pub phi1_0: T,
    pub phi2_0: T,
}

impl<T: Real> PhaseConfig<T> {
    pub fn new(phi1: T, phi2: T, phi1_0: T, phi2_0: T) -> Result<Self> {
        let cfg = Self { phi1, phi2, phi1_0, phi2_0 };
        let (d1, d2) = cfg.deviations();
        if !d1.is_finite() || !d2.is_finite() {
            return Err(invalid("phases", "deviations must be finite"));
        }
        Ok(cfg)
    }

    /// Both interferometers at their central values.
    pub fn centered(phi1_0: T, phi2_0: T) -> Self {
        Self { phi1: phi1_0, phi2: phi2_0, phi1_0, phi2_0 }
    }

    pub fn at(phi1: T, phi2: T) -> Self {
        Self { phi1, phi2, phi1_0: phi1, phi2_0: phi2 }
    }

    pub fn deviations(&self) -> (T, T) {
        (self.phi1 - self.phi1_0, self.phi2 - self.phi2_0)
    }
}

/// Bookkeeping for truncation: probability mass discarded before
/// renormalization.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ConstructionReceipt {
    pub discarded: f64,
}

/// Amplitudes over occupation tuples `(n_1, …, n_m)`, row-major with mode 0
/// most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiModeFockState<T: Real> {
    modes: usize,
    cutoff: FockCutoff,
    amps: Vec<Complex<T>>,
    receipt: ConstructionReceipt,
}

impl<T: Real> MultiModeFockState<T> {
    pub fn from_amplitudes(modes: usize, cutoff: FockCutoff, amps: Vec<Complex<T>>) -> Result<Self> {
        if modes == 0 || modes > 4 {
            return Err(invalid("mode_count", format!("{modes} outside 1..=4")));
        }
        let dim = cutoff.dim().pow(modes as u32);
        if amps.len() != dim {
            return Err(invalid("amplitudes", format!("expected {dim} entries, got {}", amps.len())));
        }
        Ok(Self { modes, cutoff, amps, receipt: ConstructionReceipt::default() })
    }

    pub fn vacuum(modes: usize, cutoff: FockCutoff) -> Result<Self> {
        Self::basis(cutoff, &vec![0; modes])
    }

    /// Number state `|n_1, …, n_m⟩`.
    pub fn basis(cutoff: FockCutoff, occupations: &[usize]) -> Result<Self> {
        let modes = occupations.len();
        let mut amps = vec![Complex::default(); cutoff.dim().pow(modes as u32)];
        if let Some(&n) = occupations.iter().find(|&&n| n > cutoff.n_max()) {
            return Err(invalid("occupation", format!("{n} exceeds n_max {}", cutoff.n_max())));
        }
        let idx = flat_index(cutoff.dim(), occupations);
        amps[idx] = Complex::new(T::one(), T::zero());
        Self::from_amplitudes(modes, cutoff, amps)
    }

    pub(crate) fn with_amplitudes(&self, amps: Vec<Complex<T>>) -> Self {
        Self { modes: self.modes, cutoff: self.cutoff, amps, receipt: self.receipt }
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn receipt(&self) -> ConstructionReceipt {
        self.receipt
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Complex<T> {
        assert_eq!(occupations.len(), self.modes);
        self.amps[flat_index(self.cutoff.dim(), occupations)]
    }

    /// Occupation tuple of a flat index.
    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        let d = self.cutoff.dim();
        let mut out = vec![0; self.modes];
        let mut rest = idx;
        for slot in out.iter_mut().rev() {
            *slot = rest % d;
            rest /= d;
        }
        out
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.amps, &other.amps)
    }

    /// Rescaled to unit norm; records `1 − ‖ψ‖²` in the receipt when it grows
    /// the discarded mass.
    pub fn normalized(&self) -> Self {
        let n2 = self.norm_sqr();
        let scale = T::one() / n2.sqrt();
        let mut out = self.with_amplitudes(self.amps.iter().map(|z| *z * scale).collect());
        out.receipt.discarded = self.receipt.discarded.max(1.0 - n2.as_f64()).max(0.0);
        out
    }

    pub fn with_receipt(mut self, receipt: ConstructionReceipt) -> Self {
        self.receipt = receipt;
        self
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        self.with_amplitudes(self.amps.iter().map(|z| *z * c).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(self.with_amplitudes(self.amps.iter().zip(&other.amps).map(|(a, b)| *a + *b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(self.with_amplitudes(self.amps.iter().zip(&other.amps).map(|(a, b)| *a - *b).collect()))
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes || self.cutoff != other.cutoff {
            return Err(invalid("state", "operands live in different truncated spaces"));
        }
        Ok(())
    }

    /// Tensor product `self ⊗ other`; `other`'s modes follow `self`'s.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return Err(invalid("cutoff", "tensor factors must share a cutoff"));
        }
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| *a * *b));
        }
        let keep = (1.0 - self.receipt.discarded) * (1.0 - other.receipt.discarded);
        Ok(Self::from_amplitudes(self.modes + other.modes, self.cutoff, amps)?
            .with_receipt(ConstructionReceipt { discarded: 1.0 - keep }))
    }

    /// Reorders modes: new mode `k` is old mode `perm[k]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.modes];
        if perm.len() != self.modes {
            return Err(invalid("perm", "length must equal the mode count"));
        }
        for &p in perm {
            if p >= self.modes || seen[p] {
                return Err(Error::InvalidModeIndex { index: p, modes: self.modes });
            }
            seen[p] = true;
        }
        let d = self.cutoff.dim();
        let mut out = vec![Complex::default(); self.amps.len()];
        let mut new_occ = vec![0; self.modes];
        for (idx, amp) in self.amps.iter().enumerate() {
            let occ = self.occupations(idx);
            for (k, &p) in perm.iter().enumerate() {
                new_occ[k] = occ[p];
            }
            out[flat_index(d, &new_occ)] = *amp;
        }
        Ok(self.with_amplitudes(out))
    }

    /// The two number-difference ports: modes (0, 1) for a twin beam, modes
    /// (0, 2) for the interferometer layout `(a1, b1, a2, b2)`.
    pub fn a_ports(&self) -> Result<(usize, usize)> {
        match self.modes {
            2 => Ok((0, 1)),
            4 => Ok((0, 2)),
            m => Err(invalid("mode_count", format!("no designated a-ports for {m} modes"))),
        }
    }

    /// Applies an operator word (rightmost factor first) on the truncated space.
    pub fn apply_monomial(&self, m: &Monomial) -> Result<Self> {
        self.check_modes(m)?;
        Ok(self.with_amplitudes(apply_word(&self.amps, self.modes, self.cutoff, m.ops())))
    }

    pub fn apply_poly(&self, p: &OperatorPoly<T>) -> Result<Self> {
        let mut out = vec![Complex::default(); self.amps.len()];
        for (m, c) in p.terms() {
            self.check_modes(m)?;
            let v = apply_word(&self.amps, self.modes, self.cutoff, m.ops());
            for (o, x) in out.iter_mut().zip(v) {
                *o += x * *c;
            }
        }
        Ok(self.with_amplitudes(out))
    }

    fn check_modes(&self, m: &Monomial) -> Result<()> {
        match m.max_mode() {
            Some(k) if k >= self.modes => Err(Error::InvalidModeIndex { index: k, modes: self.modes }),
            _ => Ok(()),
        }
    }
}

pub(crate) fn flat_index(d: usize, occupations: &[usize]) -> usize {
    occupations.iter().fold(0, |acc, &n| acc * d + n)
}

pub(crate) fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::default(), |acc, (x, y)| acc + x.conj() * *y)
}

fn apply_word<T: Real>(
    amps: &[Complex<T>],
    modes: usize,
    cutoff: FockCutoff,
    word: &[Ladder],
) -> Vec<Complex<T>> {
    let d = cutoff.dim();
    let sqrt: Vec<T> = (0..=d).map(|n| T::from_usize_lossy(n).sqrt()).collect();
    let mut cur = amps.to_vec();
    for op in word.iter().rev() {
        let stride = d.pow((modes - 1 - op.mode) as u32);
        let mut next = vec![Complex::default(); cur.len()];
        for (idx, z) in cur.iter().enumerate() {
            if z.re == T::zero() && z.im == T::zero() {
                continue;
            }
            let n = (idx / stride) % d;
            if op.dagger {
                if n < cutoff.n_max() {
                    next[idx + stride] += *z * sqrt[n + 1];
                }
            } else if n > 0 {
                next[idx - stride] += *z * sqrt[n];
            }
        }
        cur = next;
    }
    cur
}

/// Twin-beam state with the default two-mode tail tolerance.
pub fn build_twb<T: Real>(params: SqueezeParams<T>, cutoff: FockCutoff) -> Result<MultiModeFockState<T>> {
    build_twb_with_tolerance(params, cutoff, TWO_MODE_TAIL_TOL)
}

/// `Σ tanhⁿ(r) e^{inθ}/cosh(r) |n,n⟩`, truncated at `n_max` and renormalized.
pub fn build_twb_with_tolerance<T: Real>(
    params: SqueezeParams<T>,
    cutoff: FockCutoff,
    tail_tol: f64,
) -> Result<MultiModeFockState<T>> {
    let t = params.r.tanh();
    let tail = t.as_f64().powi(2 * (cutoff.n_max() as i32 + 1));
    if tail > tail_tol {
        return Err(Error::CutoffTooSmall { discarded: tail, tail_tol });
    }
    let d = cutoff.dim();
    let mut amps = vec![Complex::default(); d * d];
    let c = T::one() / params.r.cosh();
    let mut tn = T::one();
    for n in 0..d {
        let phase = Complex::from_polar(T::one(), T::from_usize_lossy(n) * params.theta);
        amps[n * d + n] = phase * (tn * c);
        tn *= t;
    }
    let state = MultiModeFockState::from_amplitudes(2, cutoff, amps)?;
    Ok(state.normalized().with_receipt(ConstructionReceipt { discarded: tail }))
}

/// Single-mode coherent state `e^{−|μ|²/2} Σ μⁿ/√n! |n⟩`, renormalized.
pub fn build_coherent<T: Real>(input: CoherentInput<T>, cutoff: FockCutoff) -> Result<MultiModeFockState<T>> {
    let mean = input.mu.norm_sqr();
    let limit = T::from_usize_lossy(cutoff.n_max()) / T::lit(4.0);
    if mean > limit {
        return Err(Error::AmplitudeTooLarge { mean_photons: mean.as_f64(), limit: limit.as_f64() });
    }
    let mut amps = Vec::with_capacity(cutoff.dim());
    let mut term = Complex::new((-mean / T::lit(2.0)).exp(), T::zero());
    for n in 0..cutoff.dim() {
        if n > 0 {
            term = term * input.mu / T::from_usize_lossy(n).sqrt();
        }
        amps.push(term);
    }
    let state = MultiModeFockState::from_amplitudes(1, cutoff, amps)?;
    let kept = state.norm_sqr().as_f64();
    Ok(state.normalized().with_receipt(ConstructionReceipt { discarded: (1.0 - kept).max(0.0) }))
}

/// Four-mode interferometer input in mode order `(a1, b1, a2, b2)`.
pub fn interferometer_input<T: Real>(
    twb: &MultiModeFockState<T>,
    b1: &MultiModeFockState<T>,
    b2: &MultiModeFockState<T>,
) -> Result<MultiModeFockState<T>> {
    if twb.mode_count() != 2 || b1.mode_count() != 1 || b2.mode_count() != 1 {
        return Err(invalid("interferometer_input", "expects a two-mode state and two single modes"));
    }
    twb.tensor(b1)?.tensor(b2)?.permute_modes(&[0, 2, 1, 3])
}

/// Beam splitter on modes `(mode_a, mode_b)` with Heisenberg action
/// `c = a cos(φ/2) + b sin(φ/2)`, `d = b cos(φ/2) − a sin(φ/2)`.
pub fn apply_beam_splitter<T: Real>(
    state: &MultiModeFockState<T>,
    mode_a: usize,
    mode_b: usize,
    phi: T,
) -> Result<MultiModeFockState<T>> {
    if state.mode_count() < 2 {
        return Err(Error::InvalidModeIndex { index: mode_b, modes: state.mode_count() });
    }
    PairPropagator::beam_splitter(phi, state.cutoff()).apply(state, mode_a, mode_b)
}

/// Exact truncated-space `⟨ψ| m |ψ⟩`, operators applied in the given order.
pub fn expectation<T: Real>(state: &MultiModeFockState<T>, m: &Monomial) -> Result<Complex<T>> {
    if m.degree() > MAX_DEGREE {
        return Err(Error::DegreeTooHigh { degree: m.degree(), max: MAX_DEGREE });
    }
    let v = state.apply_monomial(m)?;
    Ok(state.inner(&v))
}

pub fn expectation_poly<T: Real>(state: &MultiModeFockState<T>, p: &OperatorPoly<T>) -> Result<Complex<T>> {
    if p.degree() > MAX_DEGREE {
        return Err(Error::DegreeTooHigh { degree: p.degree(), max: MAX_DEGREE });
    }
    let v = state.apply_poly(p)?;
    Ok(state.inner(&v))
}

/// `⟨(N_i − N_j)^p⟩` on the designated a-ports, `1 ≤ p ≤ 4`.
pub fn number_difference_moment<T: Real>(state: &MultiModeFockState<T>, p: u32) -> Result<T> {
    let (i, j) = state.a_ports()?;
    number_difference_moment_between(state, i, j, p)
}

pub fn number_difference_moment_between<T: Real>(
    state: &MultiModeFockState<T>,
    i: usize,
    j: usize,
    p: u32,
) -> Result<T> {
    if !(1..=4).contains(&p) {
        return Err(invalid("p", format!("moment order {p} outside 1..=4")));
    }
    let modes = state.mode_count();
    for m in [i, j] {
        if m >= modes {
            return Err(Error::InvalidModeIndex { index: m, modes });
        }
    }
    let d = state.cutoff().dim();
    let (si, sj) = (d.pow((modes - 1 - i) as u32), d.pow((modes - 1 - j) as u32));
    // Number operators are diagonal in the Fock basis.
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(idx, z)| {
            let diff = (idx / si % d) as f64 - (idx / sj % d) as f64;
            z.norm_sqr() * T::lit(diff.powi(p as i32))
        })
        .sum())
}
