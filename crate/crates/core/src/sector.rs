//! Exact exponentials of the two quadratic pair generators used throughout:
//! the beam-splitter generator `a†b − b†a`, which conserves `n_a + n_b`, and the
//! two-mode squeeze generator `a†b† − ab`, which conserves `n_a − n_b`.
//!
//! Both are real antisymmetric in the Fock basis, so each conserved sector is a
//! small real block exponentiated densely. Blocks are restricted to the
//! truncated box, which keeps the map orthogonal on the truncated space.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{FockCutoff, MultiModeFockState};
use crate::linalg::expm;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairGenerator {
    /// `a†b − b†a`
    BeamSplitter,
    /// `a†b† − ab`
    TwoModeSqueeze,
}

impl PairGenerator {
    fn sector_of(self, na: usize, nb: usize, n_max: usize) -> usize {
        match self {
            Self::BeamSplitter => na + nb,
            Self::TwoModeSqueeze => na + n_max - nb,
        }
    }

    fn sector_basis(self, sector: usize, n_max: usize) -> Vec<(usize, usize)> {
        match self {
            Self::BeamSplitter => {
                let lo = sector.saturating_sub(n_max);
                let hi = sector.min(n_max);
                (lo..=hi).map(|na| (na, sector - na)).collect()
            }
            Self::TwoModeSqueeze => {
                // na - nb = sector - n_max
                (0..=n_max)
                    .filter_map(|nb| {
                        let na = (nb + sector).checked_sub(n_max)?;
                        (na <= n_max).then_some((na, nb))
                    })
                    .collect()
            }
        }
    }

    /// Generator matrix on one sector, `K[out, in]`.
    fn sector_matrix<T: Real>(self, basis: &[(usize, usize)]) -> Array2<T> {
        let n = basis.len();
        let pos: HashMap<(usize, usize), usize> =
            basis.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut k = Array2::<T>::zeros((n, n));
        for (col, &(na, nb)) in basis.iter().enumerate() {
            let mut put = |target: (usize, usize), value: f64| {
                if let Some(&row) = pos.get(&target) {
                    k[[row, col]] += T::lit(value);
                }
            };
            match self {
                Self::BeamSplitter => {
                    if nb > 0 {
                        put((na + 1, nb - 1), (((na + 1) * nb) as f64).sqrt());
                    }
                    if na > 0 {
                        put((na - 1, nb + 1), -((na * (nb + 1)) as f64).sqrt());
                    }
                }
                Self::TwoModeSqueeze => {
                    put((na + 1, nb + 1), (((na + 1) * (nb + 1)) as f64).sqrt());
                    if na > 0 && nb > 0 {
                        put((na - 1, nb - 1), -((na * nb) as f64).sqrt());
                    }
                }
            }
        }
        k
    }
}

struct Block<T> {
    basis: Vec<(usize, usize)>,
    u: Array2<T>,
}

/// `exp(scale · K)` for one generator `K`, with sector blocks built on demand.
pub struct PairPropagator<T: Real> {
    kind: PairGenerator,
    scale: T,
    n_max: usize,
    blocks: HashMap<usize, Block<T>>,
}

impl<T: Real> PairPropagator<T> {
    pub fn new(kind: PairGenerator, scale: T, cutoff: FockCutoff) -> Self {
        Self { kind, scale, n_max: cutoff.n_max(), blocks: HashMap::new() }
    }

    /// Beam splitter with Heisenberg action `c = a cos(φ/2) + b sin(φ/2)`.
    pub fn beam_splitter(phi: T, cutoff: FockCutoff) -> Self {
        Self::new(PairGenerator::BeamSplitter, phi / T::lit(2.0), cutoff)
    }

    /// Two-mode squeezer `exp(r(a†b† − ab))`.
    pub fn squeezer(r: T, cutoff: FockCutoff) -> Self {
        Self::new(PairGenerator::TwoModeSqueeze, r, cutoff)
    }

    pub fn kind(&self) -> PairGenerator {
        self.kind
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn cached_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn block(&mut self, sector: usize) -> &Block<T> {
        let (kind, scale, n_max) = (self.kind, self.scale, self.n_max);
        self.blocks.entry(sector).or_insert_with(|| {
            let basis = kind.sector_basis(sector, n_max);
            let k = kind.sector_matrix::<T>(&basis).mapv(|x| x * scale);
            Block { u: expm(&k), basis }
        })
    }

    /// Applies the propagator to modes `(ma, mb)` of `state`.
    pub fn apply(
        &mut self,
        state: &MultiModeFockState<T>,
        ma: usize,
        mb: usize,
    ) -> Result<MultiModeFockState<T>> {
        let modes = state.mode_count();
        for m in [ma, mb] {
            if m >= modes {
                return Err(Error::InvalidModeIndex { index: m, modes });
            }
        }
        if ma == mb {
            return Err(Error::InvalidModeIndex { index: mb, modes });
        }
        if state.cutoff().n_max() != self.n_max {
            return Err(crate::error::invalid(
                "cutoff",
                "propagator and state use different cutoffs",
            ));
        }
        let vec = self.apply_vec(state.amplitudes(), modes, ma, mb);
        Ok(state.with_amplitudes(vec))
    }

    pub(crate) fn apply_vec(
        &mut self,
        amps: &[Complex<T>],
        modes: usize,
        ma: usize,
        mb: usize,
    ) -> Vec<Complex<T>> {
        let d = self.n_max + 1;
        let sa = d.pow((modes - 1 - ma) as u32);
        let sb = d.pow((modes - 1 - mb) as u32);
        let zero = Complex::new(T::zero(), T::zero());

        let mut sectors: Vec<usize> = Vec::new();
        let mut seen = vec![false; 2 * self.n_max + 1];
        for (idx, amp) in amps.iter().enumerate() {
            if *amp != zero {
                let s = self.kind.sector_of((idx / sa) % d, (idx / sb) % d, self.n_max);
                if !seen[s] {
                    seen[s] = true;
                    sectors.push(s);
                }
            }
        }
        sectors.sort_unstable();

        let bases: Vec<usize> = (0..amps.len())
            .filter(|&idx| (idx / sa).is_multiple_of(d) && (idx / sb).is_multiple_of(d))
            .collect();
        let mut out = vec![zero; amps.len()];
        let mut gathered = Vec::new();
        for s in sectors {
            let block = self.block(s);
            for &base in &bases {
                gathered.clear();
                gathered.extend(block.basis.iter().map(|&(na, nb)| amps[base + na * sa + nb * sb]));
                if gathered.iter().all(|z| *z == zero) {
                    continue;
                }
                for (row, &(na, nb)) in block.basis.iter().enumerate() {
                    let mut acc = zero;
                    for (col, z) in gathered.iter().enumerate() {
                        acc += *z * block.u[[row, col]];
                    }
                    out[base + na * sa + nb * sb] = acc;
                }
            }
        }
        out
    }
}

/// Per-context cache of propagators keyed by generator and exact scale.
/// Not shared across threads; each evaluation context owns one.
pub struct PropagatorCache<T: Real> {
    cutoff: FockCutoff,
    entries: HashMap<(PairGenerator, u64), PairPropagator<T>>,
}

impl<T: Real> PropagatorCache<T> {
    pub fn new(cutoff: FockCutoff) -> Self {
        Self { cutoff, entries: HashMap::new() }
    }

    pub fn get(&mut self, kind: PairGenerator, scale: T) -> &mut PairPropagator<T> {
        let key = (kind, scale.as_f64().to_bits());
        let cutoff = self.cutoff;
        self.entries.entry(key).or_insert_with(|| PairPropagator::new(kind, scale, cutoff))
    }

    pub fn beam_splitter(&mut self, phi: T) -> &mut PairPropagator<T> {
        self.get(PairGenerator::BeamSplitter, phi / T::lit(2.0))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_bases_cover_box_once() {
        for kind in [PairGenerator::BeamSplitter, PairGenerator::TwoModeSqueeze] {
            let n_max = 5;
            let mut count = vec![0; (n_max + 1) * (n_max + 1)];
            for s in 0..=2 * n_max {
                for (na, nb) in kind.sector_basis(s, n_max) {
                    assert_eq!(kind.sector_of(na, nb, n_max), s);
                    count[na * (n_max + 1) + nb] += 1;
                }
            }
            assert!(count.iter().all(|&c| c == 1), "{kind:?}");
        }
    }

    #[test]
    fn generator_blocks_are_antisymmetric() {
        for kind in [PairGenerator::BeamSplitter, PairGenerator::TwoModeSqueeze] {
            for s in 0..=8 {
                let basis = kind.sector_basis(s, 4);
                let k = kind.sector_matrix::<f64>(&basis);
                let sum = &k + &k.t();
                assert!(sum.iter().all(|x| x.abs() < 1e-15));
            }
        }
    }
}
