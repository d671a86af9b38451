//! Finite tight-binding chain with independent white noise on every bond.
//!
//! Each trajectory evolves a single-particle state `|φ⟩ = Σ cₙ|n⟩` with a
//! second-order Strang splitting over the even and odd bond sublattices.
//! Every bond factor is an exact 2×2 rotation, so trajectories are unitary
//! to rounding. A bond `(j, j+1)` carries hopping `−(α + β_j(t))` and the
//! `β_j` are independent across bonds with the same normalisation as the
//! two-level noise (impulse variance `2β₀h` per step).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{require_finite, Error, Result};
use crate::noise::{NoiseProcess, NoiseSpec};
use crate::rng::{reduce_blocks, substream, Merge};
use crate::two_level::MAX_BETA_DT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    pub alpha: f64,
    pub site_energies: Vec<f64>,
    pub beta0_bond: f64,
    pub boundary: Boundary,
}

impl ChainParams {
    pub fn uniform(n_sites: usize, alpha: f64, beta0_bond: f64, boundary: Boundary) -> Result<Self> {
        Self::new(n_sites, alpha, vec![0.0; n_sites], beta0_bond, boundary)
    }

    pub fn new(
        n_sites: usize,
        alpha: f64,
        site_energies: Vec<f64>,
        beta0_bond: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::invalid("n_sites", "need at least 2 sites"));
        }
        if boundary == Boundary::Periodic && !n_sites.is_multiple_of(2) {
            return Err(Error::invalid("n_sites", "periodic chains need an even number of sites"));
        }
        if site_energies.len() != n_sites {
            return Err(Error::invalid("site_energies", "length must equal n_sites"));
        }
        require_finite("alpha", alpha)?;
        require_finite("beta0_bond", beta0_bond)?;
        for e in &site_energies {
            require_finite("site_energies", *e)?;
        }
        if beta0_bond < 0.0 {
            return Err(Error::invalid("beta0_bond", "must be >= 0"));
        }
        Ok(ChainParams {
            n_sites,
            alpha,
            site_energies,
            beta0_bond,
            boundary,
        })
    }

    pub fn n_bonds(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.n_sites - 1,
            Boundary::Periodic => self.n_sites,
        }
    }

    fn bond(&self, j: usize) -> (usize, usize) {
        (j, (j + 1) % self.n_sites)
    }

    /// Dense noiseless Hamiltonian.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let n = self.n_sites;
        let mut h = DMatrix::from_diagonal(&DVector::from_column_slice(&self.site_energies));
        for j in 0..self.n_bonds() {
            let (a, b) = self.bond(j);
            h[(a, b)] -= self.alpha;
            h[(b, a)] -= self.alpha;
        }
        debug_assert_eq!(h.nrows(), n);
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub dt_max: f64,
    /// Upper bound on n_sites × trajectories × steps.
    pub budget: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            dt_max: 0.01,
            budget: 2e10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainObservables {
    pub time: f64,
    pub site_populations: Vec<f64>,
    pub position_mean: f64,
    pub position_variance: f64,
    /// |ρ̄ₙ,ₙ₊ₖ| averaged over n, indexed by k.
    pub coherence_profile: Vec<f64>,
    pub participation_ratio: f64,
}

impl ChainObservables {
    pub fn from_density(time: f64, rho: &DMatrix<Complex64>, boundary: Boundary) -> Self {
        let n = rho.nrows();
        let pops: Vec<f64> = (0..n).map(|i| rho[(i, i)].re).collect();
        let total: f64 = pops.iter().sum();
        let mean = pops.iter().enumerate().map(|(i, p)| i as f64 * p).sum::<f64>() / total;
        let var = pops
            .iter()
            .enumerate()
            .map(|(i, p)| (i as f64 - mean).powi(2) * p)
            .sum::<f64>()
            / total;
        let profile = match boundary {
            Boundary::Open => (0..n)
                .map(|k| (0..n - k).map(|i| rho[(i, i + k)].norm()).sum::<f64>() / (n - k) as f64)
                .collect(),
            Boundary::Periodic => (0..=n / 2)
                .map(|k| (0..n).map(|i| rho[(i, (i + k) % n)].norm()).sum::<f64>() / n as f64)
                .collect(),
        };
        ChainObservables {
            time,
            participation_ratio: 1.0 / pops.iter().map(|p| p * p).sum::<f64>(),
            site_populations: pops,
            position_mean: mean,
            position_variance: var.max(0.0),
            coherence_profile: profile,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub observables: Vec<ChainObservables>,
    pub density: Vec<DensityMatrix>,
    pub max_norm_drift: f64,
    /// A ballistic front from the initial support may have reached an open edge.
    pub boundary_warning: bool,
    pub n_traj: usize,
    pub steps: usize,
}

impl ChainResult {
    /// Coherence profile at the last output time.
    pub fn final_coherence_profile(&self) -> &[f64] {
        &self.observables.last().expect("non-empty result").coherence_profile
    }
}

struct ChainAcc {
    rho: Vec<DMatrix<Complex64>>,
    drift: f64,
}

impl Merge for ChainAcc {
    fn merge(&mut self, o: Self) {
        for (a, b) in self.rho.iter_mut().zip(o.rho) {
            *a += b;
        }
        self.drift = self.drift.max(o.drift);
    }
}

#[inline]
fn rotate(psi: &mut [Complex64], a: usize, b: usize, phi: f64) {
    // exp(iφσₓ) on the (a, b) pair
    let (s, c) = phi.sin_cos();
    let is = Complex64::new(0.0, s);
    let (x, y) = (psi[a], psi[b]);
    psi[a] = x * c + is * y;
    psi[b] = is * x + y * c;
}

/// Propagate one step `h` of the split evolution given per-bond impulses.
fn strang_step(p: &ChainParams, psi: &mut [Complex64], h: f64, impulses: &[f64], phases: &[Complex64]) {
    let nb = p.n_bonds();
    let half = |psi: &mut [Complex64], parity: usize| {
        let mut j = parity;
        while j < nb {
            let (a, b) = p.bond(j);
            rotate(psi, a, b, 0.5 * (p.alpha * h + impulses[j]));
            j += 2;
        }
    };
    half(psi, 0);
    half(psi, 1);
    if !phases.is_empty() {
        for (c, ph) in psi.iter_mut().zip(phases) {
            *c *= ph;
        }
    }
    half(psi, 1);
    half(psi, 0);
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.first() != Some(&0.0) {
        return Err(Error::invalid("t_grid", "time grid must start at 0"));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("t_grid", "times must be strictly increasing"));
    }
    Ok(())
}

fn check_state(psi0: &[Complex64], n: usize) -> Result<()> {
    if psi0.len() != n {
        return Err(Error::invalid("psi0", format!("length {} differs from n_sites {n}", psi0.len())));
    }
    let norm = psi0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("psi0", format!("state norm {norm} is not 1")));
    }
    Ok(())
}

/// A state localised on one site.
pub fn site_state(n_sites: usize, site: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n_sites];
    v[site] = Complex64::new(1.0, 0.0);
    v
}

/// Run `n_traj` trajectories and average the density matrix at every time
/// in `t_grid`.
pub fn chain_evolve(
    p: &ChainParams,
    seed: u64,
    psi0: &[Complex64],
    t_grid: &[f64],
    n_traj: usize,
    opts: &ChainOptions,
) -> Result<ChainResult> {
    check_grid(t_grid)?;
    check_state(psi0, p.n_sites)?;
    if n_traj == 0 {
        return Err(Error::invalid("n_traj", "need at least one trajectory"));
    }
    if !(opts.dt_max > 0.0) {
        return Err(Error::invalid("dt_max", "must be positive"));
    }
    let plan: Vec<(usize, f64)> = t_grid
        .windows(2)
        .map(|w| {
            let span = w[1] - w[0];
            let n = ((span / opts.dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            (n, span / n as f64)
        })
        .collect();
    let h_max = plan.iter().map(|&(_, h)| h).fold(0.0, f64::max);
    if p.beta0_bond * h_max > MAX_BETA_DT {
        return Err(Error::StepTooLarge {
            product: p.beta0_bond * h_max,
            limit: MAX_BETA_DT,
            suggested_dt: MAX_BETA_DT / p.beta0_bond,
        });
    }
    let steps: usize = plan.iter().map(|&(n, _)| n).sum();
    let n_run = if p.beta0_bond == 0.0 { 1 } else { n_traj };
    let estimate = p.n_sites as f64 * n_run as f64 * steps as f64;
    if estimate > opts.budget {
        return Err(Error::BudgetExceeded {
            estimate,
            budget: opts.budget,
        });
    }

    let boundary_warning = p.boundary == Boundary::Open && {
        let first = psi0.iter().position(|c| c.norm() > 1e-12).unwrap_or(0);
        let last = psi0.iter().rposition(|c| c.norm() > 1e-12).unwrap_or(p.n_sites - 1);
        let room = first.min(p.n_sites - 1 - last) as f64;
        2.0 * p.alpha.abs() * t_grid[t_grid.len() - 1] > room
    };
    if boundary_warning {
        log::warn!("ballistic front may reach an open boundary before the last output time");
    }

    let noise = NoiseSpec::white(p.beta0_bond, seed)?;
    let n = p.n_sites;
    let n_times = t_grid.len();
    let zero = DMatrix::<Complex64>::zeros(n, n);
    // keep roughly 256 MB of accumulators in flight at most
    let acc_bytes = (n_times * n * n * 16).max(1);
    let wave = (256_000_000 / acc_bytes).clamp(1, 64);
    let all_zero = p.site_energies.iter().all(|e| *e == 0.0);

    let acc = reduce_blocks(n_run, wave, |range| {
        let mut acc = ChainAcc {
            rho: vec![zero.clone(); n_times],
            drift: 0.0,
        };
        let mut impulses = vec![0.0; p.n_bonds()];
        for idx in range {
            let mut rng = substream(seed, idx as u64);
            let mut bonds: Vec<NoiseProcess> = (0..p.n_bonds()).map(|_| NoiseProcess::start(&noise, &mut rng)).collect();
            let mut psi = psi0.to_vec();
            add_projector(&mut acc.rho[0], &psi);
            for (k, &(ns, h)) in plan.iter().enumerate() {
                let phases: Vec<Complex64> = if all_zero {
                    Vec::new()
                } else {
                    p.site_energies.iter().map(|e| Complex64::from_polar(1.0, -e * h)).collect()
                };
                for _ in 0..ns {
                    for (w, b) in impulses.iter_mut().zip(bonds.iter_mut()) {
                        *w = b.impulse(h, &mut rng);
                    }
                    strang_step(p, &mut psi, h, &impulses, &phases);
                }
                let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                acc.drift = acc.drift.max((norm - 1.0).abs());
                add_projector(&mut acc.rho[k + 1], &psi);
            }
        }
        acc
    })
    .expect("at least one trajectory");

    let scale = Complex64::new(1.0 / n_run as f64, 0.0);
    let mut observables = Vec::with_capacity(n_times);
    let mut density = Vec::with_capacity(n_times);
    for (t, rho) in t_grid.iter().zip(acc.rho) {
        let rho = rho * scale;
        observables.push(ChainObservables::from_density(*t, &rho, p.boundary));
        density.push(DensityMatrix::from_trusted(rho));
    }
    Ok(ChainResult {
        observables,
        density,
        max_norm_drift: acc.drift,
        boundary_warning,
        n_traj,
        steps,
    })
}

fn add_projector(rho: &mut DMatrix<Complex64>, psi: &[Complex64]) {
    let n = psi.len();
    for j in 0..n {
        let cj = psi[j].conj();
        if cj == Complex64::new(0.0, 0.0) {
            continue;
        }
        for i in 0..n {
            rho[(i, j)] += psi[i] * cj;
        }
    }
}

/// Evolve a single trajectory for `steps` steps of size `h` and report the
/// largest norm deviation seen at any step.
pub fn trajectory_norm_drift(p: &ChainParams, seed: u64, psi0: &[Complex64], h: f64, steps: usize) -> Result<f64> {
    check_state(psi0, p.n_sites)?;
    if p.beta0_bond * h > MAX_BETA_DT {
        return Err(Error::StepTooLarge {
            product: p.beta0_bond * h,
            limit: MAX_BETA_DT,
            suggested_dt: MAX_BETA_DT / p.beta0_bond,
        });
    }
    let noise = NoiseSpec::white(p.beta0_bond, seed)?;
    let mut rng = substream(seed, 0);
    let mut bonds: Vec<NoiseProcess> = (0..p.n_bonds()).map(|_| NoiseProcess::start(&noise, &mut rng)).collect();
    let phases: Vec<Complex64> = p.site_energies.iter().map(|e| Complex64::from_polar(1.0, -e * h)).collect();
    let mut impulses = vec![0.0; p.n_bonds()];
    let mut psi = psi0.to_vec();
    let mut drift: f64 = 0.0;
    for _ in 0..steps {
        for (w, b) in impulses.iter_mut().zip(bonds.iter_mut()) {
            *w = b.impulse(h, &mut rng);
        }
        strang_step(p, &mut psi, h, &impulses, &phases);
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        drift = drift.max((norm - 1.0).abs());
    }
    Ok(drift)
}

/// Noiseless evolution by dense diagonalisation of the hopping matrix.
pub fn exact_noiseless_state(p: &ChainParams, psi0: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    check_state(psi0, p.n_sites)?;
    let eig = p.hamiltonian().symmetric_eigen();
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let psi = DVector::from_column_slice(psi0);
    let mut c = v.transpose() * psi;
    for (ci, lam) in c.iter_mut().zip(eig.eigenvalues.iter()) {
        *ci *= Complex64::from_polar(1.0, -lam * t);
    }
    Ok((v * c).iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum CoherenceLength {
    Separation(usize),
    BeyondRange,
}

/// Smallest separation k ≥ 1 with profile[k] / profile[1] ≤ threshold.
pub fn coherence_length(profile: &[f64], threshold: f64) -> Result<CoherenceLength> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid("threshold", "must lie in (0, 1)"));
    }
    if profile.len() < 2 || !(profile[1] > 0.0) {
        return Err(Error::UndefinedLength);
    }
    let reference = profile[1];
    Ok(profile
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, v)| **v / reference <= threshold)
        .map(|(k, _)| CoherenceLength::Separation(k))
        .unwrap_or(CoherenceLength::BeyondRange))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_validation() {
        assert!(ChainParams::uniform(1, 1.0, 0.0, Boundary::Open).is_err());
        assert!(ChainParams::uniform(5, 1.0, 0.0, Boundary::Periodic).is_err());
        assert!(ChainParams::uniform(4, 1.0, -0.1, Boundary::Open).is_err());
        assert!(ChainParams::new(4, 1.0, vec![0.0; 3], 0.0, Boundary::Open).is_err());
    }

    #[test]
    fn synthetic_profiles() {
        let profile: Vec<f64> = (0..200).map(|k| if k == 0 { 1.0 } else { 1.0 / k as f64 }).collect();
        assert_eq!(coherence_length(&profile, 0.01).unwrap(), CoherenceLength::Separation(100));
        let flat = vec![1.0; 50];
        assert_eq!(coherence_length(&flat, 0.5).unwrap(), CoherenceLength::BeyondRange);
        assert_eq!(coherence_length(&[0.0; 10], 0.5), Err(Error::UndefinedLength));
        assert!(coherence_length(&profile, 1.0).is_err());
    }

    #[test]
    fn two_site_chain_matches_rabi() {
        // N = 2, open: populations cos²(αt), sin²(αt)
        let p = ChainParams::uniform(2, 1.0, 0.0, Boundary::Open).unwrap();
        let grid = [0.0, 0.3, 1.1];
        let r = chain_evolve(&p, 0, &site_state(2, 0), &grid, 1, &ChainOptions::default()).unwrap();
        for (t, o) in grid.iter().zip(&r.observables) {
            assert!((o.site_populations[0] - t.cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_matches_exact_diagonalisation() {
        let p = ChainParams::new(9, 1.0, (0..9).map(|i| 0.1 * i as f64).collect(), 0.0, Boundary::Open).unwrap();
        let psi0 = site_state(9, 4);
        let r = chain_evolve(&p, 0, &psi0, &[0.0, 1.0], 1, &ChainOptions { dt_max: 1e-4, ..Default::default() })
            .unwrap();
        let exact = exact_noiseless_state(&p, &psi0, 1.0).unwrap();
        let rho = r.density[1].entries();
        for i in 0..9 {
            for j in 0..9 {
                assert!((rho[(i, j)] - exact[i] * exact[j].conj()).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn refusals() {
        let p = ChainParams::uniform(8, 1.0, 1.0, Boundary::Open).unwrap();
        let psi0 = site_state(8, 3);
        assert!(matches!(
            chain_evolve(&p, 0, &psi0, &[0.0, 1.0], 4, &ChainOptions { dt_max: 0.1, budget: 1e12 }),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(matches!(
            chain_evolve(&p, 0, &psi0, &[0.0, 1.0], 4, &ChainOptions { dt_max: 0.01, budget: 10.0 }),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(chain_evolve(&p, 0, &site_state(7, 0), &[0.0, 1.0], 4, &ChainOptions::default()).is_err());
    }

    #[test]
    fn observables_invariants() {
        let p = ChainParams::uniform(16, 1.0, 0.5, Boundary::Open).unwrap();
        let r = chain_evolve(&p, 4, &site_state(16, 8), &[0.0, 0.5, 1.5], 64, &ChainOptions::default()).unwrap();
        for (o, d) in r.observables.iter().zip(&r.density) {
            assert!((o.site_populations.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(o.position_variance >= 0.0);
            let mean_diag = o.site_populations.iter().map(|p| p.abs()).sum::<f64>() / 16.0;
            assert!((o.coherence_profile[0] - mean_diag).abs() < 1e-12);
            DensityMatrix::with_tolerances(d.entries().clone(), 1e-10, 1e-10, 1e-8).unwrap();
        }
        assert!(!r.boundary_warning);
    }
}
