//! Two-level system with a randomly fluctuating hopping element.
//!
//! Hamiltonian (ħ = 1):
//!
//! ```text
//! H = ε |2⟩⟨2| − (α + β(t)) (|1⟩⟨2| + |2⟩⟨1|)
//! ```
//!
//! The noise-averaged density matrix is written as ρ̄₁₁ = 1/2 + ρ,
//! ρ̄₁₂ = ρ₁ + iρ₂ and obeys the closed linear system
//!
//! ```text
//! ρ̇  = 2αρ₂ − 4β₀ρ
//! ρ̇₁ = −ερ₂
//! ρ̇₂ = ερ₁ − 2αρ − 4β₀ρ₂
//! ```
//!
//! [`integrate_master`] solves it numerically and is the ground truth.
//! [`mc_evolve`] averages explicit stochastic trajectories and converges to
//! it. [`analytic_offdiagonal`] is a literature closed form that is kept
//! only to be audited against the ODE.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{require_finite, Error, Result};
use crate::noise::{NoiseProcess, NoiseSpec};
use crate::ode::{integrate, OdeOptions};
use crate::rng::{reduce_blocks, substream, Merge};

/// Largest accepted β₀·Δt for white-noise trajectories.
pub const MAX_BETA_DT: f64 = 0.05;

pub const BALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta0: f64,
}

impl TwoLevelParams {
    pub fn new(epsilon: f64, alpha: f64, beta0: f64) -> Result<Self> {
        require_finite("epsilon", epsilon)?;
        require_finite("alpha", alpha)?;
        require_finite("beta0", beta0)?;
        if beta0 < 0.0 {
            return Err(Error::invalid("beta0", "must be >= 0"));
        }
        Ok(TwoLevelParams { epsilon, alpha, beta0 })
    }
}

/// (ρ, ρ₁, ρ₂) parametrisation of the averaged 2×2 density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochState {
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
}

impl BlochState {
    /// Checked constructor: the state must lie in the physical ball
    /// ρ² + ρ₁² + ρ₂² ≤ 1/4.
    pub fn new(rho: f64, rho1: f64, rho2: f64) -> Result<Self> {
        let s = BlochState { rho, rho1, rho2 };
        if !s.is_physical() {
            return Err(Error::invalid(
                "bloch_state",
                format!("({rho}, {rho1}, {rho2}) lies outside the physical ball"),
            ));
        }
        Ok(s)
    }

    /// ρ̄₁₁ = 1: the particle sits on site 1.
    pub fn site_one() -> Self {
        BlochState {
            rho: 0.5,
            rho1: 0.0,
            rho2: 0.0,
        }
    }

    pub fn radius_squared(&self) -> f64 {
        self.rho * self.rho + self.rho1 * self.rho1 + self.rho2 * self.rho2
    }

    pub fn is_physical(&self) -> bool {
        [self.rho, self.rho1, self.rho2].iter().all(|v| v.is_finite())
            && self.rho.abs() <= 0.5 + BALL_TOL
            && self.radius_squared() <= 0.25 + BALL_TOL
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.rho, self.rho1, self.rho2]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        BlochState {
            rho: v[0],
            rho1: v[1],
            rho2: v[2],
        }
    }

    pub fn max_abs_diff(&self, other: &BlochState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Coefficient matrix of the averaged equations acting on (ρ, ρ₁, ρ₂).
pub fn master_matrix(p: &TwoLevelParams) -> Matrix3<f64> {
    let (e, a, b) = (p.epsilon, p.alpha, p.beta0);
    Matrix3::new(
        -4.0 * b, 0.0, 2.0 * a, //
        0.0, 0.0, -e, //
        -2.0 * a, e, -4.0 * b,
    )
}

/// Time derivative of (ρ, ρ₁, ρ₂).
pub fn master_rhs(p: &TwoLevelParams, s: &BlochState) -> BlochState {
    BlochState {
        rho: 2.0 * p.alpha * s.rho2 - 4.0 * p.beta0 * s.rho,
        rho1: -p.epsilon * s.rho2,
        rho2: p.epsilon * s.rho1 - 2.0 * p.alpha * s.rho - 4.0 * p.beta0 * s.rho2,
    }
}

pub fn integrate_master(p: &TwoLevelParams, s0: &BlochState, t_grid: &[f64]) -> Result<Vec<BlochState>> {
    integrate_master_with(p, s0, t_grid, &OdeOptions::default())
}

pub fn integrate_master_with(
    p: &TwoLevelParams,
    s0: &BlochState,
    t_grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<BlochState>> {
    check_grid(t_grid)?;
    let f = |_t: f64, y: &[f64; 3]| master_rhs(p, &BlochState::from_array(*y)).to_array();
    let ys = integrate(f, s0.to_array(), t_grid, opts)?;
    Ok(ys.into_iter().map(BlochState::from_array).collect())
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::invalid("t_grid", "empty time grid")),
        Some(&t0) if t0 != 0.0 => return Err(Error::invalid("t_grid", "time grid must start at 0")),
        _ => {}
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("t_grid", "times must be strictly increasing"));
    }
    Ok(())
}

/// Closed form for ρ₁(t) as printed in the literature:
///
/// ```text
/// ρ₁(t) = e^{−2β₀t} (A cosh ωt + (ε + β₀A − 2αB)/ω · sinh ωt),
/// ω = √(ε² + 4α² − 4αβ₀)
/// ```
///
/// For ω² < 0 the hyperbolic functions continue to cos/sin of |ω|t, and at
/// ω = 0 the sinh term becomes its limit t. The expression is not a
/// solution of the averaged equations in general; see
/// [`audit_analytic_offdiagonal`].
pub fn analytic_offdiagonal(p: &TwoLevelParams, a: f64, b: f64, t: f64) -> f64 {
    let w2 = p.epsilon * p.epsilon + 4.0 * p.alpha * p.alpha - 4.0 * p.alpha * p.beta0;
    let coeff = p.epsilon + p.beta0 * a - 2.0 * p.alpha * b;
    let (ch, sh_over_w) = if w2 > 0.0 {
        let w = w2.sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    } else if w2 < 0.0 {
        let w = (-w2).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    } else {
        (1.0, t)
    };
    (-2.0 * p.beta0 * t).exp() * (a * ch + coeff * sh_over_w)
}

/// Eigenvalues of the averaged equations, sorted by real part (descending),
/// then by imaginary part (descending). Real parts that agree to rounding
/// count as equal.
pub fn decay_rates(p: &TwoLevelParams) -> [Complex64; 3] {
    let m = master_matrix(p);
    let ev = m.complex_eigenvalues();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let key = |z: &Complex64| (z.re / scale * 1e9).round() + 0.0;
    let mut out = [ev[0], ev[1], ev[2]];
    out.sort_by(|x, y| key(y).total_cmp(&key(x)).then(y.im.total_cmp(&x.im)));
    out
}

pub fn bloch_from_density(d: &DensityMatrix) -> Result<BlochState> {
    if d.dim() != 2 {
        return Err(Error::invalid("density", "two-level density matrix must be 2x2"));
    }
    let r12 = d.get(0, 1);
    Ok(BlochState {
        rho: d.get(0, 0).re - 0.5,
        rho1: r12.re,
        rho2: r12.im,
    })
}

pub fn density_from_bloch(s: &BlochState) -> Result<DensityMatrix> {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 + s.rho, 0.0),
            Complex64::new(s.rho1, s.rho2),
            Complex64::new(s.rho1, -s.rho2),
            Complex64::new(0.5 - s.rho, 0.0),
        ],
    );
    DensityMatrix::new(m)
}

type Spinor = [Complex64; 2];

/// Exact propagator exp(−i(H₀h + W·V)) with V = −σₓ, applied to `psi`.
///
/// `w` is the noise impulse ∫β dt over the step.
pub fn unitary_step(p: &TwoLevelParams, psi: &Spinor, h: f64, w: f64) -> Spinor {
    // H₀h + WV = c₀ I + cₓ σₓ + c_z σ_z
    let c0 = 0.5 * p.epsilon * h;
    let cx = -(p.alpha * h + w);
    let cz = -0.5 * p.epsilon * h;
    let norm = cx.hypot(cz);
    let (cos, sin_n) = if norm > 0.0 { (norm.cos(), norm.sin() / norm) } else { (1.0, 0.0) };
    let phase = Complex64::from_polar(1.0, -c0);
    let i = Complex64::i();
    let u00 = phase * (cos - i * sin_n * cz);
    let u11 = phase * (cos + i * sin_n * cz);
    let u01 = phase * (-i * sin_n * cx);
    [u00 * psi[0] + u01 * psi[1], u01 * psi[0] + u11 * psi[1]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Largest allowed time step; each output interval is split into equal steps no longer than this.
    pub dt_max: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { dt_max: 0.01 }
    }
}

/// Trajectory-averaged evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub times: Vec<f64>,
    pub density: Vec<DensityMatrix>,
    pub bloch: Vec<BlochState>,
    /// Standard error of (ρ, ρ₁, ρ₂) at each time.
    pub stderr: Vec<[f64; 3]>,
    /// Largest |‖ψ‖ − 1| seen over all trajectories and steps.
    pub max_norm_drift: f64,
    pub n_traj: usize,
    pub steps: usize,
}

struct McAcc {
    sum: Vec<[f64; 3]>,
    sum_sq: Vec<[f64; 3]>,
    drift: f64,
}

impl Merge for McAcc {
    fn merge(&mut self, o: Self) {
        for (a, b) in self.sum.iter_mut().zip(&o.sum) {
            for k in 0..3 {
                a[k] += b[k];
            }
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&o.sum_sq) {
            for k in 0..3 {
                a[k] += b[k];
            }
        }
        self.drift = self.drift.max(o.drift);
    }
}

fn substeps(t_grid: &[f64], dt_max: f64) -> Vec<(usize, f64)> {
    t_grid
        .windows(2)
        .map(|w| {
            let span = w[1] - w[0];
            let n = ((span / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            (n, span / n as f64)
        })
        .collect()
}

/// Average `n_traj` stochastic trajectories started from `psi0`.
///
/// Each trajectory uses its own random substream `(noise.seed, index)`, so
/// the output is bit-identical for any number of worker threads.
pub fn mc_evolve(
    p: &TwoLevelParams,
    noise: &NoiseSpec,
    psi0: [Complex64; 2],
    t_grid: &[f64],
    n_traj: usize,
    opts: &McOptions,
) -> Result<McResult> {
    check_grid(t_grid)?;
    if n_traj == 0 {
        return Err(Error::invalid("n_traj", "need at least one trajectory"));
    }
    if noise.beta0 != p.beta0 {
        return Err(Error::invalid("beta0", "noise strength differs from the Hamiltonian parameters"));
    }
    let norm = (psi0[0].norm_sqr() + psi0[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("psi0", format!("state norm {norm} is not 1")));
    }
    if !(opts.dt_max > 0.0) {
        return Err(Error::invalid("dt_max", "must be positive"));
    }
    let plan = substeps(t_grid, opts.dt_max);
    let h_max = plan.iter().map(|&(_, h)| h).fold(0.0, f64::max);
    if noise.is_white() && p.beta0 * h_max > MAX_BETA_DT {
        return Err(Error::StepTooLarge {
            product: p.beta0 * h_max,
            limit: MAX_BETA_DT,
            suggested_dt: MAX_BETA_DT / p.beta0,
        });
    }
    let n_times = t_grid.len();
    // without noise every trajectory is the same
    let n_run = if p.beta0 == 0.0 { 1 } else { n_traj };

    let acc = reduce_blocks(n_run, 64, |range| {
        let mut acc = McAcc {
            sum: vec![[0.0; 3]; n_times],
            sum_sq: vec![[0.0; 3]; n_times],
            drift: 0.0,
        };
        for idx in range {
            let mut rng = substream(noise.seed, idx as u64);
            let mut proc = NoiseProcess::start(noise, &mut rng);
            let mut psi = psi0;
            let record = |k: usize, psi: &Spinor, acc: &mut McAcc| {
                let r12 = psi[0] * psi[1].conj();
                let v = [psi[0].norm_sqr() - 0.5, r12.re, r12.im];
                for j in 0..3 {
                    acc.sum[k][j] += v[j];
                    acc.sum_sq[k][j] += v[j] * v[j];
                }
            };
            record(0, &psi, &mut acc);
            for (k, &(n, h)) in plan.iter().enumerate() {
                for _ in 0..n {
                    let w = proc.impulse(h, &mut rng);
                    psi = unitary_step(p, &psi, h, w);
                    let drift = ((psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt() - 1.0).abs();
                    acc.drift = acc.drift.max(drift);
                }
                record(k + 1, &psi, &mut acc);
            }
        }
        acc
    })
    .expect("at least one trajectory");

    let n = n_run as f64;
    let mut bloch = Vec::with_capacity(n_times);
    let mut stderr = Vec::with_capacity(n_times);
    let mut density = Vec::with_capacity(n_times);
    for k in 0..n_times {
        let mean = acc.sum[k].map(|s| s / n);
        let mut se = [0.0; 3];
        if n_run > 1 {
            for j in 0..3 {
                let var = ((acc.sum_sq[k][j] / n - mean[j] * mean[j]) * n / (n - 1.0)).max(0.0);
                se[j] = (var / n).sqrt();
            }
        }
        let s = BlochState::from_array(mean);
        density.push(density_from_bloch(&s)?);
        bloch.push(s);
        stderr.push(se);
    }
    Ok(McResult {
        times: t_grid.to_vec(),
        density,
        bloch,
        stderr,
        max_norm_drift: acc.drift,
        n_traj,
        steps: plan.iter().map(|&(n, _)| n).sum(),
    })
}

/// One row of the comparison between the printed closed form and the ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub params: TwoLevelParams,
    pub initial: BlochState,
    pub omega_squared: f64,
    /// max_t |printed − ODE| for ρ₁
    pub max_abs_diff: f64,
    pub printed_max_abs: f64,
    pub ode_max_abs: f64,
    /// The printed expression stays inside the physical bound |ρ₁| ≤ 1/2.
    pub printed_bounded: bool,
    pub agrees: bool,
}

/// Compare [`analytic_offdiagonal`] (A = ρ₁(0), B = ρ₂(0)) against the
/// integrated equations on `t_grid`. `agrees` uses a 1e-6 absolute tolerance.
pub fn audit_analytic_offdiagonal(p: &TwoLevelParams, s0: &BlochState, t_grid: &[f64]) -> Result<AuditRow> {
    let ode = integrate_master(p, s0, t_grid)?;
    let mut diff: f64 = 0.0;
    let mut printed_max: f64 = 0.0;
    let mut ode_max: f64 = 0.0;
    for (t, s) in t_grid.iter().zip(&ode) {
        let printed = analytic_offdiagonal(p, s0.rho1, s0.rho2, *t);
        let d = (printed - s.rho1).abs();
        diff = if d.is_finite() { diff.max(d) } else { f64::INFINITY };
        printed_max = if printed.is_finite() { printed_max.max(printed.abs()) } else { f64::INFINITY };
        ode_max = ode_max.max(s.rho1.abs());
    }
    Ok(AuditRow {
        params: *p,
        initial: *s0,
        omega_squared: p.epsilon * p.epsilon + 4.0 * p.alpha * p.alpha - 4.0 * p.alpha * p.beta0,
        max_abs_diff: diff,
        printed_max_abs: printed_max,
        ode_max_abs: ode_max,
        printed_bounded: printed_max <= 0.5 + BALL_TOL,
        agrees: diff <= 1e-6,
    })
}
