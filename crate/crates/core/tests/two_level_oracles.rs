use lattice_decoherence::noise::NoiseSpec;
use lattice_decoherence::two_level::{
    audit_analytic_offdiagonal, decay_rates, integrate_master, master_matrix, mc_evolve, BlochState, McOptions,
    TwoLevelParams,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// Classical fixed-step RK4 on the 3×3 linear system.
fn rk4(p: &TwoLevelParams, s0: [f64; 3], t_end: f64, steps: usize) -> [f64; 3] {
    let m = master_matrix(p);
    let f = |y: &[f64; 3]| {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += m[(i, j)] * y[j];
            }
        }
        out
    };
    let add = |y: &[f64; 3], k: &[f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
    let h = t_end / steps as f64;
    let mut y = s0;
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&add(&y, &k1, h / 2.0));
        let k3 = f(&add(&y, &k2, h / 2.0));
        let k4 = f(&add(&y, &k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Roots of λ³ + 8β₀λ² + (ε² + 16β₀² + 4α²)λ + 4β₀ε² by Durand–Kerner iteration.
fn cubic_roots(p: &TwoLevelParams) -> [Complex64; 3] {
    let (e, a, b) = (p.epsilon, p.alpha, p.beta0);
    let c = [8.0 * b, e * e + 16.0 * b * b + 4.0 * a * a, 4.0 * b * e * e];
    let poly = |z: Complex64| ((z + c[0]) * z + c[1]) * z + c[2];
    let seed = Complex64::new(0.4, 0.9);
    let mut r = [seed, seed * seed, seed * seed * seed];
    let scale = 1.0 + c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for z in r.iter_mut() {
        *z *= scale;
    }
    for _ in 0..500 {
        for i in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            r[i] -= poly(r[i]) / den;
        }
    }
    r
}

fn matched(a: &[Complex64; 3], b: &[Complex64; 3], tol: f64) -> bool {
    let mut used = [false; 3];
    a.iter().all(|x| {
        match (0..3).find(|&j| !used[j] && (x - b[j]).norm() <= tol) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integrator_matches_step_halved_rk4(
        eps in -2.0f64..2.0,
        alpha in -2.0f64..2.0,
        beta in 0.0f64..1.0,
        theta in 0.0f64..std::f64::consts::PI,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let p = TwoLevelParams::new(eps, alpha, beta).unwrap();
        let s0 = [0.5 * theta.cos(), 0.5 * theta.sin() * phi.cos(), 0.5 * theta.sin() * phi.sin()];
        let t_end = 4.0;
        let coarse = rk4(&p, s0, t_end, 4000);
        let fine = rk4(&p, s0, t_end, 8000);
        let got = integrate_master(&p, &BlochState::from_array(s0), &[0.0, t_end]).unwrap()[1].to_array();
        for i in 0..3 {
            // the halved-step reference is itself accurate far below the tolerance
            prop_assert!((coarse[i] - fine[i]).abs() < 1e-9);
            prop_assert!((got[i] - fine[i]).abs() < 1e-7, "{:?} vs {:?}", got, fine);
        }
    }

    #[test]
    fn eigenvalues_are_characteristic_roots(eps in -3.0f64..3.0, alpha in -3.0f64..3.0, beta in 0.0f64..2.0) {
        let p = TwoLevelParams::new(eps, alpha, beta).unwrap();
        let ev = decay_rates(&p);
        let roots = cubic_roots(&p);
        let scale = 1.0 + eps.abs() + alpha.abs() + beta;
        prop_assert!(matched(&ev, &roots, 1e-7 * scale), "{:?} vs {:?}", ev, roots);
        for w in ev.windows(2) {
            prop_assert!(w[0].re >= w[1].re - 1e-9 * scale);
        }
    }
}

#[test]
fn decay_rate_is_linear_in_weak_noise() {
    let rate = |b: f64| {
        let p = TwoLevelParams::new(1.0, 1.0, b).unwrap();
        decay_rates(&p).iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    };
    let ratio = rate(0.05) / rate(0.025);
    assert!((ratio / 2.0 - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn unitary_eigenvalues() {
    let p = TwoLevelParams::new(1.0, 1.0, 0.0).unwrap();
    let r5 = 5f64.sqrt();
    let expect = [Complex64::new(0.0, r5), Complex64::new(0.0, 0.0), Complex64::new(0.0, -r5)];
    assert!(matched(&decay_rates(&p), &expect, 1e-12));
}

#[test]
fn closed_form_comparison_is_recorded() {
    let p = TwoLevelParams::new(1.0, 0.5, 0.1).unwrap();
    let s0 = BlochState::new(0.4, 0.3, 0.0).unwrap();
    let row = audit_analytic_offdiagonal(&p, &s0, &[0.0, 1.0, 2.0]).unwrap();
    assert!(row.max_abs_diff.is_finite());
    assert!(row.ode_max_abs <= 0.5);
    assert!((row.omega_squared - (1.0 + 1.0 - 0.2)).abs() < 1e-15);
}

#[test]
fn coloured_noise_approaches_white_limit() {
    let beta = 0.2;
    let p = TwoLevelParams::new(0.0, 1.0, beta).unwrap();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
    let ode = integrate_master(&p, &BlochState::site_one(), &grid).unwrap();
    let psi0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let gap = |tau_units: f64| {
        let noise = NoiseSpec::colored(beta, tau_units / beta, 11).unwrap();
        let mc = mc_evolve(&p, &noise, psi0, &grid, 20_000, &McOptions::default()).unwrap();
        mc.bloch
            .iter()
            .zip(&ode)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    };
    let gaps: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&t| gap(t)).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}
