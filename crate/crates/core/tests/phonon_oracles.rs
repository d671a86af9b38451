use std::f64::consts::PI;

use lattice_decoherence::phonon::{
    delta_limit_witness, spatial_correlator, spatial_correlator_high_t, spatial_correlator_quad, temporal_correlator,
    temporal_correlator_high_t, temporal_correlator_quad,
};
use lattice_decoherence::quadrature::QuadOptions;
use lattice_decoherence::MaterialParams;
use proptest::prelude::*;

const HBAR: f64 = 1.054571817e-34;
const KB: f64 = 1.380649e-23;

/// Brute-force trapezoid rule for the equal-time correlator between site 1
/// and site n (n = 1 gives the mean-square displacement).
fn trapezoid_equal_time(m: &MaterialParams, t: f64, n: f64) -> f64 {
    let wd = KB * m.debye_temperature() / HBAR;
    let l = m.lattice_constant() * wd / m.sound_speed();
    let kappa = KB * t / (HBAR * wd);
    let pre = l.powi(3) * kappa * kappa * HBAR / (6.0 * PI * PI * m.ion_mass() * wd);
    let f = |x: f64| {
        let w = if x == 0.0 { 1.0 } else { x / x.exp_m1() + x / 2.0 };
        w * (kappa * l * x).cos() * (n * kappa * l * x).cos()
    };
    let points = 1_000_000;
    let b = 1.0 / kappa;
    let h = b / points as f64;
    let mut s = 0.5 * (f(0.0) + f(b));
    for i in 1..points {
        s += f(i as f64 * h);
    }
    pre * s * h
}

/// Si(x): power series for small x, auxiliary-function asymptotics for large x.
fn sine_integral(x: f64) -> f64 {
    if x < 20.0 {
        let mut term = x;
        let mut sum = x;
        for k in 1..200 {
            term *= -x * x / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term / (2 * k + 1) as f64;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        let (mut f, mut g) = (0.0, 0.0);
        let (mut tf, mut tg) = (1.0 / x, 1.0 / (x * x));
        for k in 0..8 {
            f += tf;
            g += tg;
            tf *= -((2 * k + 1) * (2 * k + 2)) as f64 / (x * x);
            tg *= -((2 * k + 2) * (2 * k + 3)) as f64 / (x * x);
        }
        PI / 2.0 - f * x.cos() - g * x.sin()
    }
}

fn gold() -> MaterialParams {
    MaterialParams::gold()
}

#[test]
fn sine_integral_oracle_reference_values() {
    assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-14);
    assert!((sine_integral(100.0) - 1.562_225_466_889_056).abs() < 1e-12);
}

#[test]
fn equal_time_values_match_trapezoid() {
    let g = gold();
    let quad = temporal_correlator(&g, 300.0, 0.0).unwrap();
    let brute = trapezoid_equal_time(&g, 300.0, 1.0);
    assert!((quad / brute - 1.0).abs() < 1e-6, "{quad} vs {brute}");
    assert!(quad > 0.0);
    let quad = spatial_correlator(&g, 300.0, 10, 0.0).unwrap();
    let brute = trapezoid_equal_time(&g, 300.0, 10.0);
    assert!((quad / brute - 1.0).abs() < 1e-6, "{quad} vs {brute}");
}

#[test]
fn panel_doubling_is_invisible() {
    let g = gold();
    let fine = QuadOptions {
        panels_per_period: 40,
        min_panels: 16,
        ..QuadOptions::default()
    };
    for dt in [0.0, 1.3e-12, 7.7e-12] {
        let a = temporal_correlator_quad(&g, 300.0, dt, &QuadOptions::default()).unwrap();
        let b = temporal_correlator_quad(&g, 300.0, dt, &fine).unwrap();
        assert!((a.value - b.value).abs() <= 1e-8 * a.l1_norm, "dt = {dt}");
        assert!(b.panels > a.panels);
    }
}

#[test]
fn large_site_index_converges() {
    let q = spatial_correlator_quad(&gold(), 300.0, 500, 0.0, &QuadOptions::default()).unwrap();
    assert!(q.achieved_rel_error() <= 1e-8);
    assert!(q.panels >= 500);
}

#[test]
fn correlator_is_even_in_time() {
    let g = gold();
    for dt in [0.4e-12, 3.1e-12] {
        let a = temporal_correlator(&g, 300.0, dt).unwrap();
        let b = temporal_correlator(&g, 300.0, -dt).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }
}

#[test]
fn witness_matches_sine_integral_and_tightens() {
    let g = gold();
    let wd = g.debye_frequency();
    let t = 10.0 * g.debye_temperature();
    let mut last = f64::INFINITY;
    for x in [1.0, 10.0, 100.0] {
        let w = delta_limit_witness(&g, t, x / wd).unwrap();
        assert!((w - 2.0 / PI * sine_integral(x)).abs() < 1e-7, "x = {x}");
        assert!((w - 1.0).abs() < last);
        last = (w - 1.0).abs();
    }
    let w1 = delta_limit_witness(&g, t, 1.0 / wd).unwrap();
    let w2 = delta_limit_witness(&g, 3.0 * t, 1.0 / wd).unwrap();
    assert!((w1 - w2).abs() < 1e-12);
}

#[test]
fn high_t_forms_are_linear_in_temperature() {
    let g = gold();
    let t = 2000.0;
    let dt = 0.05e-12;
    let r = temporal_correlator_high_t(&g, 2.0 * t, dt).unwrap() / temporal_correlator_high_t(&g, t, dt).unwrap();
    assert!((r - 2.0).abs() < 1e-12);
    let r = spatial_correlator_high_t(&g, 2.0 * t, 7).unwrap() / spatial_correlator_high_t(&g, t, 7).unwrap();
    assert!((r - 2.0).abs() < 1e-12);
}

#[test]
fn spatial_high_t_envelope_is_one_over_n() {
    let g = gold();
    let t = 2000.0;
    let base = spatial_correlator_high_t(&g, t, 1).unwrap().abs() / (g.a_qd().sin().abs());
    for n in 1..=1000 {
        let v = spatial_correlator_high_t(&g, t, n).unwrap().abs();
        assert!(v * n as f64 <= base * (1.0 + 1e-12));
    }
    // ratio of the 1/n envelopes at n = 100 and n = 1
    assert!((base / 100.0 / base - 0.01).abs() < 1e-15);
}

#[test]
fn high_t_forms_converge_for_short_lattice_spacing() {
    let g = gold();
    let toy = MaterialParams::new("short", g.debye_temperature(), g.sound_speed(), 0.05 / g.debye_wavevector(), g.ion_mass())
        .unwrap();
    let t = 100.0 * toy.debye_temperature();
    let wd = toy.debye_frequency();
    for x in [0.0, 0.5, 1.0] {
        let q = temporal_correlator(&toy, t, x / wd).unwrap();
        let c = temporal_correlator_high_t(&toy, t, x / wd).unwrap();
        assert!((c / q - 1.0).abs() < 0.01, "x = {x}: {c} vs {q}");
    }
    for n in 1..=5 {
        let q = spatial_correlator(&toy, t, n, 0.0).unwrap();
        let c = spatial_correlator_high_t(&toy, t, n).unwrap();
        assert!((c / q - 1.0).abs() < 0.01, "n = {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn nearest_site_equals_temporal(t in 20.0f64..2000.0, dt in -10e-12f64..10e-12) {
        let g = gold();
        let a = spatial_correlator(&g, t, 1, dt).unwrap();
        let b = temporal_correlator(&g, t, dt).unwrap();
        let l1 = temporal_correlator_quad(&g, t, dt, &QuadOptions::default()).unwrap().l1_norm;
        prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-3 * l1), "{} vs {}", a, b);
    }

    #[test]
    fn equal_time_value_is_positive(t in 1.0f64..5000.0) {
        prop_assert!(temporal_correlator(&gold(), t, 0.0).unwrap() > 0.0);
    }
}
