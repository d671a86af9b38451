//! Closed-form decoherence and transport timescales (SI units).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::phonon::lattice_correlation_length;
use crate::units::{ELECTRON_VOLT, ELEMENTARY_CHARGE, HBAR, K_B};

/// Inputs for the estimates. Each operation requires only the fields it uses.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EstimateInputs {
    /// Superposition separation Δx, m.
    pub delta_x: Option<f64>,
    /// kg
    pub particle_mass: Option<f64>,
    /// K
    pub temperature: Option<f64>,
    /// γ = 1/τ_R, 1/s.
    pub relaxation_rate: Option<f64>,
    /// S/m
    pub conductivity: Option<f64>,
    /// 1/m³
    pub carrier_density: Option<f64>,
    /// kg
    pub band_mass: Option<f64>,
    /// eV
    pub hop_energy_ev: Option<f64>,
    /// eV
    pub fermi_energy_ev: Option<f64>,
}

fn field(v: Option<f64>, name: &str) -> Result<f64> {
    match v {
        None => Err(Error::MissingField(name.to_string())),
        Some(x) if !x.is_finite() => Err(Error::NonFinite { field: name.to_string() }),
        Some(x) if x <= 0.0 => Err(Error::NonPositive {
            field: name.to_string(),
            value: x,
        }),
        Some(x) => Ok(x),
    }
}

/// Damping rate of ρ(x, x′) from the high-temperature Caldeira–Leggett term.
pub fn cl_dephasing_rate(x: f64, x_prime: f64, inp: &EstimateInputs) -> Result<f64> {
    let m = field(inp.particle_mass, "particle_mass")?;
    let t = field(inp.temperature, "temperature")?;
    let gamma = field(inp.relaxation_rate, "relaxation_rate")?;
    let d = x - x_prime;
    Ok(2.0 * m * gamma * K_B * t / (HBAR * HBAR) * d * d)
}

/// τ_D = τ_R (ħ / (Δx √(2 m k_B T)))².
pub fn zurek_decoherence_time(inp: &EstimateInputs) -> Result<f64> {
    let dx = field(inp.delta_x, "delta_x")?;
    let m = field(inp.particle_mass, "particle_mass")?;
    let t = field(inp.temperature, "temperature")?;
    let gamma = field(inp.relaxation_rate, "relaxation_rate")?;
    let lambda = HBAR / (dx * (2.0 * m * K_B * t).sqrt());
    Ok(lambda * lambda / gamma)
}

/// τ = σ m_b / (n e²).
pub fn drude_relaxation_time(inp: &EstimateInputs) -> Result<f64> {
    let sigma = field(inp.conductivity, "conductivity")?;
    let n = field(inp.carrier_density, "carrier_density")?;
    let mb = field(inp.band_mass, "band_mass")?;
    Ok(sigma * mb / (n * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE))
}

pub fn hopping_time(inp: &EstimateInputs) -> Result<f64> {
    Ok(HBAR / (field(inp.hop_energy_ev, "hop_energy_ev")? * ELECTRON_VOLT))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavePacket {
    pub fermi_wavevector: f64,
    pub delta_k: f64,
    /// 2π/Δk
    pub delta_x: f64,
}

/// Size of a thermal wave packet at the Fermi surface, Δx = 2π/Δk.
pub fn thermal_wavepacket(inp: &EstimateInputs) -> Result<WavePacket> {
    let ef = field(inp.fermi_energy_ev, "fermi_energy_ev")? * ELECTRON_VOLT;
    let m = field(inp.particle_mass, "particle_mass")?;
    let t = field(inp.temperature, "temperature")?;
    let kf = (2.0 * m * ef).sqrt() / HBAR;
    let dk = m * K_B * t / (HBAR * HBAR * kf);
    Ok(WavePacket {
        fermi_wavevector: kf,
        delta_k: dk,
        delta_x: 2.0 * std::f64::consts::PI / dk,
    })
}

pub fn thermal_wavepacket_size(inp: &EstimateInputs) -> Result<f64> {
    Ok(thermal_wavepacket(inp)?.delta_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Many hops fit inside one decoherence time.
    CoherentHopping,
    /// Decoherence acts within a few hops.
    DecoheredHopping,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimescaleReport {
    pub material: String,
    pub inputs: EstimateInputs,
    pub relaxation_rate: f64,
    pub wave_packet: WavePacket,
    pub hopping_time: f64,
    pub relaxation_time: f64,
    pub decoherence_time: f64,
    pub decoherence_to_relaxation: f64,
    pub hops_to_decohere: f64,
    pub sites_in_correlation_length: u64,
    pub regime: Regime,
    pub statement: String,
    pub wavepacket_convention: &'static str,
}

/// Ratio τ_D/τ_hop above which near-neighbour hops count as coherent.
pub const COHERENT_HOPS: f64 = 10.0;

/// Compose the estimates for an electron in `material` at `temperature`. The
/// superposition separation is one lattice constant and the Drude rate sets γ.
pub fn timescale_report(material: &MaterialParams, temperature: f64) -> Result<TimescaleReport> {
    timescale_report_with(material, temperature, material.lattice_constant())
}

/// As [`timescale_report`] with an explicit superposition separation.
pub fn timescale_report_with(material: &MaterialParams, temperature: f64, delta_x: f64) -> Result<TimescaleReport> {
    let mut inputs = EstimateInputs {
        delta_x: Some(delta_x),
        particle_mass: material.band_mass(),
        temperature: Some(temperature),
        relaxation_rate: None,
        conductivity: material.conductivity(),
        carrier_density: material.carrier_density(),
        band_mass: material.band_mass(),
        hop_energy_ev: material.tunneling_energy_ev(),
        fermi_energy_ev: material.fermi_energy_ev(),
    };
    let tau_r = drude_relaxation_time(&inputs)?;
    inputs.relaxation_rate = Some(1.0 / tau_r);
    let tau_d = zurek_decoherence_time(&inputs)?;
    let tau_hop = hopping_time(&inputs)?;
    let wave_packet = thermal_wavepacket(&inputs)?;
    let sites = lattice_correlation_length(material, 0.01)?.sites;
    let hops = tau_d / tau_hop;
    let regime = if hops >= COHERENT_HOPS {
        Regime::CoherentHopping
    } else {
        Regime::DecoheredHopping
    };
    let statement = match regime {
        Regime::CoherentHopping => format!(
            "about {hops:.0} hops fit in one decoherence time, so a single near-neighbour hop loses a negligible \
             amount of coherence; decoherence matters only for transport over many sites"
        ),
        Regime::DecoheredHopping => format!(
            "only {hops:.1} hops fit in one decoherence time, so coherence is lost between near neighbours"
        ),
    };
    Ok(TimescaleReport {
        material: material.name().to_string(),
        relaxation_rate: 1.0 / tau_r,
        inputs,
        wave_packet,
        hopping_time: tau_hop,
        relaxation_time: tau_r,
        decoherence_time: tau_d,
        decoherence_to_relaxation: tau_d / tau_r,
        hops_to_decohere: hops,
        sites_in_correlation_length: sites,
        regime,
        statement,
        wavepacket_convention: "delta_x = 2*pi/delta_k",
    })
}
