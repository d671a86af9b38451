//! Material parameter sets.
//!
//! Records are JSON objects whose field names carry their unit, e.g.
//! `debye_temperature_K` or `sound_speed_m_per_s`. The ion mass may be given
//! either as `ion_mass_kg` or `ion_mass_u`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{require_positive, Error, Result};
use crate::units::{ATOMIC_MASS_UNIT, ELECTRON_MASS, HBAR, K_B};

/// Validated material parameters (SI units).
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    name: String,
    debye_temperature: f64,
    sound_speed: f64,
    lattice_constant: f64,
    ion_mass: f64,
    conductivity: Option<f64>,
    carrier_density: Option<f64>,
    band_mass: Option<f64>,
    tunneling_energy_ev: Option<f64>,
    fermi_energy_ev: Option<f64>,
}

/// Serialized form. Only this struct knows about unit-bearing field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MaterialRecord {
    name: String,
    #[serde(rename = "debye_temperature_K")]
    debye_temperature: f64,
    #[serde(rename = "sound_speed_m_per_s")]
    sound_speed: f64,
    #[serde(rename = "lattice_constant_m")]
    lattice_constant: f64,
    #[serde(rename = "ion_mass_kg")]
    ion_mass: f64,
    #[serde(rename = "conductivity_S_per_m", skip_serializing_if = "Option::is_none")]
    conductivity: Option<f64>,
    #[serde(rename = "carrier_density_per_m3", skip_serializing_if = "Option::is_none")]
    carrier_density: Option<f64>,
    #[serde(rename = "band_mass_kg", skip_serializing_if = "Option::is_none")]
    band_mass: Option<f64>,
    #[serde(rename = "tunneling_energy_eV", skip_serializing_if = "Option::is_none")]
    tunneling_energy: Option<f64>,
    #[serde(rename = "fermi_energy_eV", skip_serializing_if = "Option::is_none")]
    fermi_energy: Option<f64>,
}

const QUANTITIES: &[(&str, &[&str])] = &[
    ("debye_temperature", &["debye_temperature_K"]),
    ("sound_speed", &["sound_speed_m_per_s"]),
    ("lattice_constant", &["lattice_constant_m"]),
    ("ion_mass", &["ion_mass_kg", "ion_mass_u"]),
    ("conductivity", &["conductivity_S_per_m"]),
    ("carrier_density", &["carrier_density_per_m3"]),
    ("band_mass", &["band_mass_kg"]),
    ("tunneling_energy", &["tunneling_energy_eV"]),
    ("fermi_energy", &["fermi_energy_eV"]),
];

impl MaterialParams {
    /// Mandatory lattice parameters; electronic fields start absent.
    pub fn new(
        name: impl Into<String>,
        debye_temperature: f64,
        sound_speed: f64,
        lattice_constant: f64,
        ion_mass: f64,
    ) -> Result<Self> {
        let m = MaterialParams {
            name: name.into(),
            debye_temperature: require_positive("debye_temperature_K", debye_temperature)?,
            sound_speed: require_positive("sound_speed_m_per_s", sound_speed)?,
            lattice_constant: require_positive("lattice_constant_m", lattice_constant)?,
            ion_mass: require_positive("ion_mass_kg", ion_mass)?,
            conductivity: None,
            carrier_density: None,
            band_mass: None,
            tunneling_energy_ev: None,
            fermi_energy_ev: None,
        };
        let (w, q) = (m.debye_frequency(), m.debye_wavevector());
        if !(w.is_finite() && q.is_finite() && w > 0.0 && q > 0.0) {
            return Err(Error::invalid("debye_temperature_K", "derived Debye scales not finite"));
        }
        Ok(m)
    }

    pub fn with_conductivity(mut self, sigma: f64) -> Result<Self> {
        self.conductivity = Some(require_positive("conductivity_S_per_m", sigma)?);
        Ok(self)
    }

    pub fn with_carrier_density(mut self, n: f64) -> Result<Self> {
        self.carrier_density = Some(require_positive("carrier_density_per_m3", n)?);
        Ok(self)
    }

    pub fn with_band_mass(mut self, m_b: f64) -> Result<Self> {
        self.band_mass = Some(require_positive("band_mass_kg", m_b)?);
        Ok(self)
    }

    pub fn with_tunneling_energy_ev(mut self, e: f64) -> Result<Self> {
        self.tunneling_energy_ev = Some(require_positive("tunneling_energy_eV", e)?);
        Ok(self)
    }

    pub fn with_fermi_energy_ev(mut self, e: f64) -> Result<Self> {
        self.fermi_energy_ev = Some(require_positive("fermi_energy_eV", e)?);
        Ok(self)
    }

    /// Gold: Θ_D = 165 K, c_s = 3240 m/s, a = 4.1 Å, M = 196.97 u.
    ///
    /// The electronic fields are handbook values: σ = 4.1e7 S/m,
    /// n = 5.9e28 m⁻³, m_b = mₑ, hopping element 2 eV, E_F = 5.53 eV.
    pub fn gold() -> Self {
        MaterialParams::new("gold", 165.0, 3240.0, 4.1e-10, 196.97 * ATOMIC_MASS_UNIT)
            .and_then(|m| m.with_conductivity(4.1e7))
            .and_then(|m| m.with_carrier_density(5.9e28))
            .and_then(|m| m.with_band_mass(ELECTRON_MASS))
            .and_then(|m| m.with_tunneling_energy_ev(2.0))
            .and_then(|m| m.with_fermi_energy_ev(5.53))
            .expect("gold preset is valid")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gold" | "au" => Ok(Self::gold()),
            _ => Err(Error::UnknownPreset(name.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn debye_temperature(&self) -> f64 {
        self.debye_temperature
    }
    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }
    pub fn lattice_constant(&self) -> f64 {
        self.lattice_constant
    }
    pub fn ion_mass(&self) -> f64 {
        self.ion_mass
    }
    pub fn conductivity(&self) -> Option<f64> {
        self.conductivity
    }
    pub fn carrier_density(&self) -> Option<f64> {
        self.carrier_density
    }
    pub fn band_mass(&self) -> Option<f64> {
        self.band_mass
    }
    pub fn tunneling_energy_ev(&self) -> Option<f64> {
        self.tunneling_energy_ev
    }
    pub fn fermi_energy_ev(&self) -> Option<f64> {
        self.fermi_energy_ev
    }

    /// ω_D = k_B Θ_D / ħ (rad/s)
    pub fn debye_frequency(&self) -> f64 {
        K_B * self.debye_temperature / HBAR
    }

    /// q_D = ω_D / c_s (1/m)
    pub fn debye_wavevector(&self) -> f64 {
        self.debye_frequency() / self.sound_speed
    }

    /// The dimensionless product a·q_D that sets every cosine in the correlators.
    pub fn a_qd(&self) -> f64 {
        self.lattice_constant * self.debye_wavevector()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self.record()).expect("record serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.record()).expect("record serializes")
    }

    fn record(&self) -> MaterialRecord {
        MaterialRecord {
            name: self.name.clone(),
            debye_temperature: self.debye_temperature,
            sound_speed: self.sound_speed,
            lattice_constant: self.lattice_constant,
            ion_mass: self.ion_mass,
            conductivity: self.conductivity,
            carrier_density: self.carrier_density,
            band_mass: self.band_mass,
            tunneling_energy: self.tunneling_energy_ev,
            fermi_energy: self.fermi_energy_ev,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::invalid("material", e.to_string()))?;
        load_material(&v)
    }
}

/// Parse and validate a material record.
///
/// Errors name the offending field: a missing mandatory quantity, a
/// non-positive value, a known quantity with an unrecognised unit suffix,
/// or an unrelated key.
pub fn load_material(record: &Value) -> Result<MaterialParams> {
    let obj = record
        .as_object()
        .ok_or_else(|| Error::invalid("material", "record must be a JSON object"))?;

    for key in obj.keys() {
        if key == "name" || QUANTITIES.iter().any(|(_, ok)| ok.contains(&key.as_str())) {
            continue;
        }
        if QUANTITIES.iter().any(|(stem, _)| key.starts_with(&format!("{stem}_"))) {
            return Err(Error::UnknownUnit(key.clone()));
        }
        return Err(Error::UnknownField(key.clone()));
    }

    let name = match obj.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::invalid("name", "must be a string")),
        None => "custom".to_string(),
    };

    let ion_mass = match (number(obj, "ion_mass_kg")?, number(obj, "ion_mass_u")?) {
        (Some(_), Some(_)) => {
            return Err(Error::invalid("ion_mass_kg", "give either ion_mass_kg or ion_mass_u, not both"))
        }
        (Some(kg), None) => kg,
        (None, Some(u)) => require_positive("ion_mass_u", u)? * ATOMIC_MASS_UNIT,
        (None, None) => return Err(Error::MissingField("ion_mass_kg".into())),
    };

    let mut m = MaterialParams::new(
        name,
        mandatory(obj, "debye_temperature_K")?,
        mandatory(obj, "sound_speed_m_per_s")?,
        mandatory(obj, "lattice_constant_m")?,
        ion_mass,
    )?;
    if let Some(v) = number(obj, "conductivity_S_per_m")? {
        m = m.with_conductivity(v)?;
    }
    if let Some(v) = number(obj, "carrier_density_per_m3")? {
        m = m.with_carrier_density(v)?;
    }
    if let Some(v) = number(obj, "band_mass_kg")? {
        m = m.with_band_mass(v)?;
    }
    if let Some(v) = number(obj, "tunneling_energy_eV")? {
        m = m.with_tunneling_energy_ev(v)?;
    }
    if let Some(v) = number(obj, "fermi_energy_eV")? {
        m = m.with_fermi_energy_ev(v)?;
    }
    Ok(m)
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(_) => Err(Error::invalid(key, "must be a number")),
    }
}

fn mandatory(obj: &Map<String, Value>, key: &str) -> Result<f64> {
    number(obj, key)?.ok_or_else(|| Error::MissingField(key.to_string()))
}

/// ω_D = k_B Θ_D / ħ
pub fn debye_frequency(m: &MaterialParams) -> f64 {
    m.debye_frequency()
}

/// q_D = ω_D / c_s
pub fn debye_wavevector(m: &MaterialParams) -> f64 {
    m.debye_wavevector()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn gold_debye_scales() {
        let g = MaterialParams::gold();
        // k_B * 165 / ħ, by hand
        let oracle = 1.380_649e-23 * 165.0 / 1.054_571_817e-34;
        assert!((g.debye_frequency() / oracle - 1.0).abs() < 1e-14);
        assert!((g.debye_frequency() / 2.16e13 - 1.0).abs() < 0.01);
        assert!((g.debye_wavevector() / 6.67e9 - 1.0).abs() < 0.01);
        assert!((g.a_qd() - 2.73).abs() < 0.01);
        assert!((g.debye_wavevector() * g.sound_speed() / g.debye_frequency() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_debye_temperature_gives_unit_frequency() {
        let m = MaterialParams::new("x", HBAR / K_B, 1.0, 1.0, 1.0).unwrap();
        assert!((m.debye_frequency() - 1.0).abs() < 1e-15);
        assert!((m.debye_wavevector() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaling_rules() {
        let g = MaterialParams::gold();
        let hot = MaterialParams::new("x", 330.0, 3240.0, 4.1e-10, g.ion_mass()).unwrap();
        assert!((hot.debye_frequency() / g.debye_frequency() - 2.0).abs() < 1e-14);
        let fast = MaterialParams::new("x", 165.0, 6480.0, 4.1e-10, g.ion_mass()).unwrap();
        assert!((fast.debye_wavevector() / g.debye_wavevector() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn preset_values() {
        let g = MaterialParams::preset("gold").unwrap();
        assert_eq!(g.debye_temperature(), 165.0);
        assert_eq!(g.sound_speed(), 3240.0);
        assert_eq!(g.lattice_constant(), 4.1e-10);
        assert!(matches!(MaterialParams::preset("unobtainium"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn negative_debye_temperature_rejected() {
        let rec = json!({
            "debye_temperature_K": -1.0,
            "sound_speed_m_per_s": 3240.0,
            "lattice_constant_m": 4.1e-10,
            "ion_mass_u": 196.97
        });
        match load_material(&rec) {
            Err(Error::NonPositive { field, .. }) => assert_eq!(field, "debye_temperature_K"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_and_unknown_fields() {
        let rec = json!({"debye_temperature_K": 165.0, "lattice_constant_m": 4.1e-10, "ion_mass_u": 197.0});
        assert_eq!(load_material(&rec), Err(Error::MissingField("sound_speed_m_per_s".into())));

        let rec = json!({
            "debye_temperature_K": 165.0, "sound_speed_km_per_s": 3.24,
            "lattice_constant_m": 4.1e-10, "ion_mass_u": 197.0
        });
        assert_eq!(load_material(&rec), Err(Error::UnknownUnit("sound_speed_km_per_s".into())));

        let rec = json!({"colour": "yellow"});
        assert_eq!(load_material(&rec), Err(Error::UnknownField("colour".into())));
    }

    #[test]
    fn ion_mass_in_atomic_units() {
        let rec = json!({
            "name": "au",
            "debye_temperature_K": 165.0, "sound_speed_m_per_s": 3240.0,
            "lattice_constant_m": 4.1e-10, "ion_mass_u": 196.97
        });
        let m = load_material(&rec).unwrap();
        assert!((m.ion_mass() / MaterialParams::gold().ion_mass() - 1.0).abs() < 1e-15);
        assert_eq!(m.conductivity(), None);
    }

    #[test]
    fn gold_round_trip() {
        let g = MaterialParams::gold();
        let text = g.to_json_string();
        let back = MaterialParams::from_json_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json_string(), text);
    }
}
