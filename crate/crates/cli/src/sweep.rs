//! One-parameter sweeps. Parameters are given as `key=value`,
//! `key=a,b,c` or `key=start:stop:count`; exactly one key may be swept.

use lattice_decoherence::export::CsvTable;
use lattice_decoherence::phonon;
use lattice_decoherence::two_level::{self, TwoLevelParams};
use lattice_decoherence::units::{HBAR, K_B};
use lattice_decoherence::{estimates, MaterialParams};
use serde_json::json;

use crate::commands::Artifacts;
use crate::config::{SweepArgs, SweepTarget};
use crate::error::CliError;
use crate::quantity::parse_time;

#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub key: String,
    pub values: Vec<String>,
    pub swept: bool,
}

fn split_unit(text: &str) -> (&str, &str) {
    let pos = text
        .find(|c: char| c.is_alphabetic() || c == 'Å')
        .unwrap_or(text.len());
    text.split_at(pos)
}

fn parse_values(key: &str, text: &str) -> Result<(Vec<String>, bool), CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::validation(key, "empty value list"));
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => {
            let list: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
            if list.iter().any(String::is_empty) {
                return Err(CliError::validation(key, "empty entry in value list"));
            }
            let swept = list.len() > 1;
            Ok((list, swept))
        }
        3 => {
            let count: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| CliError::validation(key, format!("`{}` is not a point count", parts[2])))?;
            if count == 0 {
                return Err(CliError::validation(key, "empty range"));
            }
            let (a, ua) = split_unit(parts[0].trim());
            let (b, ub) = split_unit(parts[1].trim());
            if ua != ub {
                return Err(CliError::validation(key, "range ends use different units"));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::validation(key, format!("`{s}` is not a number")))
            };
            let (a, b) = (num(a)?, num(b)?);
            let values = (0..count)
                .map(|i| {
                    let v = if count == 1 { a } else { a + (b - a) * i as f64 / (count - 1) as f64 };
                    format!("{v}{ua}")
                })
                .collect();
            Ok((values, true))
        }
        _ => Err(CliError::validation(key, "ranges are written start:stop:count")),
    }
}

pub fn parse_settings(entries: &[String]) -> Result<Vec<Setting>, CliError> {
    let mut out: Vec<Setting> = Vec::new();
    for e in entries {
        let (key, value) = e
            .split_once('=')
            .ok_or_else(|| CliError::validation("set", format!("`{e}` is not key=value")))?;
        let key = key.trim().to_string();
        if out.iter().any(|s| s.key == key) {
            return Err(CliError::validation(&key, "given more than once"));
        }
        let (values, swept) = parse_values(&key, value)?;
        out.push(Setting { key, values, swept });
    }
    match out.iter().filter(|s| s.swept).count() {
        0 => Err(CliError::validation("set", "no swept parameter; give one key a list or range")),
        1 => Ok(out),
        _ => Err(CliError::validation("set", "only one parameter may be swept")),
    }
}

fn number(key: &str, text: &str) -> Result<f64, CliError> {
    let v: f64 = text
        .parse()
        .map_err(|_| CliError::validation(key, format!("`{text}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::validation(key, "not finite"))
    }
}

/// Settings resolved against a target's known keys.
struct Resolved<'a> {
    settings: &'a [Setting],
    swept: &'a Setting,
}

impl<'a> Resolved<'a> {
    fn new(settings: &'a [Setting], sweepable: &[&str], fixed: &[&str]) -> Result<Self, CliError> {
        for s in settings {
            if !sweepable.contains(&s.key.as_str()) && !fixed.contains(&s.key.as_str()) {
                return Err(CliError::validation(&s.key, "not a parameter of this sweep target"));
            }
        }
        let swept = settings.iter().find(|s| s.swept).expect("validated");
        if !sweepable.contains(&swept.key.as_str()) {
            return Err(CliError::validation(&swept.key, "cannot be swept for this target"));
        }
        Ok(Resolved { settings, swept })
    }

    fn fixed(&self, key: &str) -> Option<&str> {
        self.settings
            .iter()
            .find(|s| s.key == key && !s.swept)
            .map(|s| s.values[0].as_str())
    }

    /// Value of `key` at sweep point `i`.
    fn at(&self, key: &str, i: usize) -> Option<&str> {
        if self.swept.key == key {
            Some(self.swept.values[i].as_str())
        } else {
            self.fixed(key)
        }
    }
}

pub fn sweep(m: &MaterialParams, temperature: f64, a: &SweepArgs) -> Result<Artifacts, CliError> {
    let settings = parse_settings(&a.set)?;
    let (sweepable, fixed): (&[&str], &[&str]) = match a.target {
        SweepTarget::SpatialHighT => (&["temperature"], &["n_max"]),
        SweepTarget::DecayRates => (&["epsilon", "alpha", "beta0"], &[]),
        SweepTarget::Temporal => (&["temperature", "dt"], &[]),
        SweepTarget::Estimates => (&["temperature"], &[]),
    };
    let r = Resolved::new(&settings, sweepable, fixed)?;
    let key = r.swept.key.clone();
    let n_points = r.swept.values.len();
    let temp_at = |i: usize| -> Result<f64, CliError> {
        match r.at("temperature", i) {
            Some(t) => number("temperature", t),
            None => Ok(temperature),
        }
    };
    // every point is validated before any is computed
    let mut params: Vec<f64> = Vec::with_capacity(n_points);
    for v in &r.swept.values {
        params.push(if key == "dt" { parse_time("dt", v)? } else { number(&key, v)? });
    }
    let column = if key == "dt" { "dt_s".to_string() } else { key.clone() };

    let mut summary = json!({ "target": a.target, "swept": key, "points": n_points });
    let table = match a.target {
        SweepTarget::SpatialHighT => {
            let n_max: u32 = match r.fixed("n_max") {
                Some(v) => v
                    .parse()
                    .map_err(|_| CliError::validation("n_max", format!("`{v}` is not a positive integer")))?,
                None => 10,
            };
            if n_max == 0 {
                return Err(CliError::validation("n_max", "must be at least 1"));
            }
            let mut header = vec![column];
            header.extend((1..=n_max).map(|n| format!("value_n{n}_m2")));
            let mut t = CsvTable::new(header);
            for i in 0..n_points {
                let temp = temp_at(i)?;
                let mut row = vec![params[i]];
                for n in 1..=n_max {
                    row.push(phonon::spatial_correlator_high_t(m, temp, n)?);
                }
                t.push(row)?;
            }
            t
        }
        SweepTarget::DecayRates => {
            let get = |k: &str, i: usize, default: f64| match r.at(k, i) {
                Some(v) => number(k, v),
                None => Ok(default),
            };
            let mut t = CsvTable::new([column.as_str(), "re1", "im1", "re2", "im2", "re3", "im3", "max_abs_re"]);
            let mut maxima = Vec::with_capacity(n_points);
            for i in 0..n_points {
                let p = TwoLevelParams::new(get("epsilon", i, 1.0)?, get("alpha", i, 1.0)?, get("beta0", i, 0.0)?)?;
                let ev = two_level::decay_rates(&p);
                let max_re = ev.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
                maxima.push(max_re);
                t.push(vec![params[i], ev[0].re, ev[0].im, ev[1].re, ev[1].im, ev[2].re, ev[2].im, max_re])?;
            }
            summary["max_abs_re_monotone_increasing"] = json!(maxima.windows(2).all(|w| w[1] > w[0]));
            t
        }
        SweepTarget::Temporal => {
            let mut t = CsvTable::new([column.as_str(), "value_m2", "high_t_m2"]);
            for i in 0..n_points {
                let temp = temp_at(i)?;
                let dt = match r.at("dt", i) {
                    Some(v) => parse_time("dt", v)?,
                    None => 0.0,
                };
                let q = phonon::temporal_correlator(m, temp, dt)?;
                let h = if K_B * temp >= HBAR * m.debye_frequency() {
                    phonon::temporal_correlator_high_t(m, temp, dt)?
                } else {
                    f64::NAN
                };
                t.push(vec![params[i], q, h])?;
            }
            t
        }
        SweepTarget::Estimates => {
            let mut t = CsvTable::new([column.as_str(), "tau_r_s", "tau_d_s", "tau_hop_s", "hops_to_decohere"]);
            for i in 0..n_points {
                let rep = estimates::timescale_report(m, temp_at(i)?)?;
                t.push(vec![
                    params[i],
                    rep.relaxation_time,
                    rep.decoherence_time,
                    rep.hopping_time,
                    rep.hops_to_decohere,
                ])?;
            }
            t
        }
    };
    summary["columns"] = json!(table.header);
    Ok(Artifacts {
        tables: vec![("sweep.csv".into(), table)],
        documents: vec![],
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_lists_and_ranges() {
        let s = parse_settings(&set(&["temperature=300,600", "n_max=5"])).unwrap();
        assert_eq!(s[0].values, vec!["300", "600"]);
        assert!(s[0].swept && !s[1].swept);
        let s = parse_settings(&set(&["dt=0ps:2ps:3"])).unwrap();
        assert_eq!(s[0].values, vec!["0ps", "1ps", "2ps"]);
    }

    #[test]
    fn rejects_bad_sweeps() {
        assert!(parse_settings(&set(&["beta0=0:1:0"])).is_err());
        assert!(parse_settings(&set(&["beta0="])).is_err());
        assert!(parse_settings(&set(&["beta0=0.1"])).is_err());
        assert!(parse_settings(&set(&["beta0=0.1,0.2", "alpha=1,2"])).is_err());
        assert!(parse_settings(&set(&["beta0=0.1,0.2", "beta0=3"])).is_err());
        assert!(parse_settings(&set(&["dt=0ps:2fs:3"])).is_err());
    }
}
