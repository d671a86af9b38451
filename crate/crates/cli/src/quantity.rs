//! Unit-suffixed quantities on the command line. Times and lengths must carry
//! an explicit unit; a bare number is rejected.

use lattice_decoherence::units::{UnitSystem, ANGSTROM, FEMTOSECOND, NANOMETER, PICOSECOND};

use crate::error::CliError;

const TIME_UNITS: &[(&str, f64)] = &[("fs", FEMTOSECOND), ("ps", PICOSECOND), ("ns", 1e-9), ("s", 1.0)];
const LENGTH_UNITS: &[(&str, f64)] = &[("Å", ANGSTROM), ("A", ANGSTROM), ("nm", NANOMETER), ("m", 1.0)];

/// Natural time unit ħ/E_ref, used by the two-level and chain commands.
pub const NATURAL_TIME: &str = "nat";

fn split<'a>(field: &str, text: &'a str, units: &[(&str, f64)]) -> Result<(f64, &'a str), CliError> {
    let text = text.trim();
    let pos = text
        .find(|c: char| c.is_alphabetic() || c == 'Å')
        .ok_or_else(|| CliError::validation(field, format!("`{text}` needs a unit suffix")))?;
    let (num, unit) = text.split_at(pos);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| CliError::validation(field, format!("`{num}` is not a number")))?;
    if !value.is_finite() {
        return Err(CliError::validation(field, "value is not finite"));
    }
    if !units.iter().any(|(u, _)| *u == unit) && unit != NATURAL_TIME {
        let known: Vec<&str> = units.iter().map(|(u, _)| *u).collect();
        return Err(CliError::validation(
            field,
            format!("unknown unit `{unit}`, expected one of {}", known.join(", ")),
        ));
    }
    Ok((value, unit))
}

fn factor(units: &[(&str, f64)], unit: &str) -> f64 {
    units.iter().find(|(u, _)| *u == unit).map(|(_, f)| *f).unwrap_or(f64::NAN)
}

/// A time in seconds.
pub fn parse_time(field: &str, text: &str) -> Result<f64, CliError> {
    let (v, unit) = split(field, text, TIME_UNITS)?;
    if unit == NATURAL_TIME {
        return Err(CliError::validation(field, "natural time units are not accepted here"));
    }
    Ok(v * factor(TIME_UNITS, unit))
}

/// A time in natural units ħ/E_ref, given either as `…nat` or in SI.
pub fn parse_natural_time(field: &str, text: &str, units: &UnitSystem) -> Result<f64, CliError> {
    let (v, unit) = split(field, text, TIME_UNITS)?;
    if unit == NATURAL_TIME {
        Ok(v)
    } else {
        Ok(units.time_from_si(v * factor(TIME_UNITS, unit)))
    }
}

/// A length in metres.
pub fn parse_length(field: &str, text: &str) -> Result<f64, CliError> {
    let (v, unit) = split(field, text, LENGTH_UNITS)?;
    if unit == NATURAL_TIME {
        return Err(CliError::validation(field, format!("unknown unit `{unit}`")));
    }
    Ok(v * factor(LENGTH_UNITS, unit))
}
