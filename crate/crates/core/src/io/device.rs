use std::path::Path;

use toml::{Table, Value};

use super::units::{format_quantity, parse_quantity, Quantity};
use super::{read_file, write_file};
use crate::error::{Error, Result};
use crate::fluxtrap::{CoilCalibration, RingParams};
use crate::qubit::FluxoniumParams;

/// Circuit and readout parameters of one device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRecord {
    pub name: String,
    pub fluxonium: FluxoniumParams,
    /// Readout resonator frequency, GHz.
    pub resonator_freq: f64,
    /// chi_01 / 2pi, MHz.
    pub dispersive_shift: f64,
    /// kappa_r / 2pi, MHz.
    pub resonator_linewidth: f64,
    pub ring: Option<RingParams>,
    pub calibration: Option<CoilCalibration>,
}

impl DeviceRecord {
    pub fn validate(&self) -> Result<()> {
        self.fluxonium.validate()?;
        for (name, v) in [
            ("resonator.frequency", self.resonator_freq),
            ("resonator.dispersive_shift", self.dispersive_shift),
            ("resonator.linewidth", self.resonator_linewidth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Schema(format!("field '{name}' must be > 0, got {v}")));
            }
        }
        if let Some(r) = &self.ring {
            r.validate()?;
        }
        if let Some(c) = &self.calibration {
            c.validate()?;
        }
        Ok(())
    }
}

/// Built-in records "device1" and "device2". The coil calibration is the
/// 540 nA per flux quantum modulation period measured with the coil; ring
/// inductances are not known and left out.
pub fn builtin_device(name: &str) -> Option<DeviceRecord> {
    let (fluxonium, resonator_freq, dispersive_shift, resonator_linewidth) = match name {
        "device1" => ((3.54, 1.32, 0.81), 7.988, 0.4, 10.8),
        "device2" => ((3.52, 1.31, 0.66), 7.405, 0.7, 11.4),
        _ => return None,
    };
    Some(DeviceRecord {
        name: name.to_string(),
        fluxonium: FluxoniumParams {
            e_j: fluxonium.0,
            e_c: fluxonium.1,
            e_l: fluxonium.2,
        },
        resonator_freq,
        dispersive_shift,
        resonator_linewidth,
        ring: None,
        calibration: Some(CoilCalibration {
            current_per_flux_quantum: 540e-9,
            flux_offset: 0.0,
        }),
    })
}

fn section<'a>(root: &'a Table, name: &str) -> Result<&'a Table> {
    match root.get(name) {
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(Error::Schema(format!("'{name}' must be a table"))),
        None => Err(Error::Schema(format!("missing field '{name}'"))),
    }
}

fn quantity(t: &Table, prefix: &str, key: &str, q: Quantity) -> Result<f64> {
    let field = format!("{prefix}.{key}");
    match t.get(key) {
        Some(Value::String(s)) => parse_quantity(&field, s, q),
        Some(_) => Err(Error::Schema(format!(
            "field '{field}' must be a string like '1.0 {}'",
            q.stored_unit()
        ))),
        None => Err(Error::Schema(format!("missing field '{field}'"))),
    }
}

/// Parses a device document.
///
/// ```toml
/// name = "device1"
///
/// [fluxonium]
/// e_j = "3.54 GHz"
/// e_c = "1.32 GHz"
/// e_l = "0.81 GHz"
///
/// [resonator]
/// frequency = "7.988 GHz"
/// dispersive_shift = "0.4 MHz"
/// linewidth = "10.8 MHz"
///
/// [ring]                      # optional
/// l_kinetic = "0.7 nH"
/// l_geometric = "0.3 nH"
///
/// [calibration]               # optional
/// current_per_flux_quantum = "540 nA"
/// flux_offset = "0 Phi0"      # optional
/// ```
pub fn parse_device(text: &str) -> Result<DeviceRecord> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Schema(format!("malformed device file: {e}")))?;
    let name = match root.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::Schema("field 'name' must be a string".into())),
        None => return Err(Error::Schema("missing field 'name'".into())),
    };
    let f = section(&root, "fluxonium")?;
    let fluxonium = FluxoniumParams {
        e_j: quantity(f, "fluxonium", "e_j", Quantity::FrequencyGhz)?,
        e_c: quantity(f, "fluxonium", "e_c", Quantity::FrequencyGhz)?,
        e_l: quantity(f, "fluxonium", "e_l", Quantity::FrequencyGhz)?,
    };
    let r = section(&root, "resonator")?;
    let resonator_freq = quantity(r, "resonator", "frequency", Quantity::FrequencyGhz)?;
    let dispersive_shift = quantity(r, "resonator", "dispersive_shift", Quantity::FrequencyMhz)?;
    let resonator_linewidth = quantity(r, "resonator", "linewidth", Quantity::FrequencyMhz)?;
    let ring = match root.get("ring") {
        None => None,
        Some(_) => {
            let t = section(&root, "ring")?;
            Some(RingParams {
                l_kinetic: quantity(t, "ring", "l_kinetic", Quantity::Inductance)?,
                l_geometric: quantity(t, "ring", "l_geometric", Quantity::Inductance)?,
            })
        }
    };
    let calibration = match root.get("calibration") {
        None => None,
        Some(_) => {
            let t = section(&root, "calibration")?;
            let flux_offset = if t.contains_key("flux_offset") {
                quantity(t, "calibration", "flux_offset", Quantity::Flux)?
            } else {
                0.0
            };
            Some(CoilCalibration {
                current_per_flux_quantum: quantity(
                    t,
                    "calibration",
                    "current_per_flux_quantum",
                    Quantity::Current,
                )?,
                flux_offset,
            })
        }
    };
    let rec = DeviceRecord {
        name,
        fluxonium,
        resonator_freq,
        dispersive_shift,
        resonator_linewidth,
        ring,
        calibration,
    };
    rec.validate()?;
    Ok(rec)
}

/// Reads a device file, or a built-in record when `path` is "device1" or
/// "device2" and no such file exists.
pub fn load_device(path: &Path) -> Result<DeviceRecord> {
    if !path.exists() {
        if let Some(rec) = path.to_str().and_then(builtin_device) {
            return Ok(rec);
        }
    }
    parse_device(&read_file(path)?)
}

/// Serializes a record with every quantity in its stored unit.
pub fn device_to_string(rec: &DeviceRecord) -> Result<String> {
    rec.validate()?;
    let q = |v: f64, u: Quantity| Value::String(format_quantity(v, u));
    let mut root = Table::new();
    root.insert("name".into(), Value::String(rec.name.clone()));
    let mut f = Table::new();
    f.insert("e_j".into(), q(rec.fluxonium.e_j, Quantity::FrequencyGhz));
    f.insert("e_c".into(), q(rec.fluxonium.e_c, Quantity::FrequencyGhz));
    f.insert("e_l".into(), q(rec.fluxonium.e_l, Quantity::FrequencyGhz));
    root.insert("fluxonium".into(), Value::Table(f));
    let mut r = Table::new();
    r.insert("frequency".into(), q(rec.resonator_freq, Quantity::FrequencyGhz));
    r.insert("dispersive_shift".into(), q(rec.dispersive_shift, Quantity::FrequencyMhz));
    r.insert("linewidth".into(), q(rec.resonator_linewidth, Quantity::FrequencyMhz));
    root.insert("resonator".into(), Value::Table(r));
    if let Some(ring) = &rec.ring {
        let mut t = Table::new();
        t.insert("l_kinetic".into(), q(ring.l_kinetic, Quantity::Inductance));
        t.insert("l_geometric".into(), q(ring.l_geometric, Quantity::Inductance));
        root.insert("ring".into(), Value::Table(t));
    }
    if let Some(c) = &rec.calibration {
        let mut t = Table::new();
        t.insert(
            "current_per_flux_quantum".into(),
            q(c.current_per_flux_quantum, Quantity::Current),
        );
        t.insert("flux_offset".into(), q(c.flux_offset, Quantity::Flux));
        root.insert("calibration".into(), Value::Table(t));
    }
    toml::to_string(&root).map_err(|e| Error::Schema(format!("cannot serialize device: {e}")))
}

pub fn save_device(path: &Path, rec: &DeviceRecord) -> Result<()> {
    write_file(path, &device_to_string(rec)?)
}
