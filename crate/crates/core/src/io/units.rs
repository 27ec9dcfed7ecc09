use crate::error::{Error, Result};

/// Physical dimension of a stored quantity with the accepted unit
/// suffixes and their factors to the stored unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Stored in GHz.
    FrequencyGhz,
    /// Stored in MHz.
    FrequencyMhz,
    /// Stored in henry.
    Inductance,
    /// Stored in ampere.
    Current,
    /// Stored in flux quanta.
    Flux,
}

impl Quantity {
    pub fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Quantity::FrequencyGhz => &[("GHz", 1.0), ("MHz", 1e-3), ("kHz", 1e-6), ("Hz", 1e-9)],
            Quantity::FrequencyMhz => &[("MHz", 1.0), ("GHz", 1e3), ("kHz", 1e-3), ("Hz", 1e-6)],
            Quantity::Inductance => &[("H", 1.0), ("uH", 1e-6), ("nH", 1e-9), ("pH", 1e-12)],
            Quantity::Current => &[("A", 1.0), ("mA", 1e-3), ("uA", 1e-6), ("nA", 1e-9)],
            Quantity::Flux => &[("Phi0", 1.0)],
        }
    }

    /// Suffix written when saving.
    pub fn stored_unit(self) -> &'static str {
        self.units()[0].0
    }

    fn expected(self) -> String {
        self.units().iter().map(|u| u.0).collect::<Vec<_>>().join("|")
    }
}

/// Parses "<number> <unit>" into the stored unit of `quantity`.
/// Values given in the stored unit are returned bit-exact.
pub fn parse_quantity(field: &str, text: &str, quantity: Quantity) -> Result<f64> {
    let mut parts = text.split_whitespace();
    let (Some(num), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::Schema(format!(
            "field '{field}': expected '<number> <unit>', got '{text}'"
        )));
    };
    let value: f64 = num.parse().map_err(|_| {
        Error::Schema(format!("field '{field}': '{num}' is not a number"))
    })?;
    if !value.is_finite() {
        return Err(Error::Schema(format!("field '{field}': value must be finite")));
    }
    let factor = quantity
        .units()
        .iter()
        .find(|u| u.0 == unit)
        .map(|u| u.1)
        .ok_or_else(|| Error::UnitMismatch {
            field: field.to_string(),
            expected: quantity.expected(),
            found: unit.to_string(),
        })?;
    Ok(if factor == 1.0 { value } else { value * factor })
}

pub(crate) fn format_quantity(value: f64, quantity: Quantity) -> String {
    format!("{value} {}", quantity.stored_unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_units() {
        assert_eq!(parse_quantity("f", "3.54 GHz", Quantity::FrequencyGhz).unwrap(), 3.54);
        assert!((parse_quantity("f", "7988 MHz", Quantity::FrequencyGhz).unwrap() - 7.988).abs() < 1e-12);
        assert_eq!(parse_quantity("i", "540 nA", Quantity::Current).unwrap(), 540.0 * 1e-9);
        assert!(matches!(
            parse_quantity("f", "3.54 mA", Quantity::FrequencyGhz),
            Err(Error::UnitMismatch { .. })
        ));
        assert!(parse_quantity("f", "3.54", Quantity::FrequencyGhz).is_err());
    }

    #[test]
    fn format_round_trips() {
        for v in [0.1 + 0.2, 7.988, 1e-300, 540e-9] {
            let s = format_quantity(v, Quantity::Current);
            assert_eq!(parse_quantity("x", &s, Quantity::Current).unwrap(), v);
        }
    }
}
