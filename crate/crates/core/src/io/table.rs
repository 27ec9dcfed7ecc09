use std::path::Path;

use super::read_file;
use crate::error::{Error, Result};
use crate::fit::{CoherencePoint, ControlKind, DecayTrace, SpectroscopyDataset, SpectroscopyPoint};
use crate::fluxtrap::{ProtocolSample, ProtocolTimeline};

/// Column layouts of the delimited tables. Headers are `name_unit` tokens.
///
/// | schema       | columns                                                    |
/// |--------------|------------------------------------------------------------|
/// | spectroscopy | control_A or control_rad, transition, freq_GHz[, sigma_GHz] |
/// | decay        | t_us, p_e                                                  |
/// | timeline     | t_s, temp_K, coil_A                                        |
/// | deviation    | i_prebias_A, phi_trap_rad                                  |
/// | coherence    | delta_phi_rad, t1_us, t2e_us, t2r_us                       |
///
/// Currents may also be given in mA, uA or nA; they are converted to A.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSchema {
    Spectroscopy,
    Decay,
    Timeline,
    Deviation,
    Coherence,
}

impl std::str::FromStr for TableSchema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "spectroscopy" => Self::Spectroscopy,
            "decay" => Self::Decay,
            "timeline" => Self::Timeline,
            "deviation" => Self::Deviation,
            "coherence" => Self::Coherence,
            _ => return Err(Error::invalid(format!("unknown table schema '{s}'"))),
        })
    }
}

/// A parsed table. Timelines come without T_c; see [`load_timeline`].
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Spectroscopy(SpectroscopyDataset),
    Decay(DecayTrace),
    Timeline(Vec<ProtocolSample>),
    Deviation(Vec<(f64, f64)>),
    Coherence(Vec<CoherencePoint>),
}

const CURRENT: &[(&str, f64)] = &[("A", 1.0), ("mA", 1e-3), ("uA", 1e-6), ("nA", 1e-9)];

struct Column {
    name: &'static str,
    /// Accepted unit suffixes with factors to the stored unit; empty for a
    /// dimensionless column written without a suffix.
    units: &'static [(&'static str, f64)],
    optional: bool,
}

const fn col(name: &'static str, units: &'static [(&'static str, f64)]) -> Column {
    Column {
        name,
        units,
        optional: false,
    }
}

impl TableSchema {
    fn columns(self) -> Vec<Column> {
        match self {
            // the control column is matched separately; see `control_column`
            Self::Spectroscopy => vec![
                col("control", &[]),
                col("transition", &[]),
                col("freq", &[("GHz", 1.0)]),
                Column {
                    optional: true,
                    ..col("sigma", &[("GHz", 1.0)])
                },
            ],
            Self::Decay => vec![col("t", &[("us", 1.0)]), col("p_e", &[])],
            Self::Timeline => vec![
                col("t", &[("s", 1.0)]),
                col("temp", &[("K", 1.0)]),
                col("coil", CURRENT),
            ],
            Self::Deviation => vec![col("i_prebias", CURRENT), col("phi_trap", &[("rad", 1.0)])],
            Self::Coherence => vec![
                col("delta_phi", &[("rad", 1.0)]),
                col("t1", &[("us", 1.0)]),
                col("t2e", &[("us", 1.0)]),
                col("t2r", &[("us", 1.0)]),
            ],
        }
    }
}

fn expected_token(c: &Column) -> String {
    if c.units.is_empty() {
        c.name.to_string()
    } else {
        let units: Vec<&str> = c.units.iter().map(|u| u.0).collect();
        format!("{}_{}", c.name, units.join("|"))
    }
}

/// Factor to the stored unit for header token `h` in column `c`.
fn match_header(c: &Column, h: &str) -> Result<f64> {
    if c.units.is_empty() {
        if h == c.name {
            return Ok(1.0);
        }
    } else if let Some(unit) = h.strip_prefix(c.name).and_then(|r| r.strip_prefix('_')) {
        return c
            .units
            .iter()
            .find(|u| u.0 == unit)
            .map(|u| u.1)
            .ok_or_else(|| Error::UnitMismatch {
                field: c.name.to_string(),
                expected: c.units.iter().map(|u| u.0).collect::<Vec<_>>().join("|"),
                found: unit.to_string(),
            });
    }
    Err(Error::HeaderMismatch {
        expected: expected_token(c),
        found: h.to_string(),
    })
}

fn control_column(h: &str) -> Result<(ControlKind, f64)> {
    if h == "control_rad" {
        return Ok((ControlKind::Phase, 1.0));
    }
    if let Some(unit) = h.strip_prefix("control_") {
        return CURRENT
            .iter()
            .find(|u| u.0 == unit)
            .map(|u| (ControlKind::Current, u.1))
            .ok_or_else(|| Error::UnitMismatch {
                field: "control".into(),
                expected: "A|mA|uA|nA|rad".into(),
                found: unit.to_string(),
            });
    }
    Err(Error::HeaderMismatch {
        expected: "control_A|control_rad".into(),
        found: h.to_string(),
    })
}

struct RawTable {
    header: Vec<String>,
    /// (1-based data row, cells)
    rows: Vec<(usize, Vec<String>)>,
}

/// Comma- or tab-separated text with `#` comments; the delimiter is taken
/// from the header line.
fn split_table(text: &str) -> Result<RawTable> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or(Error::EmptyInput("table has no header row"))?;
    let delimiter = if first.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Schema(format!("row {}: {e}", k + 1)))?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::Schema(format!(
                "row {}: {} cells for {} columns",
                k + 1,
                rec.len(),
                header.len()
            )));
        }
        rows.push((k + 1, rec.iter().map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("table has no data rows"));
    }
    Ok(RawTable { header, rows })
}

fn number(row: usize, column: &str, cell: &str) -> Result<f64> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::NonNumeric {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        })
}

/// Parses table text against `schema`. Row order is preserved.
pub fn parse_table(text: &str, schema: TableSchema) -> Result<Dataset> {
    let raw = split_table(text)?;
    let columns = schema.columns();
    let required = columns.iter().filter(|c| !c.optional).count();
    if raw.header.len() < required || raw.header.len() > columns.len() {
        let expected: Vec<String> = columns.iter().map(expected_token).collect();
        return Err(Error::HeaderMismatch {
            expected: expected.join(","),
            found: raw.header.join(","),
        });
    }
    let mut factors = Vec::with_capacity(raw.header.len());
    let mut control_kind = ControlKind::Current;
    for (k, h) in raw.header.iter().enumerate() {
        if schema == TableSchema::Spectroscopy && k == 0 {
            let (kind, f) = control_column(h)?;
            control_kind = kind;
            factors.push(f);
        } else {
            factors.push(match_header(&columns[k], h)?);
        }
    }
    let mut values = Vec::with_capacity(raw.rows.len());
    for (row, cells) in &raw.rows {
        let v = cells
            .iter()
            .zip(&raw.header)
            .zip(&factors)
            .map(|((c, h), f)| number(*row, h, c).map(|x| if *f == 1.0 { x } else { x * f }))
            .collect::<Result<Vec<f64>>>()?;
        values.push((*row, v));
    }

    Ok(match schema {
        TableSchema::Spectroscopy => {
            let points = values
                .iter()
                .map(|(row, v)| {
                    let transition = match v[1] {
                        1.0 => 1,
                        2.0 => 2,
                        _ => {
                            return Err(Error::Schema(format!(
                                "row {row}: transition must be 1 or 2, got {}",
                                v[1]
                            )))
                        }
                    };
                    Ok(SpectroscopyPoint {
                        control: v[0],
                        transition,
                        frequency: v[2],
                        sigma: v.get(3).copied(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Dataset::Spectroscopy(SpectroscopyDataset::new(control_kind, points)?)
        }
        TableSchema::Decay => {
            Dataset::Decay(DecayTrace::new(values.iter().map(|(_, v)| (v[0], v[1])).collect())?)
        }
        TableSchema::Timeline => Dataset::Timeline(
            values
                .iter()
                .map(|(_, v)| ProtocolSample {
                    time: v[0],
                    temperature: v[1],
                    coil_current: v[2],
                })
                .collect(),
        ),
        TableSchema::Deviation => Dataset::Deviation(values.iter().map(|(_, v)| (v[0], v[1])).collect()),
        TableSchema::Coherence => Dataset::Coherence(
            values
                .iter()
                .map(|(_, v)| CoherencePoint {
                    delta_phi_ext: v[0],
                    t1: v[1],
                    t2e: v[2],
                    t2r: v[3],
                })
                .collect(),
        ),
    })
}

pub fn load_table(path: &Path, schema: TableSchema) -> Result<Dataset> {
    parse_table(&read_file(path)?, schema)
}

pub fn load_spectroscopy(path: &Path) -> Result<SpectroscopyDataset> {
    match load_table(path, TableSchema::Spectroscopy)? {
        Dataset::Spectroscopy(d) => Ok(d),
        _ => unreachable!("schema fixes the variant"),
    }
}

pub fn load_decay(path: &Path) -> Result<DecayTrace> {
    match load_table(path, TableSchema::Decay)? {
        Dataset::Decay(d) => Ok(d),
        _ => unreachable!("schema fixes the variant"),
    }
}

/// Timeline table with the ring's transition temperature supplied by the
/// caller, kelvin.
pub fn load_timeline(path: &Path, t_c: f64) -> Result<ProtocolTimeline> {
    match load_table(path, TableSchema::Timeline)? {
        Dataset::Timeline(s) => ProtocolTimeline::new(s, t_c),
        _ => unreachable!("schema fixes the variant"),
    }
}

pub fn load_deviation(path: &Path) -> Result<Vec<(f64, f64)>> {
    match load_table(path, TableSchema::Deviation)? {
        Dataset::Deviation(d) => Ok(d),
        _ => unreachable!("schema fixes the variant"),
    }
}

pub fn load_coherence(path: &Path) -> Result<Vec<CoherencePoint>> {
    match load_table(path, TableSchema::Coherence)? {
        Dataset::Coherence(d) => Ok(d),
        _ => unreachable!("schema fixes the variant"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_table_of_fifty_rows() {
        let mut text = String::from("# synthetic\nt_us,p_e\n");
        for k in 0..50 {
            text.push_str(&format!("{},{}\n", k as f64 * 2.0, 0.3 + 0.6 * (-0.05 * k as f64 * 2.0).exp()));
        }
        match parse_table(&text, TableSchema::Decay).unwrap() {
            Dataset::Decay(d) => {
                assert_eq!(d.samples.len(), 50);
                assert_eq!(d.samples[3].0, 6.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn frequency_in_mhz_is_a_unit_mismatch() {
        let text = "control_A,transition,freq_MHz\n0,1,880\n";
        let err = parse_table(text, TableSchema::Spectroscopy).unwrap_err();
        assert!(matches!(err, Error::UnitMismatch { ref found, .. } if found == "MHz"), "{err}");
    }

    #[test]
    fn timeline_in_nanoamps_with_tabs() {
        let text = "t_s\ttemp_K\tcoil_nA\n0\t1.5\t0\n10\t1.0\t500\n20\t0.5\t500\n";
        match parse_table(text, TableSchema::Timeline).unwrap() {
            Dataset::Timeline(s) => {
                assert_eq!(s.len(), 3);
                assert!((s[1].coil_current - 500e-9).abs() < 1e-20);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_location() {
        let err = parse_table("t_us,p_e\n0,0.9\n1,abc\n", TableSchema::Decay).unwrap_err();
        match err {
            Error::NonNumeric { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "p_e", "abc"));
            }
            other => panic!("{other}"),
        }
        let err = parse_table("time_us,p_e\n0,0.9\n", TableSchema::Decay).unwrap_err();
        assert!(matches!(err, Error::HeaderMismatch { .. }));
    }

    #[test]
    fn spectroscopy_with_sigma_and_phase_control() {
        let text = "control_rad,transition,freq_GHz,sigma_GHz\n0.1,1,0.9,0.001\n0.1,2,4.5,0.002\n";
        match parse_table(text, TableSchema::Spectroscopy).unwrap() {
            Dataset::Spectroscopy(d) => {
                assert_eq!(d.control_kind, ControlKind::Phase);
                assert_eq!(d.points[1].sigma, Some(0.002));
                assert_eq!(d.points[1].transition, 2);
            }
            other => panic!("{other:?}"),
        }
        let bad = "control_A,transition,freq_GHz\n0,3,0.9\n";
        assert!(parse_table(bad, TableSchema::Spectroscopy).is_err());
    }
}
