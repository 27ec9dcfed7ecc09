use std::fmt::Write as _;
use std::path::Path;

use toml::{Table, Value};

use super::write_file;
use crate::error::{Error, Result};
use crate::fit::FitResult;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotColumn {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

/// Named, unit-annotated columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub columns: Vec<PlotColumn>,
}

impl PlotSeries {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            columns: Vec::new(),
        }
    }

    pub fn column(mut self, name: &str, unit: &str, values: Vec<f64>) -> Self {
        self.columns.push(PlotColumn {
            name: name.to_string(),
            unit: unit.to_string(),
            values,
        });
        self
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::Schema(format!("plot '{}' has no columns", self.label)));
        }
        let n = self.n_rows();
        for c in &self.columns {
            if c.unit.trim().is_empty() {
                return Err(Error::Schema(format!(
                    "plot '{}': column '{}' has no unit",
                    self.label, c.name
                )));
            }
            if c.name.is_empty() || c.name.contains([',', '\n']) || c.unit.contains([',', '\n']) {
                return Err(Error::Schema(format!(
                    "plot '{}': bad column name or unit '{}_{}'",
                    self.label, c.name, c.unit
                )));
            }
            if c.values.len() != n {
                return Err(Error::Schema(format!(
                    "plot '{}': column '{}' has {} rows, expected {n}",
                    self.label,
                    c.name,
                    c.values.len()
                )));
            }
        }
        Ok(())
    }

    /// Comma-separated text: a `# label` line, a `name_unit` header and one
    /// row per sample with shortest round-trip number formatting.
    pub fn to_csv(&self) -> Result<String> {
        self.validate()?;
        let mut out = format!("# {}\n", self.label);
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}_{}", c.name, c.unit))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in 0..self.n_rows() {
            for (k, c) in self.columns.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{}", c.values[r]).expect("writing to a String");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

pub fn write_plot_table(path: &Path, series: &PlotSeries) -> Result<()> {
    write_file(path, &series.to_csv()?)
}

/// Key-value form of a fit result: parameters, standard errors, derived
/// values, diagnostics and warnings.
pub fn fit_result_table(fit: &FitResult) -> Table {
    let mut t = Table::new();
    let mut params = Table::new();
    let mut errors = Table::new();
    for (name, v) in &fit.parameters {
        params.insert(name.clone(), Value::Float(*v));
        errors.insert(
            name.clone(),
            Value::Float(fit.std_error(name).unwrap_or(f64::NAN)),
        );
    }
    t.insert("parameters".into(), Value::Table(params));
    t.insert("std_errors".into(), Value::Table(errors));
    if !fit.derived.is_empty() {
        let derived: Table = fit
            .derived
            .iter()
            .map(|(n, v)| (n.clone(), Value::Float(*v)))
            .collect();
        t.insert("derived".into(), Value::Table(derived));
    }
    let cov: Vec<Value> = fit
        .covariance
        .row_iter()
        .map(|row| Value::Array(row.iter().map(|v| Value::Float(*v)).collect()))
        .collect();
    t.insert("covariance".into(), Value::Array(cov));
    t.insert("residual_rms".into(), Value::Float(fit.residual_rms));
    t.insert("converged".into(), Value::Boolean(fit.converged));
    t.insert("n_iterations".into(), Value::Integer(fit.n_iterations as i64));
    t.insert(
        "warnings".into(),
        Value::Array(fit.warnings.iter().cloned().map(Value::String).collect()),
    );
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_units_and_exact_numbers() {
        let s = PlotSeries::new("f01")
            .column("phi_ext", "rad", vec![0.0, 0.1 + 0.2])
            .column("f01", "GHz", vec![1.0, 2.5]);
        let text = s.to_csv().unwrap();
        assert_eq!(text, "# f01\nphi_ext_rad,f01_GHz\n0,1\n0.30000000000000004,2.5\n");
    }

    #[test]
    fn missing_unit_or_ragged_columns_fail() {
        let s = PlotSeries::new("x").column("a", "", vec![1.0]);
        assert!(s.to_csv().is_err());
        let s = PlotSeries::new("x")
            .column("a", "s", vec![1.0])
            .column("b", "s", vec![1.0, 2.0]);
        assert!(s.to_csv().is_err());
    }
}
