//! Device records, delimited data tables, plot tables and result
//! documents.

mod device;
mod plot;
mod table;
mod units;

pub use device::{builtin_device, load_device, parse_device, save_device, device_to_string, DeviceRecord};
pub use plot::{fit_result_table, write_plot_table, PlotColumn, PlotSeries};
pub use table::{
    load_coherence, load_decay, load_deviation, load_spectroscopy, load_table, load_timeline,
    parse_table, Dataset, TableSchema,
};
pub use units::{parse_quantity, Quantity};

use crate::error::{Error, Result};

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
