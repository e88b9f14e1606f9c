//! Configuration, result tables, snapshots and charts.

pub mod config;
pub mod csv;
pub mod plot;
pub mod snapshot;

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{RateFit, SweepResult};

pub use config::{load_config, parse_config, RunConfig};
pub use csv::{read_column, write_sweep_csv};
pub use plot::{emit_plot, PlotSpec, Series};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};

/// Metrics that get a rate fit and a chart after a sweep.
pub const RATE_COLUMNS: [&str; 5] = [
    "residual_v",
    "residual_z",
    "u_diff",
    "duhamel_l2",
    "duhamel_h1",
];

/// Fits of every rate column with at least the minimum number of values.
pub fn sweep_fits(result: &SweepResult) -> Vec<(&'static str, Result<RateFit>)> {
    RATE_COLUMNS
        .iter()
        .filter(|name| !result.column(name).is_empty())
        .map(|&name| (name, result.fit(name)))
        .collect()
}

pub fn format_fits(fits: &[(&str, Result<RateFit>)]) -> String {
    let mut out = String::from("column,slope,intercept,r_squared\n");
    for (name, fit) in fits {
        match fit {
            Ok(f) => out.push_str(&format!(
                "{name},{:.16e},{:.16e},{:.16e}\n",
                f.slope, f.intercept, f.r_squared
            )),
            Err(_) => out.push_str(&format!("{name},,,\n")),
        }
    }
    out
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `sweep.csv`, `fits.csv` and, with `emit_svg`, one log-log chart per rate
/// column. Returns the written paths.
pub fn write_sweep_outputs(
    result: &SweepResult,
    dir: &Path,
    emit_svg: bool,
) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("sweep.csv");
    write_sweep_csv(result, &csv_path)?;
    written.push(csv_path);

    let fits = sweep_fits(result);
    let fits_path = dir.join("fits.csv");
    std::fs::write(&fits_path, format_fits(&fits)).map_err(|e| Error::io(&fits_path, e))?;
    written.push(fits_path);

    if emit_svg {
        for (name, fit) in &fits {
            let title = match fit {
                Ok(f) => format!("{name} (slope {:.3})", f.slope),
                Err(_) => name.to_string(),
            };
            let svg = dir.join(format!("rate_{name}.svg"));
            let dat = emit_plot(
                &[Series::new(*name, result.column(name))],
                &PlotSpec::rate(title, *name),
                &svg,
            )?;
            written.push(svg);
            written.push(dat);
        }
    }
    Ok(written)
}
