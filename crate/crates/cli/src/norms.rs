use std::fmt::Write as _;
use std::path::PathBuf;

use cass_core::trace_lasso::norm_curve;

use crate::error::CliResult;
use crate::output::{config_header, write_file};
use crate::settings::Settings;
use crate::{opt, path, NormsArgs};

pub fn run(a: &NormsArgs) -> CliResult<()> {
    let mut s = Settings::new(
        a.config.as_deref(),
        &[
            ("dim", opt(&a.dim)),
            ("columns", opt(&a.columns)),
            ("steps", opt(&a.steps)),
            ("seed", opt(&a.seed)),
            ("output", path(&a.output)),
        ],
    )?;
    let dim: usize = s.get("dim", 10)?;
    let columns: usize = s.get("columns", 5)?;
    let steps: usize = s.get("steps", 11)?;
    let seed: u64 = s.get("seed", 0)?;
    let output: PathBuf = s.get("output", "norms.csv".to_string())?.into();
    let curve = norm_curve(dim, columns, steps, seed)?;

    let mut out = config_header(s.effective());
    out.push_str("correlation,omega,l1,l2\n");
    for p in curve {
        writeln!(out, "{},{},{},{}", p.correlation, p.omega, p.l1, p.l2).unwrap();
    }
    write_file(&output, &out)
}
