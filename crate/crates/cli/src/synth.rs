use std::path::PathBuf;

use cass_core::data::{gen_synthetic, SyntheticSpec};

use crate::error::CliResult;
use crate::output::{labels_csv, matrix_csv, write_file};
use crate::settings::{bool_value, Settings};
use crate::{flag, opt, path, SynthArgs};

pub fn run(a: &SynthArgs) -> CliResult<()> {
    let mut s = Settings::new(
        a.config.as_deref(),
        &[
            ("k", opt(&a.k)),
            ("dim", opt(&a.dim)),
            ("ambient", opt(&a.ambient)),
            ("per", opt(&a.per)),
            ("sigma", opt(&a.sigma)),
            ("correlation", opt(&a.correlation)),
            ("dependent", flag(a.dependent)),
            ("seed", opt(&a.seed)),
            ("output", path(&a.output)),
            ("labels", path(&a.labels)),
        ],
    )?;
    let k: usize = s.req("k")?;
    let dim: usize = s.req("dim")?;
    let ambient: usize = s.req("ambient")?;
    let per: usize = s.req("per")?;
    let sigma: f64 = s.get("sigma", 0.0)?;
    let correlation: f64 = s.get("correlation", 0.0)?;
    let dependent = bool_value("dependent", &s.get("dependent", "false".to_string())?)?;
    let seed: u64 = s.get("seed", 0)?;
    let output: PathBuf = s.get("output", "data.csv".to_string())?.into();
    let labels_path: PathBuf = s.get("labels", "labels.csv".to_string())?.into();

    let spec = SyntheticSpec {
        subspace_dims: vec![dim; k],
        ambient_dim: ambient,
        points_per_subspace: vec![per; k],
        noise_sigma: sigma,
        correlation,
        independent: !dependent,
        seed,
    };
    let data = gen_synthetic(&spec)?;
    write_file(&output, &matrix_csv(s.effective(), &data.x))?;
    write_file(&labels_path, &labels_csv(s.effective(), &data.labels))?;
    println!("{}", data.source);
    Ok(())
}
