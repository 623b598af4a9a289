//! Data set loading shared by `segment` and `benchmark`.

use std::path::PathBuf;

use cass_core::data::{self, gen_synthetic, CsvOptions, LabeledData, Orientation, SyntheticSpec};
use cass_core::numerics::pca_project;
use cass_core::DMatrix;

use crate::error::{CliError, CliResult};
use crate::settings::{bool_value, Settings};

pub struct Loaded {
    pub x: DMatrix<f64>,
    pub labels: Option<Vec<usize>>,
    pub source: String,
}

/// Loads the data set described by the keys under `prefix`.
///
/// `format` is `csv` (keys `input`, `labels`, `orientation`, `header`),
/// `idx` (`input` images, `labels`) or `synth` (`k`, `dim`, `ambient`,
/// `per`, `sigma`, `correlation`, `dependent`, `data_seed`). Optional
/// `per_class` and `pca_dim` apply afterwards, in that order.
pub fn load(s: &mut Settings, prefix: &str) -> CliResult<Loaded> {
    let key = |k: &str| format!("{prefix}{k}");
    let format: String = s.get(&key("format"), "csv".to_string())?;
    let mut loaded = match format.as_str() {
        "csv" => {
            let input: PathBuf = s.req::<String>(&key("input"))?.into();
            let orientation = match s.get(&key("orientation"), "rows".to_string())?.as_str() {
                "rows" => Orientation::SamplesAsRows,
                "columns" => Orientation::SamplesAsColumns,
                other => return Err(CliError::usage(format!("orientation must be rows or columns, got {other:?}"))),
            };
            let has_header = bool_value("header", &s.get(&key("header"), "false".to_string())?)?;
            let x = data::load_csv(&input, CsvOptions { orientation, has_header })?;
            let labels = match s.opt::<String>(&key("labels"))? {
                Some(p) => Some(data::load_labels(&p)?),
                None => None,
            };
            Loaded {
                x,
                labels,
                source: format!("csv {}", input.display()),
            }
        }
        "idx" => {
            let images: String = s.req(&key("input"))?;
            let labels: String = s.req(&key("labels"))?;
            let d = data::load_idx(&images, &labels)?;
            Loaded {
                x: d.x,
                labels: Some(d.labels),
                source: d.source,
            }
        }
        "synth" => {
            let k: usize = s.req(&key("k"))?;
            let dim: usize = s.req(&key("dim"))?;
            let per: usize = s.req(&key("per"))?;
            let spec = SyntheticSpec {
                subspace_dims: vec![dim; k],
                ambient_dim: s.req(&key("ambient"))?,
                points_per_subspace: vec![per; k],
                noise_sigma: s.get(&key("sigma"), 0.0)?,
                correlation: s.get(&key("correlation"), 0.0)?,
                independent: !bool_value("dependent", &s.get(&key("dependent"), "false".to_string())?)?,
                seed: s.get(&key("data_seed"), 0)?,
            };
            let d = gen_synthetic(&spec)?;
            Loaded {
                x: d.x,
                labels: Some(d.labels),
                source: d.source,
            }
        }
        other => return Err(CliError::usage(format!("format must be csv, idx or synth, got {other:?}"))),
    };

    if let Some(labels) = &loaded.labels {
        if labels.len() != loaded.x.ncols() {
            return Err(CliError::usage(format!(
                "{} samples but {} labels",
                loaded.x.ncols(),
                labels.len()
            )));
        }
    }
    if let Some(m) = s.opt::<usize>(&key("per_class"))? {
        let labels = loaded
            .labels
            .take()
            .ok_or_else(|| CliError::usage("per_class needs ground-truth labels"))?;
        let d = data::first_m_per_class(&LabeledData::new(loaded.x, labels, loaded.source)?, m)?;
        loaded = Loaded {
            x: d.x,
            labels: Some(d.labels),
            source: d.source,
        };
    }
    if let Some(p) = s.opt::<usize>(&key("pca_dim"))? {
        loaded.x = pca_project(&loaded.x, p)?;
        loaded.source = format!("{} | pca={p}", loaded.source);
    }
    Ok(loaded)
}
