//! Effective run configuration: config file values overridden by flags,
//! with every value actually used recorded for echoing into outputs.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use cass_core::config::KeyValueConfig;
use cass_core::segmentation::{Method, SegmentationConfig};

use crate::error::{CliError, CliResult};

pub struct Settings {
    source: KeyValueConfig,
    effective: KeyValueConfig,
}

impl Settings {
    pub fn new(config: Option<&Path>, overrides: &[(&str, Option<String>)]) -> CliResult<Self> {
        let mut source = match config {
            Some(path) => KeyValueConfig::load(path).map_err(CliError::from)?,
            None => KeyValueConfig::default(),
        };
        for (key, value) in overrides {
            if let Some(v) = value {
                source.set(key, v.clone());
            }
        }
        Ok(Settings {
            source,
            effective: KeyValueConfig::default(),
        })
    }

    pub fn source(&self) -> &KeyValueConfig {
        &self.source
    }

    pub fn effective(&self) -> &KeyValueConfig {
        &self.effective
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.effective.set(key, value.to_string());
    }

    pub fn opt<T>(&mut self, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some(raw) = self.source.get(key).map(str::to_owned) else {
            return Ok(None);
        };
        let v = raw
            .parse::<T>()
            .map_err(|e| CliError::usage(format!("{key} = {raw:?}: {e}")))?;
        self.record(key, raw);
        Ok(Some(v))
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, &default);
                Ok(default)
            }
        }
    }

    pub fn req<T>(&mut self, key: &str) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.opt(key)?
            .ok_or_else(|| CliError::usage(format!("missing required setting `{key}`")))
    }

    pub fn list<T>(&mut self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some(items) = self.source.get_list(key) else {
            return Ok(None);
        };
        let parsed = items
            .iter()
            .map(|s| s.parse::<T>().map_err(|e| CliError::usage(format!("{key}: {s:?}: {e}"))))
            .collect::<CliResult<Vec<T>>>()?;
        self.record(key, items.join(", "));
        Ok(Some(parsed))
    }

    /// Pipeline settings shared by `segment` and `benchmark`.
    pub fn segmentation(&mut self, method: Method, k: usize) -> CliResult<SegmentationConfig> {
        let d = SegmentationConfig::new(method, k);
        let mut cfg = SegmentationConfig {
            lambda: self.get("lambda", d.lambda)?,
            seed: self.get("seed", d.seed)?,
            ssc_tol: self.get("ssc_tol", d.ssc_tol)?,
            ssc_max_iter: self.get("ssc_max_iter", d.ssc_max_iter)?,
            lrr_tol: self.get("lrr_tol", d.lrr_tol)?,
            lrr_max_iter: self.get("lrr_max_iter", d.lrr_max_iter)?,
            knn_neighbors: self.get("knn_neighbors", d.knn_neighbors)?,
            kmeans_restarts: self.get("kmeans_restarts", d.kmeans_restarts)?,
            kmeans_max_iter: self.get("kmeans_max_iter", d.kmeans_max_iter)?,
            ..d
        };
        cfg.adm.mu0 = self.get("mu0", d.adm.mu0)?;
        cfg.adm.rho = self.get("rho", d.adm.rho)?;
        cfg.adm.mu_max = self.get("mu_max", d.adm.mu_max)?;
        cfg.adm.eps = self.get("eps", d.adm.eps)?;
        cfg.adm.max_iter = self.get("max_iter", d.adm.max_iter)?;
        Ok(cfg)
    }
}

pub fn bool_value(key: &str, raw: &str) -> CliResult<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::usage(format!("{key} = {raw:?}: expected true or false"))),
    }
}
