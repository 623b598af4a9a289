//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Build with `wasm-pack build --target web --out-dir www/pkg`.

use cass_core::data::{gen_synthetic, SyntheticSpec};
use cass_core::evaluation::accuracy;
use cass_core::segmentation::{segment, Method, SegmentationConfig};
use cass_core::trace_lasso;
use wasm_bindgen::prelude::*;

/// Rows of `(correlation, Ω(w), ‖w‖₁, ‖w‖₂)`, flattened.
#[wasm_bindgen]
pub fn norm_curve(dim: usize, columns: usize, steps: usize, seed: u64) -> Result<Vec<f64>, String> {
    let curve = trace_lasso::norm_curve(dim, columns, steps, seed).map_err(|e| e.to_string())?;
    Ok(curve
        .iter()
        .flat_map(|p| [p.correlation, p.omega, p.l1, p.l2])
        .collect())
}

/// Result of segmenting one synthetic data set.
#[wasm_bindgen]
pub struct SegmentationView {
    n: usize,
    labels: Vec<u32>,
    truth: Vec<u32>,
    affinity: Vec<f64>,
    coefficients: Vec<f64>,
    accuracy: f64,
    iterations: usize,
}

#[wasm_bindgen]
impl SegmentationView {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }

    #[wasm_bindgen(getter)]
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn labels(&self) -> Vec<u32> {
        self.labels.clone()
    }

    pub fn truth(&self) -> Vec<u32> {
        self.truth.clone()
    }

    /// `n × n` affinity, row-major.
    pub fn affinity(&self) -> Vec<f64> {
        self.affinity.clone()
    }

    /// Coefficients representing point `i` (zero at `i`).
    pub fn coefficients(&self, i: usize) -> Result<Vec<f64>, String> {
        if i >= self.n {
            return Err(format!("point {i} out of range 0..{}", self.n));
        }
        Ok(self.coefficients[i * self.n..(i + 1) * self.n].to_vec())
    }
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn segment_synthetic(
    k: usize,
    dim: usize,
    ambient: usize,
    per: usize,
    sigma: f64,
    correlation: f64,
    method: &str,
    lambda: f64,
    seed: u64,
) -> Result<SegmentationView, String> {
    let method: Method = method.parse().map_err(|e: cass_core::Error| e.to_string())?;
    let spec = SyntheticSpec {
        subspace_dims: vec![dim; k],
        ambient_dim: ambient,
        points_per_subspace: vec![per; k],
        noise_sigma: sigma,
        correlation,
        independent: k * dim <= ambient,
        seed,
    };
    let data = gen_synthetic(&spec).map_err(|e| e.to_string())?;
    let config = SegmentationConfig::new(method, k).with_lambda(lambda).with_seed(seed);
    let seg = segment(&data.x, &config).map_err(|e| e.to_string())?;
    let n = seg.labels.len();
    let a = seg.affinity.matrix();
    let w = &seg.coefficients.w;
    Ok(SegmentationView {
        n,
        accuracy: accuracy(&seg.labels, &data.labels).map_err(|e| e.to_string())?,
        iterations: seg.coefficients.total_iterations(),
        labels: seg.labels.iter().map(|&l| l as u32).collect(),
        truth: data.labels.iter().map(|&l| l as u32).collect(),
        affinity: (0..n * n).map(|idx| a[(idx / n, idx % n)]).collect(),
        coefficients: (0..n * n).map(|idx| w[(idx % n, idx / n)]).collect(),
    })
}
