//! Datasets: synthetic unions of subspaces, IDX and CSV ingestion, and the
//! preprocessing steps of the evaluation protocol.

use std::fs;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::numerics::{self, check_matrix, normalize_columns};
use crate::{Error, Result};

/// Samples (columns of `x`) with ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub x: DMatrix<f64>,
    /// Contiguous from 0.
    pub labels: Vec<usize>,
    pub source: String,
}

impl LabeledData {
    /// Validates the pairing and relabels classes to `0..k` in increasing
    /// order of the original label values.
    pub fn new(x: DMatrix<f64>, labels: Vec<usize>, source: impl Into<String>) -> Result<Self> {
        check_matrix(&x)?;
        if labels.len() != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples but {} labels",
                x.ncols(),
                labels.len()
            )));
        }
        Ok(LabeledData {
            x,
            labels: contiguous_labels(&labels),
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// PCA-projects the samples to `p` dimensions.
    pub fn project(&self, p: usize) -> Result<Self> {
        Ok(LabeledData {
            x: numerics::pca_project(&self.x, p)?,
            labels: self.labels.clone(),
            source: format!("{} | pca={p}", self.source),
        })
    }

    /// Keeps the given sample indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let cols: Vec<DVector<f64>> = indices.iter().map(|&i| self.x.column(i).into_owned()).collect();
        LabeledData {
            x: DMatrix::from_columns(&cols),
            labels: contiguous_labels(&indices.iter().map(|&i| self.labels[i]).collect::<Vec<_>>()),
            source: self.source.clone(),
        }
    }
}

/// Maps arbitrary label values onto `0..k`, preserving their order.
pub fn contiguous_labels(labels: &[usize]) -> Vec<usize> {
    let mut values: Vec<usize> = labels.to_vec();
    values.sort_unstable();
    values.dedup();
    labels
        .iter()
        .map(|l| values.binary_search(l).expect("value present"))
        .collect()
}

/// Parameters of a synthetic union of subspaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub subspace_dims: Vec<usize>,
    pub ambient_dim: usize,
    pub points_per_subspace: Vec<usize>,
    /// Standard deviation of additive Gaussian noise (before normalization).
    pub noise_sigma: f64,
    /// Within-subspace correlation in `[0, 1)`: coefficients are
    /// `√ρ·c₀ + √(1−ρ)·g` with `c₀` shared by every point of a subspace.
    pub correlation: f64,
    /// Draw bases in disjoint coordinate blocks followed by one random
    /// rotation, which makes the subspaces exactly independent.
    pub independent: bool,
    pub seed: u64,
}

impl SyntheticSpec {
    /// `k` independent subspaces of equal dimension and size.
    pub fn uniform(k: usize, dim: usize, ambient: usize, per: usize, sigma: f64, seed: u64) -> Self {
        SyntheticSpec {
            subspace_dims: vec![dim; k],
            ambient_dim: ambient,
            points_per_subspace: vec![per; k],
            noise_sigma: sigma,
            correlation: 0.0,
            independent: true,
            seed,
        }
    }

    pub fn k(&self) -> usize {
        self.subspace_dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.subspace_dims.len();
        if k == 0 {
            return Err(Error::invalid("at least one subspace is required"));
        }
        if self.points_per_subspace.len() != k {
            return Err(Error::invalid(format!(
                "{k} subspace dimensions but {} point counts",
                self.points_per_subspace.len()
            )));
        }
        if self.ambient_dim == 0 {
            return Err(Error::invalid("ambient dimension must be positive"));
        }
        if let Some(r) = self.subspace_dims.iter().find(|&&r| r == 0 || r > self.ambient_dim) {
            return Err(Error::invalid(format!(
                "subspace dimension {r} outside 1..={}",
                self.ambient_dim
            )));
        }
        if self.points_per_subspace.contains(&0) {
            return Err(Error::invalid("every subspace needs at least one point"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return Err(Error::invalid(format!("correlation must be in [0, 1), got {}", self.correlation)));
        }
        let total: usize = self.subspace_dims.iter().sum();
        if self.independent && total > self.ambient_dim {
            return Err(Error::invalid(format!(
                "independent subspaces need sum of dimensions ({total}) <= ambient dimension ({})",
                self.ambient_dim
            )));
        }
        Ok(())
    }

    pub fn provenance(&self) -> String {
        format!(
            "synthetic dims={:?} ambient={} per={:?} sigma={} correlation={} independent={} seed={}",
            self.subspace_dims,
            self.ambient_dim,
            self.points_per_subspace,
            self.noise_sigma,
            self.correlation,
            self.independent,
            self.seed
        )
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Uniformly random `d × d` orthogonal matrix.
fn random_rotation(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian_matrix(d, d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (i, mut col) in q.column_iter_mut().enumerate() {
        if r[(i, i)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// Draws points from a union of subspaces; columns are unit-normalized last.
/// Output is bit-identical for equal specs.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<LabeledData> {
    spec.validate()?;
    let d = spec.ambient_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rotation = spec.independent.then(|| random_rotation(d, &mut rng));

    let n: usize = spec.points_per_subspace.iter().sum();
    let mut x = DMatrix::<f64>::zeros(d, n);
    let mut labels = Vec::with_capacity(n);
    let mut offset = 0;
    let mut col = 0;
    let shared = spec.correlation.sqrt();
    let own = (1.0 - spec.correlation).sqrt();
    for (i, (&r, &count)) in spec.subspace_dims.iter().zip(&spec.points_per_subspace).enumerate() {
        let basis = match &rotation {
            Some(q) => {
                let b = q.columns(offset, r).into_owned();
                offset += r;
                b
            }
            None => gaussian_matrix(d, r, &mut rng).qr().q(),
        };
        let anchor = gaussian_matrix(r, 1, &mut rng);
        let coeffs = gaussian_matrix(r, count, &mut rng);
        for j in 0..count {
            let c = shared * anchor.column(0) + own * coeffs.column(j);
            x.set_column(col, &(&basis * c));
            labels.push(i);
            col += 1;
        }
    }
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::invalid(e.to_string()))?;
        x.apply(|v| *v += normal.sample(&mut rng));
    }
    let x = normalize_columns(&x)?;
    LabeledData::new(x, labels, spec.provenance())
}

/// Adds i.i.d. `N(0, σ²)` noise, seeded.
pub fn add_noise(x: &DMatrix<f64>, sigma: f64, seed: u64) -> Result<DMatrix<f64>> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(x.map(|v| v + normal.sample(&mut rng)))
}

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize, path: &Path) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Truncated {
            path: path.to_path_buf(),
            expected: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let found = be_u32(bytes, 0, path)?;
    if found != expected {
        return Err(Error::WrongMagic {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    Ok(())
}

/// Parses an IDX3 image file into a `(rows·cols) × count` matrix scaled to `[0, 1]`.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<DMatrix<f64>> {
    check_magic(bytes, IDX_IMAGES_MAGIC, path)?;
    let count = be_u32(bytes, 4, path)? as usize;
    let rows = be_u32(bytes, 8, path)? as usize;
    let cols = be_u32(bytes, 12, path)? as usize;
    let pixels = rows * cols;
    let expected = 16 + count * pixels;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found: bytes.len(),
        });
    }
    // one image per column, pixels in row-major order
    Ok(DMatrix::from_column_slice(
        pixels,
        count,
        &bytes[16..expected].iter().map(|&b| b as f64 / 255.0).collect::<Vec<_>>(),
    ))
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<usize>> {
    check_magic(bytes, IDX_LABELS_MAGIC, path)?;
    let count = be_u32(bytes, 4, path)? as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found: bytes.len(),
        });
    }
    Ok(bytes[8..expected].iter().map(|&b| b as usize).collect())
}

/// Loads an IDX image/label pair (MNIST layout).
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledData> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let image_bytes = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let label_bytes = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let x = parse_idx_images(&image_bytes, images_path)?;
    let labels = parse_idx_labels(&label_bytes, labels_path)?;
    if x.ncols() != labels.len() {
        return Err(Error::CountMismatch {
            images: x.ncols(),
            labels: labels.len(),
        });
    }
    let source = format!("idx images={} labels={}", images_path.display(), labels_path.display());
    LabeledData::new(x, labels, source)
}

/// How samples are laid out in a CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Orientation {
    /// One sample per row (transposed into columns on load).
    #[default]
    SamplesAsRows,
    /// One sample per column.
    SamplesAsColumns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsvOptions {
    pub orientation: Orientation,
    /// Skip the first non-comment row.
    pub has_header: bool,
}

/// Reads a numeric CSV into a `d × n` matrix. Lines starting with `#` are
/// comments. Error locations are 1-based `(line, field)`.
pub fn read_csv_matrix<R: Read>(reader: R, options: CsvOptions) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row: line,
                expected,
                found: record.len(),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::NonNumeric {
                row: line,
                col: j + 1,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    row: line,
                    col: j + 1,
                    value: field.to_string(),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let width = width.unwrap_or(0);
    if rows == 0 || width == 0 {
        return Err(Error::EmptyMatrix { rows, cols: width });
    }
    let file_matrix = DMatrix::from_row_slice(rows, width, &values);
    Ok(match options.orientation {
        Orientation::SamplesAsRows => file_matrix.transpose(),
        Orientation::SamplesAsColumns => file_matrix,
    })
}

pub fn load_csv(path: impl AsRef<Path>, options: CsvOptions) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_matrix(file, options)
}

/// Reads labels from a CSV with either one `label` column or `index,label`
/// rows. A non-numeric first row is treated as a header.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or("").trim();
        match field.parse::<usize>() {
            Ok(v) => labels.push(v),
            Err(_) if first => {}
            Err(_) => {
                return Err(Error::NonNumeric {
                    row: i + 1,
                    col: line.split(',').count(),
                    value: field.to_string(),
                })
            }
        }
        first = false;
    }
    Ok(labels)
}

/// Keeps the first `m` samples of every class, preserving the original order.
pub fn first_m_per_class(data: &LabeledData, m: usize) -> Result<LabeledData> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let k = data.num_classes();
    let mut counts = vec![0usize; k];
    for &l in &data.labels {
        counts[l] += 1;
    }
    if let Some((class, &available)) = counts.iter().enumerate().find(|(_, &c)| c < m) {
        return Err(Error::ClassTooSmall {
            class,
            available,
            requested: m,
        });
    }
    let mut taken = vec![0usize; k];
    let mut keep = Vec::with_capacity(m * k);
    for (i, &l) in data.labels.iter().enumerate() {
        if taken[l] < m {
            taken[l] += 1;
            keep.push(i);
        }
    }
    let mut out = data.select(&keep);
    out.source = format!("{} | first {m} per class", data.source);
    Ok(out)
}
