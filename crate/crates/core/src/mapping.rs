//! Orthogonal alignment of a source embedding space onto a target space.
//!
//! Given row-aligned dictionary matrices `X` (source) and `Z` (target), the
//! orthogonal `W` maximizing `trace(Wᵀ Xᵀ Z)` (equivalently minimizing
//! `‖XW − Z‖`) is `U Vᵀ`, where `U Σ Vᵀ` is the SVD of `Xᵀ Z`. Being
//! orthogonal, `W` preserves dot products inside the source space.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{normalize_in_place, EmbeddingTable};
use crate::lexicon::BilingualDictionary;

pub const MAPPING_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty alignment: no dictionary pair has both words in the embedding tables")]
    EmptyAlignment,
    #[error("non-finite value in aligned matrices")]
    NonFinite,
    #[error("SVD did not converge")]
    SvdFailed,
    #[error("malformed mapping file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Source and target vectors for the usable dictionary pairs, one row
/// per pair, rows in dictionary order.
#[derive(Clone, Debug)]
pub struct AlignedMatrices {
    pub source: DMatrix<f64>,
    pub target: DMatrix<f64>,
    pub used_pairs: Vec<(String, String)>,
    /// Pairs skipped because a word was missing from its table.
    pub dropped: usize,
    pub normalized: bool,
}

/// Collects the rows for every dictionary pair present in both tables.
pub fn align(
    dict: &BilingualDictionary,
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    normalize: bool,
) -> Result<AlignedMatrices, MappingError> {
    if src.dim() != tgt.dim() {
        return Err(MappingError::DimensionMismatch {
            expected: src.dim(),
            found: tgt.dim(),
        });
    }
    let dim = src.dim();
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    let mut used = Vec::new();
    for (s, t) in dict.pairs() {
        let (Some(x), Some(z)) = (src.get(s), tgt.get(t)) else {
            continue;
        };
        xs.extend_from_slice(x);
        zs.extend_from_slice(z);
        if normalize {
            let n = xs.len();
            normalize_in_place(&mut xs[n - dim..]);
            normalize_in_place(&mut zs[n - dim..]);
        }
        used.push((s.clone(), t.clone()));
    }
    if used.is_empty() {
        return Err(MappingError::EmptyAlignment);
    }
    let rows = used.len();
    Ok(AlignedMatrices {
        source: DMatrix::from_row_slice(rows, dim, &xs),
        target: DMatrix::from_row_slice(rows, dim, &zs),
        dropped: dict.len() - rows,
        used_pairs: used,
        normalized: normalize,
    })
}

/// A fitted orthogonal map, applied as `x ↦ x W` to row vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingModel {
    weights: DMatrix<f64>,
    normalized: bool,
    rank: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct MappingHeader {
    format_version: u32,
    dimension: usize,
    normalized: bool,
    rank: usize,
}

impl MappingModel {
    /// Wraps an existing matrix. Fails unless it is square and finite.
    pub fn from_weights(weights: DMatrix<f64>, normalized: bool) -> Result<Self, MappingError> {
        if weights.nrows() != weights.ncols() {
            return Err(MappingError::DimensionMismatch {
                expected: weights.nrows(),
                found: weights.ncols(),
            });
        }
        if weights.iter().any(|x| !x.is_finite()) {
            return Err(MappingError::NonFinite);
        }
        let rank = weights.rank(1e-12);
        Ok(MappingModel {
            weights,
            normalized,
            rank,
        })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.nrows()
    }

    /// Whether inputs are scaled to unit length before mapping.
    pub fn normalized(&self) -> bool {
        self.normalized
    }

    /// Numerical rank of `Xᵀ Z` at fit time.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `max |WᵀW − I|`
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        let g = self.weights.transpose() * &self.weights;
        (g - DMatrix::<f64>::identity(d, d)).amax()
    }

    /// Maps one row vector.
    pub fn map_vector(&self, x: &[f64]) -> Vec<f64> {
        let mut buf = x.to_vec();
        if self.normalized {
            normalize_in_place(&mut buf);
        }
        (0..self.dim())
            .map(|j| {
                self.weights
                    .column(j)
                    .iter()
                    .zip(&buf)
                    .map(|(w, x)| w * x)
                    .sum()
            })
            .collect()
    }

    /// Writes the matrix in word2vec text layout (rows labelled `0..d`)
    /// with exact round-trip decimals, plus a JSON header.
    pub fn save(&self, matrix_path: &Path, header_path: &Path) -> Result<(), MappingError> {
        let mut out = Vec::new();
        self.write_matrix(&mut out)?;
        fs::write(matrix_path, out)?;
        let header = MappingHeader {
            format_version: MAPPING_FORMAT_VERSION,
            dimension: self.dim(),
            normalized: self.normalized,
            rank: self.rank,
        };
        let json = serde_json::to_string_pretty(&header).expect("header serializes");
        fs::write(header_path, json + "\n")?;
        Ok(())
    }

    fn write_matrix<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.dim();
        writeln!(w, "{d} {d}")?;
        for i in 0..d {
            write!(w, "{i}")?;
            for j in 0..d {
                write!(w, " {}", self.weights[(i, j)])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn load(matrix_path: &Path, header_path: &Path) -> Result<Self, MappingError> {
        let header: MappingHeader = serde_json::from_str(&fs::read_to_string(header_path)?)
            .map_err(|e| MappingError::Format(e.to_string()))?;
        if header.format_version != MAPPING_FORMAT_VERSION {
            return Err(MappingError::Format(format!(
                "unsupported format_version {}",
                header.format_version
            )));
        }
        let weights = read_matrix(BufReader::new(fs::File::open(matrix_path)?), header.dimension)?;
        let mut model = MappingModel::from_weights(weights, header.normalized)?;
        model.rank = header.rank;
        Ok(model)
    }
}

fn read_matrix<R: BufRead>(r: R, dim: usize) -> Result<DMatrix<f64>, MappingError> {
    let bad = |line: usize, what: &str| MappingError::Format(format!("line {line}: {what}"));
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))??;
    if header.trim() != format!("{dim} {dim}") {
        return Err(bad(1, "header does not match declared dimension"));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let line = lines.next().ok_or_else(|| bad(i + 2, "unexpected end of file"))??;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(i.to_string().as_str()) {
            return Err(bad(i + 2, "unexpected row label"));
        }
        let row: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(i + 2, "non-numeric field"))?;
        if row.len() != dim {
            return Err(bad(i + 2, "wrong number of columns"));
        }
        data.extend(row);
    }
    Ok(DMatrix::from_row_slice(dim, dim, &data))
}

/// Solves the orthogonal Procrustes problem for the aligned rows.
///
/// A rank-deficient `Xᵀ Z` still yields an orthogonal `W`; the rank is
/// recorded on the model and logged as a warning.
pub fn fit_orthogonal(am: &AlignedMatrices) -> Result<MappingModel, MappingError> {
    let (x, z) = (&am.source, &am.target);
    if x.nrows() == 0 {
        return Err(MappingError::EmptyAlignment);
    }
    if x.shape() != z.shape() {
        return Err(MappingError::DimensionMismatch {
            expected: x.ncols(),
            found: z.ncols(),
        });
    }
    if x.iter().chain(z.iter()).any(|v| !v.is_finite()) {
        return Err(MappingError::NonFinite);
    }
    let m = x.transpose() * z;
    let d = m.nrows();
    let svd = m.try_svd(true, true, f64::EPSILON, 0).ok_or(MappingError::SvdFailed)?;
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let weights = u * v_t;

    let smax = svd.singular_values.max();
    let tol = smax * d as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < d {
        log::warn!("cross-covariance matrix is rank deficient ({rank} of {d}); mapping is not unique");
    }
    Ok(MappingModel {
        weights,
        normalized: am.normalized,
        rank,
    })
}

/// `trace(Wᵀ Xᵀ Z)`, the objective maximized by [`fit_orthogonal`].
pub fn cross_covariance_trace(am: &AlignedMatrices, w: &DMatrix<f64>) -> f64 {
    let m = am.source.transpose() * &am.target;
    (w.transpose() * m).trace()
}

/// Maps every row of `table` into the target space. The vocabulary is kept.
pub fn apply_mapping(model: &MappingModel, table: &EmbeddingTable) -> Result<EmbeddingTable, MappingError> {
    if table.dim() != model.dim() {
        return Err(MappingError::DimensionMismatch {
            expected: model.dim(),
            found: table.dim(),
        });
    }
    let data: Vec<f64> = table.rows().flat_map(|row| model.map_vector(row)).collect();
    table
        .with_data(model.dim(), data)
        .map_err(|_| MappingError::NonFinite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, &[f64])]) -> EmbeddingTable {
        EmbeddingTable::from_rows(rows.iter().map(|(w, v)| (*w, v.to_vec()))).unwrap()
    }

    fn aligned(x: &[f64], z: &[f64], rows: usize, dim: usize) -> AlignedMatrices {
        AlignedMatrices {
            source: DMatrix::from_row_slice(rows, dim, x),
            target: DMatrix::from_row_slice(rows, dim, z),
            used_pairs: Vec::new(),
            dropped: 0,
            normalized: false,
        }
    }

    #[test]
    fn align_drops_oov_pairs() {
        let src = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let tgt = table(&[("α", &[1.0, 0.0]), ("β", &[0.0, 1.0]), ("γ", &[1.0, 1.0])]);
        let dict = BilingualDictionary::from_pairs([("a", "α"), ("b", "β"), ("c", "γ")]).unwrap();
        let am = align(&dict, &src, &tgt, false).unwrap();
        assert_eq!(am.source.nrows(), 2);
        assert_eq!(am.dropped, 1);
        assert_eq!(am.used_pairs[1], ("b".to_string(), "β".to_string()));
    }

    #[test]
    fn align_normalizes_rows() {
        let src = table(&[("a", &[3.0, 4.0]), ("z", &[0.0, 0.0])]);
        let tgt = table(&[("α", &[0.0, 2.0]), ("ζ", &[1.0, 0.0])]);
        let dict = BilingualDictionary::from_pairs([("a", "α"), ("z", "ζ")]).unwrap();
        let am = align(&dict, &src, &tgt, true).unwrap();
        assert_eq!(am.source.row(0).iter().copied().collect::<Vec<_>>(), [0.6, 0.8]);
        assert_eq!(am.target.row(0).iter().copied().collect::<Vec<_>>(), [0.0, 1.0]);
        assert_eq!(am.source.row(1).iter().copied().collect::<Vec<_>>(), [0.0, 0.0]);
    }

    #[test]
    fn align_errors() {
        let src = table(&[("a", &[1.0, 0.0])]);
        let tgt = table(&[("α", &[1.0, 0.0])]);
        let dict = BilingualDictionary::from_pairs([("x", "y")]).unwrap();
        assert!(matches!(align(&dict, &src, &tgt, false), Err(MappingError::EmptyAlignment)));
        let tgt3 = table(&[("α", &[1.0, 0.0, 0.0])]);
        assert!(matches!(
            align(&dict, &src, &tgt3, false),
            Err(MappingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identical_spaces_give_identity() {
        let x = [2.0, 1.0, 0.5, -1.0, 3.0, 0.0, 0.0, 1.0, 1.0];
        let model = fit_orthogonal(&aligned(&x, &x, 3, 3)).unwrap();
        let err = (model.weights() - DMatrix::<f64>::identity(3, 3)).amax();
        assert!(err <= 1e-6, "{err}");
        assert_eq!(model.rank(), 3);
    }

    #[test]
    fn orthogonal_cross_covariance_is_returned_as_is() {
        let x = [1.0, 0.0, 0.0, 1.0];
        let z = [0.0, 1.0, -1.0, 0.0];
        let model = fit_orthogonal(&aligned(&x, &z, 2, 2)).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((model.weights() - expected).amax() <= 1e-12);

        let mapped = model.map_vector(&[1.0, 0.0]);
        assert!((mapped[0] - 0.0).abs() < 1e-12 && (mapped[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_input_still_orthogonal() {
        let x = [1.0, 0.0, 0.0, 2.0, 0.0, 0.0];
        let z = [0.0, 1.0, 0.0, 0.0, 2.0, 0.0];
        let model = fit_orthogonal(&aligned(&x, &z, 2, 3)).unwrap();
        assert_eq!(model.rank(), 1);
        assert!(model.orthogonality_error() <= 1e-12);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let x = [1.0, f64::NAN];
        assert!(matches!(fit_orthogonal(&aligned(&x, &x, 1, 2)), Err(MappingError::NonFinite)));
    }

    #[test]
    fn apply_identity_and_rotation() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.3, -0.7])]);
        let id = MappingModel::from_weights(DMatrix::identity(2, 2), false).unwrap();
        assert_eq!(apply_mapping(&id, &t).unwrap(), t);

        let rot = MappingModel::from_weights(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]), false).unwrap();
        let mapped = apply_mapping(&rot, &t).unwrap();
        assert_eq!(mapped.get("a").unwrap(), [0.0, 1.0]);
        assert_eq!(mapped.words(), t.words());

        let t3 = table(&[("a", &[1.0, 0.0, 0.0])]);
        assert!(matches!(apply_mapping(&rot, &t3), Err(MappingError::DimensionMismatch { .. })));
    }

    #[test]
    fn apply_normalizes_when_flagged() {
        let t = table(&[("a", &[3.0, 4.0])]);
        let id = MappingModel::from_weights(DMatrix::identity(2, 2), true).unwrap();
        assert_eq!(apply_mapping(&id, &t).unwrap().row(0), [0.6, 0.8]);
    }

    #[test]
    fn model_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (m, h) = (dir.path().join("w.vec"), dir.path().join("w.json"));
        let c = (0.3f64).cos();
        let s = (0.3f64).sin();
        let model = MappingModel::from_weights(DMatrix::from_row_slice(2, 2, &[c, s, -s, c]), true).unwrap();
        model.save(&m, &h).unwrap();
        let back = MappingModel::load(&m, &h).unwrap();
        assert_eq!(back, model);
        let json = fs::read_to_string(&h).unwrap();
        assert!(json.contains("\"format_version\": 1") && json.contains("\"normalized\": true"));

        fs::write(&m, "2 2\n0 1 0\n").unwrap();
        assert!(matches!(MappingModel::load(&m, &h), Err(MappingError::Format(_))));
    }
}
