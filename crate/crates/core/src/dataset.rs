//! Item collections, the Euclidean metric and target-set resolution.
//!
//! A [`Dataset`] is immutable once built and can be shared freely between
//! concurrent sessions and simulation workers.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Magic prefix of the packed binary vector format.
pub const BINARY_MAGIC: &[u8; 8] = b"FSVEC001";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Binary,
}

impl DataFormat {
    /// Guesses the format from a file extension; anything but `.bin` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("fsvec") => DataFormat::Binary,
            _ => DataFormat::Csv,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset<F> {
    data: Vec<F>,
    dim: usize,
    ids: Vec<String>,
    asset_paths: Option<Vec<String>>,
    index_by_id: HashMap<String, usize>,
}

impl<F: Scalar> Dataset<F> {
    /// Builds a dataset from row vectors. Without explicit ids, item `i` is
    /// identified by the decimal string `"i"`.
    pub fn new(vectors: Vec<Vec<F>>, ids: Option<Vec<String>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        let n = vectors.len();
        let mut data = Vec::with_capacity(n * dim);
        for (row, v) in vectors.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {dim} values, found {}", v.len()),
                });
            }
            data.extend(v);
        }
        Self::from_flat(data, dim, ids)
    }

    /// Builds a dataset from row-major storage of `n * dim` values.
    pub fn from_flat(data: Vec<F>, dim: usize, ids: Option<Vec<String>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("vectors must have dimension >= 1"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::validation(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            )));
        }
        let n = data.len() / dim;
        if n < 2 {
            return Err(Error::validation(format!(
                "a dataset needs at least 2 items, got {n}"
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite value in row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        let ids = ids.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        if ids.len() != n {
            return Err(Error::validation(format!(
                "{} ids supplied for {n} items",
                ids.len()
            )));
        }
        let mut index_by_id = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index_by_id.insert(id.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate item id {id:?}")));
            }
        }
        Ok(Dataset {
            data,
            dim,
            ids,
            asset_paths: None,
            index_by_id,
        })
    }

    /// Attaches one display-asset locator per item.
    pub fn with_asset_paths(mut self, paths: Vec<String>) -> Result<Self> {
        if paths.len() != self.len() {
            return Err(Error::validation(format!(
                "{} asset paths supplied for {} items",
                paths.len(),
                self.len()
            )));
        }
        self.asset_paths = Some(paths);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, i: usize) -> &[F] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[F]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index_by_id.get(id).copied()
    }

    pub fn asset_paths(&self) -> Option<&[String]> {
        self.asset_paths.as_deref()
    }

    pub fn asset_path(&self, i: usize) -> Option<&str> {
        self.asset_paths.as_ref().map(|p| p[i].as_str())
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
        }
    }

    /// Distance between two items of this dataset.
    pub fn distance_between(&self, i: usize, j: usize) -> F {
        euclidean(self.vector(i), self.vector(j))
    }

    /// Distances from every item to `point`.
    pub fn distances_to(&self, point: &[F]) -> Result<Vec<F>> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        Ok(self.vectors().map(|x| euclidean(x, point)).collect())
    }

    /// Writes the dataset as CSV with an `id,f0,f1,...` header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("id");
        for c in 0..self.dim {
            header.push_str(&format!(",f{c}"));
        }
        writeln!(out, "{header}")?;
        for (i, v) in self.vectors().enumerate() {
            write!(out, "{}", self.ids[i])?;
            for x in v {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Writes the packed little-endian binary format. Ids are not stored.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        out.write_all(&(self.dim as u64).to_le_bytes())?;
        for x in &self.data {
            out.write_all(&x.to_f64_lossy().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path, format: DataFormat) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        match format {
            DataFormat::Csv => self.write_csv(&mut out),
            DataFormat::Binary => self.write_binary(&mut out),
        }
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
    }

    /// Parses CSV text. A first row whose first field is `id` is a header and
    /// switches on the leading id column.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .peekable();
        let has_ids = match lines.peek() {
            Some((_, first)) => first.split(',').next().map(str::trim) == Some("id"),
            None => false,
        };
        if has_ids {
            lines.next();
        }
        let mut ids = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (row, line) in lines {
            let mut fields = line.split(',').map(str::trim);
            if has_ids {
                let id = fields.next().unwrap_or_default();
                ids.push(id.to_string());
            }
            let mut count = 0;
            for field in fields {
                let x: F = field.parse().map_err(|e| Error::Parse {
                    row,
                    message: format!("{field:?}: {e}"),
                })?;
                data.push(x);
                count += 1;
            }
            match dim {
                None => dim = Some(count),
                Some(d) if d != count => {
                    return Err(Error::Parse {
                        row,
                        message: format!("expected {d} values, found {count}"),
                    })
                }
                _ => {}
            }
        }
        let dim = dim.unwrap_or(0);
        Self::from_flat(data, dim, has_ids.then_some(ids))
    }

    pub fn parse_binary(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            row: 0,
            message: m.to_string(),
        };
        if bytes.len() < 24 || &bytes[..8] != BINARY_MAGIC {
            return Err(bad("missing FSVEC001 header"));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let dim = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        let body = &bytes[24..];
        let expected = n
            .checked_mul(dim)
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| bad("header sizes overflow"))?;
        if body.len() != expected {
            return Err(bad(&format!(
                "expected {expected} payload bytes for {n}x{dim}, found {}",
                body.len()
            )));
        }
        let data = body
            .chunks_exact(8)
            .map(|c| F::lit(f64::from_le_bytes(c.try_into().unwrap())))
            .collect();
        Self::from_flat(data, dim, None)
    }
}

pub fn load_dataset<F: Scalar>(path: &Path, format: DataFormat) -> Result<Dataset<F>> {
    match format {
        DataFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Dataset::parse_csv(&text)
        }
        DataFormat::Binary => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            Dataset::parse_binary(&bytes)
        }
    }
}

/// `n` points drawn uniformly from the unit cube `[0,1]^dim`.
///
/// The generator is ChaCha8 seeded from `seed`, so output is bit-identical
/// across platforms for a fixed `(n, dim, seed)`.
pub fn generate_synthetic<F: Scalar>(n: usize, dim: usize, seed: u64) -> Result<Dataset<F>> {
    if n < 2 {
        return Err(Error::validation(format!(
            "a dataset needs at least 2 items, got {n}"
        )));
    }
    if dim == 0 {
        return Err(Error::validation("vectors must have dimension >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| F::unit(&mut rng)).collect();
    Dataset::from_flat(data, dim, None)
}

#[inline]
pub(crate) fn euclidean<F: Scalar>(x: &[F], y: &[F]) -> F {
    x.iter()
        .zip(y)
        .fold(F::zero(), |acc, (&a, &b)| {
            let d = a - b;
            acc + d * d
        })
        .sqrt()
}

/// Euclidean distance `||x - y||`.
pub fn distance<F: Scalar>(x: &[F], y: &[F]) -> Result<F> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(euclidean(x, y))
}

/// An ideal target item and how many of its nearest items also count as hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetSpec {
    pub target_index: usize,
    pub target_set_size: usize,
}

impl TargetSpec {
    pub fn new(target_index: usize, target_set_size: usize) -> Self {
        TargetSpec {
            target_index,
            target_set_size,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.target_index >= n {
            return Err(Error::IndexOutOfRange {
                index: self.target_index,
                len: n,
            });
        }
        if self.target_set_size == 0 || self.target_set_size > n {
            return Err(Error::validation(format!(
                "target set size {} must be in 1..={n}",
                self.target_set_size
            )));
        }
        Ok(())
    }
}

/// The target item followed by its `size - 1` nearest other items, nearest
/// first. Equal distances go to the lower index.
pub fn resolve_target_set<F: Scalar>(dataset: &Dataset<F>, spec: TargetSpec) -> Result<Vec<usize>> {
    spec.validate(dataset.len())?;
    let t = spec.target_index;
    let target = dataset.vector(t);
    let mut others: Vec<(F, usize)> = dataset
        .vectors()
        .enumerate()
        .filter(|&(i, _)| i != t)
        .map(|(i, x)| (euclidean(x, target), i))
        .collect();
    others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut set = Vec::with_capacity(spec.target_set_size);
    set.push(t);
    set.extend(
        others
            .into_iter()
            .take(spec.target_set_size - 1)
            .map(|(_, i)| i),
    );
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(points: &[f64]) -> Dataset<f64> {
        Dataset::new(points.iter().map(|&x| vec![x]).collect(), None).unwrap()
    }

    #[test]
    fn parses_headerless_csv() {
        let d = Dataset::<f64>::parse_csv("0,0\n1,0\n0,1").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.vector(2), &[0.0, 1.0]);
        assert_eq!(d.id(1), "1");
    }

    #[test]
    fn parses_csv_with_id_header() {
        let d = Dataset::<f64>::parse_csv("id,f0\nalpha,0.5\nbeta,1.5\n").unwrap();
        assert_eq!(d.ids(), &["alpha".to_string(), "beta".to_string()]);
        assert_eq!(d.index_of("beta"), Some(1));
    }

    #[test]
    fn ragged_row_is_reported_with_its_row() {
        let err = Dataset::<f64>::parse_csv("0,0\n1,0,5\n0,1").unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite_and_tiny_datasets() {
        assert!(matches!(
            Dataset::<f64>::parse_csv("0,0\nNaN,1"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Dataset::<f64>::parse_csv("0,inf\n1,1"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Dataset::<f64>::parse_csv("0,0"),
            Err(Error::Validation(_))
        ));
        assert!(generate_synthetic::<f64>(1, 3, 0).is_err());
    }

    #[test]
    fn rejects_duplicate_ids() {
        assert!(Dataset::<f64>::parse_csv("id,f0\na,1\na,2").is_err());
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let d = generate_synthetic::<f64>(37, 4, 99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for format in [DataFormat::Csv, DataFormat::Binary] {
            let path = dir.path().join(match format {
                DataFormat::Csv => "d.csv",
                DataFormat::Binary => "d.bin",
            });
            d.save(&path, format).unwrap();
            let back: Dataset<f64> = load_dataset(&path, format).unwrap();
            assert_eq!(back.len(), d.len());
            for (a, b) in d.vectors().zip(back.vectors()) {
                let a: Vec<u64> = a.iter().map(|x| x.to_bits()).collect();
                let b: Vec<u64> = b.iter().map(|x| x.to_bits()).collect();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn binary_header_layout() {
        let d = line(&[1.0, 2.0]);
        let mut bytes = Vec::new();
        d.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..8], b"FSVEC001");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 24 + 16);
        assert!(Dataset::<f64>::parse_binary(&bytes[..30]).is_err());
    }

    #[test]
    fn synthetic_is_deterministic_and_in_range() {
        let a = generate_synthetic::<f64>(100, 10, 7).unwrap();
        let b = generate_synthetic::<f64>(100, 10, 7).unwrap();
        assert_eq!(a.data, b.data);
        assert!(a.data.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let c = generate_synthetic::<f64>(100, 10, 8).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn synthetic_mean_is_one_half() {
        let d = generate_synthetic::<f64>(10_000, 1, 7).unwrap();
        let mean = d.data.iter().sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.03, "{mean}");
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert!(matches!(
            distance(&[0.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn target_set_examples() {
        let d = line(&[0.0, 1.0, 2.0, 10.0]);
        assert_eq!(resolve_target_set(&d, TargetSpec::new(0, 1)).unwrap(), vec![0]);
        assert_eq!(resolve_target_set(&d, TargetSpec::new(0, 2)).unwrap(), vec![0, 1]);
        let tie = line(&[0.0, -1.0, 1.0]);
        assert_eq!(resolve_target_set(&tie, TargetSpec::new(0, 2)).unwrap(), vec![0, 1]);
        assert!(resolve_target_set(&d, TargetSpec::new(4, 1)).is_err());
        assert!(resolve_target_set(&d, TargetSpec::new(0, 5)).is_err());
        assert!(resolve_target_set(&d, TargetSpec::new(0, 0)).is_err());
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(seed in any::<u64>()) {
            let d = generate_synthetic::<f64>(3, 5, seed).unwrap();
            let (x, y, z) = (d.vector(0), d.vector(1), d.vector(2));
            let xy = distance(x, y).unwrap();
            prop_assert_eq!(xy, distance(y, x).unwrap());
            prop_assert!(xy > 0.0);
            let bound = distance(x, z).unwrap() + distance(z, y).unwrap();
            prop_assert!(xy <= bound * (1.0 + 1e-9));
        }

        #[test]
        fn target_set_contains_target_and_has_requested_size(
            seed in any::<u64>(), t in 0usize..40, size in 1usize..=40
        ) {
            let d = generate_synthetic::<f64>(40, 3, seed).unwrap();
            let set = resolve_target_set(&d, TargetSpec::new(t, size)).unwrap();
            prop_assert_eq!(set.len(), size);
            prop_assert!(set.contains(&t));
            let mut uniq = set.clone();
            uniq.sort_unstable();
            uniq.dedup();
            prop_assert_eq!(uniq.len(), size);
        }
    }
}
