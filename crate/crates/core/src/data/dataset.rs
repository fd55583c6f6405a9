use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::DataError;

/// Row-major feature matrix with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    feature_dim: usize,
    classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<usize>, feature_dim: usize, classes: usize) -> Result<Self, DataError> {
        if labels.is_empty() || feature_dim == 0 || features.len() != labels.len() * feature_dim {
            return Err(DataError::InvalidParameter(format!(
                "{} feature values for {} rows of width {feature_dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= classes) {
            return Err(DataError::InvalidParameter(format!("label {y} with {classes} classes")));
        }
        Ok(Self { features, labels, feature_dim, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    /// Copies the given rows (in order) into a new dataset with the same
    /// class count. Panics on an empty index list.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        assert!(!indices.is_empty(), "empty subset");
        let mut features = Vec::with_capacity(indices.len() * self.feature_dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset { features, labels, feature_dim: self.feature_dim, classes: self.classes }
    }

    /// Gathers rows into a contiguous feature buffer and label list.
    pub fn gather(&self, indices: &[usize], features: &mut Vec<f64>, labels: &mut Vec<usize>) {
        features.clear();
        labels.clear();
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
    }

    /// Random split into `(train, test)` with `round(test_fraction * n)` test
    /// rows (at least one row stays in train).
    pub fn split<R: Rng + ?Sized>(&self, test_fraction: f64, rng: &mut R) -> (Dataset, Dataset) {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
        let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
        let (test, train) = order.split_at(n_test);
        let mut train = train.to_vec();
        let mut test = test.to_vec();
        train.sort_unstable();
        test.sort_unstable();
        (self.subset(&train), self.subset(&test))
    }

    /// Per-class sample counts.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.classes];
        for &y in &self.labels {
            h[y] += 1;
        }
        h
    }
}

/// Parameters of a Gaussian-cluster dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub features: usize,
    pub samples_per_class: usize,
    /// Standard deviation of each coordinate around the class mean.
    pub spread: f64,
    /// Norm of every class mean.
    pub separation: f64,
}

/// One isotropic Gaussian cluster per class; class means are uniform on the
/// sphere of radius `separation`. Rows are ordered class by class.
pub fn generate_synthetic<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<Dataset, DataError> {
    if spec.classes == 0 || spec.features == 0 || spec.samples_per_class == 0 {
        return Err(DataError::InvalidParameter("classes, features and samples_per_class must be positive".into()));
    }
    if spec.spread.is_nan() || spec.separation.is_nan() || spec.spread < 0.0 || spec.separation < 0.0 {
        return Err(DataError::InvalidParameter("spread and separation must be non-negative".into()));
    }
    let means: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| {
            let v: Vec<f64> = (0..spec.features).map(|_| StandardNormal.sample(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            v.into_iter().map(|x| x / norm * spec.separation).collect()
        })
        .collect();
    let n = spec.classes * spec.samples_per_class;
    let mut features = Vec::with_capacity(n * spec.features);
    let mut labels = Vec::with_capacity(n);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..spec.samples_per_class {
            for &m in mean {
                let noise: f64 = StandardNormal.sample(rng);
                features.push(m + spec.spread * noise);
            }
            labels.push(c);
        }
    }
    Dataset::new(features, labels, spec.features, spec.classes)
}

/// Reads a CSV with header `f0,...,f{k-1},label`. The class count is the
/// largest label plus one.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path.as_ref()).map_err(csv_error)?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    let width = headers.len();
    if width < 2 || &headers[width - 1] != "label" {
        return Err(DataError::ParseError { line: 1, message: "last header column must be `label`".into() });
    }
    for (j, h) in headers.iter().take(width - 1).enumerate() {
        if h != format!("f{j}") {
            return Err(DataError::ParseError { line: 1, message: format!("expected header `f{j}`, found `{h}`") });
        }
    }
    let dim = width - 1;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(DataError::ParseError {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for j in 0..dim {
            let v: f64 = record[j].trim().parse().map_err(|_| DataError::ParseError {
                line,
                message: format!("feature f{j} `{}` is not a number", &record[j]),
            })?;
            features.push(v);
        }
        let label: usize = record[dim].trim().parse().map_err(|_| DataError::ParseError {
            line,
            message: format!("label `{}` is not a non-negative integer", &record[dim]),
        })?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(DataError::ParseError { line: 1, message: "no data rows".into() });
    }
    let classes = labels.iter().max().copied().unwrap_or(0) + 1;
    Dataset::new(features, labels, dim, classes)
}

/// Writes the dataset in the format read by [`load_dataset`].
pub fn write_dataset(path: impl AsRef<Path>, data: &Dataset) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_error)?;
    let mut header: Vec<String> = (0..data.feature_dim).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(csv_error)?;
    for i in 0..data.len() {
        let mut row: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        row.push(data.labels[i].to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::Io(io),
        other => DataError::ParseError { line, message: format!("{other:?}") },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use std::io::Write;

    fn spec(classes: usize, spc: usize, spread: f64) -> SyntheticSpec {
        SyntheticSpec { classes, features: 5, samples_per_class: spc, spread, separation: 4.0 }
    }

    #[test]
    fn zero_spread_points_sit_on_their_means() {
        let d = generate_synthetic(&spec(3, 4, 0.0), &mut rng::stream(0, &[])).unwrap();
        for c in 0..3 {
            let first = d.row(c * 4).to_vec();
            for i in 0..4 {
                assert_eq!(d.row(c * 4 + i), first.as_slice());
            }
            let norm = first.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_labels() {
        let d = generate_synthetic(&spec(2, 100, 1.0), &mut rng::stream(0, &[])).unwrap();
        assert_eq!(d.len(), 200);
        assert_eq!(d.class_histogram(), vec![100, 100]);
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_valid_csv() {
        let f = write_tmp("f0,f1,label\n0.5,1.5,0\n-2,3e-1,2\n");
        let d = load_dataset(f.path()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.classes(), 3);
        assert_eq!(d.row(1), &[-2.0, 0.3]);
    }

    #[test]
    fn load_errors() {
        let f = write_tmp("f0,f1\n0.5,1.5\n");
        assert!(matches!(load_dataset(f.path()), Err(DataError::ParseError { line: 1, .. })));
        let f = write_tmp("f0,label\n0.5,1\n0.25,x\n");
        assert!(matches!(load_dataset(f.path()), Err(DataError::ParseError { line: 3, .. })));
        let f = write_tmp("f0,label\n0.5,1.5\n");
        assert!(matches!(load_dataset(f.path()), Err(DataError::ParseError { line: 2, .. })));
        let f = write_tmp("f0,label\n0.5,1\nabc,1\n");
        assert!(matches!(load_dataset(f.path()), Err(DataError::ParseError { line: 3, .. })));
        let f = write_tmp("f0,label\n0.5,1\n0.5\n");
        assert!(matches!(load_dataset(f.path()), Err(DataError::ParseError { .. })));
    }

    #[test]
    fn write_then_load_round_trips() {
        let d = generate_synthetic(&spec(3, 7, 1.3), &mut rng::stream(9, &[])).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_dataset(f.path(), &d).unwrap();
        let back = load_dataset(f.path()).unwrap();
        assert_eq!(back.labels(), d.labels());
        for (a, b) in back.features().iter().zip(d.features()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn split_sizes() {
        let d = generate_synthetic(&spec(2, 50, 1.0), &mut rng::stream(0, &[])).unwrap();
        let (train, test) = d.split(0.2, &mut rng::stream(1, &[]));
        assert_eq!((train.len(), test.len()), (80, 20));
    }
}
