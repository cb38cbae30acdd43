//! CSV ingestion and export.
//!
//! Format: comma-separated numeric features with a binary label column
//! (default: the last column). A header row is auto-detected when any cell
//! of the first row fails numeric parsing; `--header yes|no` overrides the
//! detection. Label values must be 0/1 unless `--map-labels` is given, in
//! which case any two distinct values are accepted and the rarer one becomes
//! class 1 (ties map the lexicographically larger value to 1).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use crcen_core::data::Dataset;
use crcen_core::Matrix;

/// Which column holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSel {
    Name(String),
    Index(usize),
}

impl ColumnSel {
    /// `--label-col` accepts an index or a header name.
    pub fn parse(s: &str) -> ColumnSel {
        match s.parse::<usize>() {
            Ok(i) => ColumnSel::Index(i),
            Err(_) => ColumnSel::Name(s.to_string()),
        }
    }
}

/// Header handling: auto-detect, or force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    #[default]
    Auto,
    Yes,
    No,
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    /// `None` selects the last column.
    pub label_col: Option<ColumnSel>,
    /// Accept arbitrary two-valued labels, mapping the minority to 1.
    pub map_labels: bool,
    pub header: HeaderMode,
}

/// A parsed CSV plus naming/provenance details for reports.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub feature_names: Vec<String>,
    pub label_name: String,
    /// `Some((zero_value, one_value))` when `map_labels` renamed the classes.
    pub label_mapping: Option<(String, String)>,
    pub warnings: Vec<String>,
}

fn is_numeric(s: &str) -> bool {
    let t = s.trim();
    !t.is_empty() && t.parse::<f64>().is_ok()
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<LoadedCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;

    let mut records: Vec<(u64, csv::StringRecord)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.with_context(|| format!("malformed CSV in {}", path.display()))?;
        let line = rec.position().map_or(0, csv::Position::line);
        records.push((line, rec));
    }
    if records.is_empty() {
        bail!("{} is empty", path.display());
    }

    let width = records[0].1.len();
    if width < 2 {
        bail!("{} needs at least one feature column and a label column", path.display());
    }

    let has_header = match opts.header {
        HeaderMode::Yes => true,
        HeaderMode::No => false,
        HeaderMode::Auto => records[0].1.iter().any(|cell| !is_numeric(cell)),
    };
    let header: Vec<String> = if has_header {
        records.remove(0).1.iter().map(str::to_string).collect()
    } else {
        (0..width).map(|i| format!("c{i}")).collect()
    };
    if records.is_empty() {
        bail!("{} has a header but no data rows", path.display());
    }

    let label_idx = match &opts.label_col {
        None => width - 1,
        Some(ColumnSel::Index(i)) => {
            if *i >= width {
                bail!("label column index {i} out of range (width {width})");
            }
            *i
        }
        Some(ColumnSel::Name(name)) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("no column named '{name}' in header {header:?}"))?,
    };

    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    // Features first; labels handled afterwards so mapping can see all rows.
    let n = records.len();
    let mut values = Vec::with_capacity(n * (width - 1));
    let mut raw_labels = Vec::with_capacity(n);
    for (line, rec) in &records {
        if rec.len() != width {
            bail!("line {line}: expected {width} cells, found {}", rec.len());
        }
        for (i, cell) in rec.iter().enumerate() {
            if i == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| anyhow!("line {line}: non-numeric cell '{cell}' in column '{}'", header[i]))?;
            if !v.is_finite() {
                bail!("line {line}: non-finite value '{cell}' in column '{}'", header[i]);
            }
            values.push(v);
        }
    }

    let (labels, label_mapping) = parse_labels(&raw_labels, &records, opts.map_labels)?;

    let x = Matrix::from_vec(n, width - 1, values)?;
    let dataset = Dataset::new(x, labels)?;
    if !dataset.has_both_classes() {
        bail!("{} contains a single class only", path.display());
    }

    let mut warnings = Vec::new();
    if dataset.minority_convention_violated() {
        warnings.push(format!(
            "label 1 is not the minority class (n1={} > n0={})",
            dataset.n1(),
            dataset.n0()
        ));
    } else if dataset.n0() == dataset.n1() {
        warnings.push("classes are balanced; this dataset is not imbalanced".to_string());
    }

    Ok(LoadedCsv {
        dataset,
        feature_names,
        label_name: header[label_idx].clone(),
        label_mapping,
        warnings,
    })
}

type LabelMapping = Option<(String, String)>;

fn parse_labels(
    raw: &[String],
    records: &[(u64, csv::StringRecord)],
    map_labels: bool,
) -> Result<(Vec<u8>, LabelMapping)> {
    if !map_labels {
        let mut out = Vec::with_capacity(raw.len());
        for (s, (line, _)) in raw.iter().zip(records) {
            let v: f64 = s
                .parse()
                .map_err(|_| anyhow!("line {line}: label '{s}' is not numeric (use --map-labels for named classes)"))?;
            if v == 0.0 {
                out.push(0u8);
            } else if v == 1.0 {
                out.push(1u8);
            } else {
                bail!("line {line}: label '{s}' outside {{0, 1}}");
            }
        }
        return Ok((out, None));
    }

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in raw {
        *counts.entry(s.as_str()).or_default() += 1;
    }
    if counts.len() != 2 {
        bail!(
            "--map-labels needs exactly two distinct label values, found {}: {:?}",
            counts.len(),
            counts.keys().collect::<Vec<_>>()
        );
    }
    let mut it = counts.iter();
    let (first, c_first) = it.next().unwrap();
    let (second, c_second) = it.next().unwrap();
    // Minority becomes class 1; on a tie the lexicographically larger value
    // (here `second`, since BTreeMap iterates sorted) becomes 1.
    let one_value = if c_first < c_second { *first } else { *second };
    let zero_value = if one_value == *first { *second } else { *first };
    let labels = raw
        .iter()
        .map(|s| u8::from(s == one_value))
        .collect();
    Ok((labels, Some((zero_value.to_string(), one_value.to_string()))))
}

/// Writes a dataset as CSV with a header. Floats use the shortest
/// representation that round-trips exactly, so `load_csv` restores the
/// dataset bit for bit.
pub fn save_csv(path: &Path, dataset: &Dataset, feature_names: Option<&[String]>) -> Result<()> {
    let p = dataset.num_features();
    let names: Vec<String> = match feature_names {
        Some(ns) => {
            if ns.len() != p {
                bail!("{} feature names for {p} features", ns.len());
            }
            ns.to_vec()
        }
        None => (0..p).map(|i| format!("f{i}")).collect(),
    };
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push_str(",label\n");
    for i in 0..dataset.len() {
        for v in dataset.features().row(i) {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", dataset.labels()[i]);
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crcen_core::RngStream;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), content).unwrap();
        f
    }

    #[test]
    fn loads_headerless_numeric_csv() {
        let f = write_tmp("1.0,2.0,1\n3.5,4.0,0\n0.5,0.25,1\n2.0,2.0,0\n");
        let loaded = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(loaded.dataset.len(), 4);
        assert_eq!((loaded.dataset.n0(), loaded.dataset.n1()), (2, 2));
        assert_eq!(loaded.label_name, "c2");
        // Balanced file: flagged, not rejected.
        assert!(loaded.warnings.iter().any(|w| w.contains("balanced")));
    }

    #[test]
    fn detects_header_row() {
        let f = write_tmp("height,width,label\n1.0,2.0,1\n3.0,4.0,0\n");
        let loaded = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(loaded.feature_names, vec!["height", "width"]);
        assert_eq!(loaded.dataset.len(), 2);
    }

    #[test]
    fn label_column_by_name_and_index() {
        let f = write_tmp("y,a,b\n1,5.0,6.0\n0,7.0,8.0\n");
        let by_name = load_csv(
            f.path(),
            &CsvOptions {
                label_col: Some(ColumnSel::Name("y".into())),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(by_name.dataset.num_features(), 2);
        assert_eq!(by_name.dataset.labels(), &[1, 0]);

        let by_index = load_csv(
            f.path(),
            &CsvOptions {
                label_col: Some(ColumnSel::Index(0)),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(by_index.dataset.labels(), &[1, 0]);
    }

    #[test]
    fn maps_two_valued_labels_by_count() {
        let f = write_tmp("a,cls\n1.0,pos\n2.0,neg\n3.0,neg\n4.0,neg\n");
        let loaded = load_csv(
            f.path(),
            &CsvOptions {
                map_labels: true,
                ..Default::default()
            },
        )
        .unwrap();
        // "pos" is rarer, so it becomes class 1.
        assert_eq!(loaded.dataset.labels(), &[1, 0, 0, 0]);
        assert_eq!(loaded.label_mapping, Some(("neg".into(), "pos".into())));
    }

    #[test]
    fn rejects_bad_rows_with_line_numbers() {
        let f = write_tmp("1.0,2.0,1\nx,4.0,0\n");
        let err = load_csv(f.path(), &CsvOptions::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");

        let f = write_tmp("1.0,2.0,1\n3.0,4.0,7\n");
        let err = load_csv(f.path(), &CsvOptions::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2") && err.contains("label"), "{err}");
    }

    #[test]
    fn rejects_single_class_and_missing_file() {
        let f = write_tmp("1.0,0\n2.0,0\n");
        assert!(load_csv(f.path(), &CsvOptions::default()).is_err());
        assert!(load_csv(Path::new("/nonexistent/x.csv"), &CsvOptions::default()).is_err());
    }

    #[test]
    fn save_then_load_restores_the_dataset_exactly() {
        let mut rng = RngStream::new(3);
        let x = Matrix::from_vec(20, 3, rng.sample_normal(0.0, 1.0, 60).unwrap()).unwrap();
        let y: Vec<u8> = (0..20).map(|i| u8::from(i % 4 == 0)).collect();
        let ds = Dataset::new(x, y).unwrap();

        let f = tempfile::NamedTempFile::new().unwrap();
        save_csv(f.path(), &ds, None).unwrap();
        let loaded = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(loaded.dataset, ds);
    }
}
