//! Tabular datasets with declared sensitive attributes.
//!
//! A [`SchemaConfig`] names which CSV columns are model features (continuous
//! or categorical), which are sensitive attributes, and which is the label.
//! Loading drops rows with missing values, one-hot encodes categorical
//! features, and codes sensitive/label columns against their declared
//! category lists. Joint sensitive-attribute values define the demographic
//! subgroups enumerated by [`enumerate_subgroups`].
//!
//! [`synth_biased`] draws controlled datasets with known per-group class
//! prevalences, Gaussian feature bundles informative of both class and
//! group, and optional per-group label noise.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

/// Cells equal to `?` or empty (after trimming) count as missing.
fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "?"
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

/// A model-input column. Categorical columns may declare their category
/// list; otherwise categories are discovered from the data (sorted).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

/// A sensitive column with its ordered (final) category list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitiveColumn {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelColumn {
    pub name: String,
    pub classes: Vec<String>,
}

/// Collapse a sensitive column to two buckets: raw values listed in `first`
/// map to the column's first declared category, everything else to the
/// second.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinarizeRule {
    pub column: String,
    pub first: Vec<String>,
}

/// Declarative description of a CSV dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub features: Vec<FeatureColumn>,
    pub sensitive: Vec<SensitiveColumn>,
    pub label: LabelColumn,
    #[serde(default)]
    pub binarize: Vec<BinarizeRule>,
}

impl SchemaConfig {
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for name in self
            .features
            .iter()
            .map(|c| &c.name)
            .chain(self.sensitive.iter().map(|c| &c.name))
            .chain(std::iter::once(&self.label.name))
        {
            if !seen.insert(name.clone()) {
                return Err(Error::Schema(format!(
                    "column `{name}` declared more than once"
                )));
            }
        }
        if self.sensitive.is_empty() {
            return Err(Error::Schema("no sensitive columns declared".into()));
        }
        for col in &self.sensitive {
            if col.values.len() < 2 {
                return Err(Error::Schema(format!(
                    "sensitive column `{}` declares {} categories, need at least 2",
                    col.name,
                    col.values.len()
                )));
            }
        }
        for col in &self.features {
            if let Some(values) = &col.values {
                if col.kind != ColumnKind::Categorical {
                    return Err(Error::Schema(format!(
                        "feature `{}` declares categories but is not categorical",
                        col.name
                    )));
                }
                if values.len() < 2 {
                    return Err(Error::Schema(format!(
                        "categorical feature `{}` declares {} categories, need at least 2",
                        col.name,
                        values.len()
                    )));
                }
            }
        }
        if self.label.classes.len() < 2 {
            return Err(Error::Schema("label declares fewer than 2 classes".into()));
        }
        for rule in &self.binarize {
            let col = self
                .sensitive
                .iter()
                .find(|c| c.name == rule.column)
                .ok_or_else(|| {
                    Error::Schema(format!(
                        "binarize rule references `{}`, not a declared sensitive column",
                        rule.column
                    ))
                })?;
            if col.values.len() != 2 {
                return Err(Error::Schema(format!(
                    "binarized column `{}` must declare exactly 2 categories, has {}",
                    col.name,
                    col.values.len()
                )));
            }
            if rule.first.is_empty() {
                return Err(Error::Schema(format!(
                    "binarize rule for `{}` lists no raw values",
                    rule.column
                )));
            }
        }
        Ok(())
    }
}

/// Per-column standardization statistics fitted on one dataset and
/// applicable to another with the same encoded layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Encoded dataset: continuous feature matrix, coded sensitive attributes,
/// coded labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Matrix,
    feature_names: Vec<String>,
    continuous_mask: Vec<bool>,
    /// Row-major |D| x (number of sensitive attributes).
    sensitive: Vec<usize>,
    sensitive_names: Vec<String>,
    sensitive_categories: Vec<Vec<String>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Assemble a dataset, checking the structural invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        features: Matrix,
        feature_names: Vec<String>,
        continuous_mask: Vec<bool>,
        sensitive: Vec<usize>,
        sensitive_names: Vec<String>,
        sensitive_categories: Vec<Vec<String>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let rows = features.rows();
        if rows == 0 {
            return Err(Error::EmptyData("dataset has no rows".into()));
        }
        let k = sensitive_names.len();
        if sensitive.len() != rows * k || labels.len() != rows {
            return Err(Error::Shape(format!(
                "row counts disagree: {} feature rows, {} sensitive cells (expected {}), {} labels",
                rows,
                sensitive.len(),
                rows * k,
                labels.len()
            )));
        }
        if feature_names.len() != features.cols() || continuous_mask.len() != features.cols() {
            return Err(Error::Shape("feature metadata width mismatch".into()));
        }
        if sensitive_categories.len() != k {
            return Err(Error::Shape("sensitive metadata width mismatch".into()));
        }
        if !features.is_finite() {
            return Err(Error::Value {
                row: 0,
                msg: "encoded features contain non-finite values".into(),
            });
        }
        for (i, chunk) in sensitive.chunks_exact(k.max(1)).enumerate() {
            for (a, &code) in chunk.iter().enumerate() {
                if k > 0 && code >= sensitive_categories[a].len() {
                    return Err(Error::Value {
                        row: i + 1,
                        msg: format!(
                            "sensitive code {code} outside `{}`'s {} categories",
                            sensitive_names[a],
                            sensitive_categories[a].len()
                        ),
                    });
                }
            }
        }
        let num_classes = class_names.len();
        if let Some((i, &code)) = labels.iter().enumerate().find(|(_, &c)| c >= num_classes) {
            return Err(Error::Value {
                row: i + 1,
                msg: format!("label code {code} outside {num_classes} classes"),
            });
        }
        Ok(Dataset {
            features,
            feature_names,
            continuous_mask,
            sensitive,
            sensitive_names,
            sensitive_categories,
            labels,
            class_names,
        })
    }

    /// Convenience constructor with generated column/category names, for
    /// synthetic and test data. `sensitive` is row-major with one code per
    /// declared arity.
    pub fn from_codes(
        features: Matrix,
        sensitive: Vec<usize>,
        sensitive_arities: &[usize],
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let feature_names = (0..features.cols()).map(|i| format!("f{i}")).collect();
        let continuous_mask = vec![true; features.cols()];
        let sensitive_names = (0..sensitive_arities.len())
            .map(|i| format!("s{i}"))
            .collect();
        let sensitive_categories = sensitive_arities
            .iter()
            .map(|&k| (0..k).map(|v| format!("a{v}")).collect())
            .collect();
        let class_names = (0..num_classes).map(|c| format!("c{c}")).collect();
        Dataset::new(
            features,
            feature_names,
            continuous_mask,
            sensitive,
            sensitive_names,
            sensitive_categories,
            labels,
            class_names,
        )
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn continuous_mask(&self) -> &[bool] {
        &self.continuous_mask
    }

    pub fn num_sensitive(&self) -> usize {
        self.sensitive_names.len()
    }

    pub fn sensitive_row(&self, row: usize) -> &[usize] {
        let k = self.num_sensitive();
        &self.sensitive[row * k..(row + 1) * k]
    }

    pub fn sensitive_names(&self) -> &[String] {
        &self.sensitive_names
    }

    pub fn sensitive_categories(&self) -> &[Vec<String>] {
        &self.sensitive_categories
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::EmptyData("row selection is empty".into()));
        }
        let k = self.num_sensitive();
        let mut sensitive = Vec::with_capacity(indices.len() * k);
        let mut labels = Vec::with_capacity(indices.len());
        for &r in indices {
            sensitive.extend_from_slice(self.sensitive_row(r));
            labels.push(self.labels[r]);
        }
        Ok(Dataset {
            features: self.features.select_rows(indices),
            feature_names: self.feature_names.clone(),
            continuous_mask: self.continuous_mask.clone(),
            sensitive,
            sensitive_names: self.sensitive_names.clone(),
            sensitive_categories: self.sensitive_categories.clone(),
            labels,
            class_names: self.class_names.clone(),
        })
    }

    /// Fit standardization statistics on this dataset's continuous columns.
    /// One-hot and otherwise non-continuous columns get identity stats.
    pub fn fit_standardizer(&self) -> Standardizer {
        let n = self.len() as f64;
        let cols = self.features.cols();
        let mut means = vec![0.0; cols];
        let mut stds = vec![1.0; cols];
        for c in 0..cols {
            if !self.continuous_mask[c] {
                continue;
            }
            let mut sum = 0.0;
            for r in 0..self.len() {
                sum += self.features.get(r, c);
            }
            let mean = sum / n;
            let mut var = 0.0;
            for r in 0..self.len() {
                let d = self.features.get(r, c) - mean;
                var += d * d;
            }
            var /= n;
            means[c] = mean;
            // Constant columns stay centered rather than dividing by ~0.
            stds[c] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        }
        Standardizer { means, stds }
    }

    /// Apply previously fitted standardization statistics in place.
    pub fn apply_standardizer(&mut self, stats: &Standardizer) -> Result<()> {
        if stats.means.len() != self.features.cols() {
            return Err(Error::Shape(format!(
                "standardizer fitted on {} columns, dataset has {}",
                stats.means.len(),
                self.features.cols()
            )));
        }
        for r in 0..self.features.rows() {
            let row = self.features.row_mut(r);
            for (c, v) in row.iter_mut().enumerate() {
                *v = (*v - stats.means[c]) / stats.stds[c];
            }
        }
        Ok(())
    }

    /// Model input matrix: the encoded features, optionally extended with a
    /// one-hot encoding of each sensitive attribute.
    pub fn model_inputs(&self, include_sensitive: bool) -> Matrix {
        if !include_sensitive {
            return self.features.clone();
        }
        let extra: usize = self.sensitive_categories.iter().map(|c| c.len()).sum();
        let cols = self.features.cols() + extra;
        let mut out = Matrix::zeros(self.len(), cols);
        for r in 0..self.len() {
            out.row_mut(r)[..self.features.cols()].copy_from_slice(self.features.row(r));
            let mut offset = self.features.cols();
            for (a, &code) in self.sensitive_row(r).iter().enumerate() {
                out.set(r, offset + code, 1.0);
                offset += self.sensitive_categories[a].len();
            }
        }
        out
    }
}

/// Enumeration of the joint sensitive-attribute values observed in a
/// dataset, ordered lexicographically over attribute codes.
#[derive(Debug, Clone)]
pub struct SubgroupIndex {
    groups: Vec<Vec<usize>>,
    labels: Vec<String>,
    counts: Vec<usize>,
    row_group: Vec<usize>,
}

impl SubgroupIndex {
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// Joint attribute codes of group `g`.
    pub fn group_codes(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    /// Printable label, e.g. `White|Male`.
    pub fn group_label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn count(&self, g: usize) -> usize {
        self.counts[g]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Group id of each dataset row.
    pub fn row_group(&self) -> &[usize] {
        &self.row_group
    }

    pub fn total(&self) -> usize {
        self.row_group.len()
    }

    /// True when the two groups share no attribute value, i.e. they differ
    /// in every sensitive attribute.
    pub fn fully_disjoint(&self, a: usize, b: usize) -> bool {
        self.groups[a]
            .iter()
            .zip(&self.groups[b])
            .all(|(x, y)| x != y)
    }
}

/// List every joint sensitive value present in the dataset with its count
/// and assign each row its group id.
pub fn enumerate_subgroups(ds: &Dataset) -> SubgroupIndex {
    let k = ds.num_sensitive();
    let mut ordered: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for r in 0..ds.len() {
        *ordered.entry(ds.sensitive_row(r).to_vec()).or_insert(0) += 1;
    }
    let groups: Vec<Vec<usize>> = ordered.keys().cloned().collect();
    let counts: Vec<usize> = ordered.values().copied().collect();
    let id_of: BTreeMap<&[usize], usize> = groups
        .iter()
        .enumerate()
        .map(|(i, g)| (g.as_slice(), i))
        .collect();
    let row_group = (0..ds.len())
        .map(|r| id_of[ds.sensitive_row(r)])
        .collect();
    let labels = groups
        .iter()
        .map(|codes| {
            (0..k)
                .map(|a| ds.sensitive_categories()[a][codes[a]].clone())
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect();
    SubgroupIndex {
        groups,
        labels,
        counts,
        row_group,
    }
}

struct ColumnPlan {
    index: usize,
    kind: ColumnKind,
    declared: Option<Vec<String>>,
}

/// Load and encode a CSV file, then standardize continuous columns over the
/// loaded data. Use [`load_csv_raw`] plus [`Dataset::fit_standardizer`] when
/// statistics must come from a training split only.
pub fn load_csv(path: impl AsRef<Path>, schema: &SchemaConfig) -> Result<Dataset> {
    let mut ds = load_csv_raw(path, schema)?;
    let stats = ds.fit_standardizer();
    ds.apply_standardizer(&stats)?;
    Ok(ds)
}

/// Load and encode a CSV file without standardization.
pub fn load_csv_raw(path: impl AsRef<Path>, schema: &SchemaConfig) -> Result<Dataset> {
    schema.validate()?;
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;

    let headers = reader.headers()?.clone();
    let column_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` missing from CSV header")))
    };

    let feature_plans: Vec<ColumnPlan> = schema
        .features
        .iter()
        .map(|c| {
            Ok(ColumnPlan {
                index: column_index(&c.name)?,
                kind: c.kind,
                declared: c.values.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let sensitive_indices: Vec<usize> = schema
        .sensitive
        .iter()
        .map(|c| column_index(&c.name))
        .collect::<Result<_>>()?;
    let label_index = column_index(&schema.label.name)?;
    let binarize_of: Vec<Option<&BinarizeRule>> = schema
        .sensitive
        .iter()
        .map(|c| schema.binarize.iter().find(|r| r.column == c.name))
        .collect();

    // First pass: filter, code sensitive/label, keep raw feature cells.
    let mut rows_continuous: Vec<Vec<f64>> = Vec::new();
    let mut rows_categorical: Vec<Vec<String>> = Vec::new();
    let mut sensitive: Vec<usize> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let continuous_count = feature_plans
        .iter()
        .filter(|p| p.kind == ColumnKind::Continuous)
        .count();
    let categorical_count = feature_plans.len() - continuous_count;

    for (row_number, record) in reader.records().enumerate() {
        let row_number = row_number + 1;
        let record = record?;
        let declared_cells = feature_plans
            .iter()
            .map(|p| p.index)
            .chain(sensitive_indices.iter().copied())
            .chain(std::iter::once(label_index));
        let mut missing = false;
        for idx in declared_cells {
            match record.get(idx) {
                Some(cell) if !is_missing(cell) => {}
                _ => {
                    missing = true;
                    break;
                }
            }
        }
        if missing {
            continue;
        }

        let mut cont = Vec::with_capacity(continuous_count);
        let mut cat = Vec::with_capacity(categorical_count);
        for plan in &feature_plans {
            let cell = record.get(plan.index).unwrap();
            match plan.kind {
                ColumnKind::Continuous => {
                    let v: f64 = cell.parse().map_err(|_| Error::Value {
                        row: row_number,
                        msg: format!("cannot parse `{cell}` as a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Value {
                            row: row_number,
                            msg: format!("non-finite value `{cell}`"),
                        });
                    }
                    cont.push(v);
                }
                ColumnKind::Categorical => {
                    if let Some(declared) = &plan.declared {
                        if !declared.iter().any(|v| v == cell) {
                            return Err(Error::Value {
                                row: row_number,
                                msg: format!("unknown category `{cell}`"),
                            });
                        }
                    }
                    cat.push(cell.to_string());
                }
            }
        }

        for (a, (col, &idx)) in schema.sensitive.iter().zip(&sensitive_indices).enumerate() {
            let cell = record.get(idx).unwrap();
            let code = match binarize_of[a] {
                Some(rule) => usize::from(!rule.first.iter().any(|v| v == cell)),
                None => col
                    .values
                    .iter()
                    .position(|v| v == cell)
                    .ok_or_else(|| Error::Value {
                        row: row_number,
                        msg: format!("unknown category `{cell}` for sensitive `{}`", col.name),
                    })?,
            };
            sensitive.push(code);
        }

        let label_cell = record.get(label_index).unwrap();
        let label = schema
            .label
            .classes
            .iter()
            .position(|v| v == label_cell)
            .ok_or_else(|| Error::Value {
                row: row_number,
                msg: format!("unknown label `{label_cell}`"),
            })?;
        labels.push(label);

        rows_continuous.push(cont);
        rows_categorical.push(cat);
    }

    if labels.is_empty() {
        return Err(Error::EmptyData(format!(
            "{}: no rows left after filtering missing values",
            path.display()
        )));
    }

    // Category lists: declared order where given, sorted discovery otherwise.
    let categorical_plans: Vec<(usize, &FeatureColumn)> = schema
        .features
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColumnKind::Categorical)
        .map(|(slot, c)| (slot, c))
        .collect();
    let mut category_lists: Vec<Vec<String>> = Vec::with_capacity(categorical_plans.len());
    for (cat_slot, (_, col)) in categorical_plans.iter().enumerate() {
        if let Some(declared) = &col.values {
            category_lists.push(declared.clone());
        } else {
            let observed: BTreeSet<String> = rows_categorical
                .iter()
                .map(|row| row[cat_slot].clone())
                .collect();
            category_lists.push(observed.into_iter().collect());
        }
    }

    // Encoded layout follows schema order: continuous columns get one slot,
    // categorical columns one slot per category.
    let mut feature_names = Vec::new();
    let mut continuous_mask = Vec::new();
    for col in &schema.features {
        match col.kind {
            ColumnKind::Continuous => {
                feature_names.push(col.name.clone());
                continuous_mask.push(true);
            }
            ColumnKind::Categorical => {
                let cat_slot = categorical_plans
                    .iter()
                    .position(|(_, c)| c.name == col.name)
                    .unwrap();
                for value in &category_lists[cat_slot] {
                    feature_names.push(format!("{}={}", col.name, value));
                    continuous_mask.push(false);
                }
            }
        }
    }

    let width = feature_names.len();
    let mut features = Matrix::zeros(labels.len(), width);
    for r in 0..labels.len() {
        let mut cont_iter = rows_continuous[r].iter();
        let mut offset = 0;
        let mut cat_slot = 0;
        for col in &schema.features {
            match col.kind {
                ColumnKind::Continuous => {
                    features.set(r, offset, *cont_iter.next().unwrap());
                    offset += 1;
                }
                ColumnKind::Categorical => {
                    let cell = &rows_categorical[r][cat_slot];
                    let pos = category_lists[cat_slot]
                        .iter()
                        .position(|v| v == cell)
                        .expect("discovered categories cover all kept rows");
                    features.set(r, offset + pos, 1.0);
                    offset += category_lists[cat_slot].len();
                    cat_slot += 1;
                }
            }
        }
    }

    Dataset::new(
        features,
        feature_names,
        continuous_mask,
        sensitive,
        schema.sensitive.iter().map(|c| c.name.clone()).collect(),
        schema.sensitive.iter().map(|c| c.values.clone()).collect(),
        labels,
        schema.label.classes.clone(),
    )
}

/// Disjoint train/test split by seeded shuffle. The train side gets
/// `floor(len * train_fraction)` rows; original row order is preserved
/// within each side.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n = ds.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Config(format!(
            "fraction {train_fraction} leaves an empty side for {n} rows"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let mut train_idx = indices[..n_train].to_vec();
    let mut test_idx = indices[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((ds.select_rows(&train_idx)?, ds.select_rows(&test_idx)?))
}

/// Per-group recipe for the synthetic generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthGroupSpec {
    /// Mixture weight; weights must sum to 1.
    pub weight: f64,
    /// Class distribution `P(Y = c | A = g)`; must be a simplex.
    pub class_probs: Vec<f64>,
    /// Probability of replacing the drawn label with a uniformly random
    /// other class, after features are drawn. Decouples the label from the
    /// features for that group.
    #[serde(default)]
    pub label_noise: f64,
}

/// Generator configuration for controlled biased datasets.
///
/// Features live in `num_classes + num_groups` dimensions: the class block
/// holds a one-hot bump of height `class_separation` at the clean class, the
/// group block one of height `group_separation` at the group, both plus
/// isotropic Gaussian noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub rows: usize,
    pub num_classes: usize,
    pub groups: Vec<SynthGroupSpec>,
    /// Arity of each sensitive attribute; product must equal `groups.len()`.
    /// Defaults to a single attribute covering all groups.
    #[serde(default)]
    pub sensitive_arities: Vec<usize>,
    pub noise_scale: f64,
    pub class_separation: f64,
    pub group_separation: f64,
}

impl SynthConfig {
    /// Two-or-more-group binary-label shorthand: one prevalence
    /// `P(Y=1 | A=g)` per equally weighted group.
    pub fn binary(rows: usize, prevalences: &[f64], noise_scale: f64) -> Self {
        let w = 1.0 / prevalences.len() as f64;
        SynthConfig {
            rows,
            num_classes: 2,
            groups: prevalences
                .iter()
                .map(|&p| SynthGroupSpec {
                    weight: w,
                    class_probs: vec![1.0 - p, p],
                    label_noise: 0.0,
                })
                .collect(),
            sensitive_arities: vec![prevalences.len()],
            noise_scale,
            class_separation: 1.0,
            group_separation: 1.0,
        }
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.num_classes + self.num_groups()
    }

    /// Mean feature vector of the (group, clean class) cell.
    pub fn cell_mean(&self, group: usize, class: usize) -> Vec<f64> {
        let mut mean = vec![0.0; self.feature_dim()];
        mean[class] = self.class_separation;
        mean[self.num_classes + group] = self.group_separation;
        mean
    }

    fn arities(&self) -> Vec<usize> {
        if self.sensitive_arities.is_empty() {
            vec![self.num_groups()]
        } else {
            self.sensitive_arities.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 {
            return Err(Error::Config("generator row count is 0".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::Config("generator needs at least 2 classes".into()));
        }
        if self.groups.is_empty() {
            return Err(Error::Config("generator declares no groups".into()));
        }
        let weight_sum: f64 = self.groups.iter().map(|g| g.weight).sum();
        if (weight_sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "mixture weights sum to {weight_sum}, expected 1"
            )));
        }
        for (g, spec) in self.groups.iter().enumerate() {
            if spec.weight < 0.0 {
                return Err(Error::Config(format!("group {g} has negative weight")));
            }
            if spec.class_probs.len() != self.num_classes {
                return Err(Error::Config(format!(
                    "group {g} declares {} class probabilities, expected {}",
                    spec.class_probs.len(),
                    self.num_classes
                )));
            }
            if spec.class_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Config(format!(
                    "group {g} has a class probability outside [0, 1]"
                )));
            }
            let s: f64 = spec.class_probs.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "group {g} class probabilities sum to {s}, expected 1"
                )));
            }
            if !(0.0..=1.0).contains(&spec.label_noise) {
                return Err(Error::Config(format!(
                    "group {g} label noise outside [0, 1]"
                )));
            }
        }
        if !(self.noise_scale > 0.0) {
            return Err(Error::Config("noise scale must be positive".into()));
        }
        let arity_product: usize = self.arities().iter().product();
        if arity_product != self.num_groups() {
            return Err(Error::Config(format!(
                "sensitive arities produce {arity_product} cells for {} groups",
                self.num_groups()
            )));
        }
        Ok(())
    }
}

/// Draw a dataset i.i.d. from the declared joint. Deterministic per seed.
pub fn synth_biased(spec: &SynthConfig, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, spec.noise_scale)
        .map_err(|e| Error::Config(format!("noise scale: {e}")))?;

    let arities = spec.arities();
    let dim = spec.feature_dim();
    let mut features = Matrix::zeros(spec.rows, dim);
    let mut sensitive = Vec::with_capacity(spec.rows * arities.len());
    let mut labels = Vec::with_capacity(spec.rows);

    for r in 0..spec.rows {
        let mut u: f64 = rng.random();
        let mut group = spec.num_groups() - 1;
        for (g, s) in spec.groups.iter().enumerate() {
            if u < s.weight {
                group = g;
                break;
            }
            u -= s.weight;
        }

        let mut u: f64 = rng.random();
        let probs = &spec.groups[group].class_probs;
        let mut class = spec.num_classes - 1;
        for (c, &p) in probs.iter().enumerate() {
            if u < p {
                class = c;
                break;
            }
            u -= p;
        }

        let mean = spec.cell_mean(group, class);
        let row = features.row_mut(r);
        for (f, &m) in row.iter_mut().zip(&mean) {
            *f = m + rng.sample(normal);
        }

        // Label noise redirects the observed label away from the class the
        // features were drawn for.
        let mut label = class;
        let noise = spec.groups[group].label_noise;
        if noise > 0.0 && rng.random::<f64>() < noise {
            let shift = 1 + rng.random_range(0..spec.num_classes - 1);
            label = (class + shift) % spec.num_classes;
        }
        labels.push(label);

        // Mixed-radix decode of the flat group id into attribute codes.
        let mut rem = group;
        for &arity in arities.iter().rev() {
            sensitive.push(rem % arity);
            rem /= arity;
        }
        let k = arities.len();
        let start = r * k;
        sensitive[start..start + k].reverse();
    }

    Dataset::from_codes(features, sensitive, &arities, labels, spec.num_classes)
}
