//! The 12-column mutation table, its encoder, and train/test splitting.
//!
//! Every record becomes an 11-element input vector: the mutation position
//! min-max scaled into [0,1], then one scalar per categorical column equal to
//! the value's index in the sorted vocabulary divided by `|V| - 1`. The
//! cancer label becomes the scalar target `index / (C - 1)`.

use std::collections::BTreeSet;
use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of input features per record.
pub const N_FEATURES: usize = 11;

/// Column names in file order.
pub const COLUMNS: [&str; 12] = [
    "mutation_position",
    "wt_codon",
    "wt_codon_2",
    "mutant",
    "wt_aa",
    "mutant_aa",
    "event",
    "mutant_flag",
    "type_1",
    "type_2",
    "gene_location",
    "cancer",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DatasetError {
    #[error("missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("row {row}: mutation_position {value:?} is not a positive integer")]
    BadInteger { row: usize, value: String },
    #[error("no data rows")]
    EmptyFile,
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("need at least two distinct cancer labels")]
    SingleClass,
    #[error("no records")]
    Empty,
    #[error("{field}: unknown value {value:?} (allowed: {})", allowed.join(", "))]
    UnknownCategory {
        field: &'static str,
        value: String,
        allowed: Vec<String>,
    },
    #[error("unknown cancer label {0:?}")]
    UnknownLabel(String),
    #[error("invalid encoder: {0}")]
    InvalidEncoder(String),
}

/// The ten categorical input columns, in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CategoricalField {
    WtCodon,
    WtCodon2,
    Mutant,
    WtAa,
    MutantAa,
    Event,
    MutantFlag,
    Type1,
    Type2,
    GeneLocation,
}

impl CategoricalField {
    pub const ALL: [CategoricalField; 10] = [
        CategoricalField::WtCodon,
        CategoricalField::WtCodon2,
        CategoricalField::Mutant,
        CategoricalField::WtAa,
        CategoricalField::MutantAa,
        CategoricalField::Event,
        CategoricalField::MutantFlag,
        CategoricalField::Type1,
        CategoricalField::Type2,
        CategoricalField::GeneLocation,
    ];

    pub fn name(self) -> &'static str {
        COLUMNS[self as usize + 1]
    }
}

/// One row of the mutation table. All categorical columns are opaque strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Record {
    pub mutation_position: u64,
    pub wt_codon: String,
    pub wt_codon_2: String,
    pub mutant: String,
    pub wt_aa: String,
    pub mutant_aa: String,
    pub event: String,
    pub mutant_flag: String,
    pub type_1: String,
    pub type_2: String,
    pub gene_location: String,
    pub cancer: String,
}

impl Record {
    pub fn get(&self, field: CategoricalField) -> &str {
        match field {
            CategoricalField::WtCodon => &self.wt_codon,
            CategoricalField::WtCodon2 => &self.wt_codon_2,
            CategoricalField::Mutant => &self.mutant,
            CategoricalField::WtAa => &self.wt_aa,
            CategoricalField::MutantAa => &self.mutant_aa,
            CategoricalField::Event => &self.event,
            CategoricalField::MutantFlag => &self.mutant_flag,
            CategoricalField::Type1 => &self.type_1,
            CategoricalField::Type2 => &self.type_2,
            CategoricalField::GeneLocation => &self.gene_location,
        }
    }

    pub fn get_mut(&mut self, field: CategoricalField) -> &mut String {
        match field {
            CategoricalField::WtCodon => &mut self.wt_codon,
            CategoricalField::WtCodon2 => &mut self.wt_codon_2,
            CategoricalField::Mutant => &mut self.mutant,
            CategoricalField::WtAa => &mut self.wt_aa,
            CategoricalField::MutantAa => &mut self.mutant_aa,
            CategoricalField::Event => &mut self.event,
            CategoricalField::MutantFlag => &mut self.mutant_flag,
            CategoricalField::Type1 => &mut self.type_1,
            CategoricalField::Type2 => &mut self.type_2,
            CategoricalField::GeneLocation => &mut self.gene_location,
        }
    }
}

/// Reads the table from CSV. Header names are matched case-insensitively and
/// may appear in any order; extra columns are ignored.
pub fn load_records<R: Read>(input: R) -> Result<Vec<Record>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| DatasetError::Csv(e.to_string()))?
        .clone();
    let mut index = [0usize; 12];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or(DatasetError::MissingColumn(name))?;
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| DatasetError::Csv(e.to_string()))?;
        let row_no = i + 1;
        let col = |c: usize| row.get(index[c]).unwrap_or("").to_string();
        let pos_text = col(0);
        let mutation_position = match pos_text.trim().parse::<u64>() {
            Ok(p) if p >= 1 => p,
            _ => {
                return Err(DatasetError::BadInteger {
                    row: row_no,
                    value: pos_text,
                })
            }
        };
        records.push(Record {
            mutation_position,
            wt_codon: col(1),
            wt_codon_2: col(2),
            mutant: col(3),
            wt_aa: col(4),
            mutant_aa: col(5),
            event: col(6),
            mutant_flag: col(7),
            type_1: col(8),
            type_2: col(9),
            gene_location: col(10),
            cancer: col(11),
        });
    }
    if records.is_empty() {
        return Err(DatasetError::EmptyFile);
    }
    Ok(records)
}

/// Writes records back out with the canonical header.
pub fn write_records(records: &[Record]) -> Result<String, DatasetError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| DatasetError::Csv(e.to_string());
    w.write_record(COLUMNS).map_err(err)?;
    for r in records {
        let pos = r.mutation_position.to_string();
        let mut row = vec![pos.as_str()];
        row.extend(CategoricalField::ALL.iter().map(|f| r.get(*f)));
        row.push(&r.cancer);
        w.write_record(&row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| DatasetError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 strings"))
}

/// Sorted vocabularies for the categorical columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabularies {
    pub wt_codon: Vec<String>,
    pub wt_codon_2: Vec<String>,
    pub mutant: Vec<String>,
    pub wt_aa: Vec<String>,
    pub mutant_aa: Vec<String>,
    pub event: Vec<String>,
    pub mutant_flag: Vec<String>,
    pub type_1: Vec<String>,
    pub type_2: Vec<String>,
    pub gene_location: Vec<String>,
}

impl Vocabularies {
    pub fn get(&self, field: CategoricalField) -> &[String] {
        match field {
            CategoricalField::WtCodon => &self.wt_codon,
            CategoricalField::WtCodon2 => &self.wt_codon_2,
            CategoricalField::Mutant => &self.mutant,
            CategoricalField::WtAa => &self.wt_aa,
            CategoricalField::MutantAa => &self.mutant_aa,
            CategoricalField::Event => &self.event,
            CategoricalField::MutantFlag => &self.mutant_flag,
            CategoricalField::Type1 => &self.type_1,
            CategoricalField::Type2 => &self.type_2,
            CategoricalField::GeneLocation => &self.gene_location,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoder {
    pub vocabularies: Vocabularies,
    pub position_min: u64,
    pub position_max: u64,
    pub labels: Vec<String>,
}

/// One encoded training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: [f64; N_FEATURES],
    pub t: f64,
}

fn sorted_distinct<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    values
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect()
}

fn is_sorted_distinct(v: &[String]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn scaled_index(index: usize, len: usize) -> f64 {
    if len <= 1 {
        0.0
    } else {
        index as f64 / (len - 1) as f64
    }
}

/// Builds vocabularies and the position range. Order-independent.
pub fn fit_encoder(records: &[Record]) -> Result<Encoder, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    let vocab = |f: CategoricalField| sorted_distinct(records.iter().map(|r| r.get(f)));
    let vocabularies = Vocabularies {
        wt_codon: vocab(CategoricalField::WtCodon),
        wt_codon_2: vocab(CategoricalField::WtCodon2),
        mutant: vocab(CategoricalField::Mutant),
        wt_aa: vocab(CategoricalField::WtAa),
        mutant_aa: vocab(CategoricalField::MutantAa),
        event: vocab(CategoricalField::Event),
        mutant_flag: vocab(CategoricalField::MutantFlag),
        type_1: vocab(CategoricalField::Type1),
        type_2: vocab(CategoricalField::Type2),
        gene_location: vocab(CategoricalField::GeneLocation),
    };
    let labels = sorted_distinct(records.iter().map(|r| r.cancer.as_str()).filter(|c| !c.is_empty()));
    if labels.len() < 2 {
        return Err(DatasetError::SingleClass);
    }
    let positions = records.iter().map(|r| r.mutation_position);
    Ok(Encoder {
        vocabularies,
        position_min: positions.clone().min().expect("non-empty"),
        position_max: positions.max().expect("non-empty"),
        labels,
    })
}

impl Encoder {
    /// Checks the structural invariants of a deserialized encoder.
    pub fn validate(&self) -> Result<(), DatasetError> {
        for f in CategoricalField::ALL {
            let v = self.vocabularies.get(f);
            if v.is_empty() || !is_sorted_distinct(v) {
                return Err(DatasetError::InvalidEncoder(format!(
                    "vocabulary {} must be non-empty, sorted and duplicate-free",
                    f.name()
                )));
            }
        }
        if self.labels.len() < 2 || !is_sorted_distinct(&self.labels) {
            return Err(DatasetError::InvalidEncoder(
                "label vocabulary must hold at least two sorted distinct labels".into(),
            ));
        }
        if self.position_min > self.position_max {
            return Err(DatasetError::InvalidEncoder("position_min exceeds position_max".into()));
        }
        Ok(())
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    /// The 11 input features of a record; the cancer column is ignored.
    pub fn encode_features(&self, r: &Record) -> Result<[f64; N_FEATURES], DatasetError> {
        let mut x = [0.0; N_FEATURES];
        x[0] = if self.position_max == self.position_min {
            0.5
        } else {
            let span = (self.position_max - self.position_min) as f64;
            ((r.mutation_position as f64 - self.position_min as f64) / span).clamp(0.0, 1.0)
        };
        for (slot, field) in x[1..].iter_mut().zip(CategoricalField::ALL) {
            let vocab = self.vocabularies.get(field);
            let value = r.get(field);
            let idx = vocab
                .binary_search_by(|probe| probe.as_str().cmp(value))
                .map_err(|_| DatasetError::UnknownCategory {
                    field: field.name(),
                    value: value.to_string(),
                    allowed: vocab.to_vec(),
                })?;
            *slot = scaled_index(idx, vocab.len());
        }
        Ok(x)
    }

    pub fn target(&self, label: &str) -> Result<f64, DatasetError> {
        let idx = self
            .labels
            .binary_search_by(|probe| probe.as_str().cmp(label))
            .map_err(|_| DatasetError::UnknownLabel(label.to_string()))?;
        Ok(scaled_index(idx, self.labels.len()))
    }

    pub fn encode(&self, r: &Record) -> Result<Example, DatasetError> {
        Ok(Example {
            x: self.encode_features(r)?,
            t: self.target(&r.cancer)?,
        })
    }

    /// Index of the label whose target is nearest `y`; ties go to the lower
    /// index.
    pub fn decode_index(&self, y: f64) -> usize {
        let y = if y.is_nan() { 0.0 } else { y.clamp(0.0, 1.0) };
        let c = self.labels.len();
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for i in 0..c {
            let d = (y - scaled_index(i, c)).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        best
    }

    pub fn decode_label(&self, y: f64) -> &str {
        &self.labels[self.decode_index(y)]
    }
}

/// Convenience wrapper around [`Encoder::encode`].
pub fn encode(r: &Record, e: &Encoder) -> Result<Example, DatasetError> {
    e.encode(r)
}

pub fn decode_label(y: f64, e: &Encoder) -> &str {
    e.decode_label(y)
}

/// Number of test records for a split of `n` at `test_fraction`.
pub fn test_count(n: usize, test_fraction: f64) -> usize {
    let raw = n as f64 * test_fraction.clamp(0.0, 1.0);
    // absorb representation error such as 0.1 * 30 = 3.0000000000000004
    ((raw - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Seeded shuffle, then the first `ceil(n * test_fraction)` records become the
/// test set. Both halves keep the shuffled order.
pub fn split<T: Clone>(records: &[T], test_fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let mut shuffled = records.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let n_test = test_count(records.len(), test_fraction);
    let train = shuffled.split_off(n_test);
    (train, shuffled)
}
