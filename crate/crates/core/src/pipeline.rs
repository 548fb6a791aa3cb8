//! End-to-end flows behind the command-line tool: detection, training,
//! classification from sequences or from manually entered fields, and
//! evaluation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::align::Scoring;
use crate::bpnn::{self, init_network, load_model, save_model, ModelError, Network, Sample, StopReason, Topology, TrainConfig, TrainReport};
use crate::dataset::{self, fit_encoder, load_records, CategoricalField, DatasetError, Encoder, Record, N_FEATURES};
use crate::mutcall::{diagnose, Diagnosis, MutError, MutationRecord, Structural, SubstClass, Verdict};
use crate::seqcore::{parse_fasta, SeqError, Sequence};

/// Value used for the opaque second table column when a record is derived
/// from sequence data.
pub const DERIVED_WT_CODON: &str = "AT";
/// Value used for the `type_1` column of sequence-derived records.
pub const DERIVED_TYPE_1: &str = "SN";
/// `type_2` value the table uses for insertions and deletions.
pub const INDEL_TYPE_2: &str = "Fe";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Fasta { path: PathBuf, source: SeqError },
    #[error("{path}: {source}")]
    Dataset { path: PathBuf, source: DatasetError },
    #[error(transparent)]
    Analysis(#[from] MutError),
    #[error("cannot read model {path}: {message}")]
    ModelRead { path: PathBuf, message: String },
    #[error("model {path}: {source}")]
    Model { path: PathBuf, source: ModelError },
    #[error("{0}")]
    UnknownCategory(DatasetError),
    #[error("failed to write {path}: {message}")]
    WriteFailed { path: PathBuf, message: String },
    #[error("training failed: {0}")]
    Training(String),
}

impl PipelineError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 2,
            PipelineError::Read { .. }
            | PipelineError::Fasta { .. }
            | PipelineError::Dataset { .. }
            | PipelineError::Analysis(_) => 3,
            PipelineError::ModelRead { .. } | PipelineError::Model { .. } => 4,
            PipelineError::UnknownCategory(_) => 5,
            PipelineError::WriteFailed { .. } | PipelineError::Training(_) => 1,
        }
    }
}

fn read_text(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| PipelineError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads the first record of a FASTA file.
pub fn read_fasta_first(path: &Path) -> Result<Sequence, PipelineError> {
    let text = read_text(path)?;
    let mut seqs = parse_fasta(&text).map_err(|source| PipelineError::Fasta {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(seqs.swap_remove(0))
}

pub fn read_fasta_all(path: &Path) -> Result<Vec<Sequence>, PipelineError> {
    let text = read_text(path)?;
    parse_fasta(&text).map_err(|source| PipelineError::Fasta {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_records(path: &Path) -> Result<Vec<Record>, PipelineError> {
    let file = fs::File::open(path).map_err(|e| PipelineError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    load_records(std::io::BufReader::new(file)).map_err(|source| PipelineError::Dataset {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `contents` next to `path` under a temporary name, then renames it
/// into place. On failure nothing is left at `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    let fail = |e: std::io::Error| PipelineError::WriteFailed {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| fail(std::io::Error::other("path has no file name")))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(fail(e));
    }
    Ok(())
}

/// A trained network with its encoder and the digest of the file it came
/// from.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub network: Network,
    pub encoder: Encoder,
    /// Hex SHA-256 of the serialized model.
    pub id: String,
}

pub fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Model {
    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let (network, encoder) = load_model(text)?;
        if network.topology.n_in != N_FEATURES || network.topology.n_out != 1 {
            return Err(ModelError::DimensionMismatch {
                field: "topology",
                expected: N_FEATURES,
                got: network.topology.n_in,
            });
        }
        Ok(Model {
            network,
            encoder,
            id: digest_hex(text.as_bytes()),
        })
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::ModelRead {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_text(&text).map_err(|source| PipelineError::Model {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Raw network output for a record's 11 input fields.
    pub fn score(&self, record: &Record) -> Result<f64, DatasetError> {
        let x = self.encoder.encode_features(record)?;
        let y = self.network.predict(&x).expect("model topology checked on load");
        Ok(y[0])
    }

    pub fn classify(&self, record: &Record) -> Result<Prediction, DatasetError> {
        let y = self.score(record)?;
        Ok(Prediction {
            label: self.encoder.decode_label(y).to_string(),
            y,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub label: String,
    pub y: f64,
}

/// Maps a called mutation onto the table's 11 input columns.
///
/// Columns the sequence cannot determine get fixed values: the second table
/// column is `AT`, `type_1` is `SN`, the mutant flag is `B`/`F`/`I` for
/// substitution/frameshift/in-frame indel, and indels carry `Fe` as `type_2`.
pub fn record_from_mutation(m: &MutationRecord, gene_location: &str) -> Record {
    let (flag, type_2) = match m.structural {
        Structural::Substitution => ("B", m.subst_class.as_str()),
        Structural::Frameshift => ("F", INDEL_TYPE_2),
        Structural::InFrameIndel => ("I", INDEL_TYPE_2),
    };
    debug_assert!(m.structural != Structural::Substitution || m.subst_class != SubstClass::NotApplicable);
    Record {
        mutation_position: m.nt_position as u64,
        wt_codon: DERIVED_WT_CODON.to_string(),
        wt_codon_2: m.wt_codon.clone(),
        mutant: m.mutant_codon.clone(),
        wt_aa: m.wt_aa.clone(),
        mutant_aa: m.mutant_aa.clone(),
        event: m.event.clone(),
        mutant_flag: flag.to_string(),
        type_1: DERIVED_TYPE_1.to_string(),
        type_2: type_2.to_string(),
        gene_location: gene_location.to_string(),
        cancer: String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionOutcome {
    Predicted { label: String, y: f64 },
    UnknownCategory { field: String, value: String, allowed: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationPrediction {
    pub mutation: MutationRecord,
    pub fields: Record,
    pub outcome: PredictionOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub model_id: String,
    pub diagnosis: Diagnosis,
    pub predictions: Vec<MutationPrediction>,
}

impl ClassificationReport {
    pub fn has_unknown_category(&self) -> bool {
        self.predictions
            .iter()
            .any(|p| matches!(p.outcome, PredictionOutcome::UnknownCategory { .. }))
    }
}

fn outcome_of(result: Result<Prediction, DatasetError>) -> PredictionOutcome {
    match result {
        Ok(p) => PredictionOutcome::Predicted { label: p.label, y: p.y },
        Err(DatasetError::UnknownCategory { field, value, allowed }) => PredictionOutcome::UnknownCategory {
            field: field.to_string(),
            value,
            allowed,
        },
        Err(other) => unreachable!("feature encoding only fails on unknown categories: {other}"),
    }
}

/// Diagnoses `person` against `reference` and classifies each malignant
/// mutation. Predictions appear in mutation-position order.
pub fn classify_sequences(
    reference: &Sequence,
    person: &Sequence,
    model: &Model,
    gene_location: &str,
    scoring: &Scoring,
) -> Result<ClassificationReport, PipelineError> {
    let mut diagnosis = diagnose(reference, person, scoring)?;
    for rec in &mut diagnosis.records {
        rec.gene_location = gene_location.to_string();
    }
    let mut predictions = Vec::new();
    if diagnosis.verdict == Verdict::Malignant {
        for m in &diagnosis.records {
            let fields = record_from_mutation(m, gene_location);
            let outcome = outcome_of(model.classify(&fields));
            predictions.push(MutationPrediction {
                mutation: m.clone(),
                fields,
                outcome,
            });
        }
    }
    for p in &mut predictions {
        if let PredictionOutcome::Predicted { label, .. } = &p.outcome {
            p.mutation.cancer = label.clone();
        }
    }
    Ok(ClassificationReport {
        model_id: model.id.clone(),
        diagnosis,
        predictions,
    })
}

pub fn classify_person(
    reference: &Path,
    person: &Path,
    model: &Path,
    gene_location: &str,
) -> Result<ClassificationReport, PipelineError> {
    let reference = read_fasta_first(reference)?;
    let person = read_fasta_first(person)?;
    let model = Model::load(model)?;
    classify_sequences(&reference, &person, &model, gene_location, &Scoring::default())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("expected field=value, got {0:?}")]
    NotAssignment(String),
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("field {0:?} given twice")]
    Duplicate(String),
    #[error("missing field(s): {}", .0.join(", "))]
    Missing(Vec<&'static str>),
    #[error("mutation_position {0:?} is not a positive integer")]
    BadInteger(String),
}

/// Builds a record (with empty cancer) from exactly the 11 `name=value`
/// input assignments.
pub fn parse_manual_fields<S: AsRef<str>>(assignments: &[S]) -> Result<Record, FieldError> {
    let names = &dataset::COLUMNS[..N_FEATURES];
    let mut values: [Option<String>; N_FEATURES] = Default::default();
    for a in assignments {
        let a = a.as_ref();
        let (key, value) = a
            .split_once('=')
            .ok_or_else(|| FieldError::NotAssignment(a.to_string()))?;
        let key = key.trim();
        let idx = names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(key))
            .ok_or_else(|| FieldError::UnknownField(key.to_string()))?;
        if values[idx].replace(value.to_string()).is_some() {
            return Err(FieldError::Duplicate(names[idx].to_string()));
        }
    }
    let missing: Vec<&'static str> = names
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.is_none())
        .map(|(n, _)| *n)
        .collect();
    if !missing.is_empty() {
        return Err(FieldError::Missing(missing));
    }
    let [pos, rest @ ..] = values.map(Option::unwrap);
    let mutation_position = match pos.trim().parse::<u64>() {
        Ok(p) if p >= 1 => p,
        _ => return Err(FieldError::BadInteger(pos)),
    };
    let mut record = Record {
        mutation_position,
        wt_codon: String::new(),
        wt_codon_2: String::new(),
        mutant: String::new(),
        wt_aa: String::new(),
        mutant_aa: String::new(),
        event: String::new(),
        mutant_flag: String::new(),
        type_1: String::new(),
        type_2: String::new(),
        gene_location: String::new(),
        cancer: String::new(),
    };
    for (field, value) in CategoricalField::ALL.into_iter().zip(rest) {
        *record.get_mut(field) = value;
    }
    Ok(record)
}

/// Classifies a manually entered record. Unknown values are reported with the
/// allowed vocabulary.
pub fn classify_manual(record: &Record, model: &Model) -> Result<Prediction, PipelineError> {
    model.classify(record).map_err(PipelineError::UnknownCategory)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub n: usize,
    pub mse: f64,
    pub accuracy: f64,
}

fn samples(encoder: &Encoder, records: &[Record]) -> Result<Vec<Sample>, DatasetError> {
    records
        .iter()
        .map(|r| {
            let ex = encoder.encode(r)?;
            Ok(Sample::new(ex.x.to_vec(), vec![ex.t]))
        })
        .collect()
}

/// MSE and decoded-label accuracy of a network over records.
pub fn evaluate_records(network: &Network, encoder: &Encoder, records: &[Record]) -> Result<Evaluation, PipelineError> {
    let data = samples(encoder, records).map_err(PipelineError::UnknownCategory)?;
    let mse = bpnn::mse(network, &data).map_err(|e| PipelineError::Training(e.to_string()))?;
    let mut correct = 0;
    for (s, r) in data.iter().zip(records) {
        let y = network.predict(&s.x).expect("encoded width matches");
        if encoder.decode_label(y[0]) == r.cancer {
            correct += 1;
        }
    }
    Ok(Evaluation {
        n: records.len(),
        mse,
        accuracy: correct as f64 / records.len() as f64,
    })
}

pub fn evaluate(model: &Model, records: &[Record]) -> Result<Evaluation, PipelineError> {
    evaluate_records(&model.network, &model.encoder, records)
}

#[derive(Debug, Clone)]
pub struct TrainingJob {
    pub data: PathBuf,
    pub topology: Topology,
    pub config: TrainConfig,
    pub out: PathBuf,
    /// Hold out this fraction (shuffled with the training seed) for evaluation.
    pub test_fraction: Option<f64>,
    /// Report MSE every this many epochs; 0 disables progress output.
    pub log_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingOutcome {
    pub report: TrainReport,
    pub train: Evaluation,
    pub test: Option<Evaluation>,
    pub model_id: String,
}

impl TrainingOutcome {
    /// Training counts as successful when the goal was met or every training
    /// record is classified correctly.
    pub fn succeeded(&self) -> bool {
        self.report.stopped_by == StopReason::GoalReached || self.train.accuracy == 1.0
    }
}

/// Fits the encoder, trains, and saves the model file.
///
/// The encoder is fitted on every row of the data file so held-out rows share
/// its vocabularies; only the training rows drive weight updates.
pub fn train_records(
    records: &[Record],
    topology: Topology,
    config: &TrainConfig,
    test_fraction: Option<f64>,
    mut progress: impl FnMut(usize, f64),
) -> Result<(Network, Encoder, TrainReport, Evaluation, Option<Evaluation>), PipelineError> {
    if topology.n_in != N_FEATURES || topology.n_out != 1 {
        return Err(PipelineError::Usage(format!(
            "topology {topology} must have {N_FEATURES} inputs and 1 output"
        )));
    }
    let encoder = fit_encoder(records).map_err(|source| PipelineError::Dataset {
        path: PathBuf::new(),
        source,
    })?;
    let (train_rows, test_rows) = match test_fraction {
        Some(f) if !(0.0..1.0).contains(&f) => {
            return Err(PipelineError::Usage(format!("test fraction {f} must be in [0, 1)")))
        }
        Some(f) => dataset::split(records, f, config.seed),
        None => (records.to_vec(), Vec::new()),
    };
    let data = samples(&encoder, &train_rows).map_err(|source| PipelineError::Dataset {
        path: PathBuf::new(),
        source,
    })?;
    let mut network = init_network(topology, config.seed);
    let report = bpnn::train_with(&mut network, &data, config, &mut progress)
        .map_err(|e| PipelineError::Training(e.to_string()))?;
    let train = evaluate_records(&network, &encoder, &train_rows)?;
    let test = if test_rows.is_empty() {
        None
    } else {
        Some(evaluate_records(&network, &encoder, &test_rows)?)
    };
    Ok((network, encoder, report, train, test))
}

pub fn run_training(job: &TrainingJob, mut log: impl FnMut(usize, f64)) -> Result<TrainingOutcome, PipelineError> {
    let records = read_records(&job.data)?;
    let every = job.log_every;
    let (network, encoder, report, train, test) =
        train_records(&records, job.topology, &job.config, job.test_fraction, |epoch, mse| {
            if every > 0 && epoch % every == 0 {
                log(epoch, mse);
            }
        })
        .map_err(|e| match e {
            PipelineError::Dataset { source, .. } => PipelineError::Dataset {
                path: job.data.clone(),
                source,
            },
            other => other,
        })?;
    let text = save_model(&network, &encoder).map_err(|e| PipelineError::Training(e.to_string()))?;
    write_atomic(&job.out, text.as_bytes())?;
    Ok(TrainingOutcome {
        report,
        train,
        test,
        model_id: digest_hex(text.as_bytes()),
    })
}

/// Serializes a report as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
