use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tp53_classify::align::{global_align, AlignError, Scoring};
use tp53_classify::bpnn::{StopReason, Topology, TrainConfig};
use tp53_classify::mutcall::diagnose;
use tp53_classify::pipeline::{
    self, classify_manual, classify_sequences, parse_manual_fields, read_fasta_all, read_fasta_first, read_records,
    to_json, write_atomic, Evaluation, Model, PipelineError, TrainingJob,
};
use tp53_classify::seqcore::{translate, write_fasta, TranslateMode, DEFAULT_FASTA_WIDTH};

#[derive(Parser)]
#[command(name = "tp53-classify", version, about = "TP53 mutation detection and cancer-type classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ScoringArgs {
    #[arg(long = "match", default_value_t = 1, allow_hyphen_values = true)]
    match_score: i32,
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    mismatch: i32,
    #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
    gap: i32,
}

impl ScoringArgs {
    fn scoring(self) -> Result<Scoring, PipelineError> {
        Scoring::new(self.match_score, self.mismatch, self.gap).map_err(|e: AlignError| PipelineError::Usage(e.to_string()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compare a person's CDS with the reference and report mutations.
    Detect {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        person: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Globally align the first records of two FASTA files.
    Align {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Translate DNA records to protein FASTA.
    Translate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "cds")]
        mode: TranslateMode,
        #[arg(long, default_value_t = DEFAULT_FASTA_WIDTH)]
        width: usize,
    },
    /// Train a classifier on a mutation table.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "11,100,1")]
        topology: Topology,
        #[arg(long, default_value_t = 0.3)]
        lr: f64,
        #[arg(long, default_value_t = 1e-6)]
        goal_mse: f64,
        #[arg(long, default_value_t = 100_000)]
        max_epochs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        shuffle: bool,
        /// Hold out this fraction of rows and report accuracy on them.
        #[arg(long)]
        test_fraction: Option<f64>,
        /// Print the MSE every N epochs to stderr (0 = never).
        #[arg(long, default_value_t = 1000)]
        log_every: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify a person's mutations, or one manually entered record.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, requires_all = ["person", "gene_location"], conflicts_with = "set")]
        reference: Option<PathBuf>,
        #[arg(long, requires = "reference")]
        person: Option<PathBuf>,
        #[arg(long, requires = "reference")]
        gene_location: Option<String>,
        /// field=value for each of the 11 input fields.
        #[arg(long = "set", value_name = "FIELD=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report MSE and accuracy of a model on a mutation table.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), PipelineError> {
    let json = to_json(value);
    if let Some(path) = out {
        write_atomic(path, json.as_bytes())?;
    }
    print!("{json}");
    Ok(())
}

#[derive(Serialize)]
struct ManualReport<'a> {
    model_id: &'a str,
    fields: &'a tp53_classify::Record,
    predicted: &'a str,
    y: f64,
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    model_id: &'a str,
    epochs_run: usize,
    final_mse: f64,
    stopped_by: StopReason,
    train: &'a Evaluation,
    test: Option<&'a Evaluation>,
}

fn run(cli: Cli) -> Result<ExitCode, PipelineError> {
    match cli.command {
        Command::Detect {
            reference,
            person,
            scoring,
            out,
        } => {
            let scoring = scoring.scoring()?;
            let reference = read_fasta_first(&reference)?;
            let person = read_fasta_first(&person)?;
            let diagnosis = diagnose(&reference, &person, &scoring)?;
            eprintln!(
                "verdict: {:?}; {} DNA change(s), {} protein-affecting",
                diagnosis.verdict,
                diagnosis.dna_mutations.len(),
                diagnosis.records.len()
            );
            emit(&diagnosis, out.as_deref())?;
        }
        Command::Align { a, b, scoring } => {
            let scoring = scoring.scoring()?;
            let sa = read_fasta_first(&a)?;
            let sb = read_fasta_first(&b)?;
            let al = global_align(&sa, &sb, &scoring).map_err(|e| PipelineError::Analysis(e.into()))?;
            print!("{}", al.render(sa.id(), sb.id()));
        }
        Command::Translate { input, mode, width } => {
            let seqs = read_fasta_all(&input)?;
            let proteins = seqs
                .iter()
                .map(|s| translate(s, mode))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|source| PipelineError::Fasta { path: input.clone(), source })?;
            print!("{}", write_fasta(&proteins, width));
        }
        Command::Train {
            data,
            topology,
            lr,
            goal_mse,
            max_epochs,
            seed,
            shuffle,
            test_fraction,
            log_every,
            out,
        } => {
            let config = TrainConfig {
                alpha: lr,
                max_epochs,
                goal_mse,
                seed,
                shuffle_each_epoch: shuffle,
            };
            config.validate().map_err(|e| PipelineError::Usage(e.to_string()))?;
            let job = TrainingJob {
                data,
                topology,
                config,
                out,
                test_fraction,
                log_every,
            };
            let outcome = pipeline::run_training(&job, |epoch, mse| eprintln!("epoch {epoch}: mse {mse:e}"))?;
            eprintln!(
                "{:?} after {} epochs, mse {:e}, training accuracy {:.4}",
                outcome.report.stopped_by, outcome.report.epochs_run, outcome.report.final_mse, outcome.train.accuracy
            );
            emit(
                &TrainSummary {
                    model_id: &outcome.model_id,
                    epochs_run: outcome.report.epochs_run,
                    final_mse: outcome.report.final_mse,
                    stopped_by: outcome.report.stopped_by,
                    train: &outcome.train,
                    test: outcome.test.as_ref(),
                },
                None,
            )?;
            if !outcome.succeeded() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Classify {
            model,
            reference,
            person,
            gene_location,
            set,
            out,
        } => {
            let model = Model::load(&model)?;
            match (reference, person, gene_location) {
                (Some(reference), Some(person), Some(location)) => {
                    let reference = read_fasta_first(&reference)?;
                    let person = read_fasta_first(&person)?;
                    let report = classify_sequences(&reference, &person, &model, &location, &Scoring::default())?;
                    eprintln!("verdict: {:?}", report.diagnosis.verdict);
                    for p in &report.predictions {
                        match &p.outcome {
                            pipeline::PredictionOutcome::Predicted { label, y } => eprintln!(
                                "codon {} {}>{}: {label} (y = {y:.6})",
                                p.mutation.codon_number, p.mutation.wt_codon, p.mutation.mutant_codon
                            ),
                            pipeline::PredictionOutcome::UnknownCategory { field, value, allowed } => eprintln!(
                                "codon {}: {field} value {value:?} unseen in training (allowed: {})",
                                p.mutation.codon_number,
                                allowed.join(", ")
                            ),
                        }
                    }
                    emit(&report, out.as_deref())?;
                    if report.has_unknown_category() {
                        return Ok(ExitCode::from(5));
                    }
                }
                (None, None, None) => {
                    if set.is_empty() {
                        return Err(PipelineError::Usage(
                            "classify needs --reference/--person/--gene-location or --set field=value".into(),
                        ));
                    }
                    let record = parse_manual_fields(&set).map_err(|e| PipelineError::Usage(e.to_string()))?;
                    let prediction = classify_manual(&record, &model)?;
                    eprintln!("{} (y = {:.6})", prediction.label, prediction.y);
                    emit(
                        &ManualReport {
                            model_id: &model.id,
                            fields: &record,
                            predicted: &prediction.label,
                            y: prediction.y,
                        },
                        out.as_deref(),
                    )?;
                }
                _ => {
                    return Err(PipelineError::Usage(
                        "--reference, --person and --gene-location must be given together".into(),
                    ))
                }
            }
        }
        Command::Eval { model, data } => {
            let model = Model::load(&model)?;
            let records = read_records(&data)?;
            let eval = pipeline::evaluate(&model, &records)?;
            eprintln!("mse {:e}, accuracy {:.4} over {} records", eval.mse, eval.accuracy, eval.n);
            emit(&eval, None)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
