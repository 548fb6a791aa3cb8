//! Detection of TP53 coding mutations by pairwise alignment, and cancer-type
//! classification of malignant mutations with a small backpropagation
//! network.
//!
//! The modules build on each other: [`seqcore`] (FASTA and translation),
//! [`align`] (global alignment), [`mutcall`] (mutation calling and the
//! normal/silent/malignant verdict), [`dataset`] (the 12-column mutation
//! table and its encoder), [`bpnn`] (the network) and [`pipeline`] (the
//! end-to-end flows used by the CLI).

pub mod align;
pub mod bpnn;
pub mod dataset;
pub mod mutcall;
pub mod pipeline;
pub mod seqcore;

pub use align::{global_align, is_identical, Alignment, Scoring};
pub use bpnn::{init_network, Network, Topology, TrainConfig, TrainReport};
pub use dataset::{fit_encoder, load_records, Encoder, Record};
pub use mutcall::{diagnose, Diagnosis, DnaMutation, MutationRecord, Verdict};
pub use seqcore::{parse_fasta, translate, write_fasta, SeqKind, Sequence, TranslateMode};
