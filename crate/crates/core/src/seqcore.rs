//! Sequences, FASTA I/O and the standard genetic code.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Nucleotides accepted in DNA sequences.
pub const DNA_ALPHABET: &[u8] = b"ACGT";

/// One-letter amino-acid codes plus `*` for stop.
pub const PROTEIN_ALPHABET: &[u8] = b"ACDEFGHIKLMNPQRSTVWY*";

/// Default line width used by [`write_fasta`].
pub const DEFAULT_FASTA_WIDTH: usize = 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    #[error("input contains no FASTA records")]
    EmptyInput,
    #[error("line {line}: illegal residue {ch:?}")]
    IllegalCharacter { line: usize, ch: char },
    #[error("line {line}: sequence data before any '>' header")]
    MissingHeader { line: usize },
    #[error("record {id:?} has no residues")]
    EmptyRecord { id: String },
    #[error("sequence id must not contain line breaks")]
    BadId,
    #[error("residue {ch:?} is not valid for a {kind} sequence")]
    WrongAlphabet { ch: char, kind: SeqKind },
    #[error("expected a DNA sequence")]
    NotDna,
    #[error("sequence of length {len} is shorter than one codon")]
    TooShort { len: usize },
    #[error("bad codon {0:?}")]
    BadCodon(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqKind {
    Dna,
    Protein,
}

impl SeqKind {
    pub fn alphabet(self) -> &'static [u8] {
        match self {
            SeqKind::Dna => DNA_ALPHABET,
            SeqKind::Protein => PROTEIN_ALPHABET,
        }
    }
}

impl fmt::Display for SeqKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqKind::Dna => f.write_str("DNA"),
            SeqKind::Protein => f.write_str("protein"),
        }
    }
}

/// A named DNA or protein residue string.
///
/// Residues are always uppercase and drawn from the alphabet of `kind`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    id: String,
    residues: String,
    kind: SeqKind,
}

impl Sequence {
    /// Builds a sequence, uppercasing residues and checking them against
    /// the alphabet of `kind`.
    pub fn new(id: impl Into<String>, residues: &str, kind: SeqKind) -> Result<Self, SeqError> {
        let id = id.into();
        if id.contains(['\n', '\r']) {
            return Err(SeqError::BadId);
        }
        let residues = residues.to_ascii_uppercase();
        if residues.is_empty() {
            return Err(SeqError::EmptyRecord { id });
        }
        if let Some(ch) = residues.bytes().find(|b| !kind.alphabet().contains(b)) {
            return Err(SeqError::WrongAlphabet { ch: ch as char, kind });
        }
        Ok(Sequence { id, residues, kind })
    }

    pub fn dna(id: impl Into<String>, residues: &str) -> Result<Self, SeqError> {
        Self::new(id, residues, SeqKind::Dna)
    }

    pub fn protein(id: impl Into<String>, residues: &str) -> Result<Self, SeqError> {
        Self::new(id, residues, SeqKind::Protein)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn residues(&self) -> &str {
        &self.residues
    }

    pub fn kind(&self) -> SeqKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.residues.as_bytes()
    }
}

fn infer_kind(residues: &str) -> SeqKind {
    if residues.bytes().all(|b| DNA_ALPHABET.contains(&b)) {
        SeqKind::Dna
    } else {
        SeqKind::Protein
    }
}

/// Parses a FASTA document.
///
/// Headers are taken verbatim after `>`; sequence lines may use any case and
/// wrapping, and whitespace inside them is dropped. A record is DNA when every
/// residue is one of `ACGT`, protein otherwise.
pub fn parse_fasta(text: &str) -> Result<Vec<Sequence>, SeqError> {
    let mut records = Vec::new();
    let mut current: Option<(String, String)> = None;

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if let Some(header) = line.strip_prefix('>') {
            if let Some(rec) = current.take() {
                records.push(finish_record(rec)?);
            }
            current = Some((header.to_string(), String::new()));
            continue;
        }
        let mut data = line.chars().filter(|c| !c.is_whitespace()).peekable();
        if data.peek().is_none() {
            continue;
        }
        let Some((_, residues)) = current.as_mut() else {
            return Err(SeqError::MissingHeader { line: line_no });
        };
        for ch in data {
            let up = ch.to_ascii_uppercase();
            if !up.is_ascii() || !PROTEIN_ALPHABET.contains(&(up as u8)) {
                return Err(SeqError::IllegalCharacter { line: line_no, ch });
            }
            residues.push(up);
        }
    }
    if let Some(rec) = current.take() {
        records.push(finish_record(rec)?);
    }
    if records.is_empty() {
        return Err(SeqError::EmptyInput);
    }
    Ok(records)
}

fn finish_record((id, residues): (String, String)) -> Result<Sequence, SeqError> {
    let kind = infer_kind(&residues);
    Sequence::new(id, &residues, kind)
}

/// Serializes sequences as FASTA, wrapping residue lines at `width` columns.
///
/// A `width` of zero is treated as one.
pub fn write_fasta(seqs: &[Sequence], width: usize) -> String {
    let width = width.max(1);
    let mut out = String::new();
    for seq in seqs {
        out.push('>');
        out.push_str(&seq.id);
        out.push('\n');
        for chunk in seq.as_bytes().chunks(width) {
            // residues are ASCII, so chunk boundaries are char boundaries
            out.push_str(std::str::from_utf8(chunk).expect("ascii residues"));
            out.push('\n');
        }
    }
    out
}

/// Translation mode for [`translate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TranslateMode {
    /// Every whole codon, stops included.
    Full,
    /// Stop after the first stop codon, which is kept as the final `*`.
    #[default]
    Cds,
}

impl std::str::FromStr for TranslateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(TranslateMode::Full),
            "cds" => Ok(TranslateMode::Cds),
            other => Err(format!("unknown translation mode {other:?} (expected cds or full)")),
        }
    }
}

/// The standard nuclear genetic code (NCBI translation table 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneticCode {
    table: [u8; 64],
}

// Index = 16*b1 + 4*b2 + b3 with T=0, C=1, A=2, G=3, the conventional
// TCAG ordering of the printed table.
const STANDARD_AAS: &[u8; 64] =
    b"FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG";

fn base_rank(b: u8) -> Option<usize> {
    match b {
        b'T' => Some(0),
        b'C' => Some(1),
        b'A' => Some(2),
        b'G' => Some(3),
        _ => None,
    }
}

const RANK_BASES: [u8; 4] = *b"TCAG";

impl GeneticCode {
    pub fn standard() -> Self {
        GeneticCode {
            table: *STANDARD_AAS,
        }
    }

    /// Looks up an uppercase codon.
    pub fn get(&self, codon: &[u8]) -> Option<u8> {
        if codon.len() != 3 {
            return None;
        }
        let idx = base_rank(codon[0])? * 16 + base_rank(codon[1])? * 4 + base_rank(codon[2])?;
        Some(self.table[idx])
    }

    /// All 64 codons with their amino acids, in TCAG order.
    pub fn entries(&self) -> impl Iterator<Item = ([u8; 3], u8)> + '_ {
        (0..64).map(move |i| {
            let codon = [RANK_BASES[i / 16], RANK_BASES[(i / 4) % 4], RANK_BASES[i % 4]];
            (codon, self.table[i])
        })
    }
}

impl Default for GeneticCode {
    fn default() -> Self {
        Self::standard()
    }
}

/// Translates one codon with the standard code.
pub fn codon_to_aa(codon: &str) -> Result<char, SeqError> {
    GeneticCode::standard()
        .get(codon.as_bytes())
        .map(char::from)
        .ok_or_else(|| SeqError::BadCodon(codon.to_string()))
}

/// Translates a DNA sequence in frame 1. Trailing partial codons are ignored.
pub fn translate(dna: &Sequence, mode: TranslateMode) -> Result<Sequence, SeqError> {
    if dna.kind() != SeqKind::Dna {
        return Err(SeqError::NotDna);
    }
    if dna.len() < 3 {
        return Err(SeqError::TooShort { len: dna.len() });
    }
    let code = GeneticCode::standard();
    let mut protein = String::with_capacity(dna.len() / 3);
    for codon in dna.as_bytes().chunks_exact(3) {
        let aa = code.get(codon).expect("validated DNA");
        protein.push(aa as char);
        if mode == TranslateMode::Cds && aa == b'*' {
            break;
        }
    }
    Sequence::protein(dna.id(), &protein)
}

/// Three-letter name for a one-letter amino-acid code; `*` maps to `Stop`.
pub fn aa_three_letter(aa: char) -> Option<&'static str> {
    Some(match aa {
        'A' => "Ala",
        'R' => "Arg",
        'N' => "Asn",
        'D' => "Asp",
        'C' => "Cys",
        'Q' => "Gln",
        'E' => "Glu",
        'G' => "Gly",
        'H' => "His",
        'I' => "Ile",
        'L' => "Leu",
        'K' => "Lys",
        'M' => "Met",
        'F' => "Phe",
        'P' => "Pro",
        'S' => "Ser",
        'T' => "Thr",
        'W' => "Trp",
        'Y' => "Tyr",
        'V' => "Val",
        '*' => "Stop",
        _ => return None,
    })
}
