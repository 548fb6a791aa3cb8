//! Mutation calling from a reference/person alignment and the
//! normal / silent / malignant diagnosis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{global_align, is_identical, AlignError, Alignment, Scoring, GAP};
use crate::seqcore::{aa_three_letter, codon_to_aa, translate, SeqError, SeqKind, Sequence, TranslateMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MutError {
    #[error("mutation at nt {position} lies outside the {len}-nt reference")]
    OutOfRange { position: usize, len: usize },
    #[error("reference base at nt {position} is {found:?}, mutation expects {expected:?}")]
    RefMismatch {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("only single-base substitutions are supported (got {0:?})")]
    MultiBaseSubstitution(String),
    #[error("substitution has identical bases")]
    SameBase,
    #[error("{0:?} is not a nucleotide")]
    BadBase(char),
    #[error("diagnosis requires DNA sequences")]
    NotDna,
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Align(#[from] AlignError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DnaMutationKind {
    Substitution,
    Insertion,
    Deletion,
}

/// A DNA-level difference, positioned against the ungapped reference.
///
/// Insertions sit before reference base `nt_position`, so an insertion after
/// the last base has `nt_position = len + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnaMutation {
    pub nt_position: usize,
    pub kind: DnaMutationKind,
    pub ref_bases: String,
    pub alt_bases: String,
}

impl DnaMutation {
    pub fn substitution(nt_position: usize, ref_base: char, alt_base: char) -> Self {
        DnaMutation {
            nt_position,
            kind: DnaMutationKind::Substitution,
            ref_bases: ref_base.to_string(),
            alt_bases: alt_base.to_string(),
        }
    }

    pub fn insertion(nt_position: usize, bases: &str) -> Self {
        DnaMutation {
            nt_position,
            kind: DnaMutationKind::Insertion,
            ref_bases: String::new(),
            alt_bases: bases.to_string(),
        }
    }

    pub fn deletion(nt_position: usize, bases: &str) -> Self {
        DnaMutation {
            nt_position,
            kind: DnaMutationKind::Deletion,
            ref_bases: bases.to_string(),
            alt_bases: String::new(),
        }
    }

    fn indel_len(&self) -> usize {
        self.ref_bases.len().max(self.alt_bases.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Structural {
    Substitution,
    Frameshift,
    InFrameIndel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubstClass {
    Ts,
    Tv,
    #[serde(rename = "NA")]
    NotApplicable,
}

impl SubstClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SubstClass::Ts => "Ts",
            SubstClass::Tv => "Tv",
            SubstClass::NotApplicable => "NA",
        }
    }
}

/// Protein consequence of one DNA mutation, laid out like a row of the
/// mutation table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub nt_position: usize,
    pub codon_number: usize,
    pub wt_codon: String,
    pub mutant_codon: String,
    pub wt_aa: String,
    pub mutant_aa: String,
    pub event: String,
    pub structural: Structural,
    pub subst_class: SubstClass,
    pub stop_at: Option<usize>,
    pub gene_location: String,
    pub cancer: String,
}

/// Amino-acid label used for in-frame indels, as written in the mutation table.
pub const IN_FRAME_AA: &str = "inf";
/// Amino-acid label used for frameshifts.
pub const FRAMESHIFT_AA: &str = "Fs";
/// Codon/amino-acid placeholder for an insertion past the last reference base.
pub const PAST_END: &str = "---";

/// Walks the alignment columns and emits one mutation per mismatch column and
/// one per maximal run of gaps on either side.
pub fn call_dna_mutations(al: &Alignment) -> Vec<DnaMutation> {
    call_dna_mutations_from(al, 1)
}

/// Like [`call_dna_mutations`], with the first reference column numbered
/// `first_position` instead of 1.
pub fn call_dna_mutations_from(al: &Alignment, first_position: usize) -> Vec<DnaMutation> {
    let mut out: Vec<DnaMutation> = Vec::new();
    let mut ref_pos = first_position;
    let mut prev: Option<DnaMutationKind> = None;
    for (r, p) in al.columns() {
        let kind = match (r, p) {
            (GAP, GAP) => None,
            (GAP, alt) => {
                match (prev, out.last_mut()) {
                    (Some(DnaMutationKind::Insertion), Some(last)) => last.alt_bases.push(alt as char),
                    _ => out.push(DnaMutation::insertion(ref_pos, &(alt as char).to_string())),
                }
                Some(DnaMutationKind::Insertion)
            }
            (reference, GAP) => {
                match (prev, out.last_mut()) {
                    (Some(DnaMutationKind::Deletion), Some(last)) => {
                        last.ref_bases.push(reference as char)
                    }
                    _ => out.push(DnaMutation::deletion(ref_pos, &(reference as char).to_string())),
                }
                ref_pos += 1;
                Some(DnaMutationKind::Deletion)
            }
            (reference, alt) => {
                if reference != alt {
                    out.push(DnaMutation::substitution(ref_pos, reference as char, alt as char));
                }
                ref_pos += 1;
                (reference != alt).then_some(DnaMutationKind::Substitution)
            }
        };
        prev = kind;
    }
    out
}

/// Applies mutations (sorted as produced by [`call_dna_mutations`]) to a
/// reference string.
pub fn apply_mutations(reference: &str, muts: &[DnaMutation]) -> Result<String, MutError> {
    let bytes = reference.as_bytes();
    let mut out = String::with_capacity(reference.len());
    let mut cursor = 0usize;
    for m in muts {
        let start = m.nt_position.checked_sub(1).ok_or(MutError::OutOfRange {
            position: m.nt_position,
            len: bytes.len(),
        })?;
        let end = start + m.ref_bases.len();
        if start < cursor || end > bytes.len() {
            return Err(MutError::OutOfRange {
                position: m.nt_position,
                len: bytes.len(),
            });
        }
        if reference[start..end] != m.ref_bases {
            return Err(MutError::RefMismatch {
                position: m.nt_position,
                expected: m.ref_bases.clone(),
                found: reference[start..end].to_string(),
            });
        }
        out.push_str(&reference[cursor..start]);
        out.push_str(&m.alt_bases);
        cursor = end;
    }
    out.push_str(&reference[cursor..]);
    Ok(out)
}

fn check_base(c: char) -> Result<char, MutError> {
    match c {
        'A' | 'C' | 'G' | 'T' => Ok(c),
        other => Err(MutError::BadBase(other)),
    }
}

/// Transition when both bases are purines or both pyrimidines.
pub fn classify_event(ref_base: char, alt_base: char) -> Result<SubstClass, MutError> {
    let (r, a) = (check_base(ref_base)?, check_base(alt_base)?);
    if r == a {
        return Err(MutError::SameBase);
    }
    let purine = |c| matches!(c, 'A' | 'G');
    Ok(if purine(r) == purine(a) {
        SubstClass::Ts
    } else {
        SubstClass::Tv
    })
}

/// Codon number (in the frame of `mutant_cds`) of the first stop at or after
/// `from_codon`.
pub fn stop_scan(mutant_cds: &Sequence, from_codon: usize) -> Option<usize> {
    let from = from_codon.max(1);
    mutant_cds
        .as_bytes()
        .chunks_exact(3)
        .enumerate()
        .skip(from - 1)
        .find(|(_, codon)| matches!(*codon, b"TAA" | b"TAG" | b"TGA"))
        .map(|(i, _)| i + 1)
}

fn aa_name(codon: &str) -> Result<&'static str, MutError> {
    let aa = codon_to_aa(codon)?;
    Ok(aa_three_letter(aa).expect("genetic code emits known residues"))
}

/// Codon-level consequence of one mutation against the reference CDS.
pub fn codon_effect(ref_cds: &Sequence, mutation: &DnaMutation) -> Result<MutationRecord, MutError> {
    if ref_cds.kind() != SeqKind::Dna {
        return Err(MutError::NotDna);
    }
    let reference = ref_cds.residues();
    let len = reference.len();
    let pos = mutation.nt_position;
    let max_pos = match mutation.kind {
        DnaMutationKind::Insertion => len + 1,
        _ => len + 1 - mutation.ref_bases.len().max(1),
    };
    if pos == 0 || pos > max_pos {
        return Err(MutError::OutOfRange { position: pos, len });
    }
    let codon_number = pos.div_ceil(3);
    let codon_start = (codon_number - 1) * 3;
    let wt_codon = reference.get(codon_start..codon_start + 3);

    match mutation.kind {
        DnaMutationKind::Substitution => {
            if mutation.ref_bases.len() != 1 || mutation.alt_bases.len() != 1 {
                return Err(MutError::MultiBaseSubstitution(mutation.ref_bases.clone()));
            }
            let wt_codon = wt_codon.ok_or(MutError::OutOfRange { position: pos, len })?;
            let ref_base = mutation.ref_bases.chars().next().expect("len 1");
            let alt_base = mutation.alt_bases.chars().next().expect("len 1");
            let found = reference.as_bytes()[pos - 1] as char;
            if found != ref_base {
                return Err(MutError::RefMismatch {
                    position: pos,
                    expected: mutation.ref_bases.clone(),
                    found: found.to_string(),
                });
            }
            let subst_class = classify_event(ref_base, alt_base)?;
            let mut mutant = wt_codon.as_bytes().to_vec();
            mutant[(pos - 1) % 3] = alt_base as u8;
            let mutant_codon = String::from_utf8(mutant).expect("ascii");
            Ok(MutationRecord {
                nt_position: pos,
                codon_number,
                wt_codon: wt_codon.to_string(),
                wt_aa: aa_name(wt_codon)?.to_string(),
                mutant_aa: aa_name(&mutant_codon)?.to_string(),
                mutant_codon,
                event: format!("{ref_base}>{alt_base}"),
                structural: Structural::Substitution,
                subst_class,
                stop_at: None,
                gene_location: String::new(),
                cancer: String::new(),
            })
        }
        DnaMutationKind::Insertion | DnaMutationKind::Deletion => {
            let n = mutation.indel_len();
            let frameshift = !n.is_multiple_of(3);
            let mutant_seq = apply_mutations(reference, std::slice::from_ref(mutation))?;
            let mutant_cds = Sequence::dna(ref_cds.id(), &mutant_seq)?;
            let (wt_codon, wt_aa) = match wt_codon {
                Some(c) => (c.to_string(), aa_name(c)?.to_string()),
                None => (PAST_END.to_string(), PAST_END.to_string()),
            };
            let (prefix, event) = match mutation.kind {
                DnaMutationKind::Insertion => ("ins", "ins"),
                _ => ("del", "del"),
            };
            Ok(MutationRecord {
                nt_position: pos,
                codon_number,
                wt_codon,
                mutant_codon: format!("{prefix}{n}"),
                wt_aa,
                mutant_aa: if frameshift { FRAMESHIFT_AA } else { IN_FRAME_AA }.to_string(),
                event: event.to_string(),
                structural: if frameshift {
                    Structural::Frameshift
                } else {
                    Structural::InFrameIndel
                },
                subst_class: SubstClass::NotApplicable,
                stop_at: stop_scan(&mutant_cds, codon_number),
                gene_location: String::new(),
                cancer: String::new(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Normal,
    Silent,
    Malignant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub verdict: Verdict,
    pub dna_alignment: Alignment,
    /// Present whenever the DNA alignment was not identical.
    pub protein_alignment: Option<Alignment>,
    pub dna_mutations: Vec<DnaMutation>,
    #[serde(rename = "mutations")]
    pub records: Vec<MutationRecord>,
}

fn protein_affecting(rec: &MutationRecord) -> bool {
    rec.structural != Structural::Substitution || rec.wt_aa != rec.mutant_aa
}

/// Runs the two-level check: DNA alignment first, then protein alignment of
/// the translated coding sequences.
pub fn diagnose(reference: &Sequence, person: &Sequence, scoring: &Scoring) -> Result<Diagnosis, MutError> {
    if reference.kind() != SeqKind::Dna || person.kind() != SeqKind::Dna {
        return Err(MutError::NotDna);
    }
    let dna_alignment = global_align(reference, person, scoring)?;
    if is_identical(&dna_alignment) {
        return Ok(Diagnosis {
            verdict: Verdict::Normal,
            dna_alignment,
            protein_alignment: None,
            dna_mutations: Vec::new(),
            records: Vec::new(),
        });
    }
    let dna_mutations = call_dna_mutations(&dna_alignment);

    let ref_protein = translate(reference, TranslateMode::Cds)?;
    let person_protein = translate(person, TranslateMode::Cds)?;
    let protein_alignment = global_align(&ref_protein, &person_protein, scoring)?;
    if is_identical(&protein_alignment) {
        return Ok(Diagnosis {
            verdict: Verdict::Silent,
            dna_alignment,
            protein_alignment: Some(protein_alignment),
            dna_mutations,
            records: Vec::new(),
        });
    }

    let all = dna_mutations
        .iter()
        .map(|m| codon_effect(reference, m))
        .collect::<Result<Vec<_>, _>>()?;
    let affecting: Vec<_> = all.iter().filter(|r| protein_affecting(r)).cloned().collect();
    // Changes that only alter the protein in combination (e.g. two
    // synonymous-alone substitutions in one codon) are reported in full.
    let records = if affecting.is_empty() { all } else { affecting };
    Ok(Diagnosis {
        verdict: Verdict::Malignant,
        dna_alignment,
        protein_alignment: Some(protein_alignment),
        dna_mutations,
        records,
    })
}
