//! Independent oracles and fixture helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// Best global alignment score found by walking every alignment path
/// explicitly (no dynamic programming).
pub fn brute_force_score(a: &[u8], b: &[u8], match_score: i32, mismatch: i32, gap: i32) -> i32 {
    fn walk(a: &[u8], b: &[u8], acc: i32, s: (i32, i32, i32), best: &mut i32) {
        if a.is_empty() && b.is_empty() {
            *best = (*best).max(acc);
            return;
        }
        if !a.is_empty() && !b.is_empty() {
            let pair = if a[0] == b[0] { s.0 } else { s.1 };
            walk(&a[1..], &b[1..], acc + pair, s, best);
        }
        if !a.is_empty() {
            walk(&a[1..], b, acc + s.2, s, best);
        }
        if !b.is_empty() {
            walk(a, &b[1..], acc + s.2, s, best);
        }
    }
    let mut best = i32::MIN;
    walk(a, b, 0, (match_score, mismatch, gap), &mut best);
    best
}

/// The standard code written out codon by codon.
pub const STANDARD_CODE: [(&str, char); 64] = [
    ("TTT", 'F'), ("TTC", 'F'), ("TTA", 'L'), ("TTG", 'L'),
    ("CTT", 'L'), ("CTC", 'L'), ("CTA", 'L'), ("CTG", 'L'),
    ("ATT", 'I'), ("ATC", 'I'), ("ATA", 'I'), ("ATG", 'M'),
    ("GTT", 'V'), ("GTC", 'V'), ("GTA", 'V'), ("GTG", 'V'),
    ("TCT", 'S'), ("TCC", 'S'), ("TCA", 'S'), ("TCG", 'S'),
    ("CCT", 'P'), ("CCC", 'P'), ("CCA", 'P'), ("CCG", 'P'),
    ("ACT", 'T'), ("ACC", 'T'), ("ACA", 'T'), ("ACG", 'T'),
    ("GCT", 'A'), ("GCC", 'A'), ("GCA", 'A'), ("GCG", 'A'),
    ("TAT", 'Y'), ("TAC", 'Y'), ("TAA", '*'), ("TAG", '*'),
    ("CAT", 'H'), ("CAC", 'H'), ("CAA", 'Q'), ("CAG", 'Q'),
    ("AAT", 'N'), ("AAC", 'N'), ("AAA", 'K'), ("AAG", 'K'),
    ("GAT", 'D'), ("GAC", 'D'), ("GAA", 'E'), ("GAG", 'E'),
    ("TGT", 'C'), ("TGC", 'C'), ("TGA", '*'), ("TGG", 'W'),
    ("CGT", 'R'), ("CGC", 'R'), ("CGA", 'R'), ("CGG", 'R'),
    ("AGT", 'S'), ("AGC", 'S'), ("AGA", 'R'), ("AGG", 'R'),
    ("GGT", 'G'), ("GGC", 'G'), ("GGA", 'G'), ("GGG", 'G'),
];

pub fn oracle_translate(dna: &str) -> String {
    dna.as_bytes()
        .chunks_exact(3)
        .map(|c| {
            let codon = std::str::from_utf8(c).unwrap();
            STANDARD_CODE.iter().find(|(k, _)| *k == codon).unwrap().1
        })
        .collect()
}

/// First stop codon at or after `from_codon`, found by translating the whole
/// sequence and indexing the first `*`.
pub fn oracle_first_stop(dna: &str, from_codon: usize) -> Option<usize> {
    oracle_translate(dna)
        .chars()
        .enumerate()
        .skip(from_codon - 1)
        .find(|(_, c)| *c == '*')
        .map(|(i, _)| i + 1)
}

/// Purine/pyrimidine rule written as the explicit list of the four
/// transitions.
pub fn oracle_is_transition(a: char, b: char) -> bool {
    matches!((a, b), ('A', 'G') | ('G', 'A') | ('C', 'T') | ('T', 'C'))
}

/// Central-difference derivative of `f` at `p`.
pub fn central_difference(mut f: impl FnMut(f64) -> f64, p: f64, h: f64) -> f64 {
    (f(p + h) - f(p - h)) / (2.0 * h)
}
