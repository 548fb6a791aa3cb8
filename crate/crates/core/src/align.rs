//! Global pairwise alignment with a linear gap penalty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seqcore::{SeqKind, Sequence};

pub const GAP: u8 = b'-';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlignError {
    #[error("cannot align a {a} sequence with a {b} sequence")]
    KindMismatch { a: SeqKind, b: SeqKind },
    #[error("cannot align an empty sequence")]
    EmptySequence,
    #[error("invalid scoring: need match > mismatch and gap < 0")]
    InvalidScoring,
}

/// Match/mismatch/gap scores. Gaps are charged per gap symbol, end gaps
/// included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scoring {
    pub match_score: i32,
    pub mismatch: i32,
    pub gap: i32,
}

impl Scoring {
    pub fn new(match_score: i32, mismatch: i32, gap: i32) -> Result<Self, AlignError> {
        if match_score <= mismatch || gap >= 0 {
            return Err(AlignError::InvalidScoring);
        }
        Ok(Scoring {
            match_score,
            mismatch,
            gap,
        })
    }

    fn pair(&self, x: u8, y: u8) -> i32 {
        if x == y {
            self.match_score
        } else {
            self.mismatch
        }
    }
}

impl Default for Scoring {
    fn default() -> Self {
        Scoring {
            match_score: 1,
            mismatch: -1,
            gap: -2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub a_gapped: String,
    pub b_gapped: String,
    pub score: i32,
    pub identity: f64,
}

impl Alignment {
    pub fn len(&self) -> usize {
        self.a_gapped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_gapped.is_empty()
    }

    /// Column pairs `(a, b)` left to right.
    pub fn columns(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        self.a_gapped.bytes().zip(self.b_gapped.bytes())
    }

    /// Renders the two gapped rows followed by a score line.
    pub fn render(&self, a_label: &str, b_label: &str) -> String {
        let pad = a_label.len().max(b_label.len());
        format!(
            "{a_label:<pad$}  {}\n{b_label:<pad$}  {}\nscore: {}  identity: {:.4}\n",
            self.a_gapped, self.b_gapped, self.score, self.identity
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Move {
    Diag,
    Up,
    Left,
}

/// Needleman-Wunsch alignment of `a` (top row) against `b` (bottom row).
///
/// Traceback prefers diagonal, then a gap in `b`, then a gap in `a`, so equal
/// scoring alignments always resolve the same way.
pub fn global_align(a: &Sequence, b: &Sequence, s: &Scoring) -> Result<Alignment, AlignError> {
    if a.kind() != b.kind() {
        return Err(AlignError::KindMismatch {
            a: a.kind(),
            b: b.kind(),
        });
    }
    if a.is_empty() || b.is_empty() {
        return Err(AlignError::EmptySequence);
    }
    Ok(align_bytes(a.as_bytes(), b.as_bytes(), s))
}

pub(crate) fn align_bytes(a: &[u8], b: &[u8], s: &Scoring) -> Alignment {
    let (n, m) = (a.len(), b.len());
    let cols = m + 1;
    let mut score = vec![0i32; (n + 1) * cols];
    for i in 1..=n {
        score[i * cols] = s.gap * i as i32;
    }
    for j in 1..=m {
        score[j] = s.gap * j as i32;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = score[(i - 1) * cols + j - 1] + s.pair(a[i - 1], b[j - 1]);
            let up = score[(i - 1) * cols + j] + s.gap;
            let left = score[i * cols + j - 1] + s.gap;
            score[i * cols + j] = diag.max(up).max(left);
        }
    }

    let mut top = Vec::with_capacity(n + m);
    let mut bottom = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = score[i * cols + j];
        let mv = if i > 0 && j > 0 && here == score[(i - 1) * cols + j - 1] + s.pair(a[i - 1], b[j - 1]) {
            Move::Diag
        } else if i > 0 && here == score[(i - 1) * cols + j] + s.gap {
            Move::Up
        } else {
            Move::Left
        };
        match mv {
            Move::Diag => {
                top.push(a[i - 1]);
                bottom.push(b[j - 1]);
                i -= 1;
                j -= 1;
            }
            Move::Up => {
                top.push(a[i - 1]);
                bottom.push(GAP);
                i -= 1;
            }
            Move::Left => {
                top.push(GAP);
                bottom.push(b[j - 1]);
                j -= 1;
            }
        }
    }
    top.reverse();
    bottom.reverse();

    let matches = top
        .iter()
        .zip(&bottom)
        .filter(|(x, y)| x == y && **x != GAP)
        .count();
    let identity = matches as f64 / top.len() as f64;
    Alignment {
        a_gapped: String::from_utf8(top).expect("ascii"),
        b_gapped: String::from_utf8(bottom).expect("ascii"),
        score: score[n * cols + m],
        identity,
    }
}

/// True when every column pairs two equal residues.
pub fn is_identical(al: &Alignment) -> bool {
    !al.is_empty() && al.columns().all(|(x, y)| x == y && x != GAP)
}
