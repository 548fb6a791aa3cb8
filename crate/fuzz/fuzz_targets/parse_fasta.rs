#![no_main]

use libfuzzer_sys::fuzz_target;
use tp53_classify::seqcore::{parse_fasta, translate, write_fasta, SeqKind, TranslateMode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(seqs) = parse_fasta(text) else {
        return;
    };
    // whatever parses must survive a write/parse cycle unchanged
    let again = parse_fasta(&write_fasta(&seqs, 60)).expect("written FASTA reparses");
    assert_eq!(again.len(), seqs.len());
    for (a, b) in again.iter().zip(&seqs) {
        assert_eq!(a.id(), b.id());
        assert_eq!(a.residues(), b.residues());
        if b.kind() == SeqKind::Dna && b.len() >= 3 {
            let _ = translate(b, TranslateMode::Full);
        }
    }
});
