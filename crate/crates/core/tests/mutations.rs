mod common;

use proptest::prelude::*;
use tp53_classify::align::{global_align, is_identical, Scoring};
use tp53_classify::mutcall::{
    apply_mutations, call_dna_mutations, classify_event, codon_effect, diagnose, stop_scan, DnaMutation,
    DnaMutationKind, Structural, SubstClass, Verdict,
};
use tp53_classify::seqcore::{parse_fasta, translate, Sequence, TranslateMode};

use common::{fixture_text, oracle_first_stop, oracle_is_transition};

fn reference() -> Sequence {
    parse_fasta(&fixture_text("tp53_reference_cds.fasta")).unwrap().remove(0)
}

fn person(name: &str) -> Sequence {
    parse_fasta(&fixture_text(name)).unwrap().remove(0)
}

#[test]
fn codon_155_walkthrough() {
    let d = diagnose(&reference(), &person("person_codon155.fasta"), &Scoring::default()).unwrap();
    assert_eq!(d.verdict, Verdict::Malignant);
    assert_eq!(d.dna_mutations, vec![DnaMutation::substitution(463, 'A', 'C')]);
    assert_eq!(d.records.len(), 1);
    let r = &d.records[0];
    assert_eq!(r.codon_number, 155);
    assert_eq!((r.wt_codon.as_str(), r.mutant_codon.as_str()), ("ACC", "CCC"));
    assert_eq!((r.wt_aa.as_str(), r.mutant_aa.as_str()), ("Thr", "Pro"));
    assert_eq!(r.event, "A>C");
    assert_eq!(r.subst_class, SubstClass::Tv);
    let protein = d.protein_alignment.as_ref().unwrap();
    assert_eq!(&protein.a_gapped[154..155], "T");
    assert_eq!(&protein.b_gapped[154..155], "P");
}

#[test]
fn fixture_verdicts() {
    let s = Scoring::default();
    assert_eq!(diagnose(&reference(), &person("person_normal.fasta"), &s).unwrap().verdict, Verdict::Normal);
    let silent = diagnose(&reference(), &person("person_silent.fasta"), &s).unwrap();
    assert_eq!(silent.verdict, Verdict::Silent);
    assert_eq!(silent.dna_mutations, vec![DnaMutation::substitution(300, 'A', 'G')]);
}

/// Every substitution row of the mutation table, replayed on the reference.
#[test]
fn table_substitutions_reproduce_codon_columns() {
    let rows = [
        (94, 'G', 'C', "GAG", "CAG", "Glu", "Gln", SubstClass::Tv),
        (110, 'A', 'T', "CAG", "CTG", "Gln", "Leu", SubstClass::Tv),
        (114, 'A', 'T', "GAA", "GAT", "Glu", "Asp", SubstClass::Tv),
        (135, 'A', 'T', "AAA", "AAT", "Lys", "Asn", SubstClass::Tv),
        (172, 'T', 'C', "TCC", "CCC", "Ser", "Pro", SubstClass::Ts),
        (203, 'C', 'T', "CCG", "CTG", "Pro", "Leu", SubstClass::Ts),
        (208, 'G', 'C', "GAT", "CAT", "Asp", "His", SubstClass::Tv),
        (214, 'G', 'T', "GAA", "TAA", "Glu", "Stop", SubstClass::Tv),
        (217, 'C', 'T', "CAA", "TAA", "Gln", "Stop", SubstClass::Ts),
        (222, 'G', 'A', "TGG", "TGA", "Trp", "Stop", SubstClass::Ts),
        (224, 'T', 'A', "TTC", "TAC", "Phe", "Tyr", SubstClass::Tv),
    ];
    let cds = reference();
    for (pos, r, a, wt, mt, wa, ma, class) in rows {
        let rec = codon_effect(&cds, &DnaMutation::substitution(pos, r, a)).unwrap();
        assert_eq!(rec.codon_number, pos.div_ceil(3));
        assert_eq!((rec.wt_codon.as_str(), rec.mutant_codon.as_str()), (wt, mt), "nt {pos}");
        assert_eq!((rec.wt_aa.as_str(), rec.mutant_aa.as_str()), (wa, ma), "nt {pos}");
        assert_eq!(rec.subst_class, class, "nt {pos}");
        assert_eq!(rec.structural, Structural::Substitution);
        assert_eq!(rec.stop_at, None);
    }
}

#[test]
fn frameshift_stop_matches_retranslation() {
    // 60-nt synthetic CDS, no internal stop in frame 1
    let cds = "ATGGCTAAAGGCCTGACCGATGTACTGAGCCCAGTGAACGGTCATCGTGCGTTTCAGTAA";
    let seq = Sequence::dna("s", cds).unwrap();
    assert_eq!(translate(&seq, TranslateMode::Full).unwrap().residues().find('*'), Some(19));
    let del = DnaMutation::deletion(10, &cds[9..10]);
    let rec = codon_effect(&seq, &del).unwrap();
    assert_eq!(rec.structural, Structural::Frameshift);
    assert_eq!(rec.mutant_aa, "Fs");
    assert_eq!(rec.codon_number, 4);
    let mutant = apply_mutations(cds, &[del]).unwrap();
    let expected = oracle_first_stop(&mutant, 4);
    assert_eq!(rec.stop_at, expected);
    // ATG GCT AAA GCC TGA ... -> stop in the shifted frame at codon 5
    assert_eq!(expected, Some(5));
}

#[test]
fn stop_scan_agrees_with_oracle_on_reference_frameshifts() {
    let cds = reference();
    for pos in (1..cds.len()).step_by(37) {
        for m in [
            DnaMutation::deletion(pos, &cds.residues()[pos - 1..pos]),
            DnaMutation::insertion(pos, "A"),
            DnaMutation::insertion(pos, "GC"),
        ] {
            let rec = codon_effect(&cds, &m).unwrap();
            let mutant = apply_mutations(cds.residues(), &[m]).unwrap();
            assert_eq!(rec.stop_at, oracle_first_stop(&mutant, rec.codon_number), "{pos}");
            let mseq = Sequence::dna("m", &mutant).unwrap();
            assert_eq!(stop_scan(&mseq, rec.codon_number), rec.stop_at);
        }
    }
}

#[test]
fn ts_tv_partition() {
    let bases = ['A', 'C', 'G', 'T'];
    let mut ts = 0;
    for a in bases {
        for b in bases {
            if a == b {
                assert!(classify_event(a, b).is_err());
                continue;
            }
            let c = classify_event(a, b).unwrap();
            assert_eq!(c == SubstClass::Ts, oracle_is_transition(a, b));
            assert!(matches!(c, SubstClass::Ts | SubstClass::Tv));
            ts += usize::from(c == SubstClass::Ts);
        }
    }
    assert_eq!(ts, 4);
}

#[derive(Debug, Clone)]
enum Edit {
    Sub(usize, u8),
    Ins(usize, String),
    Del(usize, usize),
}

fn edit() -> impl Strategy<Value = Edit> {
    let base = prop::sample::select(b"ACGT".to_vec());
    prop_oneof![
        (any::<usize>(), base).prop_map(|(p, b)| Edit::Sub(p, b)),
        (any::<usize>(), "[ACGT]{1,7}").prop_map(|(p, s)| Edit::Ins(p, s)),
        (any::<usize>(), 1usize..7).prop_map(|(p, n)| Edit::Del(p, n)),
    ]
}

fn mutate(reference: &str, edits: &[Edit]) -> String {
    let mut s = reference.as_bytes().to_vec();
    for e in edits {
        match e {
            Edit::Sub(p, b) if !s.is_empty() => {
                let i = p % s.len();
                s[i] = *b;
            }
            Edit::Ins(p, bases) => {
                let i = p % (s.len() + 1);
                s.splice(i..i, bases.bytes());
            }
            Edit::Del(p, n) if s.len() > *n + 3 => {
                let i = p % (s.len() - n);
                s.drain(i..i + n);
            }
            _ => {}
        }
    }
    String::from_utf8(s).unwrap()
}

fn cds_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop::sample::select(vec!["GCT", "AAA", "CCA", "GAG", "TGG", "CAT", "ATC"]), 3..25)
        .prop_map(|codons| format!("ATG{}TAA", codons.concat()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn called_mutations_rebuild_person(reference in cds_strategy(), edits in proptest::collection::vec(edit(), 0..4)) {
        let person = mutate(&reference, &edits);
        prop_assume!(!person.is_empty());
        let r = Sequence::dna("r", &reference).unwrap();
        let p = Sequence::dna("p", &person).unwrap();
        let al = global_align(&r, &p, &Scoring::default()).unwrap();
        let muts = call_dna_mutations(&al);
        prop_assert!(muts.windows(2).all(|w| w[0].nt_position <= w[1].nt_position));
        prop_assert_eq!(apply_mutations(&reference, &muts).unwrap(), person);
        for m in &muts {
            match m.kind {
                DnaMutationKind::Substitution => prop_assert_eq!(m.ref_bases.len(), 1),
                DnaMutationKind::Insertion => prop_assert!(m.ref_bases.is_empty() && !m.alt_bases.is_empty()),
                DnaMutationKind::Deletion => prop_assert!(m.alt_bases.is_empty() && !m.ref_bases.is_empty()),
            }
            prop_assert!(m.nt_position <= reference.len() + 1);
        }
    }

    #[test]
    fn frameshift_iff_length_not_multiple_of_three(
        reference in cds_strategy(), pos in any::<usize>(), ins in "[ACGT]{1,9}", del_len in 1usize..9,
    ) {
        let r = Sequence::dna("r", &reference).unwrap();
        let ins_at = 1 + pos % (reference.len() + 1);
        let rec = codon_effect(&r, &DnaMutation::insertion(ins_at, &ins)).unwrap();
        prop_assert_eq!(rec.structural == Structural::Frameshift, ins.len() % 3 != 0);
        let del_at = 1 + pos % (reference.len() - del_len);
        let rec = codon_effect(&r, &DnaMutation::deletion(del_at, &reference[del_at - 1..del_at - 1 + del_len])).unwrap();
        prop_assert_eq!(rec.structural == Structural::Frameshift, del_len % 3 != 0);
        prop_assert_eq!(rec.codon_number, del_at.div_ceil(3));
        if rec.structural == Structural::Frameshift {
            prop_assert_eq!(rec.mutant_aa.as_str(), "Fs");
        }
    }

    #[test]
    fn verdict_is_consistent(reference in cds_strategy(), edits in proptest::collection::vec(edit(), 0..3)) {
        let person = mutate(&reference, &edits);
        prop_assume!(person.len() >= 3);
        let r = Sequence::dna("r", &reference).unwrap();
        let p = Sequence::dna("p", &person).unwrap();
        let s = Scoring::default();
        let d = diagnose(&r, &p, &s).unwrap();
        let dna_identical = is_identical(&global_align(&r, &p, &s).unwrap());
        match d.verdict {
            Verdict::Normal => {
                prop_assert!(dna_identical);
                prop_assert!(d.dna_mutations.is_empty());
            }
            Verdict::Silent => {
                prop_assert!(!dna_identical);
                prop_assert!(!d.dna_mutations.is_empty() && d.records.is_empty());
                prop_assert!(is_identical(d.protein_alignment.as_ref().unwrap()));
            }
            Verdict::Malignant => {
                prop_assert!(!dna_identical);
                prop_assert!(!d.records.is_empty());
                prop_assert!(!is_identical(d.protein_alignment.as_ref().unwrap()));
            }
        }
        for rec in &d.records {
            prop_assert_eq!(rec.codon_number, rec.nt_position.div_ceil(3));
            if rec.structural == Structural::Substitution {
                prop_assert!(rec.subst_class != SubstClass::NotApplicable && rec.stop_at.is_none());
            }
        }
    }
}
