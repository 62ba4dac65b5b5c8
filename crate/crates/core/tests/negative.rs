mod common;

use common::golden::{OPB, PROOF};
use common::oracles::{corrupt_fixtures, corruption_suite};
use pbxor::proof_io::parse_opb;
use pbxor::verifier::{verify_text, Checker, Verdict};

#[test]
fn fixture_suite_covers_every_class() {
    let fixtures = corrupt_fixtures();
    assert!(fixtures.len() >= 20);
    for class in ["rup-flip", "red-witness", "divisor", "dangling-id"] {
        assert!(fixtures.iter().any(|f| f.class == class), "{class}");
    }
    for f in &fixtures {
        assert_ne!(f.text, PROOF, "{}", f.file);
        // exactly one line differs, the one at the expected step
        let diff: Vec<usize> = f
            .text
            .lines()
            .zip(PROOF.lines())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(diff, vec![f.step], "{}", f.file);
    }
}

#[test]
fn each_corruption_is_rejected_at_its_step() {
    let tally = corruption_suite();
    assert!(tally.ok(), "{:?}", tally.examples);
}

#[test]
fn nonzero_wrong_divisor_is_sound_but_changes_the_listing() {
    // without a stated result, a different divisor derives a different but
    // valid constraint; only the comparison with the listing catches it
    let formula = parse_opb(OPB).unwrap();
    let altered = PROOF.replacen("p 11  9 2 * + 3 d", "p 11  9 2 * + 4 d", 1);
    assert_eq!(
        verify_text(&formula, &altered).verdict,
        Verdict::AllStepsValid
    );
    let mut a = Checker::new(&formula);
    let mut b = Checker::new(&formula);
    for ((_, x), (_, y)) in pbxor::proof_io::parse_proof(PROOF)
        .unwrap()
        .into_iter()
        .zip(pbxor::proof_io::parse_proof(&altered).unwrap())
    {
        a.apply(&x).unwrap();
        b.apply(&y).unwrap();
    }
    assert_ne!(a.database().get(13), b.database().get(13));
}

#[test]
fn truncated_and_malformed_inputs() {
    let formula = parse_opb(OPB).unwrap();
    let cases: &[(&str, usize)] = &[
        ("", 1),
        ("f 8\n", 1),
        ("pseudo-Boolean proof version 2.0\nf 8\n", 1),
        ("pseudo-Boolean proof version 1.1\nf 7\n", 2),
        ("pseudo-Boolean proof version 1.1\nrup +1 x1 >= 1 ;\n", 2),
        ("pseudo-Boolean proof version 1.1\nf 8\nc 3\n", 3),
        (
            "pseudo-Boolean proof version 1.1\nf 8\nrup +1 x1 = 1 ;\n",
            3,
        ),
        ("pseudo-Boolean proof version 1.1\nf 8\np 1 2\n", 3),
        ("pseudo-Boolean proof version 1.1\nf 8\ndel 99\n", 3),
        ("pseudo-Boolean proof version 1.1\nf 8\nfrobnicate\n", 3),
    ];
    for &(text, step) in cases {
        match verify_text(&formula, text).verdict {
            Verdict::Rejected { step: s, .. } => assert_eq!(s, step, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}
