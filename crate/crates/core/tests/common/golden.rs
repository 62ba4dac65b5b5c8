use pbxor::pb::PBConstraint;
use pbxor::proof_io::{parse_proof_line, ProofStep, VarNames};

pub const OPB: &str = include_str!("../fixtures/worked_example.opb");
pub const CNF: &str = include_str!("../fixtures/worked_example.cnf");
pub const PROOF: &str = include_str!("../fixtures/worked_example.pbp");

pub fn constraint(text: &str) -> PBConstraint {
    match parse_proof_line(&format!("rup {text} ;"), &mut VarNames::new()) {
        Ok(Some(ProofStep::Rup { constraint })) => constraint,
        other => panic!("bad constraint text {text:?}: {other:?}"),
    }
}

/// The constraint each derivation step is expected to store.
pub const LISTED: &[(u64, &str)] = &[
    (9, "+2 ~y1 +1 x1 +1 x2 +1 x3 >= 2"),
    (10, "+2 y1 +1 ~x1 +1 ~x2 +1 ~x3 >= 2"),
    (11, "+3 ~y2 +1 x1 +1 x2 +1 x3 +2 ~y1 >= 3"),
    (12, "+3 y2 +1 ~x1 +1 ~x2 +1 ~x3 +2 y1 >= 3"),
    (13, "+1 x1 +1 x2 +1 x3 +2 ~y1 +1 ~y2 >= 3"),
    (14, "+1 ~x1 +1 ~x2 +1 ~x3 +2 y1 +1 y2 >= 3"),
    (15, "+1 ~y2 +1 x1 +1 x2 +1 x3 >= 1"),
    (16, "+1 ~y2 +1 x1 +1 ~x2 +1 ~x3 >= 1"),
    (17, "+1 ~y2 +1 ~x1 +1 x2 +1 ~x3 >= 1"),
    (18, "+1 ~y2 +1 ~x1 +1 ~x2 +1 x3 >= 1"),
    (19, "+1 ~y2 >= 1"),
    (20, "+1 x1 +1 x2 +1 x3 +2 ~y1 >= 2"),
    (21, "+1 ~x1 +1 ~x2 +1 ~x3 +2 y1 >= 3"),
    (22, "+2 ~y3 +1 x2 +1 x3 +1 x4 >= 2"),
    (23, "+2 y3 +1 ~x2 +1 ~x3 +1 ~x4 >= 2"),
    (24, "+3 ~y4 +1 x2 +1 x3 +1 x4 +2 ~y3 >= 3"),
    (25, "+3 y4 +1 ~x2 +1 ~x3 +1 ~x4 +2 y3 >= 3"),
    (26, "+1 x2 +1 x3 +1 x4 +2 ~y3 +1 ~y4 >= 3"),
    (27, "+1 ~x2 +1 ~x3 +1 ~x4 +2 y3 +1 y4 >= 3"),
    (28, "+1 y4 +1 x2 +1 x3 +1 ~x4 >= 1"),
    (29, "+1 y4 +1 x2 +1 ~x3 +1 x4 >= 1"),
    (30, "+1 y4 +1 ~x2 +1 x3 +1 x4 >= 1"),
    (31, "+1 y4 +1 ~x2 +1 ~x3 +1 ~x4 >= 1"),
    (32, "+1 y4 >= 1"),
    (33, "+1 x2 +1 x3 +1 x4 +2 ~y3 >= 3"),
    (34, "+1 ~x2 +1 ~x3 +1 ~x4 +2 y3 >= 2"),
    (35, "+1 x1 +1 x4 +2 x2 +2 x3 +2 ~y1 +2 ~y3 >= 5"),
    (36, "+1 ~x1 +1 ~x4 +2 ~x2 +2 ~x3 +2 y1 +2 y3 >= 5"),
    (37, "+1 x1 +1 x4 >= 1"),
];
