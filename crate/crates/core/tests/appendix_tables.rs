mod common;

use bcc_concat::inner_codes::CodeId;
use common::{compare_table, REP2_TABLE, REP3_TABLE, TYPE_ONE_TABLE};

#[test]
fn type_one_table_is_reproduced() {
    // The table is stated for the trivial code; in the larger transversal
    // codes a single-qubit X is not a logical operator, so the stabilizer
    // cosets differ.
    let problems = compare_table(CodeId::Cubic, &TYPE_ONE_TABLE);
    assert!(problems.is_empty(), "{problems:#?}");
}

#[test]
fn rep2_table_is_reproduced() {
    let problems = compare_table(CodeId::Rep2, &REP2_TABLE);
    assert!(problems.is_empty(), "{problems:#?}");
}

#[test]
fn rep3_table_is_reproduced() {
    let problems = compare_table(CodeId::Rep3, &REP3_TABLE);
    assert!(problems.is_empty(), "{problems:#?}");
}
