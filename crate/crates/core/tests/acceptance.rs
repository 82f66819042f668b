//! Runs every acceptance criterion in sequence (so time budgets are not
//! skewed by other criteria running alongside) and prints one line each.
//! Lines go straight to the stderr handle so they show without `--nocapture`.

use std::io::Write;

use fedlat_core::verify;

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for &id in verify::criteria(verify::Level::Full) {
        let result = verify::run(id).expect("known criterion");
        let _ = writeln!(std::io::stderr(), "{result}");
        if !result.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
