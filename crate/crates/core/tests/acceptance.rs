//! One PASS/FAIL line per acceptance criterion, followed by every check.
//!
//! Criterion 9 is expected to fail: the planar pairing equals four times the
//! literal spectral form, which the informational `quadratic_form_corrected`
//! lines confirm. Everything else must pass.

use ks_blowup::verify::{Status, Suite};

const EXPECTED_FAILURES: [usize; 1] = [9];

#[test]
fn acceptance() {
    let suite = Suite::new();
    let outcomes: Vec<_> = (1..=13).map(|id| suite.run(id)).collect();
    for o in &outcomes {
        println!("{}  [{:.2?}]", o.summary(), o.elapsed);
    }
    println!();
    for o in &outcomes {
        for c in &o.checks {
            println!("{}", c.line());
        }
    }
    for o in &outcomes {
        if EXPECTED_FAILURES.contains(&o.id) {
            assert!(o.error.is_none(), "{}", o.summary());
            assert!(o.checks.iter().any(|c| c.status == Status::Fail), "criterion {} unexpectedly passed", o.id);
        } else {
            assert!(o.passed(), "{}", o.summary());
        }
    }
}
