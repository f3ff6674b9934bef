use std::process::ExitCode;

use randiso_cli::suites::criteria;

fn main() -> ExitCode {
    let criteria = criteria();
    let mut passed = 0;
    for c in &criteria {
        let outcome = c.run();
        println!("{outcome}");
        passed += usize::from(outcome.passed);
    }
    println!("{passed} of {} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
