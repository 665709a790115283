//! Every runnable example must complete.

macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(routing, "routing.rs");
example!(regulate, "regulate.rs");
example!(target_sweep, "target_sweep.rs");
example!(time_varying, "time_varying.rs");
example!(lookahead, "lookahead.rs");
example!(oracle, "oracle.rs");

#[test]
fn routing_example_runs() {
    routing::run_example().unwrap();
}

#[test]
fn regulate_example_runs() {
    regulate::run_example().unwrap();
}

#[test]
fn target_sweep_example_runs() {
    target_sweep::run_example().unwrap();
}

#[test]
fn time_varying_example_runs() {
    time_varying::run_example().unwrap();
}

#[test]
fn lookahead_example_runs() {
    lookahead::run_example().unwrap();
}

#[test]
fn oracle_example_runs() {
    oracle::run_example().unwrap();
}
