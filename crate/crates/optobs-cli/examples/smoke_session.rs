use optobs_cli::smt::{SmtSession, SolverConfig};
use std::time::Duration;

fn main() {
    let mut cfg = SolverConfig::resolve().expect("solver");
    eprintln!("solver cmd: {:?}", cfg.command);
    cfg.timeout = Duration::from_secs(20);
    let mut s = SmtSession::open(&cfg).expect("open");
    eprintln!("opened");
    s.assert_raw("(set-logic ALL)\n(set-option :produce-models true)\n").expect("header");
    eprintln!("header ok");
    s.assert_raw("(declare-const x Real)\n(assert (= (* x 3) 1))\n").expect("asserts");
    eprintln!("asserts ok");
    let v = s.check().expect("check");
    eprintln!("verdict: {:?}", v.status);
    let model = s.get_values(&["x".to_string()]).expect("values");
    eprintln!("model: {:?}", model);
}
