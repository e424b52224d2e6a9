use optobs_cli::oracle::{OracleOptions, SmtOracle};
use optobs_core::oracle::{FullQuery, PomdpOracle};
use optobs_core::strategy::StrategyMode;
use std::time::Duration;

fn main() {
    let m = optobs_core::worlds::gen_line(5, optobs_core::rational::one()).unwrap();
    let mut oracle = SmtOracle::from_env(OracleOptions::default(), Duration::from_secs(30)).unwrap();
    let tau = optobs_core::rational::int(4);
    eprintln!("checking...");
    let res = oracle
        .check_full(&FullQuery {
            m: &m,
            budget: 2,
            location: false,
            tau: &tau,
            strict: false,
            mode: StrategyMode::Randomized,
        })
        .unwrap();
    eprintln!("status: {:?}", res.status);
    if let Some((obs, _sigma, reward)) = res.witness {
        eprintln!("witness reward {reward}, obs classes {:?}", obs.classes());
    }
}
