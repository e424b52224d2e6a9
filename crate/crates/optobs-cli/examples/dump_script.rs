fn main() {
    let m = optobs_core::worlds::gen_line(5, optobs_core::rational::one()).unwrap();
    let t = optobs_core::tpmc::build_observation_tpmc(&m, 2).unwrap();
    let opts = optobs_core::script::EncodeOptions::new(
        optobs_core::strategy::StrategyMode::Randomized,
        optobs_core::rational::int(4),
    );
    let script = optobs_core::script::encode(&t, &opts);
    print!("{}", script.render());
}
