macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));
        }

        #[test]
        fn $name() {
            $name::run_example().expect("example runs");
        }
    };
}

example!(channel_slots);
example!(single_election);
example!(reference_engine);
example!(round_oracles);
example!(cost_tradeoff);
example!(harmonic_sums);
example!(monte_carlo);
example!(parameter_sweep);
example!(dominance);
example!(reproduce);
