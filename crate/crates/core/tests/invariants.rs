//! Property tests over randomly generated machines. Machines are drawn by
//! seeding the deterministic test generator, so every failure reproduces
//! from the seed proptest reports.

use proptest::prelude::*;

use metra_core::testgen::{random_input, random_machine, random_tape_machine, rng_for};
use metra_core::{
    bake_input, bake_overhead, parse_dsl, quote, render_dsl, run, unquote, Machine, OracleSet,
    ProviderSet, RunStatus, TraceLevel,
};

fn any_machine(seed: u64) -> Machine {
    random_machine(&mut rng_for(seed))
}

fn run_plain(m: &Machine, input: &str, budget: u64) -> metra_core::RunOutcome {
    let mut providers = ProviderSet::empty();
    run(
        m,
        input,
        &mut providers,
        &OracleSet::disabled(),
        budget,
        TraceLevel::Off,
    )
    .expect("generated machines are valid and inputs fit their alphabets")
}

proptest! {
    #[test]
    fn dsl_text_round_trips(seed in any::<u64>()) {
        let m = any_machine(seed);
        let text = render_dsl(&m);
        let back = parse_dsl(&text).expect("rendered text parses");
        prop_assert_eq!(back, m.canonicalize());
    }

    #[test]
    fn quotes_round_trip_and_stabilize(seed in any::<u64>()) {
        let m = any_machine(seed);
        let q = quote(&m);
        let back = unquote(&q).expect("own quotes decode");
        prop_assert_eq!(&back, &m.canonicalize());
        prop_assert_eq!(quote(&back), q);
    }

    #[test]
    fn canonical_form_ignores_instruction_order(seed in any::<u64>()) {
        let m = any_machine(seed);
        let canon = m.canonicalize();
        prop_assert_eq!(canon.canonicalize(), canon.clone());
        let mut reversed = m.clone();
        reversed.instructions.reverse();
        prop_assert_eq!(reversed.canonicalize(), canon);
    }

    #[test]
    fn baking_an_input_preserves_the_run(seed in any::<u64>()) {
        let mut rng = rng_for(seed);
        let m = random_tape_machine(&mut rng);
        let input = random_input(&mut rng, &m, 5);
        let budget = 10_000;
        let direct = run_plain(&m, &input, budget);
        let baked = bake_input(&m, &input).expect("inputs come from the machine's alphabet");
        let overhead = bake_overhead(input.chars().count());
        let via_bake = run_plain(&baked, "", budget + overhead);
        prop_assert_eq!(via_bake.status, direct.status);
        prop_assert_eq!(via_bake.result, direct.result);
        prop_assert_eq!(via_bake.steps, direct.steps + overhead);
    }

    #[test]
    fn halting_runs_ignore_extra_budget(seed in any::<u64>()) {
        let mut rng = rng_for(seed);
        let m = random_tape_machine(&mut rng);
        let input = random_input(&mut rng, &m, 5);
        let short = run_plain(&m, &input, 1_000);
        if short.status == RunStatus::Halted {
            let long = run_plain(&m, &input, 50_000);
            prop_assert_eq!(long.status, RunStatus::Halted);
            prop_assert_eq!(long.result, short.result);
            prop_assert_eq!(long.steps, short.steps);
        }
    }

    // A corrupted quote can still be the canonical quote of some other
    // machine (one digit of a symbol code may swap it for another declared
    // symbol), but decoding must never hand back the original: success
    // means the string is exactly the decoded machine's own quote.
    #[test]
    fn corrupted_quotes_never_decode_to_the_original(
        seed in any::<u64>(),
        pos in any::<prop::sample::Index>(),
        replacement in prop::sample::select(&metra_core::QUOTE_ALPHABET),
    ) {
        let q = quote(&any_machine(seed));
        let idx = pos.index(q.len());
        let mut mutated: Vec<char> = q.chars().collect();
        prop_assume!(mutated[idx] != replacement);
        mutated[idx] = replacement;
        let mutated: String = mutated.into_iter().collect();
        if let Ok(m) = unquote(&mutated) {
            prop_assert_eq!(quote(&m), mutated.clone());
            prop_assert_ne!(quote(&m), q);
        }
    }
}
