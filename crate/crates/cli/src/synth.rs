//! `synth`: deterministic signal generators for oracles and smoke tests.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::output::write_atomic;
use crate::{SynthArgs, SynthKind};

pub fn run(args: SynthArgs) -> Result<(), CliError> {
    if args.count == 0 {
        return Err(CliError::param("sample count must be at least 1"));
    }
    let values: Vec<f64> = match args.kind {
        SynthKind::Ramp => (0..args.count).map(|i| i as f64).collect(),
        SynthKind::Sine => {
            if args.rate == 0 {
                return Err(CliError::param("sample rate must be positive"));
            }
            (0..args.count)
                .map(|i| {
                    (2.0 * std::f64::consts::PI * args.freq * i as f64 / args.rate as f64).sin()
                })
                .collect()
        }
        SynthKind::Noise => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..args.count).map(|_| rng.gen::<f64>()).collect()
        }
    };

    let mut text = String::new();
    for v in values {
        writeln!(text, "{v}").expect("string write");
    }
    match args.out {
        Some(path) => write_atomic(&path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
