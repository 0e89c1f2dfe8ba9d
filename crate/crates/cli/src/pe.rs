//! `pe`: normalized permutation entropy of a plain numeric series.

use std::io::Read;
use std::path::Path;

use sleep_pe::{permutation_entropy, PatternParams};

use crate::error::CliError;
use crate::output::read_to_string;
use crate::PeArgs;

pub fn run(args: PeArgs) -> Result<(), CliError> {
    let text = if args.input == Path::new("-") {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::file(format!("stdin: {e}")))?;
        buf
    } else {
        read_to_string(&args.input)?
    };

    let series = parse_series(&text)?;
    let params = PatternParams::new(args.order, args.delay)?
        .with_tie_rule(args.tie_rule.to_rule(args.tie_seed));
    let pe: f64 = permutation_entropy(&series, &params, true)?;
    println!("{pe:.6}");
    Ok(())
}

/// Whitespace- or comma-separated floats, any mix, empty tokens skipped.
fn parse_series(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::format(format!("not a number: {t:?}")))
        })
        .collect()
}
