use std::collections::HashSet;
use std::hash::Hash;
use std::str::FromStr;

use crate::error::{Error, Result};

/// What distinct n-gram counts are divided by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DistinctDenominator {
    /// Total number of n-grams across all responses.
    #[default]
    Ngrams,
    /// Total number of generated tokens. Distinct-2 can then exceed what the
    /// n-gram reading allows, so this is opt-in.
    Tokens,
}

impl DistinctDenominator {
    pub fn name(self) -> &'static str {
        match self {
            DistinctDenominator::Ngrams => "ngrams",
            DistinctDenominator::Tokens => "tokens",
        }
    }
}

impl FromStr for DistinctDenominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ngrams" => Ok(DistinctDenominator::Ngrams),
            "tokens" => Ok(DistinctDenominator::Tokens),
            other => Err(Error::Config(format!(
                "unknown distinct denominator `{other}` (expected ngrams or tokens)"
            ))),
        }
    }
}

/// Distinct n-grams across all responses over the chosen total. N-grams
/// never span two responses. Empty input, or input without any n-gram,
/// gives `0`.
pub fn distinct_n_with<S, T>(responses: &[S], n: usize, denominator: DistinctDenominator) -> f64
where
    S: AsRef<[T]>,
    T: Eq + Hash,
{
    if n == 0 {
        return 0.0;
    }
    let mut seen: HashSet<&[T]> = HashSet::new();
    let (mut grams, mut tokens) = (0usize, 0usize);
    for r in responses {
        let r = r.as_ref();
        tokens += r.len();
        for w in r.windows(n) {
            grams += 1;
            seen.insert(w);
        }
    }
    let total = match denominator {
        DistinctDenominator::Ngrams => grams,
        DistinctDenominator::Tokens => tokens,
    };
    if total == 0 {
        0.0
    } else {
        seen.len() as f64 / total as f64
    }
}

pub fn distinct_n<S, T>(responses: &[S], n: usize) -> f64
where
    S: AsRef<[T]>,
    T: Eq + Hash,
{
    distinct_n_with(responses, n, DistinctDenominator::Ngrams)
}
