//! Novel character sequences for replacing controlled items.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const VOWELS: &[u8; 5] = b"aeiou";
pub const CONSONANTS: &[u8; 21] = b"bcdfghjklmnpqrstvwxyz";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthBucket {
    /// 7 to 14 characters.
    Shorter,
    /// 15 to 29 characters.
    Longer,
}

impl LengthBucket {
    pub fn range(self) -> Range<usize> {
        match self {
            LengthBucket::Shorter => 7..15,
            LengthBucket::Longer => 15..30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharDistribution {
    Random,
    /// Consonant first, then strict consonant/vowel alternation.
    Cvcv,
}

macro_rules! str_enum {
    ($ty:ty { $($s:literal => $v:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = SamplerError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($s => Ok($v),)+
                    other => Err(SamplerError::UnknownOption(String::from(other))),
                }
            }
        }
    };
}

str_enum!(LengthBucket { "shorter" => LengthBucket::Shorter, "longer" => LengthBucket::Longer });
str_enum!(CharDistribution { "random" => CharDistribution::Random, "cvcv" => CharDistribution::Cvcv });

impl fmt::Display for LengthBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LengthBucket::Shorter => "shorter",
            LengthBucket::Longer => "longer",
        })
    }
}

impl fmt::Display for CharDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CharDistribution::Random => "random",
            CharDistribution::Cvcv => "cvcv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub length: LengthBucket,
    pub distribution: CharDistribution,
    pub seed: u64,
    pub count: usize,
    /// Outputs may not equal, or be a substring of, any of these (ASCII
    /// case-insensitive). Not serialized; plans record only its size.
    #[serde(skip)]
    pub blocklist: Vec<String>,
}

impl SamplerConfig {
    pub fn new(length: LengthBucket, distribution: CharDistribution, seed: u64, count: usize) -> Self {
        SamplerConfig {
            length,
            distribution,
            seed,
            count,
            blocklist: Vec::new(),
        }
    }

    pub fn with_blocklist<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.blocklist = words.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplerError {
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("could not draw {wanted} distinct sequences within {attempts} attempts (got {got})")]
    Exhausted { wanted: usize, got: usize, attempts: usize },
    #[error("unknown option {0:?}")]
    UnknownOption(String),
}

pub fn is_vowel(b: u8) -> bool {
    VOWELS.contains(&b)
}

/// Draws one sequence from `rng`.
pub fn draw_one<R: Rng>(rng: &mut R, length: LengthBucket, dist: CharDistribution) -> String {
    let len = rng.gen_range(length.range());
    let mut s = Vec::with_capacity(len);
    for i in 0..len {
        let b = match dist {
            CharDistribution::Random => b'a' + rng.gen_range(0..26u8),
            CharDistribution::Cvcv if i % 2 == 0 => CONSONANTS[rng.gen_range(0..CONSONANTS.len())],
            CharDistribution::Cvcv => VOWELS[rng.gen_range(0..VOWELS.len())],
        };
        s.push(b);
    }
    // a-z only
    String::from_utf8(s).expect("ascii")
}

struct Blocklist {
    exact: BTreeSet<String>,
    long: Vec<String>,
}

impl Blocklist {
    fn new(words: &[String], min_len: usize) -> Self {
        let mut exact = BTreeSet::new();
        let mut long = Vec::new();
        for w in words {
            let w = w.to_ascii_lowercase();
            if w.len() > min_len {
                long.push(w.clone());
            }
            exact.insert(w);
        }
        Blocklist { exact, long }
    }

    fn blocks(&self, s: &str) -> bool {
        self.exact.contains(s) || self.long.iter().any(|w| w.contains(s))
    }
}

/// Deterministic under `config.seed`; returns `config.count` distinct strings.
pub fn sample_sequences(config: &SamplerConfig) -> Result<Vec<String>, SamplerError> {
    if config.count == 0 {
        return Err(SamplerError::ZeroCount);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let block = Blocklist::new(&config.blocklist, config.length.range().start);
    let max_attempts = config.count.saturating_mul(100).saturating_add(10_000);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(config.count);
    let mut attempts = 0;
    while out.len() < config.count {
        if attempts == max_attempts {
            return Err(SamplerError::Exhausted {
                wanted: config.count,
                got: out.len(),
                attempts,
            });
        }
        attempts += 1;
        let s = draw_one(&mut rng, config.length, config.distribution);
        if block.blocks(&s) || !seen.insert(s.clone()) {
            continue;
        }
        out.push(s);
    }
    Ok(out)
}

/// True if `s` could have been produced under the given bucket and distribution.
pub fn in_support(s: &str, length: LengthBucket, dist: CharDistribution) -> bool {
    let b = s.as_bytes();
    if !length.range().contains(&b.len()) || !b.iter().all(u8::is_ascii_lowercase) {
        return false;
    }
    match dist {
        CharDistribution::Random => true,
        CharDistribution::Cvcv => b.iter().enumerate().all(|(i, &c)| is_vowel(c) == (i % 2 == 1)),
    }
}
