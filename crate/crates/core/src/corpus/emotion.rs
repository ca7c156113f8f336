use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Emotion categories in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Emotion {
    Angry,
    Disgust,
    Happy,
    Like,
    Sad,
    Other,
}

pub const NUM_EMOTIONS: usize = 6;

impl Emotion {
    pub const ALL: [Emotion; NUM_EMOTIONS] = [
        Emotion::Angry,
        Emotion::Disgust,
        Emotion::Happy,
        Emotion::Like,
        Emotion::Sad,
        Emotion::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Emotion> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Angry => "Angry",
            Emotion::Disgust => "Disgust",
            Emotion::Happy => "Happy",
            Emotion::Like => "Like",
            Emotion::Sad => "Sad",
            Emotion::Other => "Other",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    /// Case-sensitive; only the canonical names are accepted.
    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownEmotion(s.to_string()))
    }
}

/// Six values over the categories, canonical order.
///
/// Either a multi-hot target (entries in {0, 1}) or a prediction (entries in
/// (0, 1), not normalized).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmotionVector(pub [f32; NUM_EMOTIONS]);

impl EmotionVector {
    pub fn zeros() -> Self {
        EmotionVector([0.0; NUM_EMOTIONS])
    }

    pub fn one_hot(e: Emotion) -> Self {
        let mut v = Self::zeros();
        v.0[e.index()] = 1.0;
        v
    }

    pub fn values(&self) -> &[f32; NUM_EMOTIONS] {
        &self.0
    }

    pub fn get(&self, e: Emotion) -> f32 {
        self.0[e.index()]
    }

    /// Highest-valued category; ties go to the earlier category.
    pub fn argmax(&self) -> Emotion {
        let mut best = 0;
        for i in 1..NUM_EMOTIONS {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Emotion::ALL[best]
    }

    pub fn bits_set(&self) -> usize {
        self.0.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn as_f64(&self) -> [f64; NUM_EMOTIONS] {
        self.0.map(f64::from)
    }

    /// `Angry=0.1234 Disgust=...` with four decimals.
    pub fn labeled(&self) -> String {
        Emotion::ALL
            .iter()
            .map(|e| format!("{}={:.4}", e, self.get(*e)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Multi-hot encoding of a (primary, secondary) label pair.
///
/// `Other` only sets its bit when no real emotion is present, so
/// `(Other, Other)` marks Other alone, `(e, Other)` marks `e` alone and two
/// real emotions mark both. Duplicates collapse to one bit.
pub fn multi_hot(primary: Emotion, secondary: Emotion) -> EmotionVector {
    let mut v = EmotionVector::zeros();
    for e in [primary, secondary] {
        if e != Emotion::Other {
            v.0[e.index()] = 1.0;
        }
    }
    if v.bits_set() == 0 {
        v.0[Emotion::Other.index()] = 1.0;
    }
    v
}

pub fn multi_hot_names(primary: &str, secondary: &str) -> Result<EmotionVector> {
    Ok(multi_hot(primary.parse()?, secondary.parse()?))
}
