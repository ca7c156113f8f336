use std::fmt::Write;

use super::emotion::{Emotion, NUM_EMOTIONS};
use super::records::ConversationPair;

/// Post-emotion × response-emotion transition counts over primary labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EipMatrix {
    pub counts: [[u64; NUM_EMOTIONS]; NUM_EMOTIONS],
}

impl EipMatrix {
    pub fn from_label_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Emotion, Emotion)>,
    {
        let mut m = EipMatrix::default();
        for (p, r) in pairs {
            m.counts[p.index()][r.index()] += 1;
        }
        m
    }

    pub fn get(&self, post: Emotion, response: Emotion) -> u64 {
        self.counts[post.index()][response.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Comma-separated matrix with a header row and a header column.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("post\\response");
        for e in Emotion::ALL {
            let _ = write!(s, ",{e}");
        }
        s.push('\n');
        for p in Emotion::ALL {
            s.push_str(p.name());
            for r in Emotion::ALL {
                let _ = write!(s, ",{}", self.get(p, r));
            }
            s.push('\n');
        }
        s
    }
}

/// Counts `(post primary, response primary)` over a corpus.
pub fn eip_matrix(pairs: &[ConversationPair]) -> EipMatrix {
    EipMatrix::from_label_pairs(pairs.iter().map(|p| (p.post_labels.0, p.response_labels.0)))
}
