//! Deterministic stand-ins for human judges, valid on synthetic corpora only.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::{Emotion, SyntheticSpec, TemplateFamily, EMO_SLOT, NUM_EMOTIONS, TOPIC_SLOT};
use crate::error::{Error, Result};

/// Keyword classifier plus template grammar derived from a [`SyntheticSpec`].
#[derive(Clone, Debug)]
pub struct Oracle {
    keywords: HashMap<String, Emotion>,
    families: Vec<TemplateFamily>,
    collisions: BTreeSet<(Emotion, Emotion)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SentimentJudgement {
    pub score: u8,
    /// Post or response carried no keyword, so the score defaulted to 1.
    pub unclassified: bool,
}

pub fn response_quality(sentiment: u8, semantic: u8) -> u8 {
    u8::from(sentiment == 1 && semantic == 1)
}

impl Oracle {
    pub fn from_spec(spec: &SyntheticSpec) -> Result<Self> {
        spec.validate()?;
        let mut keywords = HashMap::new();
        for e in Emotion::ALL {
            for w in spec.lexicon(e) {
                keywords.insert(w.clone(), e);
            }
        }
        let mut collisions = BTreeSet::new();
        for &(a, b) in &spec.collisions {
            collisions.insert((a, b));
            collisions.insert((b, a));
        }
        Ok(Oracle {
            keywords,
            families: spec.families.clone(),
            collisions,
        })
    }

    /// Keyword hits per category, canonical order.
    pub fn hits<S: AsRef<str>>(&self, tokens: &[S]) -> [usize; NUM_EMOTIONS] {
        let mut counts = [0; NUM_EMOTIONS];
        for t in tokens {
            if let Some(e) = self.keywords.get(t.as_ref()) {
                counts[e.index()] += 1;
            }
        }
        counts
    }

    /// Category with the most keyword hits, ties to the earlier category;
    /// `None` without any hit. The neutral lexicon classifies as `Other`.
    pub fn classify<S: AsRef<str>>(&self, tokens: &[S]) -> Option<Emotion> {
        let counts = self.hits(tokens);
        let best = (0..NUM_EMOTIONS).fold(0, |b, i| if counts[i] > counts[b] { i } else { b });
        (counts[best] > 0).then(|| Emotion::ALL[best])
    }

    pub fn collides(&self, post: Emotion, response: Emotion) -> bool {
        self.collisions.contains(&(post, response))
    }

    /// 0 iff the response carries a keyword of a category that collides with
    /// the post's category.
    pub fn sentiment_score<S: AsRef<str>, P: AsRef<str>>(&self, response: &[S], post: &[P]) -> SentimentJudgement {
        let Some(post_emotion) = self.classify(post) else {
            return SentimentJudgement {
                score: 1,
                unclassified: true,
            };
        };
        let hits = self.hits(response);
        if hits.iter().all(|&h| h == 0) {
            return SentimentJudgement {
                score: 1,
                unclassified: true,
            };
        }
        let collision = Emotion::ALL
            .iter()
            .any(|&e| hits[e.index()] > 0 && self.collides(post_emotion, e));
        SentimentJudgement {
            score: u8::from(!collision),
            unclassified: false,
        }
    }

    fn matches<S: AsRef<str>>(&self, template: &[String], topics: &[String], tokens: &[S]) -> bool {
        template.len() == tokens.len()
            && template.iter().zip(tokens).all(|(t, w)| {
                let w = w.as_ref();
                match t.as_str() {
                    TOPIC_SLOT => topics.iter().any(|x| x == w),
                    EMO_SLOT => self.keywords.contains_key(w),
                    lit => lit == w,
                }
            })
    }

    /// Family whose post grammar generates `post`.
    pub fn family_of<S: AsRef<str>>(&self, post: &[S]) -> Result<&TemplateFamily> {
        self.families
            .iter()
            .find(|f| f.posts.iter().any(|t| self.matches(t, &f.topics, post)))
            .ok_or_else(|| {
                let text: Vec<&str> = post.iter().map(AsRef::as_ref).collect();
                Error::Oracle(format!("post `{}` matches no known template", text.join(" ")))
            })
    }

    /// 1 iff the response fits a response template of the post's family.
    pub fn semantic_score<S: AsRef<str>, P: AsRef<str>>(&self, response: &[S], post: &[P]) -> Result<u8> {
        let family = self.family_of(post)?;
        if response.is_empty() {
            return Ok(0);
        }
        Ok(u8::from(
            family
                .responses
                .iter()
                .any(|t| self.matches(t, &family.topics, response)),
        ))
    }
}
