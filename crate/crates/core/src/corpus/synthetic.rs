//! Deterministic template-grammar corpora with a fixed emotion interaction
//! mapping.
//!
//! Every sentence is a template from one family with two slots: `{topic}`,
//! filled from the family's topic list (the response repeats the post's
//! topic), and `{emo}`, filled from the lexicon of the sentence's labeled
//! category. The response category is `mapping[post category]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::emotion::{Emotion, NUM_EMOTIONS};
use super::records::{write_records, RawRecord};
use crate::error::{Error, Result};
use crate::kv;

pub const TOPIC_SLOT: &str = "{topic}";
pub const EMO_SLOT: &str = "{emo}";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateFamily {
    pub name: String,
    pub topics: Vec<String>,
    pub posts: Vec<Vec<String>>,
    pub responses: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub pairs: usize,
    pub seed: u64,
    /// Response category for each post category, indexed canonically.
    pub mapping: [Emotion; NUM_EMOTIONS],
    /// Keyword lexicon per category; `Other` holds neutral words.
    pub lexicons: [Vec<String>; NUM_EMOTIONS],
    pub families: Vec<TemplateFamily>,
    /// Symmetric emotion collisions used by the sentiment oracle.
    pub collisions: Vec<(Emotion, Emotion)>,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn templates(s: &str) -> Vec<Vec<String>> {
    s.split('|').map(words).filter(|t| !t.is_empty()).collect()
}

fn family(name: &str, topics: &str, posts: &str, responses: &str) -> TemplateFamily {
    TemplateFamily {
        name: name.into(),
        topics: words(topics),
        posts: templates(posts),
        responses: templates(responses),
    }
}

pub fn default_collisions() -> Vec<(Emotion, Emotion)> {
    use Emotion::*;
    vec![(Angry, Happy), (Disgust, Like), (Sad, Happy)]
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        use Emotion::*;
        SyntheticSpec {
            pairs: 1000,
            seed: 17,
            mapping: [Sad, Angry, Like, Happy, Like, Other],
            lexicons: [
                words("furious angry mad outraged livid annoyed"),
                words("gross disgusting nasty vile revolting foul"),
                words("happy glad joyful cheerful delighted thrilled"),
                words("lovely adorable charming wonderful sweet pleasant"),
                words("sad unhappy gloomy heartbroken sorrowful miserable"),
                words("fine okay normal usual plain ordinary"),
            ],
            families: vec![
                family(
                    "weather",
                    "sun rain snow wind",
                    "the {topic} outside today makes me feel {emo} | i am {emo} about all this {topic} lately",
                    "that {topic} sounds {emo} to me | so much {topic} is {emo} indeed",
                ),
                family(
                    "food",
                    "pizza noodles soup cake",
                    "dinner was {topic} and it tasted {emo} | my {topic} at lunch felt {emo}",
                    "{topic} for dinner seems {emo} | eating {topic} is always {emo}",
                ),
                family(
                    "work",
                    "boss meeting office project",
                    "the {topic} at work left me {emo} | another {topic} today and i am {emo}",
                    "work with that {topic} must be {emo} | a {topic} like that is {emo}",
                ),
                family(
                    "travel",
                    "train beach hotel flight",
                    "our {topic} on the trip was {emo} | the holiday {topic} felt so {emo}",
                    "a trip by {topic} sounds {emo} | that holiday {topic} seems {emo}",
                ),
            ],
            collisions: default_collisions(),
        }
    }
}

fn parse_collisions(value: &str) -> Result<Vec<(Emotion, Emotion)>> {
    value
        .split_whitespace()
        .map(|pair| {
            let (a, b) = pair.split_once('-').ok_or_else(|| {
                Error::SyntheticSpec(format!("collision `{pair}` must look like A-B"))
            })?;
            Ok((a.parse()?, b.parse()?))
        })
        .collect()
}

impl SyntheticSpec {
    /// Parses `key = value` text on top of the defaults.
    ///
    /// Keys: `pairs`, `seed`, `map.<Emotion>`, `lexicon.<Emotion>`,
    /// `family.<name>.{topics,post,response}` (templates separated by `|`),
    /// `collisions` (e.g. `Angry-Happy Sad-Happy`). Declaring any family
    /// replaces the default families.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut spec = SyntheticSpec::default();
        let mut fams: Vec<TemplateFamily> = Vec::new();
        for (key, value) in kv::parse(text, origin)? {
            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                ["pairs"] => spec.pairs = kv::parse_value(&key, &value)?,
                ["seed"] => spec.seed = kv::parse_value(&key, &value)?,
                ["map", from] => {
                    let from: Emotion = from.parse()?;
                    spec.mapping[from.index()] = value.parse()?;
                }
                ["lexicon", cat] => {
                    let cat: Emotion = cat.parse()?;
                    spec.lexicons[cat.index()] = words(&value);
                }
                ["family", name, field] => {
                    let idx = match fams.iter().position(|f| f.name == *name) {
                        Some(i) => i,
                        None => {
                            fams.push(TemplateFamily {
                                name: name.to_string(),
                                topics: vec![],
                                posts: vec![],
                                responses: vec![],
                            });
                            fams.len() - 1
                        }
                    };
                    let f = &mut fams[idx];
                    match *field {
                        "topics" => f.topics = words(&value),
                        "post" => f.posts = templates(&value),
                        "response" => f.responses = templates(&value),
                        _ => {
                            return Err(Error::SyntheticSpec(format!("unknown key `{key}`")));
                        }
                    }
                }
                ["collisions"] => spec.collisions = parse_collisions(&value)?,
                _ => return Err(Error::SyntheticSpec(format!("unknown key `{key}`"))),
            }
        }
        if !fams.is_empty() {
            spec.families = fams;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pairs = {}", self.pairs);
        let _ = writeln!(s, "seed = {}", self.seed);
        for e in Emotion::ALL {
            let _ = writeln!(s, "map.{e} = {}", self.mapping[e.index()]);
        }
        for e in Emotion::ALL {
            let _ = writeln!(s, "lexicon.{e} = {}", self.lexicons[e.index()].join(" "));
        }
        let join = |ts: &[Vec<String>]| {
            ts.iter().map(|t| t.join(" ")).collect::<Vec<_>>().join(" | ")
        };
        for f in &self.families {
            let _ = writeln!(s, "family.{}.topics = {}", f.name, f.topics.join(" "));
            let _ = writeln!(s, "family.{}.post = {}", f.name, join(&f.posts));
            let _ = writeln!(s, "family.{}.response = {}", f.name, join(&f.responses));
        }
        let cols: Vec<String> = self.collisions.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let _ = writeln!(s, "collisions = {}", cols.join(" "));
        s
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::SyntheticSpec(m));
        for e in Emotion::ALL {
            // every category can be drawn as a post category
            if self.lexicons[e.index()].is_empty() {
                return err(format!("empty lexicon for category {e}"));
            }
        }
        for (from, to) in Emotion::ALL.iter().zip(self.mapping) {
            if self.lexicons[to.index()].is_empty() {
                return err(format!("empty lexicon for {to}, mapped from {from}"));
            }
        }
        let mut owner: BTreeMap<&str, Emotion> = BTreeMap::new();
        for e in Emotion::ALL {
            for w in &self.lexicons[e.index()] {
                if let Some(prev) = owner.insert(w, e) {
                    return err(format!("keyword `{w}` is in both {prev} and {e} lexicons"));
                }
            }
        }
        if self.families.is_empty() {
            return err("no template families".into());
        }
        let mut topics = BTreeSet::new();
        for f in &self.families {
            if f.topics.is_empty() || f.posts.is_empty() || f.responses.is_empty() {
                return err(format!("family `{}` needs topics, post and response templates", f.name));
            }
            for t in &f.topics {
                if owner.contains_key(t.as_str()) {
                    return err(format!("topic `{t}` is also an emotion keyword"));
                }
                if !topics.insert(t.clone()) {
                    return err(format!("topic `{t}` appears in more than one family"));
                }
            }
            for t in f.posts.iter().chain(&f.responses) {
                if t.iter().filter(|w| *w == EMO_SLOT).count() != 1 {
                    return err(format!(
                        "template `{}` in family `{}` needs exactly one {EMO_SLOT}",
                        t.join(" "),
                        f.name
                    ));
                }
                if let Some(w) = t.iter().find(|w| owner.contains_key(w.as_str())) {
                    return err(format!("template word `{w}` is also an emotion keyword"));
                }
            }
        }
        Ok(())
    }

    pub fn lexicon(&self, e: Emotion) -> &[String] {
        &self.lexicons[e.index()]
    }

    pub fn response_emotion(&self, post: Emotion) -> Emotion {
        self.mapping[post.index()]
    }
}

fn fill(template: &[String], topic: &str, keyword: &str) -> String {
    template
        .iter()
        .map(|w| match w.as_str() {
            TOPIC_SLOT => topic,
            EMO_SLOT => keyword,
            other => other,
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Generates `spec.pairs` records; a pure function of `spec`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<RawRecord>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pick = |rng: &mut ChaCha8Rng, xs: &[String]| xs.choose(rng).expect("validated").clone();
    let mut out = Vec::with_capacity(spec.pairs);
    for _ in 0..spec.pairs {
        let fam = &spec.families[rng.gen_range(0..spec.families.len())];
        let topic = pick(&mut rng, &fam.topics);
        let post_emo = Emotion::ALL[rng.gen_range(0..NUM_EMOTIONS)];
        let resp_emo = spec.response_emotion(post_emo);
        let post_t = &fam.posts[rng.gen_range(0..fam.posts.len())];
        let post_kw = pick(&mut rng, spec.lexicon(post_emo));
        let resp_t = &fam.responses[rng.gen_range(0..fam.responses.len())];
        let resp_kw = pick(&mut rng, spec.lexicon(resp_emo));
        out.push(RawRecord {
            post: fill(post_t, &topic, &post_kw),
            response: fill(resp_t, &topic, &resp_kw),
            post_labels: (post_emo, Emotion::Other),
            response_labels: (resp_emo, Emotion::Other),
        });
    }
    Ok(out)
}

pub fn write_synthetic(spec: &SyntheticSpec, path: &Path) -> Result<usize> {
    let records = generate_synthetic(spec)?;
    write_records(path, &records)?;
    Ok(records.len())
}
