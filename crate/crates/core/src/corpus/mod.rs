//! Vocabulary, labeled conversation corpora, synthetic data and EIP counts.

mod eip;
mod emotion;
mod records;
mod synthetic;
mod vocab;

pub use eip::{eip_matrix, EipMatrix};
pub use emotion::{multi_hot, multi_hot_names, Emotion, EmotionVector, NUM_EMOTIONS};
pub use records::{
    build_vocab, encode_records, format_record, load_corpus, parse_records, read_records,
    write_records, ConversationPair, CorpusFormat, RawRecord,
};
pub use synthetic::{
    default_collisions, generate_synthetic, write_synthetic, SyntheticSpec, TemplateFamily,
    EMO_SLOT, TOPIC_SLOT,
};
pub use vocab::{Vocabulary, EOS, PAD, RESERVED, SOS, UNK};
