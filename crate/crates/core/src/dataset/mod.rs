//! Corpora of hand images: directory loading, subject splits and the
//! synthetic hand generator.

mod corpus;
pub mod synth;

pub use corpus::{
    load_corpus, materialize, split_subjects, synth_corpus, synth_corpus_with, synth_subject_id,
    Corpus, CorpusEntry, ImageSource, LayoutConfig,
};
pub use synth::{random_subject, synth_hand, FingerParams, HandParams};
