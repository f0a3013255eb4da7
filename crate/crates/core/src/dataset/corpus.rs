use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::synth::{random_subject, synth_hand, HandParams};
use crate::error::{Error, Result};
use crate::imaging::io::{load_gray, save_gray};
use crate::imaging::{GrayImage, HandSide};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ImageSource {
    Path(PathBuf),
    Synthetic { params: Box<HandParams>, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub subject: String,
    pub session: u32,
    pub source: ImageSource,
}

impl CorpusEntry {
    pub fn load(&self) -> Result<GrayImage> {
        match &self.source {
            ImageSource::Path(p) => load_gray(p),
            ImageSource::Synthetic { params, seed } => synth_hand(params, *seed),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    pub hand: HandSide,
    pub warnings: Vec<String>,
}

impl Corpus {
    /// Subject ids in sorted order.
    pub fn subjects(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.entries.iter().map(|e| e.subject.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn restricted(&self, keep: &BTreeSet<String>) -> Corpus {
        Corpus {
            entries: self
                .entries
                .iter()
                .filter(|e| keep.contains(&e.subject))
                .cloned()
                .collect(),
            hand: self.hand,
            warnings: Vec::new(),
        }
    }
}

/// Filename layout of a corpus directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    /// File name template with `<subject>` and `<session>` placeholders.
    pub pattern: String,
    pub hand: HandSide,
    /// Upper bound on sessions per subject, if any.
    pub max_sessions: Option<u32>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            pattern: "<subject>_<session>.png".to_string(),
            hand: HandSide::Right,
            max_sessions: None,
        }
    }
}

impl LayoutConfig {
    pub fn from_json_file(path: &Path) -> Result<LayoutConfig> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    fn regex(&self) -> Result<Regex> {
        let mut re = String::from("^");
        let mut rest = self.pattern.as_str();
        let (mut subject, mut session) = (false, false);
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix("<subject>") {
                re.push_str("(?P<subject>.+?)");
                subject = true;
                rest = r;
            } else if let Some(r) = rest.strip_prefix("<session>") {
                re.push_str("(?P<session>[0-9]+)");
                session = true;
                rest = r;
            } else {
                let c = rest.chars().next().expect("nonempty");
                re.push_str(&regex::escape(&c.to_string()));
                rest = &rest[c.len_utf8()..];
            }
        }
        re.push('$');
        if !(subject && session) {
            return Err(Error::InvalidConfig(format!(
                "pattern {:?} needs both <subject> and <session>",
                self.pattern
            )));
        }
        Regex::new(&re).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// File name for one entry under this layout.
    pub fn file_name(&self, subject: &str, session: u32) -> String {
        self.pattern
            .replace("<subject>", subject)
            .replace("<session>", &session.to_string())
    }
}

/// Scans `root` (non-recursively) for images named per `layout`.
///
/// Hidden files and `.json`/`.csv` side files are skipped; any other file
/// that does not match the pattern is a layout error.
pub fn load_corpus(root: &Path, layout: &LayoutConfig) -> Result<Corpus> {
    let re = layout.regex()?;
    let mut names = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        if !entry.file_type()?.is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let lower = name.to_ascii_lowercase();
        if name.starts_with('.') || lower.ends_with(".json") || lower.ends_with(".csv") {
            continue;
        }
        names.push((name, entry.path()));
    }
    names.sort();

    let mut entries = Vec::with_capacity(names.len());
    let mut seen = BTreeSet::new();
    for (name, path) in names {
        let caps = re.captures(&name).ok_or_else(|| Error::Layout {
            path: path.clone(),
            reason: format!("file name does not match {:?}", layout.pattern),
        })?;
        let subject = caps["subject"].to_string();
        let session: u32 = caps["session"].parse().map_err(|_| Error::Layout {
            path: path.clone(),
            reason: "session number out of range".to_string(),
        })?;
        if let Some(max) = layout.max_sessions {
            if session > max {
                return Err(Error::Layout {
                    path,
                    reason: format!("session {session} exceeds the maximum of {max}"),
                });
            }
        }
        if !seen.insert((subject.clone(), session)) {
            return Err(Error::Layout {
                path,
                reason: format!("duplicate session {session} for subject {subject}"),
            });
        }
        entries.push(CorpusEntry {
            subject,
            session,
            source: ImageSource::Path(path),
        });
    }
    entries.sort_by(|a, b| (&a.subject, a.session).cmp(&(&b.subject, b.session)));

    let mut warnings = Vec::new();
    if entries.is_empty() {
        warnings.push(format!("no images found in {}", root.display()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &entries {
        *counts.entry(&e.subject).or_default() += 1;
    }
    let most = counts.values().copied().max().unwrap_or(0);
    for (s, &n) in &counts {
        if n < most {
            warnings.push(format!("subject {s} has {n} of {most} sessions"));
        }
    }
    Ok(Corpus {
        entries,
        hand: layout.hand,
        warnings,
    })
}

/// Subject-level split with `ratio = (train, test)` parts; the training
/// side gets `round(n · train / (train + test))` subjects, at least one and
/// leaving at least one for testing.
pub fn split_subjects(corpus: &Corpus, ratio: (u32, u32), seed: u64) -> Result<(Corpus, Corpus)> {
    let mut subjects = corpus.subjects();
    let n = subjects.len();
    if n < 2 {
        return Err(Error::TooFewSubjects(n));
    }
    if ratio.0 == 0 || ratio.1 == 0 {
        return Err(Error::InvalidConfig(format!(
            "split ratio parts must be positive, got {}:{}",
            ratio.0, ratio.1
        )));
    }
    let n_train =
        ((n as f64 * ratio.0 as f64 / (ratio.0 + ratio.1) as f64).round() as usize).clamp(1, n - 1);
    subjects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train: BTreeSet<String> = subjects[..n_train].iter().cloned().collect();
    let test: BTreeSet<String> = subjects[n_train..].iter().cloned().collect();
    Ok((corpus.restricted(&train), corpus.restricted(&test)))
}

/// Subject id used by synthetic corpora.
pub fn synth_subject_id(i: usize) -> String {
    format!("s{:03}", i + 1)
}

/// An in-memory corpus of `n_subjects` synthetic subjects with
/// `samples_per_subject` sessions each. Every sample gets its own
/// rotation in ±`max_rotation` degrees.
pub fn synth_corpus_with(
    n_subjects: usize,
    samples_per_subject: usize,
    seed: u64,
    noise: f64,
    max_rotation: f64,
) -> Result<Corpus> {
    if n_subjects < 2 {
        return Err(Error::TooFewSubjects(n_subjects));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_subjects * samples_per_subject);
    for i in 0..n_subjects {
        let params = random_subject(&mut rng, noise);
        params.validate()?;
        for s in 0..samples_per_subject {
            let rotation = if max_rotation > 0.0 {
                rng.gen_range(-max_rotation..=max_rotation)
            } else {
                0.0
            };
            entries.push(CorpusEntry {
                subject: synth_subject_id(i),
                session: s as u32 + 1,
                source: ImageSource::Synthetic {
                    params: Box::new(HandParams {
                        rotation,
                        ..params.clone()
                    }),
                    seed: rng.gen(),
                },
            });
        }
    }
    Ok(Corpus {
        entries,
        hand: HandSide::Right,
        warnings: Vec::new(),
    })
}

/// [`synth_corpus_with`] at the default noise (0.02) and rotations up to ±20°.
pub fn synth_corpus(n_subjects: usize, samples_per_subject: usize, seed: u64) -> Result<Corpus> {
    synth_corpus_with(n_subjects, samples_per_subject, seed, 0.02, 20.0)
}

/// Renders every entry into `dir` under `layout` and writes `layout.json`.
pub fn materialize(corpus: &Corpus, dir: &Path, layout: &LayoutConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let paths = corpus
        .entries
        .par_iter()
        .map(|e| {
            let path = dir.join(layout.file_name(&e.subject, e.session));
            save_gray(&e.load()?, &path)?;
            Ok(path)
        })
        .collect::<Result<Vec<_>>>()?;
    std::fs::write(
        dir.join("layout.json"),
        serde_json::to_string_pretty(layout)?,
    )?;
    Ok(paths)
}
