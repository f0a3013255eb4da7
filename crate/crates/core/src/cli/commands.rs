use std::path::{Path, PathBuf};

use super::{
    ClassifierArg, Cli, CliError, Command, EvaluateArgs, ExtractArgs, GranularityArg, HandArg,
    ModeArg, OrderingArg, RocArgs, RunConfig, RunManifest, SelectArgs, SynthArgs,
};
use crate::classify::Metric;
use crate::dataset::{
    load_corpus, materialize, split_subjects, synth_corpus, synth_corpus_with, Corpus, LayoutConfig,
};
use crate::error::Error;
use crate::eval::{
    build_score_sets, feature_means, identify, roc_and_eer, IdentificationProtocol,
    IdentifyClassifier, ScoreSets, VerificationSummary,
};
use crate::features::{apply_minmax, extract_corpus, fit_minmax, FeatureMatrix};
use crate::imaging::{DebugStages, HandSide};
use crate::selection::{foba, Granularity, Ordering, SelectionResult};

type CliResult<T> = std::result::Result<T, CliError>;

pub(super) fn dispatch(cli: Cli) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::usage(
                "invalid_config",
                "--jobs must be at least 1",
            ));
        }
        // a pool may already exist when called in-process more than once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    let config = match &cli.config {
        Some(p) => {
            require(p)?;
            let text = std::fs::read_to_string(p).map_err(Error::from)?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| CliError::usage("invalid_config", format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Extract(a) => extract(a, config, cli.config.as_deref()),
        Command::Select(a) => select(a, config, cli.config.as_deref()),
        Command::Evaluate(a) => evaluate(a, config, cli.config.as_deref()),
        Command::Roc(a) => roc(a, config),
        Command::Synth(a) => synth(a),
    }
}

/// Creates the directory an output file will be written into.
fn parent_dir(file: &Path) -> CliResult<()> {
    match file.parent() {
        Some(d) if !d.as_os_str().is_empty() => Ok(std::fs::create_dir_all(d).map_err(Error::from)?),
        _ => Ok(()),
    }
}

fn require(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::usage(
            "missing_input",
            format!("input not found: {}", path.display()),
        ))
    }
}

/// `dir/name.csv` → `dir/name<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn to_json<T: serde::Serialize>(v: &T) -> CliResult<serde_json::Value> {
    Ok(serde_json::to_value(v).map_err(Error::from)?)
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).map_err(Error::from)?;
    std::fs::write(path, text + "\n").map_err(Error::from)?;
    Ok(())
}

fn parse_pair(s: &str, sep: char, what: &str) -> CliResult<(u32, u32)> {
    let bad = || {
        CliError::usage(
            "invalid_config",
            format!("{what} must look like A{sep}B, got {s:?}"),
        )
    };
    let (a, b) = s.split_once(sep).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn open_corpus(a: &ExtractArgs) -> CliResult<(Corpus, Option<PathBuf>)> {
    match (&a.corpus, &a.synthetic) {
        (Some(_), Some(_)) => Err(CliError::usage(
            "usage",
            "give either a corpus directory or --synthetic, not both",
        )),
        (None, None) => Err(CliError::usage(
            "usage",
            "a corpus directory or --synthetic is required",
        )),
        (None, Some(spec)) => {
            let (n, s) = parse_pair(&spec.to_ascii_lowercase(), 'x', "--synthetic")?;
            Ok((synth_corpus(n as usize, s as usize, a.seed)?, None))
        }
        (Some(dir), None) => {
            require(dir)?;
            let layout_path = a.layout.clone().or_else(|| {
                let p = dir.join("layout.json");
                p.exists().then_some(p)
            });
            let layout = match &layout_path {
                Some(p) => {
                    require(p)?;
                    LayoutConfig::from_json_file(p)?
                }
                None => LayoutConfig::default(),
            };
            Ok((load_corpus(dir, &layout)?, layout_path))
        }
    }
}

fn write_debug(corpus: &Corpus, dir: &Path, config: &RunConfig) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    let cfg = crate::imaging::SegmentationConfig {
        hand: corpus.hand,
        ..config.segmentation.clone()
    };
    for e in &corpus.entries {
        let (stages, _) = DebugStages::capture(&e.load()?, &cfg);
        stages.write_png(dir, &format!("{}_{}", e.subject, e.session))?;
    }
    Ok(())
}

fn extract(a: ExtractArgs, mut config: RunConfig, config_path: Option<&Path>) -> CliResult<()> {
    config.segmentation.validate()?;
    let (mut corpus, layout_path) = open_corpus(&a)?;
    if let Some(h) = a.hand {
        corpus.hand = match h {
            HandArg::Right => HandSide::Right,
            HandArg::Left => HandSide::Left,
        };
    }
    config.segmentation.hand = corpus.hand;
    for w in &corpus.warnings {
        eprintln!("warning: {w}");
    }
    let mut m = RunManifest::new("extract", to_json(&config)?, Some(a.seed));
    for p in [a.corpus.as_deref(), layout_path.as_deref(), config_path]
        .into_iter()
        .flatten()
    {
        m.input(p)?;
    }
    parent_dir(&a.output)?;
    let (matrix, failures) = m.time("extract", || extract_corpus(&corpus, &config.segmentation))?;
    if let Some(d) = &a.debug_dir {
        m.time("debug", || write_debug(&corpus, d, &config))?;
    }
    matrix.write_csv_file(&a.output)?;
    m.output(&a.output)?;
    let fail_path = sibling(&a.output, ".failures.json");
    write_json(&fail_path, &failures)?;
    m.output(&fail_path)?;
    if let Some(spec) = &a.split {
        let ratio = parse_pair(spec, ':', "--split")?;
        let (train, test) = split_subjects(&corpus, ratio, a.seed)?;
        for (part, suffix) in [(&train, ".train.csv"), (&test, ".test.csv")] {
            let keep = part.subjects();
            let sub =
                matrix.filter_rows(|s, _| keep.binary_search_by(|k| k.as_str().cmp(s)).is_ok());
            let p = sibling(&a.output, suffix);
            sub.write_csv_file(&p)?;
            m.output(&p)?;
        }
    }
    eprintln!(
        "extracted {} of {} images ({} failed)",
        matrix.rows(),
        corpus.len(),
        failures.len()
    );
    m.write(&sibling(&a.output, ".manifest.json"))?;
    Ok(())
}

fn select(a: SelectArgs, mut config: RunConfig, config_path: Option<&Path>) -> CliResult<()> {
    require(&a.matrix)?;
    let s = &mut config.selection;
    if let Some(g) = a.granularity {
        s.granularity = match g {
            GranularityArg::Global => Granularity::Global,
            GranularityArg::Local => Granularity::Local,
        };
    }
    if let Some(o) = a.ordering {
        s.ordering = match o {
            OrderingArg::Random => Ordering::Random,
            OrderingArg::Rank => Ordering::Rank,
        };
    }
    if let Some(d) = a.delta {
        s.delta = d;
    }
    if let Some(e) = a.epsilon {
        s.epsilon = e;
    }
    if let Some(seed) = a.seed {
        s.seed = seed;
    }
    s.validate()?;

    let mut m = RunManifest::new("select", to_json(&config)?, Some(config.selection.seed));
    m.input(&a.matrix)?;
    if let Some(p) = config_path {
        m.input(p)?;
    }
    parent_dir(&a.output)?;
    let raw = FeatureMatrix::read_csv_file(&a.matrix)?;
    let norm = apply_minmax(&raw, &fit_minmax(&raw)?)?;
    let (labels, _) = norm.class_labels();
    let result = m.time("select", || {
        foba(&norm.values, &labels, &norm.column_names, &config.selection)
    })?;
    std::fs::write(&a.output, result.to_json()? + "\n").map_err(Error::from)?;
    m.output(&a.output)?;
    let table = sibling(&a.output, ".trace.txt");
    std::fs::write(&table, result.trace_table(&norm.column_names)).map_err(Error::from)?;
    m.output(&table)?;
    eprintln!(
        "selected {} columns, accuracy {:.4}",
        result.cardinality, result.accuracy
    );
    m.write(&sibling(&a.output, ".manifest.json"))?;
    Ok(())
}

/// Column indices of the selection in `m`, matched by name.
fn selected_columns(m: &FeatureMatrix, sel: &SelectionResult) -> CliResult<Vec<usize>> {
    sel.selected
        .iter()
        .map(|name| {
            m.column_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| {
                    CliError::from(Error::BadLayout(format!(
                        "selected column {name} not in matrix"
                    )))
                })
        })
        .collect()
}

fn evaluate(a: EvaluateArgs, mut config: RunConfig, config_path: Option<&Path>) -> CliResult<()> {
    for p in [&a.train, &a.test, &a.selection] {
        require(p)?;
    }
    let protocol = IdentificationProtocol {
        enrolled: a.enrolled.unwrap_or(config.protocol.enrolled),
        probes: a.probes.unwrap_or(config.protocol.probes),
    };
    config.protocol = protocol;
    if let Some(s) = a.seed {
        config.forest.seed = s;
    }
    config.forest.validate()?;
    std::fs::create_dir_all(&a.output).map_err(Error::from)?;
    let mut m = RunManifest::new("evaluate", to_json(&config)?, Some(config.forest.seed));
    for p in [
        Some(a.train.as_path()),
        Some(a.test.as_path()),
        Some(a.selection.as_path()),
        config_path,
    ]
    .into_iter()
    .flatten()
    {
        m.input(p)?;
    }
    let train = FeatureMatrix::read_csv_file(&a.train)?;
    let test = FeatureMatrix::read_csv_file(&a.test)?;
    if train.column_names != test.column_names {
        return Err(Error::BadLayout("train and test columns differ".into()).into());
    }
    let text = std::fs::read_to_string(&a.selection).map_err(Error::from)?;
    let sel = SelectionResult::from_json(&text)?;
    let cols = selected_columns(&train, &sel)?;
    if sel.weights.len() != cols.len() {
        return Err(Error::LengthMismatch {
            left: sel.weights.len(),
            right: cols.len(),
        }
        .into());
    }

    match a.mode {
        ModeArg::Identify => {
            let params = fit_minmax(&train)?;
            let norm = apply_minmax(&test, &params)?.select_columns(&cols);
            let split = protocol.split(&norm)?;
            let classifier = match a.classifier {
                ClassifierArg::Forest => IdentifyClassifier::Forest(config.forest.clone()),
                ClassifierArg::Wknn => IdentifyClassifier::Knn {
                    k: config.knn_k,
                    metric: Metric::WeightedEuclidean(sel.weights.clone()),
                },
            };
            let report = m.time("identify", || {
                identify(&split.enrolled, &split.probes, &classifier)
            })?;
            let out = a.output.join("identification.json");
            write_json(
                &out,
                &serde_json::json!({
                    "classifier": classifier_name(a.classifier),
                    "columns": sel.selected,
                    "enrolled_rows": split.enrolled.rows(),
                    "skipped_subjects": split.skipped,
                    "accuracy": report.accuracy,
                    "correct": report.correct,
                    "total": report.total,
                    "predictions": report.predictions,
                }),
            )?;
            m.output(&out)?;
            eprintln!(
                "identification accuracy {:.4} ({}/{})",
                report.accuracy, report.correct, report.total
            );
        }
        ModeArg::Verify => {
            let raw = test.select_columns(&cols);
            let split = protocol.split(&raw)?;
            let means = feature_means(&split.enrolled)?;
            let scores = m.time("scores", || {
                build_score_sets(
                    &split.enrolled,
                    &split.probes,
                    &sel.weights,
                    &means,
                    config.division,
                )
            })?;
            let p = a.output.join("scores.csv");
            scores.write_csv(std::fs::File::create(&p).map_err(Error::from)?)?;
            m.output(&p)?;
            write_roc(&scores, config.n_thresholds, &a.output, &mut m)?;
        }
    }
    m.write(&a.output.join("manifest.json"))?;
    Ok(())
}

fn classifier_name(c: ClassifierArg) -> &'static str {
    match c {
        ClassifierArg::Forest => "forest",
        ClassifierArg::Wknn => "wknn",
    }
}

fn write_roc(
    scores: &ScoreSets,
    n_thresholds: usize,
    dir: &Path,
    m: &mut RunManifest,
) -> CliResult<()> {
    let roc = m.time("roc", || roc_and_eer(scores, n_thresholds))?;
    let p = dir.join("roc.csv");
    roc.write_csv(std::fs::File::create(&p).map_err(Error::from)?)?;
    m.output(&p)?;
    let p = dir.join("far_gar.csv");
    roc.write_far_gar_csv(std::fs::File::create(&p).map_err(Error::from)?)?;
    m.output(&p)?;
    let summary = VerificationSummary::new(scores, &roc);
    let p = dir.join("verification.json");
    write_json(&p, &summary)?;
    m.output(&p)?;
    eprintln!(
        "{} genuine, {} imposter comparisons, EER {:.4}",
        summary.genuine, summary.imposter, summary.eer
    );
    Ok(())
}

fn read_scores(path: &Path) -> CliResult<ScoreSets> {
    let mut r = csv::Reader::from_path(path).map_err(Error::from)?;
    let mut s = ScoreSets::default();
    for rec in r.records() {
        let rec = rec.map_err(Error::from)?;
        let bad = || CliError::from(Error::BadLayout(format!("bad score row {rec:?}")));
        let v: f64 = rec
            .get(1)
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        match rec.get(0).map(str::trim) {
            Some("genuine") => s.genuine.push(v),
            Some("imposter") => s.imposter.push(v),
            _ => return Err(bad()),
        }
    }
    Ok(s)
}

fn roc(a: RocArgs, config: RunConfig) -> CliResult<()> {
    require(&a.scores)?;
    let n = a.thresholds.unwrap_or(config.n_thresholds);
    std::fs::create_dir_all(&a.output).map_err(Error::from)?;
    let mut m = RunManifest::new("roc", serde_json::json!({ "n_thresholds": n }), None);
    m.input(&a.scores)?;
    let scores = read_scores(&a.scores)?;
    write_roc(&scores, n, &a.output, &mut m)?;
    m.write(&a.output.join("manifest.json"))?;
    Ok(())
}

fn synth(a: SynthArgs) -> CliResult<()> {
    let corpus = synth_corpus_with(a.subjects, a.samples, a.seed, a.noise, a.max_rotation)?;
    let layout = LayoutConfig::default();
    let mut m = RunManifest::new(
        "synth",
        serde_json::json!({
            "subjects": a.subjects,
            "samples": a.samples,
            "noise": a.noise,
            "max_rotation": a.max_rotation,
            "layout": layout,
        }),
        Some(a.seed),
    );
    let paths = m.time("render", || materialize(&corpus, &a.output, &layout))?;
    for p in &paths {
        m.output(p)?;
    }
    eprintln!("wrote {} images to {}", paths.len(), a.output.display());
    m.write(&a.output.join("manifest.json"))?;
    Ok(())
}
