//! Command-line frontend: mine, segment, embed, and evaluate.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Logs go to stderr;
//! machine-readable output goes to stdout or `--out`.

use std::collections::HashMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use morphmine::candidates::MorphemeVocab;
use morphmine::embed::{train, vectors_from_text, Hyper};
use morphmine::error::MorphError;
use morphmine::eval::{
    analogy_eval, parse_analogies, parse_gold, parse_similarity, seg_prf, spearman_eval,
    OovPolicy, VectorStore,
};
use morphmine::pipeline::{
    mine_morphemes, parse_hierarchical, render_flat, render_hierarchical, run_segmentation,
    MorphForest, PipelineConfig,
};
use morphmine::vocab::{load_vocabulary, LoadMode, NormalizationPolicy, Vocabulary};

#[derive(Parser)]
#[command(name = "morphmine", version, about = "Unsupervised morpheme induction and morpheme-enriched embeddings")]
struct Cli {
    /// Config file with key=value lines; explicit flags win over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct VocabOpts {
    /// Input vocabulary or corpus path
    #[arg(long)]
    vocab: PathBuf,
    /// Input interpretation: word-list or corpus [default: word-list]
    #[arg(long)]
    mode: Option<String>,
    /// Disable case folding [default: folding on]
    #[arg(long)]
    no_case_fold: bool,
    /// Disable Unicode canonical composition [default: composition on]
    #[arg(long)]
    no_compose: bool,
}

#[derive(Args, Clone, Default)]
struct MineOpts {
    /// Minimum words sharing a morpheme [default: 2]
    #[arg(long)]
    min_support: Option<u64>,
    /// Minimum root length [default: 4]
    #[arg(long)]
    min_root_len: Option<usize>,
    /// Minimum affix length [default: 1]
    #[arg(long)]
    min_affix_len: Option<usize>,
    /// Weight counts by token frequency instead of once per type [default: off]
    #[arg(long)]
    token_weighted: bool,
    /// Disable the end-of-word entropy event [default: on]
    #[arg(long)]
    no_end_of_word: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the morpheme vocabulary from entropy boundaries
    Mine {
        #[command(flatten)]
        vocab: VocabOpts,
        #[command(flatten)]
        mine: MineOpts,
        /// Output morpheme-vocabulary TSV path [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Segment every vocabulary word with a learned morpheme vocabulary
    Segment {
        #[command(flatten)]
        vocab: VocabOpts,
        /// Morpheme-vocabulary TSV from `mine`
        #[arg(long)]
        morphemes: PathBuf,
        /// Refinement rounds [default: 1]
        #[arg(long)]
        rounds: Option<usize>,
        /// Prune morphemes used fewer times than this after a pass [default: 1]
        #[arg(long)]
        prune_below: Option<u64>,
        /// Emit bracketed hierarchical output instead of flat
        #[arg(long)]
        hierarchical: bool,
        /// Flat output uses leaf morphemes instead of top-level ones
        #[arg(long)]
        leaves: bool,
        /// Output path [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train morpheme-enriched embeddings on a corpus
    Embed {
        /// Whitespace-tokenized training corpus
        #[arg(long)]
        corpus: PathBuf,
        /// Morpheme-vocabulary TSV from `mine`
        #[arg(long)]
        morphemes: PathBuf,
        /// Output path for word-level vectors (bag sums)
        #[arg(long)]
        out_words: PathBuf,
        /// Output path for raw morpheme vectors
        #[arg(long)]
        out_morphs: PathBuf,
        /// Embedding dimension [default: 100]
        #[arg(long)]
        dim: Option<usize>,
        /// Context window [default: 5]
        #[arg(long)]
        window: Option<usize>,
        /// Negative samples per context [default: 5]
        #[arg(long)]
        negatives: Option<usize>,
        /// Initial learning rate [default: 0.025]
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Training epochs [default: 5]
        #[arg(long)]
        epochs: Option<usize>,
        /// RNG seed [default: 42]
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 1 is deterministic [default: 1]
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        vocab_norm: NormOnly,
    },
    /// Score predicted segmentations against a gold standard
    EvalSeg {
        /// Predictions: `word<TAB>m1 m2 ...` (or bracketed with --hierarchical)
        #[arg(long)]
        pred: PathBuf,
        /// Gold file: `word<TAB>alt1, alt2, ...`
        #[arg(long)]
        gold: PathBuf,
        /// Characters that start a morpheme tag to strip [default: none]
        #[arg(long)]
        tag_delims: Option<String>,
        /// Predictions are bracketed hierarchical output
        #[arg(long)]
        hierarchical: bool,
        /// With --hierarchical: score all granularities, not just leaves
        #[arg(long)]
        all_granularities: bool,
        /// Macro-average instead of micro [default: micro]
        #[arg(long)]
        macro_average: bool,
    },
    /// Word-similarity evaluation (Spearman rho)
    EvalSim {
        /// Word vectors in the text export format
        #[arg(long)]
        words: PathBuf,
        /// Pairs file: `word_a<TAB>word_b<TAB>score`
        #[arg(long)]
        pairs: PathBuf,
        /// OOV policy: infer or skip [default: skip]
        #[arg(long)]
        oov: Option<String>,
        /// Morpheme vectors, needed for --oov infer
        #[arg(long)]
        morph_vectors: Option<PathBuf>,
        /// Morpheme vocabulary TSV, needed for --oov infer
        #[arg(long)]
        morphemes: Option<PathBuf>,
        /// Expected dimension; mismatch with the file is an error
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Word-analogy evaluation (3CosAdd)
    EvalAnalogy {
        /// Word vectors in the text export format
        #[arg(long)]
        words: PathBuf,
        /// Quads file: `a b c d` per line, `:` lines are section headers
        #[arg(long)]
        quads: PathBuf,
        /// Morpheme vectors for OOV inference
        #[arg(long)]
        morph_vectors: Option<PathBuf>,
        /// Morpheme vocabulary TSV for OOV inference
        #[arg(long)]
        morphemes: Option<PathBuf>,
        /// Expected dimension; mismatch with the file is an error
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Vocabulary statistics
    Stats {
        #[command(flatten)]
        vocab: VocabOpts,
    },
}

#[derive(Args, Clone, Default)]
struct NormOnly {
    /// Disable case folding [default: folding on]
    #[arg(long)]
    no_case_fold: bool,
    /// Disable Unicode canonical composition [default: composition on]
    #[arg(long)]
    no_compose: bool,
}

/// Key=value settings from `--config`; flags override these.
#[derive(Default)]
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig, MorphError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = read_file(path)?;
        let mut map = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(MorphError::Parse {
                    line: lineno + 1,
                    msg: format!("expected key=value, got {line:?}"),
                });
            };
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Option<T> {
        self.0.get(key).and_then(|v| v.parse().ok())
    }
}

fn read_file(path: &Path) -> Result<String, MorphError> {
    let mut s = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| MorphError::File { path: path.display().to_string(), source: e })?;
    Ok(s)
}

fn write_output(out: Option<&Path>, data: &str) -> Result<(), MorphError> {
    match out {
        Some(path) => fs::write(path, data)
            .map_err(|e| MorphError::File { path: path.display().to_string(), source: e }),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn norm_policy(no_case_fold: bool, no_compose: bool, cfg: &FileConfig) -> NormalizationPolicy {
    NormalizationPolicy {
        case_fold: !no_case_fold && cfg.get("case_fold").unwrap_or(true),
        compose: !no_compose && cfg.get("compose").unwrap_or(true),
    }
}

fn load_vocab_file(opts: &VocabOpts, cfg: &FileConfig) -> Result<Vocabulary, MorphError> {
    let mode_str = opts
        .mode
        .clone()
        .or_else(|| cfg.get::<String>("mode"))
        .unwrap_or_else(|| "word-list".to_string());
    let mode = match mode_str.as_str() {
        "word-list" => LoadMode::WordList,
        "corpus" => LoadMode::Corpus,
        other => {
            return Err(MorphError::InvalidConfig(vec![format!(
                "mode must be word-list or corpus, got {other:?}"
            )]))
        }
    };
    let policy = norm_policy(opts.no_case_fold, opts.no_compose, cfg);
    let text = read_file(&opts.vocab)?;
    load_vocabulary(std::io::Cursor::new(text), mode, policy)
}

fn pipeline_config(mine: &MineOpts, cfg: &FileConfig) -> PipelineConfig {
    let defaults = PipelineConfig::default();
    PipelineConfig {
        min_support: mine
            .min_support
            .or_else(|| cfg.get("min_support"))
            .unwrap_or(defaults.min_support),
        min_root_len: mine
            .min_root_len
            .or_else(|| cfg.get("min_root_len"))
            .unwrap_or(defaults.min_root_len),
        min_affix_len: mine
            .min_affix_len
            .or_else(|| cfg.get("min_affix_len"))
            .unwrap_or(defaults.min_affix_len),
        token_weighted: mine.token_weighted || cfg.get("token_weighted").unwrap_or(false),
        end_of_word_event: !mine.no_end_of_word && cfg.get("end_of_word_event").unwrap_or(true),
        ..defaults
    }
}

fn load_store(
    words: &Path,
    morph_vectors: Option<&Path>,
    dim_flag: Option<usize>,
) -> Result<VectorStore, MorphError> {
    let (word_map, dim) = vectors_from_text(&read_file(words)?)?;
    if let Some(expected) = dim_flag {
        if dim != expected {
            return Err(MorphError::DimensionMismatch { file: dim, expected });
        }
    }
    let morphs = match morph_vectors {
        Some(p) => {
            let (m, mdim) = vectors_from_text(&read_file(p)?)?;
            if mdim != dim {
                return Err(MorphError::DimensionMismatch { file: mdim, expected: dim });
            }
            m
        }
        None => HashMap::new(),
    };
    Ok(VectorStore { words: word_map, morphs, dim })
}

fn load_morphemes(path: &Path) -> Result<MorphemeVocab, MorphError> {
    MorphemeVocab::from_tsv(&read_file(path)?)
}

fn run(cli: Cli) -> Result<(), MorphError> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Mine { vocab, mine, out } => {
            let v = load_vocab_file(&vocab, &cfg)?;
            let config = pipeline_config(&mine, &cfg);
            config.validate()?;
            let mv = mine_morphemes(&v, &config)?;
            if mv.is_empty() {
                eprintln!("warning: every candidate was filtered out");
            }
            write_output(out.as_deref(), &mv.to_tsv())?;
            eprintln!("morphemes={}", mv.len());
        }
        Command::Segment {
            vocab,
            morphemes,
            rounds,
            prune_below,
            hierarchical,
            leaves,
            out,
        } => {
            let v = load_vocab_file(&vocab, &cfg)?;
            let mv = load_morphemes(&morphemes)?;
            let defaults = PipelineConfig::default();
            let config = PipelineConfig {
                rounds: rounds.or_else(|| cfg.get("rounds")).unwrap_or(defaults.rounds),
                prune_below: prune_below
                    .or_else(|| cfg.get("prune_below"))
                    .unwrap_or(defaults.prune_below),
                ..defaults
            };
            config.validate()?;
            let result = run_segmentation(&v, &mv, &config)?;
            let text = if hierarchical {
                render_hierarchical(&result.forests)
            } else if leaves {
                let mut s = String::new();
                for f in &result.forests {
                    s.push_str(&format!("{}\t{}\n", f.word(), f.leaves().join(" ")));
                }
                s
            } else {
                render_flat(&result.forests)
            };
            write_output(out.as_deref(), &text)?;
            eprintln!(
                "words={} morphemes={} fallbacks={}",
                result.forests.len(),
                result.morphemes.len(),
                result.fallback_words.len()
            );
        }
        Command::Embed {
            corpus,
            morphemes,
            out_words,
            out_morphs,
            dim,
            window,
            negatives,
            learning_rate,
            epochs,
            seed,
            threads,
            vocab_norm,
        } => {
            let policy = norm_policy(vocab_norm.no_case_fold, vocab_norm.no_compose, &cfg);
            let mv = load_morphemes(&morphemes)?;
            let text = read_file(&corpus)?;
            let tokens: Vec<String> = text
                .split_whitespace()
                .map(|t| morphmine::vocab::normalize(t, policy))
                .collect();
            let defaults = Hyper::default();
            let hyper = Hyper {
                dim: dim.or_else(|| cfg.get("dim")).unwrap_or(defaults.dim),
                window: window.or_else(|| cfg.get("window")).unwrap_or(defaults.window),
                negatives: negatives
                    .or_else(|| cfg.get("negatives"))
                    .unwrap_or(defaults.negatives),
                learning_rate: learning_rate
                    .or_else(|| cfg.get("learning_rate"))
                    .unwrap_or(defaults.learning_rate),
                epochs: epochs.or_else(|| cfg.get("epochs")).unwrap_or(defaults.epochs),
                seed: seed.or_else(|| cfg.get("seed")).unwrap_or(defaults.seed),
                threads: threads.or_else(|| cfg.get("threads")).unwrap_or(defaults.threads),
            };
            let forests: HashMap<String, MorphForest> = HashMap::new();
            let model = train(&tokens, &forests, Some(&mv), &hyper)?;
            write_output(Some(&out_words), &model.words_to_text())?;
            write_output(Some(&out_morphs), &model.morphs_to_text())?;
            eprintln!("tokens={} words={} dim={}", tokens.len(), model.words().count(), hyper.dim);
        }
        Command::EvalSeg { pred, gold, tag_delims, hierarchical, all_granularities, macro_average } => {
            let delims: Vec<char> = tag_delims
                .or_else(|| cfg.get("tag_delims"))
                .map(|s| s.chars().collect())
                .unwrap_or_default();
            let gold_segs = parse_gold(&read_file(&gold)?, &delims)?;
            let pred_text = read_file(&pred)?;
            let mut predictions: HashMap<String, Vec<String>> = HashMap::new();
            for line in pred_text.lines() {
                let line = line.trim_end_matches('\r');
                if line.trim().is_empty() {
                    continue;
                }
                let Some((word, rest)) = line.split_once('\t') else {
                    continue;
                };
                let morphs: Vec<String> = if hierarchical {
                    let forest = parse_hierarchical(rest)?;
                    if all_granularities {
                        forest.flat_set().into_iter().filter(|m| m != word).collect()
                    } else {
                        forest.leaves().into_iter().map(str::to_owned).collect()
                    }
                } else {
                    rest.split(',')
                        .next()
                        .unwrap()
                        .split_whitespace()
                        .map(str::to_owned)
                        .collect()
                };
                predictions.insert(word.to_string(), morphs);
            }
            let r = seg_prf(&predictions, &gold_segs, macro_average)?;
            println!("precision\trecall\tf1");
            println!("{:.4}\t{:.4}\t{:.4}", r.precision, r.recall, r.f1);
        }
        Command::EvalSim { words, pairs, oov, morph_vectors, morphemes, dim } => {
            let policy = match oov.or_else(|| cfg.get("oov")).as_deref() {
                Some("infer") => OovPolicy::Infer,
                Some("skip") | None => OovPolicy::Skip,
                Some(other) => {
                    return Err(MorphError::InvalidConfig(vec![format!(
                        "oov must be infer or skip, got {other:?}"
                    )]))
                }
            };
            let store = load_store(&words, morph_vectors.as_deref(), dim)?;
            let mv = morphemes.as_deref().map(load_morphemes).transpose()?;
            let (rho, scored) = spearman_eval(&store, &parse_similarity(&read_file(&pairs)?)?, policy, mv.as_ref())?;
            println!("spearman_rho\tpairs_scored");
            println!("{rho:.4}\t{scored}");
        }
        Command::EvalAnalogy { words, quads, morph_vectors, morphemes, dim } => {
            let store = load_store(&words, morph_vectors.as_deref(), dim)?;
            let mv = morphemes.as_deref().map(load_morphemes).transpose()?;
            let report = analogy_eval(&store, &parse_analogies(&read_file(&quads)?)?, mv.as_ref())?;
            println!("section\taccuracy\tcorrect\tattempted");
            for (s, acc, c, n) in &report.per_section {
                println!("{s}\t{acc:.4}\t{c}\t{n}");
            }
            println!("TOTAL\t{:.4}\t{}\t{}", report.accuracy, report.correct, report.attempted);
        }
        Command::Stats { vocab } => {
            let v = load_vocab_file(&vocab, &cfg)?;
            let tokens: u64 = v.entries().iter().map(|(_, c)| c).sum();
            let total_chars: usize = v.words().map(|w| w.chars().count()).sum();
            println!("types\ttokens\tchars\ttotal_chars\tavg_word_len");
            println!(
                "{}\t{}\t{}\t{}\t{:.2}",
                v.total_types(),
                tokens,
                v.char_count(),
                total_chars,
                total_chars as f64 / v.total_types() as f64
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
