use std::path::{Path, PathBuf};

use log::info;
use pseudoword::corpus::{build_vocabulary, Vocabulary};
use pseudoword::embeddings::Embeddings;
use pseudoword::eval::{nearest_neighbors, run_benchmark, BenchmarkSet};
use pseudoword::huffman::HuffmanTree;
use pseudoword::mapping::{init_neural, init_random, MappingMatrix, NeuralInitOptions};
use pseudoword::rng;
use pseudoword::trainer::{self, MappingInit, VisualLookup, VisualMode};
use pseudoword::visual::{load_features, VisualFeatureSet, VisualStore};
use rand::RngCore as _;

use crate::settings::{check_exists, Settings};
use crate::CliError;

const DEFAULT_MIN_COUNT: u64 = 5;

pub fn build_vocab(s: &Settings) -> Result<(), CliError> {
    let corpus = s.input("corpus")?;
    let out = s.output("vocab")?;
    let vocab = build_vocabulary(&corpus, s.parse_or("min-count", DEFAULT_MIN_COUNT)?)?;
    vocab.save(&out)?;
    info!("{} words, {} tokens -> {}", vocab.len(), vocab.total_tokens(), out.display());
    Ok(())
}

pub fn fit_visual(s: &Settings) -> Result<(), CliError> {
    let (mode, _) = s.model_choice()?;
    let features = load_features(&s.input("features")?, None)?;
    let out = s.output("fitted-visual")?;
    let store = fit_store(s, mode, &features)?;
    store.save(&out)?;
    info!("fitted {} words -> {}", store.len(), out.display());
    Ok(())
}

fn fit_store(s: &Settings, mode: VisualMode, features: &VisualFeatureSet) -> Result<VisualStore, CliError> {
    let floor = match s.parse::<f64>("variance-floor")? {
        Some(f) => f,
        None => features.default_variance_floor(),
    };
    match mode {
        VisualMode::None => Err(CliError::invalid(
            "fitting visual features needs visual-mode centroid or hypersphere",
        )),
        VisualMode::Centroid => Ok(VisualStore::fit_centroids(features, floor)?),
        VisualMode::Hypersphere => {
            let seed = rng::fork(s.seed()?, "visual").next_u64();
            Ok(VisualStore::fit_mixtures(
                features,
                s.parse_or("k", 1)?,
                s.parse_or("max-iters", 100)?,
                floor,
                seed,
            )?)
        }
    }
}

pub fn init_mapping(s: &Settings) -> Result<(), CliError> {
    let (_, init) = s.model_choice()?;
    let features = load_features(&s.input("features")?, None)?;
    let out = s.output("mapping")?;
    let m = build_mapping(s, init, &features)?;
    m.save(&out)?;
    info!("{}x{} mapping -> {}", m.rows(), m.cols(), out.display());
    Ok(())
}

fn build_mapping(s: &Settings, init: MappingInit, features: &VisualFeatureSet) -> Result<MappingMatrix, CliError> {
    let mut rng = rng::fork(s.seed()?, "mapping");
    match init {
        MappingInit::Random => {
            let d_emb = s.parse_or("d-emb", trainer::TrainingConfig::default().d_emb)?;
            Ok(init_random(d_emb, features.dim(), &mut rng))
        }
        MappingInit::Neural => {
            let pretrained = Embeddings::load(&s.input("pretrained")?)?;
            if let Some(d) = s.parse::<usize>("d-emb")? {
                if d != pretrained.dim() {
                    return Err(CliError::invalid(format!(
                        "d-emb is {d} but the pretrained embeddings have dimension {}",
                        pretrained.dim()
                    )));
                }
            }
            let samples: Vec<(String, Vec<f64>)> = features
                .iter()
                .flat_map(|(w, vs)| vs.iter().map(move |v| (w.to_string(), v.clone())))
                .collect();
            let options = NeuralInitOptions {
                epochs: s.parse_or("neural-epochs", NeuralInitOptions::default().epochs)?,
                lr: s.parse_or("neural-lr", NeuralInitOptions::default().lr)?,
                batch_size: s.parse_or("neural-batch", NeuralInitOptions::default().batch_size)?,
            };
            let fit = init_neural(&samples, &pretrained, &options, &mut rng).map_err(|e| match e {
                pseudoword::Error::Config(msg) => CliError::invalid(format!("coverage: {msg}")),
                other => other.into(),
            })?;
            info!(
                "regression on {} samples ({} without a pretrained vector): mse {:.6} -> {:.6}",
                fit.pairs_used,
                fit.skipped,
                fit.initial_mse,
                fit.final_mse()
            );
            Ok(fit.matrix)
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn train(s: &Settings) -> Result<(), CliError> {
    let config = s.training_config()?;
    let corpus = s.input("corpus")?;
    let output = s.output("output")?;
    let vocab = match s.optional_input("vocab")? {
        Some(p) => Vocabulary::load(&p)?,
        None => build_vocabulary(&corpus, s.parse_or("min-count", DEFAULT_MIN_COUNT)?)?,
    };
    let tree = HuffmanTree::from_vocabulary(&vocab)?;

    let visual_on = config.visual_mode != VisualMode::None;
    let features_path = if visual_on { s.optional_input("features")? } else { None };
    let fitted_path = if visual_on { s.optional_input("fitted-visual")? } else { None };
    let mapping_path = if visual_on { s.optional_input("mapping")? } else { None };
    if visual_on && features_path.is_none() && fitted_path.is_none() {
        return Err(CliError::invalid("visual training needs `fitted-visual` or `features`"));
    }
    let needs_regression = visual_on && mapping_path.is_none() && config.mapping_init == MappingInit::Neural;
    if needs_regression {
        if features_path.is_none() {
            return Err(CliError::invalid("neural mapping initialization needs `features` or a `mapping` file"));
        }
        s.input("pretrained")?;
    }

    let features = match &features_path {
        Some(p) if fitted_path.is_none() || needs_regression => Some(load_features(p, None)?),
        _ => None,
    };
    let store = match (&fitted_path, &features) {
        (Some(p), _) => Some(VisualStore::load(p)?),
        (None, Some(f)) => Some(fit_store(s, config.visual_mode, f)?),
        (None, None) => None,
    };
    let mapping = match (&mapping_path, &features) {
        (Some(p), _) => Some(MappingMatrix::load(p)?),
        (None, Some(f)) if needs_regression => Some(build_mapping(s, MappingInit::Neural, f)?),
        _ => None,
    };
    if let (Some(m), Some(st)) = (&mapping, &store) {
        if m.rows() != config.d_emb || m.cols() != st.dim {
            return Err(CliError::invalid(format!(
                "mapping is {}x{} but training needs {}x{}",
                m.rows(),
                m.cols(),
                config.d_emb,
                st.dim
            )));
        }
    }

    let lookup = match &store {
        Some(st) => {
            let l = VisualLookup::new(&vocab, st, s.parse_or("visual-min-count", 0)?);
            info!("{} of {} vocabulary words carry visual data", l.visual_count(), vocab.len());
            l
        }
        None => VisualLookup::none(vocab.len()),
    };
    let trained = trainer::train(&corpus, &vocab, &tree, &lookup, mapping, &config)?;
    for (i, loss) in trained.epoch_losses.iter().enumerate() {
        println!("epoch {} loss {loss:.6}", i + 1);
    }

    let vec_path = with_suffix(&output, ".vec");
    trained.params.input_embeddings(&vocab).save(&vec_path)?;
    info!("embeddings -> {}", vec_path.display());
    if let Some(m) = trained.params.mapping_matrix() {
        let path = with_suffix(&output, ".mapping");
        m.save(&path)?;
        info!("mapping -> {}", path.display());
    }
    Ok(())
}

pub fn eval(s: &Settings) -> Result<(), CliError> {
    let emb_path = s.input("embeddings")?;
    let benchmarks: Vec<PathBuf> = s.list("benchmarks")?.into_iter().map(PathBuf::from).collect();
    for b in &benchmarks {
        check_exists("benchmarks", b)?;
    }
    let emb = Embeddings::load(&emb_path)?;
    let mut failed = None;
    for path in &benchmarks {
        let bench = BenchmarkSet::load(path)?;
        match run_benchmark(&emb, &bench) {
            Ok(result) => println!("{result}"),
            Err(e) => {
                eprintln!("{}: {e}", bench.name);
                failed.get_or_insert(e);
            }
        }
    }
    match failed {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn neighbors(s: &Settings) -> Result<(), CliError> {
    let emb = Embeddings::load(&s.input("embeddings")?)?;
    let queries = s.list("query")?;
    let k = s.parse_or("top-k", 3usize)?;
    if let Some(q) = queries.iter().find(|q| emb.get(q).is_none()) {
        return Err(CliError::invalid(format!("query word {q:?} is not in the embeddings")));
    }
    let mut table = String::from("word\tneighbors\n");
    for q in &queries {
        let names: Vec<String> = nearest_neighbors(&emb, q, k)?.into_iter().map(|(w, _)| w).collect();
        table.push_str(&format!("{q}\t{}\n", names.join(", ")));
    }
    print!("{table}");
    Ok(())
}
