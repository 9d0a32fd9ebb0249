use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use pseudoword::trainer::{Backend, MappingInit, TrainingConfig, VisualMode};

use crate::CliError;

macro_rules! overrides {
    ($($field:ident => $key:literal : $help:literal,)*) => {
        /// Every configuration key, settable from the command line.
        #[derive(Args, Debug, Default)]
        pub struct Overrides {
            /// key=value configuration file; flags take precedence
            #[arg(long, value_name = "FILE")]
            pub config: Option<PathBuf>,
            $(
                #[arg(long = $key, value_name = "VALUE", help = $help)]
                pub $field: Option<String>,
            )*
        }

        pub const KEYS: &[&str] = &[$($key),*];

        impl Overrides {
            fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push(($key, v.as_str()));
                    }
                )*
                out
            }
        }
    };
}

overrides! {
    corpus => "corpus": "whitespace-tokenized training text",
    vocab => "vocab": "vocabulary file",
    features => "features": "raw visual feature samples, one `word v1 .. vd` line each",
    fitted_visual => "fitted-visual": "fitted centroid or mixture file",
    pretrained => "pretrained": "pretrained embeddings for neural mapping initialization",
    mapping => "mapping": "mapping matrix file",
    output => "output": "output prefix for trained embeddings and mapping",
    embeddings => "embeddings": "embeddings to evaluate or query",
    benchmarks => "benchmarks": "comma-separated word-similarity files",
    query => "query": "comma-separated query words",
    top_k => "top-k": "neighbors to list per query [3]",
    variant => "variant": "skipgram | pseudowords-ran | pseudowords-c | pseudowords-h",
    visual_mode => "visual-mode": "none | centroid | hypersphere",
    mapping_init => "mapping-init": "random | neural",
    backend => "backend": "hs | exact [hs]",
    d_emb => "d-emb": "embedding dimension [300]",
    window => "window": "context window radius [5]",
    epochs => "epochs": "training epochs [5]",
    lr => "lr": "initial learning rate [0.025]",
    lr_floor => "lr-floor": "final learning rate [lr * 1e-4]",
    subsample => "subsample": "subsampling threshold, 0 disables [0]",
    seed => "seed": "master random seed [1]",
    threads => "threads": "training threads [1]",
    min_count => "min-count": "minimum word count for the vocabulary [5]",
    visual_min_count => "visual-min-count": "minimum corpus count for a word to use its visual data [0]",
    k => "k": "mixture components per word [1]",
    max_iters => "max-iters": "EM iteration cap [100]",
    variance_floor => "variance-floor": "mixture variance floor [scaled to the data]",
    neural_epochs => "neural-epochs": "epochs for neural mapping initialization [100]",
    neural_lr => "neural-lr": "learning rate for neural mapping initialization [0.01]",
    neural_batch => "neural-batch": "mini-batch size for neural mapping initialization [32]",
}

/// Merged view of the configuration file and command-line overrides.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(overrides: &Overrides) -> Result<Self, CliError> {
        let mut settings = match &overrides.config {
            Some(path) => Self::read_file(path)?,
            None => Settings::default(),
        };
        for (key, value) in overrides.pairs() {
            settings.values.insert(key.to_string(), value.to_string());
        }
        Ok(settings)
    }

    pub fn parse_text(text: &str, source: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::invalid(format!("{source}:{}: expected key=value", i + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::invalid(format!("{source}:{}: unknown key {key:?}", i + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::invalid(format!("{source}:{}: duplicate key {key:?}", i + 1)));
            }
        }
        Ok(Settings { values })
    }

    fn read_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        Self::parse_text(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(KEYS.contains(&key), "unregistered key {key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::invalid(format!("missing required setting `{key}`")))
    }

    /// Path to an existing file.
    pub fn input(&self, key: &str) -> Result<PathBuf, CliError> {
        let path = PathBuf::from(self.require(key)?);
        check_exists(key, &path)?;
        Ok(path)
    }

    pub fn optional_input(&self, key: &str) -> Result<Option<PathBuf>, CliError> {
        match self.get(key) {
            Some(_) => self.input(key).map(Some),
            None => Ok(None),
        }
    }

    pub fn output(&self, key: &str) -> Result<PathBuf, CliError> {
        Ok(PathBuf::from(self.require(key)?))
    }

    pub fn list(&self, key: &str) -> Result<Vec<String>, CliError> {
        let items: Vec<String> = self
            .require(key)?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if items.is_empty() {
            return Err(CliError::invalid(format!("`{key}` lists nothing")));
        }
        Ok(items)
    }

    pub fn parse<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key)
            .map(|raw| {
                raw.parse()
                    .map_err(|e| CliError::invalid(format!("invalid value {raw:?} for `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn parse_or<T>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parse_or("seed", TrainingConfig::default().seed)
    }

    /// Visual mode and mapping initialization after applying the variant
    /// preset. Explicit settings must agree with the preset.
    pub fn model_choice(&self) -> Result<(VisualMode, MappingInit), CliError> {
        let visual: Option<VisualMode> = self.get("visual-mode").map(parse_visual_mode).transpose()?;
        let init: Option<MappingInit> = self.get("mapping-init").map(parse_mapping_init).transpose()?;
        let Some(name) = self.get("variant") else {
            return Ok((visual.unwrap_or(VisualMode::None), init.unwrap_or(MappingInit::Random)));
        };
        let preset = Variant::from_name(name)?;
        let (pv, pi) = preset.choice();
        if visual.is_some_and(|v| v != pv) {
            return Err(CliError::invalid(format!("visual-mode conflicts with variant {name}")));
        }
        if init.is_some_and(|i| i != pi) && pv != VisualMode::None {
            return Err(CliError::invalid(format!("mapping-init conflicts with variant {name}")));
        }
        Ok((pv, pi))
    }

    pub fn training_config(&self) -> Result<TrainingConfig, CliError> {
        let defaults = TrainingConfig::default();
        let (visual_mode, mapping_init) = self.model_choice()?;
        let lr_initial = self.parse_or("lr", defaults.lr_initial)?;
        let config = TrainingConfig {
            d_emb: self.parse_or("d-emb", defaults.d_emb)?,
            window: self.parse_or("window", defaults.window)?,
            epochs: self.parse_or("epochs", defaults.epochs)?,
            lr_initial,
            lr_floor: self.parse_or("lr-floor", lr_initial * 1e-4)?,
            subsample_threshold: self.parse_or("subsample", defaults.subsample_threshold)?,
            backend: self.get("backend").map(parse_backend).transpose()?.unwrap_or(defaults.backend),
            visual_mode,
            mapping_init,
            seed: self.seed()?,
            threads: self.parse_or("threads", defaults.threads)?,
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn check_exists(key: &str, path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::invalid(format!("{key}: no such file {}", path.display())))
    }
}

/// Presets for the four model rows: text-only skip-gram and the three
/// pseudoword configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    SkipGram,
    PseudowordsRandom,
    PseudowordsCentroid,
    PseudowordsHypersphere,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::SkipGram,
        Variant::PseudowordsRandom,
        Variant::PseudowordsCentroid,
        Variant::PseudowordsHypersphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SkipGram => "skipgram",
            Variant::PseudowordsRandom => "pseudowords-ran",
            Variant::PseudowordsCentroid => "pseudowords-c",
            Variant::PseudowordsHypersphere => "pseudowords-h",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| CliError::invalid(format!("unknown variant {name:?}")))
    }

    pub fn choice(self) -> (VisualMode, MappingInit) {
        match self {
            Variant::SkipGram => (VisualMode::None, MappingInit::Random),
            Variant::PseudowordsRandom => (VisualMode::Centroid, MappingInit::Random),
            Variant::PseudowordsCentroid => (VisualMode::Centroid, MappingInit::Neural),
            Variant::PseudowordsHypersphere => (VisualMode::Hypersphere, MappingInit::Neural),
        }
    }
}

fn parse_visual_mode(s: &str) -> Result<VisualMode, CliError> {
    match s {
        "none" => Ok(VisualMode::None),
        "centroid" => Ok(VisualMode::Centroid),
        "hypersphere" => Ok(VisualMode::Hypersphere),
        _ => Err(CliError::invalid(format!("unknown visual-mode {s:?}"))),
    }
}

fn parse_mapping_init(s: &str) -> Result<MappingInit, CliError> {
    match s {
        "random" => Ok(MappingInit::Random),
        "neural" => Ok(MappingInit::Neural),
        _ => Err(CliError::invalid(format!("unknown mapping-init {s:?}"))),
    }
}

fn parse_backend(s: &str) -> Result<Backend, CliError> {
    match s {
        "hs" => Ok(Backend::HierarchicalSoftmax),
        "exact" => Ok(Backend::ExactSoftmax),
        _ => Err(CliError::invalid(format!("unknown backend {s:?}"))),
    }
}
