mod common;

use common::{path_str, read_vectors, run, run_ok, write};
use rand::Rng as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

#[test]
fn build_vocab_golden() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write(dir.path(), "c.txt", "the cat sat on the mat\nthe end\n");
    let vocab = dir.path().join("v.txt");
    run_ok(&["build-vocab", "--corpus", path_str(&corpus), "--vocab", path_str(&vocab), "--min-count", "1"]);
    let expected = "WORDS 6 TOKENS 8\nthe\t3\ncat\t1\nend\t1\nmat\t1\non\t1\nsat\t1\n";
    assert_eq!(std::fs::read_to_string(&vocab).unwrap(), expected);
}

#[test]
fn missing_corpus_exits_one_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.txt");
    let out = run(&["build-vocab", "--corpus", path_str(&missing), "--vocab", "v.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.txt"));
}

#[test]
fn empty_vocabulary_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write(dir.path(), "c.txt", "a b c");
    let vocab = dir.path().join("v.txt");
    let out = run(&["build-vocab", "--corpus", path_str(&corpus), "--vocab", path_str(&vocab), "--min-count", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty vocabulary"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write(dir.path(), "c.txt", "a a b");
    let vocab = dir.path().join("v.txt");
    let cfg = write(
        dir.path(),
        "run.cfg",
        &format!("corpus = {}\nvocab = {}\nmin-count = 1\n", corpus.display(), vocab.display()),
    );
    run_ok(&["build-vocab", "--config", path_str(&cfg), "--min-count", "2"]);
    assert_eq!(std::fs::read_to_string(&vocab).unwrap(), "WORDS 1 TOKENS 2\na\t2\n");

    let bad = write(dir.path(), "bad.cfg", "colour = blue\n");
    assert_eq!(run(&["build-vocab", "--config", path_str(&bad)]).status.code(), Some(1));
}

#[test]
fn fit_visual_centroid_of_two_samples() {
    let dir = tempfile::tempdir().unwrap();
    let features = write(dir.path(), "f.txt", "cup 1 0\ncup 0 1\n");
    let out = dir.path().join("fit.txt");
    run_ok(&[
        "fit-visual", "--features", path_str(&features), "--visual-mode", "centroid",
        "--fitted-visual", path_str(&out),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("WORD cup\nCENTROID 0.5 0.5\n"), "{text}");
}

#[test]
fn fit_visual_single_component_is_gaussian_mle() {
    let dir = tempfile::tempdir().unwrap();
    let features = write(dir.path(), "f.txt", "cup 1 2\ncup 3 2\ncup 2 5\n");
    let out = dir.path().join("fit.txt");
    run_ok(&[
        "fit-visual", "--features", path_str(&features), "--variant", "pseudowords-h",
        "--fitted-visual", path_str(&out), "--variance-floor", "1e-9",
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let field = |tag: &str| -> Vec<f64> {
        let line = text.lines().find(|l| l.starts_with(tag)).unwrap();
        line.split_whitespace().skip(1).map(|x| x.parse().unwrap()).collect()
    };
    // means (2, 3); population variances (2/3, 2)
    let mean = field("MEAN");
    let var = field("VARIANCE");
    assert!((mean[0] - 2.0).abs() < 1e-12 && (mean[1] - 3.0).abs() < 1e-12);
    assert!((var[0] - 2.0 / 3.0).abs() < 1e-10 && (var[1] - 2.0).abs() < 1e-10);
}

#[test]
fn neural_mapping_recovers_planted_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let (d_emb, d_v, n) = (4, 3, 40);
    let planted: Vec<f64> = (0..d_emb * d_v).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut features = String::new();
    let mut pretrained = format!("{n} {d_emb}\n");
    for i in 0..n {
        let v: Vec<f64> = (0..d_v).map(|_| r.random_range(-1.0..1.0)).collect();
        let e: Vec<f64> = (0..d_emb)
            .map(|row| (0..d_v).map(|c| planted[row * d_v + c] * v[c]).sum())
            .collect();
        let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        features.push_str(&format!("w{i} {}\n", fmt(&v)));
        pretrained.push_str(&format!("w{i} {}\n", fmt(&e)));
    }
    let f = write(dir.path(), "f.txt", &features);
    let p = write(dir.path(), "p.vec", &pretrained);
    let out = dir.path().join("m.txt");
    run_ok(&[
        "init-mapping", "--mapping-init", "neural", "--features", path_str(&f), "--pretrained", path_str(&p),
        "--mapping", path_str(&out), "--neural-epochs", "500", "--neural-lr", "0.05", "--neural-batch", "10",
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let got: Vec<f64> = text.lines().skip(1).flat_map(|l| l.split_whitespace().map(|x| x.parse::<f64>().unwrap())).collect();
    let diff: f64 = got.iter().zip(&planted).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = planted.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(diff / norm < 0.05, "relative Frobenius error {}", diff / norm);
}

#[test]
fn neural_mapping_without_overlap_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "cup 1 0\n");
    let p = write(dir.path(), "p.vec", "1 2\nsaucer 0.1 0.2\n");
    let out = run(&[
        "init-mapping", "--variant", "pseudowords-c", "--features", path_str(&f), "--pretrained", path_str(&p),
        "--mapping", path_str(&dir.path().join("m.txt")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coverage"));
}

#[test]
fn variant_conflict_exits_one() {
    let out = run(&["train", "--variant", "skipgram", "--visual-mode", "hypersphere"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn visual_features_of_unseen_words_change_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write(dir.path(), "c.txt", &common::two_topic_corpus(2000));
    let features = write(dir.path(), "f.txt", "zebra 1 2\nzebra 2 1\nquokka 0 1\n");
    let mapping = dir.path().join("m.txt");
    run_ok(&[
        "init-mapping", "--features", path_str(&features), "--d-emb", "8", "--mapping", path_str(&mapping),
    ]);
    let common_args = ["--corpus", path_str(&corpus), "--d-emb", "8", "--epochs", "2", "--min-count", "1"];
    let plain = dir.path().join("plain");
    let visual = dir.path().join("visual");
    let mut a = vec!["train", "--variant", "skipgram", "--output", path_str(&plain)];
    a.extend(common_args);
    run_ok(&a);
    let mut b = vec![
        "train", "--variant", "pseudowords-c", "--features", path_str(&features), "--mapping", path_str(&mapping),
        "--output", path_str(&visual),
    ];
    b.extend(common_args);
    let stdout = run_ok(&b);
    assert_eq!(stdout.lines().count(), 2);
    assert_eq!(
        std::fs::read(plain.with_extension("vec")).unwrap(),
        std::fs::read(visual.with_extension("vec")).unwrap()
    );
    assert_eq!(std::fs::read(&mapping).unwrap(), std::fs::read(visual.with_extension("mapping")).unwrap());
    assert!(!plain.with_extension("mapping").exists());
}

#[test]
fn hypersphere_training_reports_falling_loss() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write(dir.path(), "c.txt", &common::two_topic_corpus(4000));
    let features = write(dir.path(), "f.txt", "a 1 0\na 0.9 0.1\nx 0 1\nx 0.1 0.8\n");
    let pretrained = write(dir.path(), "p.vec", "2 6\na 1 0 0 0 0 1\nx 0 1 0 0 1 0\n");
    let out = dir.path().join("m");
    let stdout = run_ok(&[
        "train", "--variant", "pseudowords-h", "--corpus", path_str(&corpus), "--features", path_str(&features),
        "--pretrained", path_str(&pretrained), "--d-emb", "6", "--window", "2", "--min-count", "1",
        "--output", path_str(&out),
    ]);
    let losses: Vec<f64> = stdout.lines().map(|l| l.rsplit(' ').next().unwrap().parse().unwrap()).collect();
    assert_eq!(losses.len(), 5);
    assert!(losses[4] < losses[0], "{losses:?}");
}

#[test]
fn eval_matches_two_stage_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let emb = write(
        dir.path(),
        "e.vec",
        "5 3\ncat 1 0 0\ndog 0.9 0.3 0\ncar 0 1 0.2\nbus 0.1 1 0\ntree 0 0.2 1\n",
    );
    let bench = write(
        dir.path(),
        "toy.tsv",
        "# word1 word2 score\ncat\tdog\t9\ncar\tbus\t8\ncat\ttree\t1\ndog\tcar\t3\nbus\ttree\t2.5\ncat\tunicorn\t5\n",
    );
    let stdout = run_ok(&["eval", "--embeddings", path_str(&emb), "--benchmarks", path_str(&bench)]);

    let rows = read_vectors(&emb);
    let pairs = [("cat", "dog", 9.0), ("car", "bus", 8.0), ("cat", "tree", 1.0), ("dog", "car", 3.0), ("bus", "tree", 2.5)];
    let model: Vec<f64> = pairs
        .iter()
        .map(|(a, b, _)| common::cosine(common::vector(&rows, a), common::vector(&rows, b)))
        .collect();
    let human: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    // distinct values, so the rank-difference formula applies
    let rank = |xs: &[f64], i: usize| xs.iter().filter(|&&y| y < xs[i]).count() as f64;
    let n = pairs.len() as f64;
    let d2: f64 = (0..pairs.len()).map(|i| (rank(&human, i) - rank(&model, i)).powi(2)).sum();
    let rho = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    assert_eq!(stdout, format!("toy rho={rho:.4} pairs=5 skipped=1\n"));
}

#[test]
fn neighbors_golden_table() {
    let dir = tempfile::tempdir().unwrap();
    let deg = |d: f64| format!("{:?} {:?}", d.to_radians().cos(), d.to_radians().sin());
    let text = format!(
        "5 2\nq {}\nnear {}\nmid {}\nfar {}\nback {}\n",
        deg(0.0),
        deg(10.0),
        deg(40.0),
        deg(80.0),
        deg(180.0)
    );
    let emb = write(dir.path(), "e.vec", &text);
    let stdout = run_ok(&["neighbors", "--embeddings", path_str(&emb), "--query", "q,back", "--top-k", "3"]);
    assert_eq!(stdout, "word\tneighbors\nq\tnear, mid, far\nback\tfar, mid, near\n");

    let out = run(&["neighbors", "--embeddings", path_str(&emb), "--query", "owl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("owl"));
}
