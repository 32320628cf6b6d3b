use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use troenpy::synthetic::SyntheticSpec;

fn troenpy() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_troenpy"));
    // Keep the caller's TROENPY_* settings out of the tests.
    for (key, _) in std::env::vars() {
        if key.starts_with("TROENPY_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    troenpy().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn info_uniform() {
    let dir = TempDir::new().unwrap();
    let out = run(&["info", &write(&dir, "p.txt", "0.5 0.5\n")]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "entropy"), "0.693147181");
    assert_eq!(field(&text, "troenpy"), "0.693147181");
    assert_eq!(field(&text, "troenpy_min"), "0.693147181");
    assert_eq!(field(&text, "dual_cross_entropy"), "0.693147181");
}

#[test]
fn info_normalizes_with_notice() {
    let dir = TempDir::new().unwrap();
    let out = run(&["info", &write(&dir, "p.txt", "9 1")]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "troenpy"), "2.08286264");
    assert!(stderr(&out).contains("normalized"));
}

#[test]
fn info_point_mass_reports_clamp() {
    let dir = TempDir::new().unwrap();
    let out = run(&["info", &write(&dir, "p.txt", "1 0")]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "troenpy"), "27.6310211");
    assert_eq!(field(&stdout(&out), "entropy"), "0");
    assert!(stderr(&out).contains("clamp"));
}

#[test]
fn info_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    for body in ["0.5 -0.5", "", "a b"] {
        let out = run(&["info", &write(&dir, "p.txt", body)]);
        assert_eq!(out.status.code(), Some(1), "{body:?}");
    }
}

#[test]
fn io_errors_exit_2() {
    let out = run(&["info", "/nonexistent/p.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["weights", "/nonexistent/c.tsv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flag_errors_exit_1_and_help_exits_0() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.tsv", "A\tx\nB\ty\n");
    assert_eq!(
        run(&["classify", &corpus, "--k", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["--dim", "0", "embed-init", "t.tsv"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["--log-base", "3", "info", "p.txt"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["--smoothing", "laplace:-1", "info", "p.txt"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["--clamp-eps", "0.5", "info", &write(&dir, "p.txt", "1")])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn env_overrides_flags() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.tsv", "A\tx\nB\ty\n");
    let out = troenpy()
        .env("TROENPY_K", "0")
        .args(["classify", &corpus])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let table = write(
        &dir,
        "t.tsv",
        "term\tcount\tself_troenpy\na\t1\t0.5\nb\t2\t0.25\n",
    );
    let a = stdout(
        &troenpy()
            .env("TROENPY_SEED", "5")
            .args(["embed-init", &table])
            .output()
            .unwrap(),
    );
    let b = stdout(&run(&["--seed", "5", "embed-init", &table]));
    let c = stdout(&run(&["--seed", "6", "embed-init", &table]));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn weights_table_matches_hand_values() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.tsv", "A\tx y z\nA\tx y\nB\ty z z\nB\tz\n");
    let out = run(&["weights", &corpus]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "term\tdf\tidf\tpcf\tncf10\tncf1star\tncfstar0");
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.split('\t').count() == 7));
    assert_eq!(
        lines[2],
        "y\t3\t1\t0.174416048\t0.636514168\t-0.0566330123\t0.693147181"
    );
    // x sits only in class A.
    assert!(stderr(&out).contains("clamp"));
}

#[test]
fn weights_with_laplace_have_no_clamp_notice() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.tsv", "A\tx y z\nA\tx y\nB\ty z z\nB\tz\n");
    let out = run(&["--smoothing", "laplace", "weights", &corpus]);
    assert!(out.status.success());
    assert!(!stderr(&out).contains("clamp"));
    for line in stdout(&out).lines().skip(1) {
        for v in line.split('\t').skip(1) {
            assert!(v.parse::<f64>().unwrap().is_finite());
        }
    }
}

#[test]
fn weights_reports_bad_line() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.tsv", "A\tx y\nno label here\n");
    let out = run(&["weights", &corpus]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains(":2:"), "{}", stderr(&out));
}

#[test]
fn weights_dir_per_class() {
    let dir = TempDir::new().unwrap();
    for (label, name, text) in [
        ("pos", "1.txt", "good fine"),
        ("pos", "2.txt", "good"),
        ("neg", "1.txt", "bad"),
    ] {
        let sub = dir.path().join(label);
        fs::create_dir_all(&sub).unwrap();
        fs::write(sub.join(name), text).unwrap();
    }
    let out = run(&["--format", "dir", "weights", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 4);
}

#[test]
fn classify_synthetic_corpus() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "synthetic.tsv", &SyntheticSpec::default().to_tsv());
    let csv = dir.path().join("errors.csv");
    let out = run(&[
        "classify",
        &corpus,
        "--schemes",
        "tf-idf,tf-pi",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| l.starts_with("tf-"))
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "tf-idf");
    assert_eq!(rows[1][0], "tf-pi");
    let idf: f64 = rows[0][1].parse().unwrap();
    let pi: f64 = rows[1][1].parse().unwrap();
    assert!(pi < idf, "tf-pi {pi} vs tf-idf {idf}");

    let csv = fs::read_to_string(csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "repeat,tf-idf,tf-pi");
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn classify_json_embeds_config() {
    let dir = TempDir::new().unwrap();
    let corpus = write(
        &dir,
        "c.tsv",
        &SyntheticSpec {
            documents: 40,
            ..Default::default()
        }
        .to_tsv(),
    );
    let out = run(&[
        "--repeats",
        "3",
        "--k",
        "3",
        "classify",
        &corpus,
        "--schemes",
        "tf-ncf10",
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["run"]["config"]["common"]["k"], 3);
    assert_eq!(doc["run"]["config"]["command"]["subcommand"], "classify");
    let schemes = doc["report"]["schemes"].as_array().unwrap();
    assert_eq!(schemes.len(), 1);
    assert_eq!(schemes[0]["scheme"], "tf-ncf10");
    assert_eq!(schemes[0]["per_repeat"].as_array().unwrap().len(), 3);
}

#[test]
fn classify_rejects_unknown_scheme() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.tsv", "A\tx\nB\ty\n");
    assert_eq!(
        run(&["classify", &corpus, "--schemes", "tf-xyz"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn selftro_three_terms() {
    let dir = TempDir::new().unwrap();
    let out = run(&["--window", "2", "selftro", &write(&dir, "s.txt", "a b c\n")]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "term\tcount\tself_troenpy");
    for (line, term) in lines[1..].iter().zip(["a", "b", "c"]) {
        assert_eq!(*line, format!("{term}\t1\t0.693147181"));
    }
    assert!(stderr(&out).contains("corpus_troenpy"));
}

#[test]
fn selftro_top_table_and_empty_input() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.txt", "the cat sat on the mat\nthe dog sat\n");
    let out_path = dir.path().join("table.tsv");
    let out = run(&[
        "selftro",
        &input,
        "--top",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("rank\tword\ttroenpy\tcount"));
    assert!(text.lines().any(|l| l.starts_with("2\t")));
    assert!(!text.lines().any(|l| l.starts_with("3\t")));
    assert!(out_path.exists());

    let out = run(&["selftro", &write(&dir, "empty.txt", "\n\n")]);
    assert_eq!(out.status.code(), Some(1));
}

fn sidecar(path: &Path) -> String {
    format!("{}.config.json", path.display())
}

#[test]
fn embed_init_is_reproducible_with_sidecar() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.txt", "a b c d\nb c d e\nc d e f\n");
    let table = dir.path().join("table.tsv");
    assert!(run(&["selftro", &input, "--out", table.to_str().unwrap()])
        .status
        .success());

    let render = |name: &str| {
        let out = dir.path().join(name);
        let status = run(&[
            "--dim",
            "8",
            "--seed",
            "3",
            "embed-init",
            table.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success(), "{}", stderr(&status));
        (
            fs::read(&out).unwrap(),
            fs::read_to_string(sidecar(&out)).unwrap(),
        )
    };
    let (a, config_a) = render("a.txt");
    let (b, _) = render("b.txt");
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "6 8");
    let weights: Vec<f64> = fs::read_to_string(&table)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(2).unwrap().parse().unwrap())
        .collect();
    for (line, w) in lines.zip(weights) {
        let v: Vec<f64> = line
            .split(' ')
            .skip(1)
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(v.len(), 8);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - w).abs() < 1e-6);
    }

    let config: serde_json::Value = serde_json::from_str(&config_a).unwrap();
    assert_eq!(config["config"]["common"]["dim"], 8);
    assert_eq!(config["config"]["common"]["seed"], 3);
    assert_eq!(config["config"]["command"]["subcommand"], "embed-init");
}

#[test]
fn quantum_examples() {
    let dir = TempDir::new().unwrap();
    let out = run(&["quantum", &write(&dir, "m.txt", "2\n0.5 0\n0 0.5\n")]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "von_neumann_entropy"), "0.693147181");
    assert_eq!(field(&text, "quantum_troenpy"), "0.693147181");

    let out = run(&["quantum", &write(&dir, "m.txt", "2\n0.7 0.1\n0.1 0.3\n")]);
    let ev: Vec<f64> = field(&stdout(&out), "eigenvalues")
        .split(' ')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((ev[0] - 0.723607).abs() < 1e-6 && (ev[1] - 0.276393).abs() < 1e-6);

    let out = run(&["quantum", &write(&dir, "m.txt", "2\n0.7 0.2\n0.1 0.3\n")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("symmetric"));
}

#[test]
fn log_base_two() {
    let dir = TempDir::new().unwrap();
    let out = run(&["--log-base", "2", "info", &write(&dir, "p.txt", "0.5 0.5")]);
    assert_eq!(field(&stdout(&out), "entropy"), "1");
}
