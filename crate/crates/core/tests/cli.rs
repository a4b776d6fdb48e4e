use std::path::Path;
use std::process::{Command, Output};

use silverbench::corpus::{read_silver_file, HEADER_PREFIX};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_silverbench"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap_or_default()
        .to_string()
}

#[test]
fn help_documents_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for needle in [
        "Pharaoh",
        "WPT",
        "silver JSONL",
        "/fill-mask",
        "synthetic:<specfile>",
    ] {
        assert!(text.contains(needle), "help lacks {needle}");
    }
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &["eval", "--bogus"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
    assert_eq!(code(&cli(dir.path(), &["create", "--out", "x.jsonl"])), 1);
    assert_eq!(
        code(&cli(
            dir.path(),
            &["align", "--sym", "diagonal", "--out", "x"]
        )),
        1
    );
}

#[test]
fn eval_reports_on_matching_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.pharaoh", "0-0 1-1\n0-0\n");
    write(dir.path(), "g.pharaoh", "0-0 1?1\n0-0 1-1\n");
    let out = cli(
        dir.path(),
        &[
            "eval",
            "--pred",
            "a.pharaoh",
            "--gold",
            "g.pharaoh",
            "--json",
            "r.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("precision       1.0000"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(report["header"]
        .as_str()
        .unwrap()
        .starts_with(HEADER_PREFIX));
    // |A∩S| = 2 of |S| = 3.
    assert!((report["report"]["recall"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn eval_reads_wpt_gold_and_rejects_bad_data() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.pharaoh", "0-0\n1-0\n");
    write(dir.path(), "g.wpt", "1 1 1 S\n2 2 1 P\n");
    let out = cli(
        dir.path(),
        &["eval", "--pred", "a.pharaoh", "--gold", "g.wpt"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("precision       1.0000"));
    write(dir.path(), "bad.pharaoh", "0-x\n");
    assert_eq!(
        code(&cli(
            dir.path(),
            &["eval", "--pred", "bad.pharaoh", "--gold", "g.wpt"]
        )),
        2
    );
    write(dir.path(), "src.txt", "a b\nc\n");
    write(dir.path(), "tgt.txt", "x\ny\n");
    let out = cli(
        dir.path(),
        &[
            "eval",
            "--pred",
            "a.pharaoh",
            "--gold",
            "g.wpt",
            "--source",
            "src.txt",
            "--target",
            "tgt.txt",
        ],
    );
    // Sentence 2 has one source word but a link from position 1.
    assert_eq!(code(&out), 2);
}

#[test]
fn unreachable_provider_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    write(dir.path(), "in.txt", "a b\n");
    write(
        dir.path(),
        "spec.json",
        r#"{"lexicon": {"a": "x", "b": "y"}, "classes": {"c": ["a", "b"]}}"#,
    );
    let url = format!("http:http://127.0.0.1:{port}");
    let out = cli(
        dir.path(),
        &[
            "create",
            "--input",
            "in.txt",
            "--mt",
            &url,
            "--mlm",
            "synthetic:spec.json",
            "--out",
            "s.jsonl",
            "--no-cache",
        ],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_gen_is_reproducible_and_headed() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "synth",
            "gen",
            "--words",
            "50",
            "--sentences",
            "200",
            "--fusion",
            "0.1",
            "--reverse",
            "--seed",
            "7",
            "--out-dir",
            out,
        ]
    };
    assert_eq!(code(&cli(dir.path(), &args("a"))), 0);
    assert_eq!(code(&cli(dir.path(), &args("b"))), 0);
    for f in ["spec.json", "source.txt", "target.txt", "truth.pharaoh"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let header = first_line(&dir.path().join("a/source.txt"));
    assert!(header.starts_with(&format!(
        "{HEADER_PREFIX} {} config=",
        env!("CARGO_PKG_VERSION")
    )));
    assert_eq!(header, first_line(&dir.path().join("a/truth.pharaoh")));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("a/source.txt"))
            .unwrap()
            .lines()
            .count(),
        201
    );
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&cli(
            d,
            &["synth", "gen", "--sentences", "20", "--out-dir", "c"]
        )),
        0
    );
    write(d, "cfg.json", r#"{"min_valid": 5, "k": 5}"#);
    let base = [
        "create",
        "--input",
        "c/source.txt",
        "--mt",
        "synthetic:c/spec.json",
        "--mlm",
        "synthetic:c/spec.json",
    ];
    let mut with_config = base.to_vec();
    with_config.extend(["--config", "cfg.json", "--out", "strict.jsonl"]);
    assert_eq!(code(&cli(d, &with_config)), 0);
    let strict = read_silver_file(&d.join("strict.jsonl")).unwrap();
    assert!(strict.iter().all(|r| r.links.is_empty()));

    let mut flag_wins = base.to_vec();
    flag_wins.extend([
        "--config",
        "cfg.json",
        "--min-valid",
        "4",
        "--out",
        "flag.jsonl",
    ]);
    assert_eq!(code(&cli(d, &flag_wins)), 0);
    let mut defaults = base.to_vec();
    defaults.extend(["--out", "plain.jsonl"]);
    assert_eq!(code(&cli(d, &defaults)), 0);
    let flag = read_silver_file(&d.join("flag.jsonl")).unwrap();
    assert!(flag.iter().any(|r| !r.links.is_empty()));
    // Same resolved settings, same bytes.
    assert_eq!(
        std::fs::read(d.join("flag.jsonl")).unwrap(),
        std::fs::read(d.join("plain.jsonl")).unwrap()
    );
    assert_ne!(
        first_line(&d.join("strict.jsonl")),
        first_line(&d.join("plain.jsonl"))
    );

    write(d, "broken.json", "[1, 2]");
    let mut broken = base.to_vec();
    broken.extend(["--config", "broken.json", "--out", "x.jsonl"]);
    assert_eq!(code(&cli(d, &broken)), 1);
}

#[test]
fn full_pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = |args: &[&str]| {
        let out = cli(d, args);
        assert_eq!(
            code(&out),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        stdout(&out)
    };
    ok(&[
        "synth",
        "gen",
        "--sentences",
        "150",
        "--seed",
        "3",
        "--out-dir",
        "c",
    ]);
    ok(&[
        "create",
        "--input",
        "c/source.txt",
        "--mt",
        "synthetic:c/spec.json",
        "--mlm",
        "synthetic:c/spec.json",
        "--out",
        "silver.jsonl",
    ]);
    let par = ["--source", "c/source.txt", "--target", "c/target.txt"];
    let run = |extra: &[&str]| {
        let mut a = extra.to_vec();
        a.extend(par);
        ok(&a)
    };
    run(&[
        "train-tokenizer",
        "--kind",
        "greedy",
        "--size",
        "120",
        "--out",
        "wp.json",
    ]);
    run(&["align", "--tokenizer", "wp.json", "--out", "wp.pharaoh"]);
    run(&[
        "align",
        "--tokenizer",
        "word",
        "--sym",
        "int",
        "--iters",
        "3",
        "--out",
        "int.pharaoh",
    ]);
    let text = run(&[
        "eval",
        "--pred",
        "wp.pharaoh",
        "--gold",
        "c/truth.pharaoh",
        "--freq",
    ]);
    assert!(text.contains("by frequency"));

    // Pretokenized input gives the same result as the vocab it came from.
    let vocab = silverbench::tokenize::SubwordVocab::read(&d.join("wp.json")).unwrap();
    let pairs =
        silverbench::corpus::load_parallel(&d.join("c/source.txt"), &d.join("c/target.txt"))
            .unwrap();
    for (side, name) in [(0, "src.tok.jsonl"), (1, "tgt.tok.jsonl")] {
        let lines: Vec<String> = pairs
            .iter()
            .map(|p| {
                let t = vocab.tokenize(if side == 0 { &p.source } else { &p.target });
                serde_json::json!({ "id": p.id, "tokens": t.tokens, "word_spans": t.word_spans })
                    .to_string()
            })
            .collect();
        write(d, name, &(lines.join("\n") + "\n"));
    }
    ok(&[
        "align",
        "--src-tokens",
        "src.tok.jsonl",
        "--tgt-tokens",
        "tgt.tok.jsonl",
        "--out",
        "pre.pharaoh",
    ]);
    let body = |f: &str| {
        std::fs::read_to_string(d.join(f))
            .unwrap()
            .lines()
            .skip(1)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body("pre.pharaoh"), body("wp.pharaoh"));

    // Part-of-speech sidecar: every source word tagged X gives a single bin.
    let tags: Vec<String> = pairs
        .iter()
        .map(|p| serde_json::json!({ "id": p.id, "labels": vec!["X"; p.source.len()] }).to_string())
        .collect();
    write(d, "pos.jsonl", &(tags.join("\n") + "\n"));
    let mut a = vec![
        "eval",
        "--pred",
        "wp.pharaoh",
        "--gold",
        "c/truth.pharaoh",
        "--pos",
        "pos.jsonl",
        "--json",
        "pos.json",
    ];
    a.extend(par);
    ok(&a);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("pos.json")).unwrap()).unwrap();
    assert_eq!(
        report["by_pos"]["bins"]["X"]["report"]["f1"],
        report["report"]["f1"]
    );

    ok(&[
        "correlate",
        "--run",
        "wp=wp.pharaoh",
        "--run",
        "int=int.pharaoh",
        "--silver",
        "silver.jsonl",
        "--gold",
        "c/truth.pharaoh",
        "--out",
        "rank.csv",
    ]);
    let csv = std::fs::read_to_string(d.join("rank.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with(HEADER_PREFIX));
    assert_eq!(
        lines[1],
        "config,f1_silver,f1_gold,aer_silver,aer_gold,rank_silver,rank_gold"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("# pearson_r_f1="));
}
