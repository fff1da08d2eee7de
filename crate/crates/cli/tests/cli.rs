mod common;

use std::fs;
use std::path::Path;

use common::{run, stderr, stdout};

fn synth(dir: &Path) {
    let o = run(&["synth", "--out-dir", "data", "--words", "80", "--dim", "16", "--seed", "3"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

fn train_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut a = vec![
        "train",
        "--pairs",
        "work/train.tsv",
        "--target",
        "data/target.txt",
        "--input-dim",
        "16",
        "--hidden-dim",
        "8",
        "--epochs",
        "3",
        "--checkpoint",
        out,
    ];
    a.extend_from_slice(extra);
    a
}

fn ingest(dir: &Path) {
    let o = run(
        &[
            "ingest",
            "--dictionary",
            "data/dictionary.tsv",
            "--encyclopedia",
            "data/encyclopedia.tsv",
            "--heldout",
            "data/heldout.txt",
            "--out-dir",
            "work",
        ],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let heldout: Vec<String> = fs::read_to_string(dir.join("data/heldout.txt"))
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect();
    let mut expected = 0;
    for f in ["data/dictionary.tsv", "data/encyclopedia.tsv"] {
        let text = fs::read_to_string(dir.join(f)).unwrap();
        expected += text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .filter(|l| heldout.iter().any(|h| l.split('\t').next() == Some(h)))
            .count();
    }
    let s = stdout(&o);
    assert!(s.contains(&format!("unseen\t{expected}\n")), "{s}");
}

#[test]
fn unknown_flags_print_usage_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["train", "--no-such-flag"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    let o = run(&[], dir.path());
    assert!(!o.status.success());
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["query", "--checkpoint", "absent.ckpt", "--target", "absent.txt", "hello"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
    assert!(stderr(&o).contains("absent.txt"), "{}", stderr(&o));

    let o = run(&["evaluate", "--eval", "x.tsv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--target"), "{}", stderr(&o));
}

#[test]
fn pipeline_ingest_train_evaluate_query() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    ingest(d);
    for f in ["train.tsv", "unseen.tsv", "vocab.tsv"] {
        assert!(d.join("work").join(f).exists(), "{f}");
    }

    let o = run(&train_args("m.ckpt", &["--log", "train.jsonl", "--loss", "cosine"]), d);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = fs::read_to_string(d.join("train.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r["epoch"], i + 1);
        for key in ["mean_loss", "skipped_pairs", "wall_time"] {
            assert!(r.get(key).is_some(), "{key}");
        }
    }

    let o = run(
        &["evaluate", "--checkpoint", "m.ckpt", "--target", "data/target.txt", "--eval", "data/eval_seen.tsv"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    for row in ["median rank", "accuracy@10", "accuracy@100", "rank variance", "skipped"] {
        assert!(table.contains(row), "{table}");
    }

    let o = run(
        &[
            "evaluate",
            "--checkpoint",
            "m.ckpt",
            "--target",
            "data/target.txt",
            "--eval",
            "data/crossword_long.tsv,data/crossword_single.tsv",
            "--eval-mode",
            "crossword",
            "--format",
            "jsonl",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["mode"], "crossword");
    assert!(lines[0]["median_rank"].as_f64().unwrap() >= 1.0);

    for baseline in ["add", "mult"] {
        let o = run(
            &["evaluate", "--target", "data/target.txt", "--eval", "data/eval_seen.tsv", "--baseline", baseline],
            d,
        );
        assert!(o.status.success(), "{baseline}: {}", stderr(&o));
    }

    let text = fs::read_to_string(d.join("data/eval_seen.tsv")).unwrap();
    let clue = text.lines().find(|l| !l.starts_with('#')).unwrap().split('\t').nth(1).unwrap().to_owned();
    let o = run(&["query", "--checkpoint", "m.ckpt", "--target", "data/target.txt", "--k", "4", &clue], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .map(|l| l.split('\t').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 3);
        assert_eq!(r[0], (i + 1).to_string());
        r[2].parse::<f64>().unwrap();
    }

    let o = run(
        &[
            "query", "--checkpoint", "m.ckpt", "--target", "data/target.txt", "--mode", "crossword", "--length", "4",
            "--k", "50", &clue,
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().all(|l| l.split('\t').nth(1).unwrap().chars().count() == 4));

    let o = run(
        &[
            "query",
            "--checkpoint",
            "m.ckpt",
            "--target",
            "data/target.txt",
            "--bilingual",
            "data/target_fr.txt",
            "--mode",
            "bilingual",
            "--target-lang",
            "fr",
            &format!("{clue} unknownword"),
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("unknownword"));
}

#[test]
fn training_twice_gives_identical_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    ingest(d);
    let extra = ["--architecture", "lstm", "--loss", "rank", "--seed", "5", "--shuffle-seed", "6", "--negative-seed", "7", "--log", "-"];
    for out in ["a.ckpt", "b.ckpt"] {
        let o = run(&train_args(out, &extra), d);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(d.join("a.ckpt")).unwrap(), fs::read(d.join("b.ckpt")).unwrap());
    let o = run(&train_args("c.ckpt", &["--architecture", "lstm", "--loss", "rank", "--seed", "6", "--log", "-"]), d);
    assert!(o.status.success());
    assert_ne!(fs::read(d.join("a.ckpt")).unwrap(), fs::read(d.join("c.ckpt")).unwrap());
}

#[test]
fn gradcheck_exit_status_follows_the_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gradcheck"], dir.path());
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.ends_with("\tpass")).count(), 4, "{out}");

    let o = run(&["gradcheck", "--architecture", "lstm", "--tolerance", "1e-15"], dir.path());
    assert!(!o.status.success());
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn config_file_flags_and_environment_are_layered() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    ingest(d);
    let o = run(&train_args("m.ckpt", &["--log", "-"]), d);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::write(
        d.join("defembed.conf"),
        "# query settings\ncheckpoint = m.ckpt\ntarget = data/target.txt\nk = 3\n",
    )
    .unwrap();
    let word = fs::read_to_string(d.join("work/vocab.tsv")).unwrap().lines().next().unwrap().split('\t').next().unwrap().to_owned();

    let count = |o: &std::process::Output| {
        assert!(o.status.success(), "{}", stderr(o));
        stdout(o).lines().count()
    };
    assert_eq!(count(&run(&["--config", "defembed.conf", "query", &word], d)), 3);
    assert_eq!(count(&run(&["query", "--config", "defembed.conf", "--k", "5", &word], d)), 5);

    let mut cmd = common::bin();
    let o = cmd
        .current_dir(d)
        .env("DEFEMBED_K", "7")
        .args(["--config", "defembed.conf", "query", "--k", "5", &word])
        .output()
        .unwrap();
    assert_eq!(count(&o), 7);

    let mut cmd = common::bin();
    let o = cmd
        .current_dir(d)
        .env("DEFEMBED_K", "seven")
        .args(["--config", "defembed.conf", "query", &word])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("DEFEMBED_K"), "{}", stderr(&o));
}
