use std::ffi::OsString;
use std::path::{Path, PathBuf};

use nqa_cli::{run, EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_USAGE};
use nqa_core::{gen_response, parse_nqa, serialize_nqa, RtParams, Weight};

fn nqa(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("nqa")
        .chain(args.iter().copied())
        .map(OsString::from);
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn gen(dir: &Path, family: &str, n: usize, k: usize) -> PathBuf {
    let path = dir.join(format!("{family}_{n}_{k}.nqa"));
    let (code, _, err) = nqa(&[
        "gen",
        family,
        &n.to_string(),
        &k.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    path
}

fn field<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in {out}"))
        .trim()
}

#[test]
fn gen_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "rt", 2, 3);
    let (code, out, _) = nqa(&["validate", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("OK"));
    assert_eq!(field(&out, "parent states:"), "7");
    assert_eq!(field(&out, "deterministic:"), "yes");

    let text = std::fs::read_to_string(&path).unwrap();
    let want = serialize_nqa(&gen_response(RtParams::new(2, 3).unwrap()));
    assert_eq!(serialize_nqa(&parse_nqa(&text).unwrap()), want);

    let path = gen(dir.path(), "rc", 1, 2);
    let (code, out, _) = nqa(&["validate", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "child 1 states:"), "7");
    assert_eq!(field(&out, "letters:"), "4");
}

/// Decides, then replays the printed lasso through `eval`.
fn replay(file: &Path, problem: &str, f: &str, g: &str, lambda: &str) -> (String, Weight) {
    let p = file.to_str().unwrap();
    let (code, out, err) = nqa(&[
        problem,
        p,
        "--f",
        f,
        "--g",
        g,
        "--lambda",
        lambda,
        "--witness",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let verdict = out.lines().next().unwrap().to_string();
    let stem = field(&out, "stem:");
    let cycle = field(&out, "loop:");
    let (code, value, err) = nqa(&[
        "eval", p, "--f", f, "--g", g, "--stem", stem, "--loop", cycle,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let value = value.trim();
    let value = if value == "-inf" {
        Weight::from_int(-1_000_000)
    } else {
        value.parse().unwrap()
    };
    (verdict, value)
}

#[test]
fn witnesses_replay_through_eval() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "rt", 2, 2);
    let two = Weight::from_int(2);

    let (v, x) = replay(&a, "empty", "Sup", "Sum+", "2");
    assert_eq!(v, "NONEMPTY");
    assert!(x >= two);

    let (v, x) = replay(&a, "empty", "LimSupAvg", "Sum+", "3/2");
    assert_eq!(v, "NONEMPTY");
    assert!(x >= "3/2".parse().unwrap());

    let (v, x) = replay(&a, "universal", "Inf", "Sum+", "1");
    assert_eq!(v, "NOT-UNIVERSAL");
    assert!(x < Weight::one());

    let b = gen(dir.path(), "rc", 1, 1);
    let (v, x) = replay(&b, "empty", "Sup", "Max", "1");
    assert_eq!(v, "NONEMPTY");
    assert!(x >= Weight::one());
}

#[test]
fn verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "rt", 1, 2);
    let p = a.to_str().unwrap();

    let (code, out, _) = nqa(&["empty", p, "--f", "Sup", "--g", "Sum+", "--lambda", "3"]);
    assert_eq!((code, out.trim()), (EXIT_OK, "EMPTY"));

    let (code, out, _) = nqa(&[
        "empty",
        p,
        "--f",
        "LimInfAvg",
        "--g",
        "Sum+",
        "--lambda",
        "1",
    ]);
    assert_eq!((code, out.trim()), (EXIT_UNSUPPORTED, "UNSUPPORTED-OPEN"));

    let (code, out, _) = nqa(&[
        "universal",
        p,
        "--f",
        "LimSupAvg",
        "--g",
        "Max",
        "--lambda",
        "1",
    ]);
    assert_eq!((code, out.trim()), (EXIT_UNSUPPORTED, "UNDECIDABLE"));

    let (code, _, err) = nqa(&["empty", p, "--f", "Sup", "--g", "SumB", "--lambda", "1"]);
    assert_eq!(code, EXIT_USAGE, "{err}");

    let (code, _, _) = nqa(&["empty", p, "--f", "Median", "--g", "Max", "--lambda", "1"]);
    assert_eq!(code, EXIT_USAGE);

    let bad = dir.path().join("bad.nqa");
    std::fs::write(
        &bad,
        "@PARENT\na : 2, q -> q\n@CHILD 1\na : 1, c -> d\nfinal: d\n",
    )
    .unwrap();
    let (code, _, err) = nqa(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("2"), "{err}");

    let missing = dir.path().join("missing.nqa");
    let (code, _, _) = nqa(&["validate", missing.to_str().unwrap()]);
    assert_ne!(code, EXIT_OK);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "rt", 2, 3);
    let p = a.to_str().unwrap();
    for args in [
        vec![
            "empty",
            p,
            "--f",
            "LimSupAvg",
            "--g",
            "Sum+",
            "--lambda",
            "2",
            "--witness",
        ],
        vec![
            "universal",
            p,
            "--f",
            "Sup",
            "--g",
            "Sum-",
            "--lambda",
            "-3",
            "--witness",
        ],
        vec!["flatten", p, "--f", "Sup", "--g", "Max"],
    ] {
        assert_eq!(nqa(&args), nqa(&args));
    }
}

#[test]
fn bench_prints_csv() {
    let (code, out, _) = nqa(&["bench", "rt", "--nmax", "2", "--kmax", "3"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], nqa_cli::BENCH_HEADER);
    // (1,1) (1,2) (1,3) (2,2) (2,3)
    assert_eq!(lines.len(), 6);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(2) == Some("NONEMPTY")));
}

#[test]
fn monitor_running_example() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "rt", 2, 2);
    let (code, out, _) = nqa(&[
        "monitor",
        a.to_str().unwrap(),
        "--g",
        "Sum+",
        "--word",
        "r o g",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "returned:"), "[2]");
    assert_eq!(field(&out, "active:"), "0");
}
