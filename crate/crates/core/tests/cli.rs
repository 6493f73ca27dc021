use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use trajix::datagen::{read_network, read_queries, read_records};
use trajix::{Backend, ScaleConfig, TrajIndex, TrajIndexConfig};

fn trajix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajix"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = trajix(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, seed: &str) -> String {
    let prefix = dir.join(name);
    ok(&[
        "gen",
        "--grid",
        "20x20",
        "--objects",
        "100",
        "--duration",
        "100",
        "--seed",
        seed,
        "--out",
        s(&prefix),
    ]);
    prefix.to_str().unwrap().to_string()
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a", "7");
    let b = generate(dir.path(), "b", "7");
    for ext in ["network", "records", "queries"] {
        let (x, y) = (
            fs::read(format!("{a}.{ext}")).unwrap(),
            fs::read(format!("{b}.{ext}")).unwrap(),
        );
        assert!(!x.is_empty());
        assert_eq!(x, y, "{ext} differs");
    }
    let c = generate(dir.path(), "c", "8");
    assert_ne!(
        fs::read(format!("{a}.records")).unwrap(),
        fs::read(format!("{c}.records")).unwrap()
    );
}

#[test]
fn gen_workload_writes_n_records() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("w");
    ok(&[
        "gen",
        "--workload",
        "random",
        "--n",
        "100000",
        "--out",
        s(&prefix),
    ]);
    let text = fs::read_to_string(format!("{}.records", s(&prefix))).unwrap();
    assert_eq!(text.lines().count(), 100_000);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&trajix(&["gen", "--grid", "4x4"])), 1);
    assert_eq!(code(&trajix(&["frobnicate"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "d", "1");
    let out = trajix(&[
        "build",
        "--network",
        &format!("{p}.network"),
        "--records",
        &format!("{p}.records"),
        "--out",
        &format!("{p}.idx"),
        "--backend",
        "btree",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("btree"));
    assert_eq!(code(&trajix(&["gen", "--grid", "1x5", "--out", &p])), 1);
}

#[test]
fn built_index_answers_like_an_in_memory_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "d", "3");
    let net = read_network(format!("{p}.network")).unwrap();
    let records = read_records(format!("{p}.records"), &net).unwrap();
    let queries = read_queries(format!("{p}.queries")).unwrap();
    let mut listings = Vec::new();
    for backend in Backend::ALL {
        for digits in ["0", "8"] {
            let idx = format!("{p}.{backend}.{digits}.idx");
            let stats = ok(&[
                "build",
                "--network",
                &format!("{p}.network"),
                "--records",
                &format!("{p}.records"),
                "--out",
                &idx,
                "--backend",
                backend.name(),
                "--scale-digits",
                digits,
            ]);
            assert!(
                stats.contains(&format!("records            {}", records.len())),
                "{stats}"
            );
            let listing = ok(&[
                "query",
                "--index",
                &idx,
                "--queries",
                &format!("{p}.queries"),
            ]);
            assert_eq!(listing.lines().count(), queries.len());

            let cfg = TrajIndexConfig {
                scale: ScaleConfig::new(digits.parse().unwrap()).unwrap(),
                ..TrajIndexConfig::with_backend(backend)
            };
            let mem = TrajIndex::build(net.clone(), &records, cfg).unwrap();
            for (line, q) in listing.lines().zip(&queries) {
                let ids = mem.query(q).unwrap().object_ids;
                let mut expected = vec![ids.len().to_string()];
                expected.extend(ids.iter().map(|i| i.to_string()));
                let got: Vec<&str> = line.split(' ').skip(1).collect();
                assert_eq!(got, expected);
            }
            if digits == "8" {
                listings.push(listing);
            }
        }
    }
    assert!(
        listings.windows(2).all(|w| w[0] == w[1]),
        "backends disagree"
    );
}

#[test]
fn query_flags() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "d", "4");
    let idx = format!("{p}.idx");
    ok(&[
        "build",
        "--network",
        &format!("{p}.network"),
        "--records",
        &format!("{p}.records"),
        "--out",
        &idx,
    ]);
    let qs = format!("{p}.queries");

    let at = ok(&["query", "--index", &idx, "--queries", &qs, "--at", "42.5"]);
    let from_to = ok(&[
        "query",
        "--index",
        &idx,
        "--queries",
        &qs,
        "--from",
        "42.5",
        "--to",
        "42.5",
    ]);
    assert_eq!(at, from_to);

    let counts = ok(&["query", "--index", &idx, "--queries", &qs, "--count"]);
    let full = ok(&["query", "--index", &idx, "--queries", &qs]);
    for (c, f) in counts.lines().zip(full.lines()) {
        assert_eq!(c.split(' ').count(), 2);
        assert!(f.starts_with(c));
    }

    let window = ok(&[
        "query",
        "--index",
        &idx,
        "--window",
        "0,0,19,19",
        "--from",
        "0",
        "--to",
        "100",
    ]);
    assert_eq!(window.trim().split(' ').nth(1), Some("100"));

    let empty = dir.path().join("empty.queries");
    fs::write(&empty, "").unwrap();
    assert_eq!(ok(&["query", "--index", &idx, "--queries", s(&empty)]), "");

    let bad = dir.path().join("bad.queries");
    fs::write(&bad, "q 0 0 1 1 5\n").unwrap();
    let out = trajix(&["query", "--index", &idx, "--queries", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":1:"));

    let reversed = dir.path().join("rev.queries");
    fs::write(&reversed, "q 0 0 1 1 5 4\n").unwrap();
    assert_eq!(
        code(&trajix(&[
            "query",
            "--index",
            &idx,
            "--queries",
            s(&reversed)
        ])),
        2
    );
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "d", "5");
    let bad_records = dir.path().join("bad.records");
    fs::write(&bad_records, "r 1 0 0 1\nr 1 99999 1 2\n").unwrap();
    let out = trajix(&[
        "build",
        "--network",
        &format!("{p}.network"),
        "--records",
        s(&bad_records),
        "--out",
        &format!("{p}.idx"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("99999"));

    let garbage = dir.path().join("garbage.idx");
    fs::write(&garbage, b"TJIX\x07\x00").unwrap();
    let out = trajix(&[
        "query",
        "--index",
        s(&garbage),
        "--queries",
        &format!("{p}.queries"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}

#[test]
fn bench_subset_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    ok(&[
        "bench",
        "--sizes",
        "500",
        "--queries",
        "20",
        "--repetitions",
        "1",
        "--extents",
        "5",
        "--objects",
        "30",
        "--grid",
        "6",
        "--out",
        s(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("scenario,backend,n,scale_digits,build_seconds,query_seconds_total,space_bytes,m_total,result_count_total")
    );
    assert_eq!(lines.count(), 3 * 4 + 3 * 4);
    let stdout = ok(&[
        "bench",
        "--no-families",
        "--scenarios",
        "fixed",
        "--sizes",
        "100",
        "--repetitions",
        "1",
    ]);
    assert_eq!(stdout.lines().count(), 1 + 4);
    assert_eq!(code(&trajix(&["bench", "--extents", "0"])), 1);
    assert_eq!(code(&trajix(&["bench", "--repetitions", "0"])), 1);
}
