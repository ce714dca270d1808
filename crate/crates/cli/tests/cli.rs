use std::path::Path;
use std::process::{Command, Output};

fn cds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cds"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_text(dir: &Path, name: &str, body: &[u8]) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn index_then_search() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "ex2.txt", b"abaacbcabdada");
    let idx = dir.path().join("ex2.cdsi");
    let idx = idx.to_str().unwrap();

    let o = cds(&[
        "index", "--text", &text, "--rank", "1", "--k", "5", "--out", idx,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("n=13\n") && s.contains("n_c=6\n") && s.contains("k=5\n"));
    assert!(s.contains("bytes=47\n"));
    assert_eq!(std::fs::metadata(idx).unwrap().len(), 47);

    let o = cds(&[
        "search",
        "--index",
        idx,
        "--text",
        &text,
        "--pattern",
        "cab",
        "--oracle",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "7");
    assert!(lines[1].starts_with("matches=1 "));

    let o = cds(&[
        "search",
        "--index",
        idx,
        "--text",
        &text,
        "--pattern",
        "zzz",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("matches=0 "));

    let o = cds(&[
        "search",
        "--index",
        idx,
        "--text",
        &text,
        "--pattern",
        "da",
        "--matcher",
        "kmp",
    ]);
    assert_eq!(stdout(&o).lines().take(2).collect::<Vec<_>>(), ["10", "12"]);
}

#[test]
fn oracle_catches_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "t.txt", b"abaacbcabdada");
    let o = cds(&["index", "--text", &text, "--k", "5"]);
    assert!(o.status.success());
    let idx = format!("{text}.cdsi");
    let o = cds(&[
        "search",
        "--index",
        &idx,
        "--text",
        &text,
        "--pattern",
        "a",
        "--oracle",
        "--inject-fault",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle"));
}

#[test]
fn ots_index_and_search() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "ots.txt", b"abaacabdaacabcc");
    let o = cds(&[
        "index",
        "--text",
        &text,
        "--algo",
        "ots",
        "--removed",
        "1",
        "--q",
        "2",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("n_hat=8\n"));
    let idx = format!("{text}.otsi");
    let o = cds(&[
        "search",
        "--index",
        &idx,
        "--text",
        &text,
        "--pattern",
        "acab",
        "--oracle",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().take(2).collect::<Vec<_>>(), ["4", "10"]);
}

#[test]
fn wrong_text_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "a.txt", b"abaacbcabdada");
    let other = write_text(dir.path(), "b.txt", b"abaacbcabdadb");
    assert!(cds(&["index", "--text", &text]).status.success());
    let o = cds(&[
        "search",
        "--index",
        &format!("{text}.cdsi"),
        "--text",
        &other,
        "--pattern",
        "ab",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fingerprint"));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "t.txt", b"abcabc");
    assert_eq!(
        cds(&["index", "--text", &text, "--rank", "300"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cds(&["index", "--text", &text, "--k", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cds(&["index", "--text", &text, "--k", "257"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cds(&["index", "--text", &text, "--algo", "ots", "--removed", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cds(&["bench", "--text", &text, "--m", "7", "--runs", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cds(&["bench", "--text", &text, "--algos", "bm", "--m", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cds(&["index", "--text", "/no/such/file"]).status.code(),
        Some(1)
    );
    let corrupt = write_text(dir.path(), "bad.cdsi", b"CDSX\x01");
    let o = cds(&[
        "search",
        "--index",
        &corrupt,
        "--text",
        &text,
        "--pattern",
        "ab",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("byte 0"));
}

#[test]
fn stats_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "z.txt", b"zzzz");
    let o = cds(&["stats", "--text", &text]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "rank,byte,count,max_gap,avg_gap\n1,122,4,1,1.00\n# bound=256\n"
    );

    let text = write_text(dir.path(), "ex2.txt", b"abaacbcabdada");
    let o = cds(&["stats", "--text", &text, "--max-rank", "50", "--k", "5"]);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 1 + 4 + 1);
    assert!(s.contains("1,97,6,4,2.40\n"));
    assert!(s.ends_with("# bound=5\n"));
}

#[test]
fn bench_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let body = b"in the beginning god created the heaven and the earth. ".repeat(40);
    let text = write_text(dir.path(), "b.txt", &body);
    let out1 = dir.path().join("r1.csv");
    let out2 = dir.path().join("r2.csv");
    let raw = dir.path().join("raw.csv");
    let args = |out: &Path| {
        vec![
            "bench".to_string(),
            "--text".into(),
            text.clone(),
            "--algos".into(),
            "cds:rank=1..3,k=256".into(),
            "ots:removed=2|4,q=8".into(),
            "horspool".into(),
            "kmp".into(),
            "--m".into(),
            "2,8,32".into(),
            "--runs".into(),
            "30".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let mut a1 = args(&out1);
    a1.extend(["--raw".to_string(), raw.to_str().unwrap().to_string()]);
    let o = Command::new(env!("CARGO_BIN_EXE_cds"))
        .args(&a1)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Command::new(env!("CARGO_BIN_EXE_cds"))
        .args(args(&out2))
        .output()
        .unwrap()
        .status
        .success());

    let read = |p: &Path| -> Vec<Vec<String>> {
        let mut r = csv::Reader::from_path(p).unwrap();
        r.records()
            .map(|rec| rec.unwrap().iter().map(String::from).collect())
            .collect()
    };
    let (r1, r2) = (read(&out1), read(&out2));
    assert_eq!(r1.len(), 3 * 7);
    let strip = |rows: &[Vec<String>]| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != 4 && *i != 5)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect()
    };
    assert_eq!(strip(&r1), strip(&r2));
    for group in r1.chunks(7) {
        assert!(group.iter().all(|r| r[7] == group[0][7]));
        assert!(group[0][7].parse::<u64>().unwrap() >= 30);
    }
    assert_eq!(read(&raw).len(), 3 * 7 * 30);
}
