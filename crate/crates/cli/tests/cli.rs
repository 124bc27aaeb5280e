use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn radixsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radixsa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_and_verify_each_algo() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, b"cdaxcdayca").unwrap();
    for algo in ["radixsa", "sa1", "sa2"] {
        let out = dir.path().join(format!("{algo}.sa"));
        let r = radixsa(&["build", s(&input), "--algo", algo, "--verify", "-o", s(&out), "--format", "text"]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        let got: Vec<u32> = fs::read_to_string(&out)
            .unwrap()
            .lines()
            .map(|l| l.parse().unwrap())
            .collect();
        assert_eq!(got, vec![9, 2, 6, 8, 0, 4, 1, 5, 3, 7]);
        let v = radixsa(&["verify", s(&input), s(&out)]);
        assert!(v.status.success());
        assert!(String::from_utf8_lossy(&v.stdout).starts_with("ok"));
    }
}

#[test]
fn verify_rejects_wrong_array() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("banana");
    fs::write(&input, b"banana").unwrap();
    let bad = dir.path().join("bad.sa");
    fs::write(&bad, "5\n1\n3\n0\n4\n2\n").unwrap();
    let r = radixsa(&["verify", s(&input), s(&bad)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stdout).starts_with("invalid"));
}

#[test]
fn build_options_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("fib");
    let gen = radixsa(&["gen", "--family", "fibonacci", "--n", "5000", "-o", s(&input)]);
    assert!(gen.status.success());
    assert_eq!(fs::read(&input).unwrap().len(), 5000);
    let stats = dir.path().join("stats.csv");
    let out = dir.path().join("fib.sa");
    let r = radixsa(&[
        "build", s(&input), "--cap", "2", "--depth", "3", "--no-periods", "--stats", s(&stats), "-o", s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(&stats).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"passes") && header.contains(&"mean_access"));
    assert!(radixsa(&["verify", s(&input), s(&out)]).status.success());
    let bad = radixsa(&["build", s(&input), "--depth", "0"]);
    assert_eq!(bad.status.code(), Some(2));
    let both = radixsa(&["build", s(&input), "--cap", "3", "--no-cap"]);
    assert!(!both.status.success());
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for p in [&a, &b] {
        let r = radixsa(&["gen", "--family", "random", "--n", "1000", "--sigma", "26", "--seed", "5", "-o", s(p)]);
        assert!(r.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let p = dir.path().join("p");
    let r = radixsa(&["gen", "--family", "periodic", "--n", "100", "--period", "7", "--sigma", "4", "-o", s(&p)]);
    assert!(r.status.success());
    let bytes = fs::read(&p).unwrap();
    assert!((0..93).all(|i| bytes[i] == bytes[i + 7]));
    let bad = radixsa(&["gen", "--family", "random", "--n", "10", "-o", s(&p)]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn lemma_modes() {
    let r = radixsa(&["lemma", "--exact", "--sigma", "2", "--n", "8", "--ell", "3", "--offsets", "1,2"]);
    assert!(r.status.success());
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.contains("exact=1/8"));
    assert!(text.contains("1/32"));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("mc.csv");
    let r = radixsa(&[
        "lemma", "--mc", "--sigma", "4", "--n", "16", "--ell", "4", "--offsets", "2,8", "--trials", "200000", "--csv",
        s(&csv),
    ]);
    assert!(r.status.success());
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 3);

    let few = radixsa(&["lemma", "--mc", "--trials", "10"]);
    assert_eq!(few.status.code(), Some(2));
    let skewed = radixsa(&["lemma", "--mc", "--weights", "0.7,0.3", "--n", "10", "--offsets", "1", "--trials", "100000"]);
    assert_eq!(skewed.status.code(), Some(1));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bench.toml");
    fs::write(
        &spec,
        "reps = 5\nalgos = [\"radixsa\", \"sa1\"]\n\n[[dataset]]\nfamily = \"unary\"\nn = 300\n\n[[dataset]]\nname = \"random\"\nfamily = \"random\"\nn = 2000\nsigma = 26\nseed = 1\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let r = radixsa(&["bench", "--spec", s(&spec), "--reps", "2", "--csv", s(&csv)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let body = fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("dataset,n,sigma,algo,rep,ms,mean_access,passes,aux_bytes"));
    assert_eq!(lines.count(), 8);
    assert!(String::from_utf8_lossy(&r.stdout).contains("reference 2.25 s"));
}

#[test]
fn empty_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty");
    fs::write(&input, b"").unwrap();
    let r = radixsa(&["build", s(&input)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("empty"));
}
