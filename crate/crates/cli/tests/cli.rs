use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use towerkey::oracle::audit_key;

const PKC: &str = "field=2^3,mu=2,nu=3,kappa=1";
const SIG: &str = "field=2^3,mu=1,nu=3,lambda=2,kappa=2,K=1,L=1,tau=1";

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_towerkey"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn record(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|_| panic!("not json: {}", String::from_utf8_lossy(&o.stdout)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn keygen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for k in [&a, &b] {
        assert_eq!(run(&["keygen", "--params", PKC, "--seed", "11", "--out", p(k)], "").status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(dir.path().join("a.pub")).unwrap(), std::fs::read(dir.path().join("b.pub")).unwrap());
}

#[test]
fn encrypt_decrypt_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k");
    run(&["keygen", "--params", PKC, "--seed", "3", "--out", p(&k)], "");
    let pubk = dir.path().join("k.pub");
    let enc = run(&["encrypt", "--key", p(&pubk), "--pad", "5"], "2,3\n");
    assert_eq!(enc.status.code(), Some(0));
    let ct = String::from_utf8(enc.stdout.clone()).unwrap();
    assert_eq!(record(&enc)["ciphertext"].as_array().unwrap().len(), 3);

    let dec = run(&["decrypt", "--key", p(&k), "--pad", "5"], &ct);
    assert_eq!(dec.status.code(), Some(0));
    assert_eq!(record(&dec)["plaintext"], serde_json::json!([2, 3]));

    let mut rejected = 0;
    for w in ["1", "2", "3", "4", "6", "7"] {
        let o = run(&["decrypt", "--key", p(&k), "--pad", w], &ct);
        match o.status.code() {
            Some(0) => assert_eq!(record(&o)["plaintext"], serde_json::json!([2, 3])),
            Some(1) => {
                assert_eq!(record(&o)["result"], "integrity-failure");
                rejected += 1;
            }
            c => panic!("unexpected exit {c:?}"),
        }
    }
    assert!(rejected > 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k");
    run(&["keygen", "--params", PKC, "--seed", "3", "--out", p(&k)], "");
    let o = run(&["decrypt", "--key", p(&k), "--pad", "5"], "1,0,2");
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(record(&o)["result"], "inversion-failure");
    let o = run(&["decrypt", "--key", p(&dir.path().join("k.pub")), "--pad", "5"], "1,1,1");
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["encrypt", "--key", p(&dir.path().join("k.pub")), "--pad", "9"], "1,1");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["keygen", "--params", "field=6,mu=1,nu=2,kappa=1", "--seed", "1", "--out", p(&k)], "").status.code(), Some(2));
    assert_eq!(run(&["frobnicate"], "").status.code(), Some(2));
}

#[test]
fn signature_flow() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    let j = dir.path().join("j");
    assert_eq!(run(&["sig-keygen", "--params", SIG, "--seed", "2", "--out", p(&s)], "").status.code(), Some(0));
    let r = run(&["reserve", "--journal", p(&j), "--params", SIG, "--seed", "9", "--gist", "order 17"], "");
    assert_eq!(record(&r)["txn"], 1);
    let r = run(&["reserve", "--journal", p(&j)], "");
    assert_eq!(record(&r)["txn"], 2);

    let signed = run(&["sign", "--key", p(&s), "--journal", p(&j), "--txn", "2"], "4");
    assert_eq!(signed.status.code(), Some(0), "{}", String::from_utf8_lossy(&signed.stderr));
    let claim = String::from_utf8(signed.stdout).unwrap();

    let v = run(&["verify", "--key", &format!("{}.verify", p(&s))], &claim);
    assert_eq!(record(&v)["plaintext"], serde_json::json!([4]));

    let auth = format!("{}.auth", p(&s));
    let a = run(&["authenticate", "--key", &auth, "--journal", p(&j)], &claim);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(record(&a)["result"], "accept");

    let c: Value = serde_json::from_str(&claim).unwrap();
    let forged = c["claim"].as_str().unwrap().replace("txn=2", "txn=1");
    let a = run(&["authenticate", "--key", &auth, "--journal", p(&j)], &forged);
    assert_eq!(a.status.code(), Some(1));
    assert_eq!(record(&a)["result"], "reject");

    let again = run(&["sign", "--key", p(&s), "--journal", p(&j), "--txn", "7"], "4");
    assert_eq!(again.status.code(), Some(2));
}

#[test]
fn audit_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k");
    run(&["keygen", "--params", PKC, "--seed", "5", "--out", p(&k)], "");
    for (path, shuffle) in [(k.clone(), None), (dir.path().join("k.pub"), Some("4"))] {
        let mut args = vec!["audit", "--key", p(&path)];
        if let Some(s) = shuffle {
            args.extend(["--shuffle", s]);
        }
        let o = run(&args, "");
        assert_eq!(o.status.code(), Some(0));
        let report = audit_key(&std::fs::read(&path).unwrap(), None).unwrap();
        let got = record(&o);
        assert_eq!(got["kind"], report.kind.name());
        for (name, count) in &report.counts {
            assert_eq!(got["counts"][name], *count, "{name}");
        }
    }
}
