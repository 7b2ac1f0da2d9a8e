use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aces(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aces"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn keygen(dir: &Path) {
    let out = aces(
        dir,
        &[
            "keygen",
            "--p",
            "2",
            "--q",
            "15015",
            "--degree",
            "4",
            "--n",
            "3",
            "--bigN",
            "2",
            "--k0",
            "1",
            "--seed",
            "01",
            "--out",
            "keys",
            "--locators",
            "32",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn encrypt(dir: &Path, m: &str, seed: &str, out: &str) {
    let o = aces(
        dir,
        &[
            "encrypt",
            "--pub",
            "keys/public.json",
            "--channel",
            "keys/channel.json",
            "--message",
            m,
            "--seed",
            seed,
            "--out",
            out,
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn decrypt(dir: &Path, ct: &str) -> Output {
    aces(
        dir,
        &[
            "decrypt",
            "--secret",
            "keys/secret.json",
            "--channel",
            "keys/channel.json",
            "--ct",
            ct,
        ],
    )
}

fn eval(dir: &Path, circuit: &str, refresh: &str, extra: &[&str]) -> Output {
    fs::write(dir.join("c.txt"), circuit).unwrap();
    let mut args = vec![
        "eval",
        "--pub",
        "keys/public.json",
        "--channel",
        "keys/channel.json",
        "--circuit",
        "c.txt",
        "--input",
        "a=a.json",
        "--refresh",
        refresh,
        "--out",
        "res",
    ];
    args.extend(extra);
    aces(dir, &args)
}

const CHAIN: &str = "in a\nt1 = mul a a\nt2 = mul t1 t1\nt3 = mul t2 t2\nout t3\n";

#[test]
fn keygen_writes_key_files() {
    let dir = tempfile::tempdir().unwrap();
    keygen(dir.path());
    for f in [
        "channel.json",
        "public.json",
        "secret.json",
        "locators.json",
    ] {
        assert!(dir.path().join("keys").join(f).is_file(), "{f} missing");
    }
}

#[test]
fn encrypt_then_decrypt() {
    let dir = tempfile::tempdir().unwrap();
    keygen(dir.path());
    for m in ["0", "1"] {
        encrypt(dir.path(), m, "aa", "ct.json");
        let out = decrypt(dir.path(), "ct.json");
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), m);
    }
    let bad = aces(
        dir.path(),
        &[
            "encrypt",
            "--pub",
            "keys/public.json",
            "--channel",
            "keys/channel.json",
            "--message",
            "2",
            "--seed",
            "aa",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn over_budget_circuit_without_refresh_is_a_guard_failure() {
    let dir = tempfile::tempdir().unwrap();
    keygen(dir.path());
    encrypt(dir.path(), "1", "bb", "a.json");
    let out = eval(dir.path(), CHAIN, "off", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t3"));
    let report = fs::read_to_string(dir.path().join("res/report.json")).unwrap();
    assert!(report.contains("\"violations\""));
}

#[test]
fn refresh_with_secret_check_rescues_the_chain() {
    let dir = tempfile::tempdir().unwrap();
    keygen(dir.path());
    encrypt(dir.path(), "1", "bb", "a.json");
    let out = eval(dir.path(), CHAIN, "auto", &["--secret", "keys/secret.json"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8_lossy(&decrypt(dir.path(), "res/t3.json").stdout).trim(),
        "1"
    );
    let report = fs::read_to_string(dir.path().join("res/report.json")).unwrap();
    assert!(report.contains("\"post_level\": 60"));
}

#[test]
fn refresh_command_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    keygen(dir.path());
    encrypt(dir.path(), "1", "cc", "a.json");
    let base = [
        "refresh",
        "--pub",
        "keys/public.json",
        "--channel",
        "keys/channel.json",
        "--ct",
        "a.json",
        "--out",
        "r.json",
    ];
    // without any way to decide refreshability the command refuses
    assert_eq!(aces(dir.path(), &base).status.code(), Some(1));
    let mut args = base.to_vec();
    args.extend(["--secret", "keys/secret.json"]);
    let out = aces(dir.path(), &args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8_lossy(&decrypt(dir.path(), "r.json").stdout).trim(),
        "1"
    );
    let out = aces(
        dir.path(),
        &[
            "inspect",
            "--ct",
            "r.json",
            "--channel",
            "keys/channel.json",
            "--pub",
            "keys/public.json",
        ],
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("level: 60"), "{text}");
    assert!(text.contains("sigma-submodule: true"), "{text}");
}

#[test]
fn usage_and_parse_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aces(dir.path(), &["frobnicate"]).status.code(), Some(1));
    keygen(dir.path());
    encrypt(dir.path(), "1", "dd", "a.json");
    let out = eval(dir.path(), "in a\nt = add a zz\nout t\n", "auto", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let bad_seed = aces(
        dir.path(),
        &[
            "encrypt",
            "--pub",
            "keys/public.json",
            "--channel",
            "keys/channel.json",
            "--message",
            "1",
            "--seed",
            "xyz",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(bad_seed.status.code(), Some(1));
}

#[test]
fn invalid_channel_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = aces(
        dir.path(),
        &[
            "keygen", "--p", "2", "--q", "7", "--degree", "4", "--n", "3", "--bigN", "2", "--k0",
            "1", "--seed", "01", "--out", "keys",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("violated"));
}
