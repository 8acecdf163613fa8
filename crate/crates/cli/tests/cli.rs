use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvlab")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn selftest_passes_on_shipped_configs() {
    let dir = tempfile::tempdir().unwrap();
    let o = rvlab(&["selftest", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let doc = json(&dir.path().join("selftest.json"));
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["result"]["runs"].as_array().unwrap().len(), 7);
}

#[test]
fn ricci_flow_is_deterministic_and_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("ricci-flow.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = rvlab(&["ricci-flow", "-c", s(&cfg), "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["trace.csv", "ricci-flow.json", "final.mesh"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs between runs");
    }

    let text = std::fs::read_to_string(a.join("trace.csv")).unwrap();
    let mut lines = text.lines();
    let provenance = lines.next().unwrap();
    let doc = json(&a.join("ricci-flow.json"));
    let hash = doc["config_hash"].as_str().unwrap();
    assert!(provenance.starts_with("# schema=1") && provenance.contains(hash));
    assert_eq!(lines.next().unwrap(), "step,t,W,max_abs_K_minus_Kbar,area");
    let w: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(w.len() > 10);
    assert!(w.windows(2).all(|p| p[1] >= p[0] - 1e-10));
    assert_eq!(doc["tolerance"]["curvature"], 1e-4);
}

#[test]
fn config_overrides_change_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("cusp-decay.toml");
    let run = |extra: &[&str], out: &str| {
        let out = dir.path().join(out);
        let mut args = vec!["cusp-decay", "-c", s(&cfg), "--out", s(&out)];
        args.extend_from_slice(extra);
        assert_eq!(rvlab(&args).status.code(), Some(0));
        json(&out.join("cusp-decay.json"))["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(run(&[], "a"), run(&[], "b"));
    assert_ne!(run(&[], "a"), run(&["--family", "linear"], "c"));
}

#[test]
fn structural_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    let o = rvlab(&["hessian-lab", "--direction", "antidiagonal", "--basis-size", "0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(rvlab(&["no-such-command"]).status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[wvol]\nchange = \"large\"\n").unwrap();
    assert_eq!(rvlab(&["wvol", "-c", s(&bad), "--out", s(&out)]).status.code(), Some(2));
    let missing = dir.path().join("missing.mesh");
    assert_eq!(rvlab(&["ricci-flow", "--mesh", s(&missing), "--out", s(&out)]).status.code(), Some(2));
    std::fs::write(&bad, "[cusp_decay]\nfamily = \"nonsense\"\n").unwrap();
    assert_eq!(rvlab(&["cusp-decay", "-c", s(&bad), "--out", s(&out)]).status.code(), Some(2));
}

#[test]
fn violated_gluing_identity_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("gluing.json")).unwrap().replace("\"closed_volume\": 9.0", "\"closed_volume\": 10.0");
    let g = dir.path().join("g.json");
    std::fs::write(&g, text).unwrap();
    let out = dir.path().join("c");
    assert_eq!(rvlab(&["corrected-vr", "--gluing", s(&g), "--out", s(&out)]).status.code(), Some(1));
    let doc = json(&out.join("corrected-vr.json"));
    assert_eq!(doc["pass"], false);
    assert_eq!(doc["result"]["gluing"]["residual"], 1.0);
}

#[test]
fn grid_outputs_carry_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.toml");
    std::fs::write(&cfg, "[beltrami_solve]\ngrid_size = 64\noracle_tol = 0.05\n[schwarzian]\ngrid_size = 32\n").unwrap();
    let out = dir.path().join("b");
    assert_eq!(rvlab(&["beltrami-solve", "-c", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    let side = json(&out.join("map.json"));
    assert_eq!(side["result"]["components"], serde_json::json!(["f", "f_z", "f_zbar"]));
    let bytes = std::fs::read(out.join("map.bin")).unwrap();
    assert_eq!(&bytes[..8], b"RVLBGRID");
    assert_eq!(bytes.len(), 80 + 3 * 64 * 64 * 16);
    assert_eq!(hex_prefix(&bytes[48..80]), side["config_hash"].as_str().unwrap());

    let out = dir.path().join("s");
    assert_eq!(rvlab(&["schwarzian", "-c", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    let side = json(&out.join("tensors.json"));
    let names: Vec<&str> = side["result"]["components"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(&names[..6], ["I_dz2", "I_dzdzbar", "II_dz2", "II_dzdzbar", "III_dz2", "III_dzdzbar"]);
    assert_eq!(side["schema"], 1);
}

fn hex_prefix(b: &[u8]) -> String {
    b.iter().map(|x| format!("{x:02x}")).collect()
}
