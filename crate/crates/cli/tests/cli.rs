use std::process::{Command, Output};

fn vqcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqcc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const QUICK: [&str; 6] = ["--epochs", "20", "--set", "admm.epochs_per_iter=5", "--max-iters", "3"];

#[test]
fn depth_prints_table_and_circuit_depth() {
    let o = vqcc(&["depth"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("gate,param_class,depth\n"));
    assert!(s.contains("RY,others,4\n"));
    assert!(s.contains("# circuit tcd 51"));
}

#[test]
fn lut_lists_levels() {
    let o = vqcc(&["lut", "--dataset", "syn16"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("gate,value,tag,depth\n"));
    assert!(s.contains("CRX,0.000000000000,prune,0"));
    assert!(!s.contains("CRX,6.283185307180,prune"));
}

#[test]
fn train_writes_params_that_depth_reads() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("theta.txt");
    let mut args = vec!["train", "--seed", "3", "--params-out", p.to_str().unwrap()];
    args.extend(QUICK);
    let o = vqcc(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let tcd_line = stdout(&o).lines().find(|l| l.starts_with("tcd ")).unwrap().to_string();
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 14);
    let d = vqcc(&["depth", "--params", p.to_str().unwrap()]);
    assert!(stdout(&d).contains(&format!("# circuit {tcd_line}")));
}

#[test]
fn recl_and_compress_run() {
    let mut args = vec!["recl"];
    args.extend(QUICK);
    let o = vqcc(&args);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("gate_index,kind,level,depth,metric\n"));
    assert_eq!(s.lines().count(), 15);

    args[0] = "compress";
    let o = vqcc(&args);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("r,loss,acc,tcd,theta_z_gap,masked\n"));
    assert!(s.contains("speedup"));
}

#[test]
fn report_from_config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    let out = dir.path().join("report.csv");
    std::fs::write(
        &cfg,
        "# quick run\nmethods = vanilla, zero-only-pruning\ntrain.epochs = 20\nadmm.ratio = 0.3\nformat = csv\n",
    )
    .unwrap();
    let o = vqcc(&[
        "report",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "7",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written, stdout(&o));
    assert!(written.starts_with("# seed=7 "));
    assert_eq!(written.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(vqcc(&["report", "--ratio", "1.5"]).status.code(), Some(2));
    assert_eq!(vqcc(&["report", "--methods", "nope"]).status.code(), Some(2));
    assert_eq!(vqcc(&["train", "--dataset", "csv:/no/such.csv", "--circuit", "syn4"]).status.code(), Some(2));
    assert_eq!(vqcc(&["depth", "--config", "/no/such.cfg"]).status.code(), Some(2));
    assert_eq!(vqcc(&["bogus"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad_out = dir.path().join("missing").join("r.txt");
    let o = vqcc(&["report", "--methods", "vanilla", "--epochs", "2", "--output", bad_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
