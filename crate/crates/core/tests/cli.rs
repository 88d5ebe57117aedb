use std::path::Path;
use std::process::Command;

fn magnav() -> Command {
    Command::new(env!("CARGO_BIN_EXE_magnav"))
}

fn repo(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    let text = format!(
        "seed = 3\nplanner = \"observability\"\nmap_builtin = \"lab_like\"\nstart = [1.0, 3.75, -30.0]\ngoal = [4.75, 1.5]\n{extra}"
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn genmap_writes_the_shipped_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lab.magmap");
    let st = magnav()
        .arg("genmap")
        .arg(repo("data/lab_like.toml"))
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(repo("data/lab_like.magmap")).unwrap()
    );
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let st = magnav()
            .args(["simulate", "-c"])
            .arg(&cfg)
            .arg("-o")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "step,truth_x,truth_y,truth_theta,est_x,est_y,est_theta,trace_pos,entropy,meas_nT,v,omega,gramian_det"
    );
    assert_eq!(text.as_bytes(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_writes_one_row_per_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "max_steps = 10\n");
    let out = dir.path().join("s.csv");
    let st = magnav()
        .args(["sweep", "-c"])
        .arg(&cfg)
        .args(["--ratios", "0,0.5,1,1.5,2", "--seeds", "3", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("ratio,metric,mean,std,n_ok,n_failed,flag"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let missing = magnav()
        .args(["simulate", "-c"])
        .arg(dir.path().join("nope.toml"))
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());

    let bad = write_config(dir.path(), "v = -1.0\n");
    let st = magnav()
        .args(["simulate", "-c"])
        .arg(&bad)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));

    let good = write_config(dir.path(), "");
    let st = magnav()
        .args(["sweep", "-c"])
        .arg(&good)
        .args(["--ratios", "0,-1", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));

    assert_eq!(magnav().arg("fly").status().unwrap().code(), Some(1));
    assert_eq!(
        magnav().arg("--help").output().unwrap().status.code(),
        Some(0)
    );
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let st = magnav()
        .args(["simulate", "-c"])
        .arg(&cfg)
        .arg("-o")
        .arg(dir.path().join("no/such/dir/t.csv"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));

    // the vehicle starts against the wall, so no plan keeps it on the map
    let cornered = write_config(dir.path(), "");
    let text = std::fs::read_to_string(&cornered)
        .unwrap()
        .replace("start = [1.0, 3.75, -30.0]", "start = [5.7, 2.5, 0.0]");
    std::fs::write(&cornered, text).unwrap();
    let st = magnav()
        .args(["simulate", "-c"])
        .arg(&cornered)
        .arg("-o")
        .arg(dir.path().join("t.csv"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}
