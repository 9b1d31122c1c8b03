//! Acceptance criterion 9: the full pipeline, run twice with the same
//! seeds, produces byte-identical output trees.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spikemix"))
}

fn run_ok(args: &[&str]) {
    let output = bin().args(args).output().expect("spawning spikemix");
    assert!(
        output.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
}

fn run_pipeline(root: &Path) {
    let p = |s: &str| root.join(s).display().to_string();
    run_ok(&["simulate", "--preset", "waveforms", "--seed", "5", "--out", &p("wf")]);
    run_ok(&["pca", "--input", &p("wf/waveforms.csv"), "-r", "4", "--out", &p("feats")]);
    for model in ["ofm", "dpm"] {
        run_ok(&[
            "run",
            "--features",
            &p("feats/features.csv"),
            "--model",
            model,
            "--kstar",
            "8",
            "--iterations",
            "600",
            "--burn-in",
            "200",
            "--seed",
            "3",
            "--out",
            &p("runs"),
        ]);
    }
    run_ok(&[
        "analyze",
        "--trace",
        &p("runs/ofm_trace.csv"),
        "--features",
        &p("feats/features.csv"),
        "--rule",
        "modal",
        "--waveforms",
        &p("wf/waveforms.csv"),
        "--color-labels",
        &p("wf/labels.csv"),
        "--out",
        &p("analysis"),
    ]);
    run_ok(&[
        "compare",
        "--trace-ofm",
        &p("runs/ofm_trace.csv"),
        "--trace-dpm",
        &p("runs/dpm_trace.csv"),
        "--features",
        &p("feats/features.csv"),
        "--out",
        &p("cmp"),
    ]);
}

fn collect_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let entry = entry.unwrap();
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn criterion_9_end_to_end_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run_pipeline(&a);
    run_pipeline(&b);
    let tree_a = collect_tree(&a);
    let tree_b = collect_tree(&b);
    let names: Vec<&String> = tree_a.keys().collect();
    assert_eq!(
        names,
        tree_b.keys().collect::<Vec<_>>(),
        "the two runs produced different file sets"
    );
    assert!(!tree_a.is_empty());
    for (name, bytes) in &tree_a {
        assert_eq!(bytes, &tree_b[name], "{name} differs between identical runs");
    }
    println!(
        "acceptance criterion 9 (end-to-end determinism): PASS  {} files byte-identical across reruns",
        tree_a.len()
    );
}
