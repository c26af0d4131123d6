//! Golden cases: `golden/<name>.args` holds one argument per line (lines
//! `env K=V` set variables), `golden/<name>.out` the expected transcript.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Case {
    pub name: String,
    pub args: Vec<String>,
    pub env: Vec<(String, String)>,
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub fn cases() -> Vec<Case> {
    let mut out = Vec::new();
    for entry in fs::read_dir(golden_dir()).expect("golden dir") {
        let path = entry.expect("dir entry").path();
        if path.extension().and_then(|e| e.to_str()) != Some("args") {
            continue;
        }
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let mut args = Vec::new();
        let mut env = Vec::new();
        for line in fs::read_to_string(&path).expect("args file").lines() {
            match line.strip_prefix("env ").and_then(|kv| kv.split_once('=')) {
                Some((k, v)) => env.push((k.to_string(), v.to_string())),
                None => args.push(line.to_string()),
            }
        }
        out.push(Case { name, args, env });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

/// Stdout, then stderr lines prefixed `stderr:`, then `exit=N`.
pub fn transcript(bin: &str, case: &Case) -> String {
    let mut cmd = Command::new(bin);
    cmd.args(&case.args)
        .current_dir(golden_dir())
        .env_remove("CLOSURELAB_TRACE");
    for (k, v) in &case.env {
        cmd.env(k, v);
    }
    let o = cmd.output().expect("run closurelab");
    let mut s = String::from_utf8_lossy(&o.stdout).into_owned();
    for line in String::from_utf8_lossy(&o.stderr).lines() {
        s.push_str(&format!("stderr:{line}\n"));
    }
    s.push_str(&format!("exit={}\n", o.status.code().unwrap_or(-1)));
    s
}

pub fn expected_path(case: &Case) -> PathBuf {
    golden_dir().join(format!("{}.out", case.name))
}
