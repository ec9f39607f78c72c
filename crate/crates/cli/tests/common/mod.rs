#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_entangle-verdict"));
    cmd.env_remove("ENTANGLE_VERDICT_SEED");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

const REPORT_KEYS: [&str; 11] = [
    "input_id",
    "verdict",
    "min_ppt_eigenvalue",
    "ppt_eigenvalues",
    "negativity",
    "concurrence",
    "x_fit",
    "condition_margin",
    "decomposition",
    "decomposition_absent_reason",
    "flags",
];
const FIT_KEYS: [&str; 7] = [
    "alpha",
    "beta",
    "beta_prime",
    "gamma",
    "alpha_prime",
    "residual",
    "accepted",
];

fn exact_keys(v: &Value, keys: &[&str], what: &str) -> Result<(), String> {
    let obj = v.as_object().ok_or(format!("{what} is not an object"))?;
    let mut got: Vec<&str> = obj.keys().map(String::as_str).collect();
    let mut want = keys.to_vec();
    got.sort();
    want.sort();
    if got == want {
        Ok(())
    } else {
        Err(format!("{what} keys {got:?}, expected {want:?}"))
    }
}

fn number(v: &Value, what: &str) -> Result<f64, String> {
    v.as_f64().ok_or(format!("{what} is not a number: {v}"))
}

fn nullable_number(v: &Value, what: &str) -> Result<(), String> {
    if v.is_null() {
        Ok(())
    } else {
        number(v, what).map(|_| ())
    }
}

fn unit_vector(v: &Value, what: &str) -> Result<(), String> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or(format!("{what} is not a 3-vector"))?;
    let norm: f64 = arr
        .iter()
        .map(|x| number(x, what).map(|x| x * x))
        .sum::<Result<f64, String>>()?;
    if (norm.sqrt() - 1.0).abs() > 1e-12 {
        return Err(format!("{what} is not a unit vector"));
    }
    Ok(())
}

pub fn decomposition_schema(d: &Value) -> Result<(), String> {
    exact_keys(d, &["terms", "verified", "max_error"], "decomposition")?;
    d["verified"].as_bool().ok_or("verified is not a bool")?;
    number(&d["max_error"], "max_error")?;
    for t in d["terms"].as_array().ok_or("terms is not an array")? {
        exact_keys(t, &["weight", "n_a", "n_b"], "term")?;
        if number(&t["weight"], "weight")? < 0.0 {
            return Err("negative weight".into());
        }
        unit_vector(&t["n_a"], "n_a")?;
        unit_vector(&t["n_b"], "n_b")?;
    }
    Ok(())
}

/// Validates a verdict report against the documented JSON schema.
pub fn report_schema(v: &Value) -> Result<(), String> {
    exact_keys(v, &REPORT_KEYS, "report")?;
    v["input_id"].as_str().ok_or("input_id is not a string")?;
    match v["verdict"].as_str() {
        Some("Entangled") | Some("Separable") => (),
        _ => return Err(format!("bad verdict {}", v["verdict"])),
    }
    number(&v["min_ppt_eigenvalue"], "min_ppt_eigenvalue")?;
    let eig = v["ppt_eigenvalues"]
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or("ppt_eigenvalues is not a 4-array")?;
    for e in eig {
        number(e, "ppt eigenvalue")?;
    }
    if number(&v["negativity"], "negativity")? < 0.0 {
        return Err("negative negativity".into());
    }
    nullable_number(&v["concurrence"], "concurrence")?;
    nullable_number(&v["condition_margin"], "condition_margin")?;
    exact_keys(&v["x_fit"], &FIT_KEYS, "x_fit")?;
    for k in &FIT_KEYS[..6] {
        number(&v["x_fit"][k], k)?;
    }
    v["x_fit"]["accepted"]
        .as_bool()
        .ok_or("accepted is not a bool")?;
    match &v["decomposition"] {
        Value::Null => (),
        d => {
            decomposition_schema(d)?;
            if v["verdict"] != "Separable" {
                return Err("decomposition present on an entangled verdict".into());
            }
        }
    }
    match &v["decomposition_absent_reason"] {
        Value::Null | Value::String(_) => (),
        other => return Err(format!("bad decomposition_absent_reason {other}")),
    }
    for f in v["flags"].as_array().ok_or("flags is not an array")? {
        f.as_str().ok_or("flag is not a string")?;
    }
    Ok(())
}
