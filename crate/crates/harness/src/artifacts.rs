//! Artifact persistence: CSVs at full double precision, JSON documents
//! with sorted keys, and the run manifest.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use shocklab_core::periodic::PeriodicHistory;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::pipeline::{CheckVerdict, ScenarioRun};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub artifacts: Vec<String>,
    pub checks: Vec<CheckVerdict>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn versions() -> BTreeMap<String, String> {
    let mut v = BTreeMap::new();
    v.insert("shocklab-core".into(), env!("CARGO_PKG_VERSION").into());
    v.insert("shocklab-harness".into(), env!("CARGO_PKG_VERSION").into());
    v
}

/// JSON with recursively sorted keys (serde_json objects are BTree-backed).
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).context("serializing artifact")?;
    serde_json::to_string_pretty(&v).context("rendering artifact JSON")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn periodic_norms_csv(hist: &PeriodicHistory) -> String {
    let mut out = String::from("t,linf,l2,h1\n");
    for (t, n) in hist.times.iter().zip(&hist.norms) {
        let _ = writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", t, n.linf, n.l2, n.h1);
    }
    out
}

#[derive(Serialize, Deserialize)]
pub struct PeriodicSnapshotsJson {
    pub period: f64,
    pub m: usize,
    pub mean: f64,
    pub nodes: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn periodic_snapshots_json(hist: &PeriodicHistory) -> PeriodicSnapshotsJson {
    let m = hist.params.m;
    let nodes: Vec<f64> = (0..m).map(|j| j as f64 * hist.params.period / m as f64).collect();
    let values: Vec<Vec<f64>> = (0..hist.times.len())
        .map(|i| hist.field_at_snapshot(i).values)
        .collect();
    PeriodicSnapshotsJson {
        period: hist.params.period,
        m,
        mean: hist.mean,
        nodes,
        times: hist.times.clone(),
        values,
    }
}

pub fn supnorm_csv(run: &ScenarioRun) -> String {
    let mut out = String::from("t,sup_dist\n");
    for s in &run.run.snapshots {
        let _ = writeln!(out, "{:.17e},{:.17e}", s.t, s.sup_dist);
    }
    out
}

pub fn weighted_csv(run: &ScenarioRun) -> String {
    let mut out = String::from("t,w0,w1,w2,w3,w0_plain,w1_plain,w2_plain,w3_plain\n");
    for s in &run.run.snapshots {
        let _ = writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            s.t, s.w[0], s.w[1], s.w[2], s.w[3], s.w_plain[0], s.w_plain[1], s.w_plain[2], s.w_plain[3]
        );
    }
    out
}

pub fn fields_csv(run: &ScenarioRun, idx: usize) -> String {
    let dump = &run.run.fields[idx];
    let mut out = String::from("xi,u,U,v,psi\n");
    for j in 0..=run.initial.grid.n {
        let _ = writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            run.initial.grid.node(j),
            dump.u[j],
            dump.u_cap[j],
            dump.v[j],
            dump.psi[j]
        );
    }
    out
}

/// Write the whole artifact set and return the manifest.
pub fn write_artifacts(run: &ScenarioRun, out_dir: &Path, started_ms: u128) -> Result<RunManifest> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut artifacts = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        write(&out_dir.join(name), &text)?;
        artifacts.push(name.to_string());
        Ok(())
    };

    put("config.json", to_sorted_json(&run.config)?)?;
    put("report.json", to_sorted_json(&run.report)?)?;
    put("profile.csv", run.profile.to_csv())?;
    put("periodic_l.csv", periodic_norms_csv(&run.hist_l))?;
    put("periodic_r.csv", periodic_norms_csv(&run.hist_r))?;
    put("periodic_l.json", to_sorted_json(&periodic_snapshots_json(&run.hist_l))?)?;
    put("periodic_r.json", to_sorted_json(&periodic_snapshots_json(&run.hist_r))?)?;
    put("trajectory.csv", run.traj.to_csv(Some(run.formula.value)))?;
    put("supnorm.csv", supnorm_csv(run))?;
    put("weighted.csv", weighted_csv(run))?;
    for (i, dump) in run.run.fields.iter().enumerate() {
        put(&format!("fields_t{:.1}.csv", dump.t), fields_csv(run, i))?;
    }

    let manifest = RunManifest {
        config_hash: run.config_hash.clone(),
        versions: versions(),
        started_unix_ms: started_ms,
        finished_unix_ms: now_ms(),
        artifacts,
        checks: run.checks.clone(),
    };
    write(&out_dir.join("manifest.json"), &to_sorted_json(&manifest)?)?;
    Ok(manifest)
}

pub fn unix_ms_now() -> u128 {
    now_ms()
}

/// Reload a periodic snapshot list written by `write_artifacts`.
pub fn load_periodic_snapshots(path: &Path) -> Result<PeriodicSnapshotsJson> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).context("parsing periodic snapshots")
}
