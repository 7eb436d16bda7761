//! On-disk layout of a run: one directory per run, named by a content hash
//! of `(params, config, u₀)`, holding `metadata.json`, `records.csv` and
//! `final_field.csv`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;
use crate::evolution::{Outcome, SolverConfig, Trajectory};
use crate::grid::{fmt_f64, Field};
use crate::model::ModelParams;

pub const METADATA_FILE: &str = "metadata.json";
pub const RECORDS_FILE: &str = "records.csv";
pub const FINAL_FIELD_FILE: &str = "final_field.csv";

/// Hex characters of the digest used as the directory name.
const DIR_HASH_LEN: usize = 16;

/// SHA-256 of the sample bytes of `f` (little-endian IEEE 754).
pub fn field_digest(f: &Field) -> String {
    let mut h = Sha256::new();
    for v in f.values() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// SHA-256 over the canonical JSON of `params` and `config` and the digest of `u0`.
pub fn run_digest(params: &ModelParams, config: &SolverConfig, u0: &Field) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(params)?);
    h.update(b"\n");
    h.update(serde_json::to_vec(config)?);
    h.update(b"\n");
    h.update(field_digest(u0).as_bytes());
    Ok(hex::encode(h.finalize()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub params: ModelParams,
    pub config: SolverConfig,
    /// Label of the initial-condition generator, when one was used.
    pub initial_condition: Option<String>,
    pub u0_digest: String,
    pub outcome: Outcome,
    pub final_time: f64,
    pub steps: usize,
    pub rejected: usize,
    pub sup_linf: f64,
    pub records: usize,
}

const INTEGRAL_COLUMNS: [&str; 4] = ["int_l2_sq", "int_l2ps_pow", "int_linf", "int_mass_source"];

/// Diagnostics CSV with the running time integrals appended to each row.
pub fn write_records<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    writeln!(
        w,
        "{},{}",
        DiagnosticsRecord::csv_header(),
        INTEGRAL_COLUMNS.join(",")
    )?;
    for (r, i) in traj.records.iter().zip(&traj.integrals) {
        let ints = [i.l2_sq, i.l2ps_pow, i.linf, i.mass_source]
            .iter()
            .map(|&v| fmt_f64(v))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{},{}", r.csv_row(), ints)?;
    }
    Ok(())
}

/// Writes the run directory under `root` and returns its path. `u0` is the
/// initial field passed to the solver (before mollification).
pub fn write_run(
    root: &Path,
    traj: &Trajectory,
    u0: &Field,
    initial_condition: Option<&str>,
) -> Result<PathBuf> {
    let digest = run_digest(&traj.params, &traj.config, u0)?;
    let dir = root.join(&digest[..DIR_HASH_LEN]);
    fs::create_dir_all(&dir)?;
    let meta = RunMetadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        params: traj.params,
        config: traj.config,
        initial_condition: initial_condition.map(str::to_string),
        u0_digest: field_digest(u0),
        outcome: traj.outcome,
        final_time: traj.final_time,
        steps: traj.steps,
        rejected: traj.rejected,
        sup_linf: traj.sup_linf(),
        records: traj.records.len(),
    };
    let mut m = BufWriter::new(File::create(dir.join(METADATA_FILE))?);
    serde_json::to_writer_pretty(&mut m, &meta)?;
    writeln!(m)?;
    m.flush()?;
    let mut r = BufWriter::new(File::create(dir.join(RECORDS_FILE))?);
    write_records(traj, &mut r)?;
    r.flush()?;
    traj.final_field
        .write_csv(BufWriter::new(File::create(dir.join(FINAL_FIELD_FILE))?))?;
    Ok(dir)
}

pub fn read_metadata(dir: &Path) -> Result<RunMetadata> {
    let s = fs::read_to_string(dir.join(METADATA_FILE))?;
    Ok(serde_json::from_str(&s)?)
}

pub fn read_final_field(dir: &Path) -> Result<Field> {
    Field::read_csv(File::open(dir.join(FINAL_FIELD_FILE))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::run;
    use crate::grid::TorusGrid;

    fn small_run() -> (Trajectory, Field) {
        let grid = TorusGrid::new(32).unwrap();
        let u0 = Field::from_fn(grid, |x| 1.0 + 0.2 * x.cos()).unwrap();
        let p = ModelParams::default();
        let cfg = SolverConfig {
            n: 32,
            t_end: 0.05,
            record_every: 10,
            ..SolverConfig::default()
        };
        (run(&u0, &p, &cfg).unwrap(), u0)
    }

    #[test]
    fn digest_depends_on_every_input() {
        let grid = TorusGrid::new(16).unwrap();
        let u0 = Field::constant(grid, 1.0).unwrap();
        let p = ModelParams::default();
        let c = SolverConfig::default();
        let d = run_digest(&p, &c, &u0).unwrap();
        assert_eq!(d.len(), 64);
        assert_eq!(d, run_digest(&p, &c, &u0).unwrap());
        let p2 = ModelParams { chi: 2.0, ..p };
        assert_ne!(d, run_digest(&p2, &c, &u0).unwrap());
        let c2 = SolverConfig { t_end: 2.0, ..c };
        assert_ne!(d, run_digest(&p, &c2, &u0).unwrap());
        let u1 = Field::constant(grid, 1.0 + 1e-15).unwrap();
        assert_ne!(d, run_digest(&p, &c, &u1).unwrap());
    }

    #[test]
    fn run_directory_round_trips() {
        let (traj, u0) = small_run();
        let tmp = tempfile::tempdir().unwrap();
        let dir = write_run(tmp.path(), &traj, &u0, Some("cosine:0.2")).unwrap();
        let meta = read_metadata(&dir).unwrap();
        assert_eq!(meta.outcome, Outcome::Completed);
        assert_eq!(meta.params, traj.params);
        assert_eq!(meta.records, traj.records.len());
        assert_eq!(read_final_field(&dir).unwrap(), traj.final_field);
        let csv = fs::read_to_string(dir.join(RECORDS_FILE)).unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("t,mass,") && header.ends_with("int_mass_source"));
        let width = header.split(',').count();
        assert_eq!(lines.clone().count(), traj.records.len());
        assert!(lines.all(|l| l.split(',').count() == width));
        // same inputs, same directory and bytes
        let again = write_run(tmp.path(), &traj, &u0, Some("cosine:0.2")).unwrap();
        assert_eq!(again, dir);
    }
}
