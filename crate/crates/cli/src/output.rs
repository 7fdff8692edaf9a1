//! Output routing, error reporting and the trajectory CSV writer.

use std::fmt::Display;
use std::io::Write;

use serde_json::{json, Value};

use resonance_core::evolve::Trajectory;
use resonance_core::spectrum::ModelConfig;

/// A failed run: validation problems exit with 1, failed verifications with 2.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Verification(String),
    Io(String),
}

impl Failure {
    pub fn invalid(e: impl Display) -> Self {
        Failure::Invalid(e.to_string())
    }

    pub fn verification(e: impl Display) -> Self {
        Failure::Verification(e.to_string())
    }

    pub fn io(e: impl Display) -> Self {
        Failure::Io(e.to_string())
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 2,
            Failure::Invalid(_) | Failure::Io(_) => 1,
        }
    }

    fn parts(&self) -> (&'static str, &str) {
        match self {
            Failure::Invalid(m) => ("validation", m),
            Failure::Verification(m) => ("verification", m),
            Failure::Io(m) => ("io", m),
        }
    }

    pub fn report(&self, json: bool) {
        let (kind, message) = self.parts();
        if json {
            eprintln!("{}", json!({"schema_version": 1, "error": kind, "message": message}));
        } else {
            eprintln!("error ({kind}): {message}");
        }
    }
}

/// Where and how the main result is written.
pub struct Output {
    json: bool,
    path: Option<String>,
}

impl Output {
    pub fn new(json: bool, path: Option<String>) -> Self {
        Output { json, path }
    }

    /// Writes `value` as JSON under `--json`, otherwise `text`.
    pub fn emit(&self, value: &Value, text: &str) -> Result<(), Failure> {
        if self.json {
            self.emit_json(value)
        } else {
            self.raw(text.as_bytes())
        }
    }

    pub fn emit_json(&self, value: &Value) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(value).map_err(Failure::io)?;
        s.push('\n');
        self.raw(s.as_bytes())
    }

    pub fn raw(&self, bytes: &[u8]) -> Result<(), Failure> {
        match &self.path {
            Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::io(format!("{p}: {e}"))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).and_then(|_| out.flush()).map_err(Failure::io)
            }
        }
    }
}

/// Trajectory CSV: a `#` schema line, the header, then one row per sample
/// with `t, H, h_omega, dist_linear, q_0..q_N, p_0..p_N`.
pub fn write_trajectory(path: &str, cfg: &ModelConfig, traj: &Trajectory) -> Result<(), Failure> {
    let file = std::fs::File::create(path).map_err(|e| Failure::io(format!("{path}: {e}")))?;
    let mut file = std::io::BufWriter::new(file);
    writeln!(file, "# resonance-forge trajectory schema_version=1 model={} delta={}", cfg.model(), cfg.delta())
        .map_err(Failure::io)?;
    let mut w = csv::Writer::from_writer(file);
    let modes = traj.states.first().map_or(0, |s| s.len());
    let mut header = vec!["t".to_string(), "H".into(), "h_omega".into(), "dist_linear".into()];
    header.extend((0..modes).map(|m| format!("q_{m}")));
    header.extend((0..modes).map(|m| format!("p_{m}")));
    w.write_record(&header).map_err(Failure::io)?;
    for i in 0..traj.len() {
        let s = &traj.states[i];
        let mut row = vec![traj.times[i], traj.energy[i], traj.h_omega[i], traj.dist_linear[i]];
        row.extend(s.q.as_slice());
        row.extend(s.p.as_slice());
        w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(Failure::io)?;
    }
    w.flush().map_err(Failure::io)
}
