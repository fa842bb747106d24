//! Run configuration: built-in defaults, overridden by an optional plain-text
//! `key=value` file (one pair per line, `#` starts a comment), overridden in
//! turn by command-line flags. No environment variables: a run is captured
//! fully by one file plus the command line.

use std::path::PathBuf;

use mems4_core::model::Dim;

use crate::Failure;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dim: Dim,
    pub bending: f64,
    pub tension: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub n: usize,
    pub horizon: f64,
    pub newton_tol: f64,
    pub eig_tol: f64,
    pub fold_tol: f64,
    /// Touchdown declaration threshold on the gap `1 + min u`.
    pub eps_td: f64,
    pub lambda_stop: f64,
    pub eps_min: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub dt0: f64,
    pub dt_max: f64,
    pub out: PathBuf,
    /// Jitters sweep execution order only; all numerics are deterministic.
    pub seed: u64,
    /// Initial data for `evolve`: `zero`, `phi1:<alpha>`, or `file:<path>`.
    pub data: String,
    /// Terminal-profile CSV (`r,u`) for the endpoint comparison report.
    pub branch: Option<PathBuf>,
    /// `lambda-star`: rerun at `2n` and report the fold drift.
    pub refine: bool,
    /// `evolve`: run the continuation first so the sharp bound and the `M`
    /// pairing apply.
    pub with_fold: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: Dim::One,
            bending: 1.0,
            tension: 0.0,
            lambda: 1.0,
            gamma: 0.0,
            n: 200,
            horizon: 10.0,
            newton_tol: 1e-8,
            eig_tol: 1e-9,
            fold_tol: 1e-13,
            eps_td: 1e-3,
            lambda_stop: 1e-3,
            eps_min: 1e-3,
            ds_min: 1e-6,
            ds_max: 0.1,
            dt0: 1e-3,
            dt_max: 0.05,
            out: PathBuf::from("out"),
            seed: 0,
            data: "zero".to_string(),
            branch: None,
            refine: false,
            with_fold: false,
        }
    }
}

fn bad(key: &str, value: &str) -> Failure {
    Failure::Config(format!("bad value for {key}: {value:?}"))
}

impl RunConfig {
    /// Applies one `key=value` pair; the sweep driver reuses this for its
    /// swept parameter, so every numeric key is sweepable.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), Failure> {
        let f = |v: &str| v.trim().parse::<f64>().map_err(|_| bad(key, v));
        match key {
            "d" => {
                let d: u32 = value.trim().parse().map_err(|_| bad(key, value))?;
                self.dim = Dim::new(d).map_err(|e| Failure::Config(e.to_string()))?;
            }
            "B" => self.bending = f(value)?,
            "T" => self.tension = f(value)?,
            "lambda" => self.lambda = f(value)?,
            "gamma" => self.gamma = f(value)?,
            "n" => self.n = value.trim().parse().map_err(|_| bad(key, value))?,
            "horizon" => self.horizon = f(value)?,
            "newton_tol" => self.newton_tol = f(value)?,
            "eig_tol" => self.eig_tol = f(value)?,
            "fold_tol" => self.fold_tol = f(value)?,
            "eps_td" => self.eps_td = f(value)?,
            "lambda_stop" => self.lambda_stop = f(value)?,
            "eps_min" => self.eps_min = f(value)?,
            "ds_min" => self.ds_min = f(value)?,
            "ds_max" => self.ds_max = f(value)?,
            "dt0" => self.dt0 = f(value)?,
            "dt_max" => self.dt_max = f(value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "seed" => self.seed = value.trim().parse().map_err(|_| bad(key, value))?,
            "data" => self.data = value.trim().to_string(),
            "branch" => self.branch = Some(PathBuf::from(value.trim())),
            "refine" => self.refine = value.trim().parse().map_err(|_| bad(key, value))?,
            "with_fold" => self.with_fold = value.trim().parse().map_err(|_| bad(key, value))?,
            _ => return Err(Failure::Config(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &std::path::Path) -> Result<(), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::Config(format!("{}:{}: expected key=value, got {raw:?}", path.display(), lineno + 1))
            })?;
            self.apply(key.trim(), value)
                .map_err(|f| Failure::Config(format!("{}:{}: {}", path.display(), lineno + 1, f.message())))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let ok = self.bending > 0.0
            && self.tension >= 0.0
            && self.lambda >= 0.0
            && self.gamma >= 0.0
            && self.n >= 8
            && self.horizon > 0.0
            && self.newton_tol > 0.0
            && self.eig_tol > 0.0
            && self.fold_tol > 0.0
            && self.eps_td > 0.0
            && self.lambda_stop > 0.0
            && self.eps_min > 0.0
            && self.eps_min < 1.0
            && self.ds_min > 0.0
            && self.ds_max > self.ds_min
            && self.dt0 > 0.0
            && self.dt_max >= self.dt0;
        if ok {
            Ok(())
        } else {
            Err(Failure::Config("configuration out of range (tolerances and steps must be positive, n >= 8)".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_then_flags_precedence() {
        let mut tmp = tempfile::NamedTempFile::new().unwrap();
        writeln!(tmp, "# a comment line").unwrap();
        writeln!(tmp, "d = 2   # trailing comment").unwrap();
        writeln!(tmp, "lambda=0.25").unwrap();
        writeln!(tmp).unwrap();
        writeln!(tmp, "n=64").unwrap();
        let mut cfg = RunConfig::default();
        cfg.load_file(tmp.path()).unwrap();
        assert_eq!(cfg.dim, Dim::Two);
        assert_eq!(cfg.lambda, 0.25);
        assert_eq!(cfg.n, 64);
        cfg.apply("lambda", "0.5").unwrap();
        assert_eq!(cfg.lambda, 0.5);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply("voltage", "3").is_err());
        assert!(cfg.apply("lambda", "three").is_err());
        assert!(cfg.apply("d", "4").is_err());
        cfg.apply("n", "4").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn malformed_lines_are_located() {
        let mut tmp = tempfile::NamedTempFile::new().unwrap();
        writeln!(tmp, "lambda 0.25").unwrap();
        let mut cfg = RunConfig::default();
        let err = cfg.load_file(tmp.path()).unwrap_err();
        assert!(err.message().contains(":1:"), "{}", err.message());
    }
}
