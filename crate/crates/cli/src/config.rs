//! Run configuration: line-oriented `key = value` files with published
//! defaults for every missing key.

use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use photocell_core::experiments::{
    DEFAULT_GAMMA_SWEEP, DEFAULT_GRID_N, DEFAULT_GRID_RANGE, DEFAULT_SWEEP_POINTS,
};
use photocell_core::ModelParams;

/// Default temperature-sweep range (K).
pub const DEFAULT_T_RANGE: (f64, f64) = (50.0, 300.0);
/// Default number of temperature-sweep points.
pub const DEFAULT_T_POINTS: usize = 26;

/// Fully resolved run configuration: model parameters plus sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    /// Model selector for single-system commands.
    pub coupled: bool,
    /// Output path; stdout summary only when absent.
    pub out: Option<PathBuf>,
    /// Points per axis of the rate-plane grid.
    pub grid_n: usize,
    /// Relaxation-rate axis of the grid (eV).
    pub gamma_x_range: (f64, f64),
    /// Transfer-rate axis of the grid (eV).
    pub gamma_c_range: (f64, f64),
    /// Temperature sweep range (K).
    pub t_range: (f64, f64),
    /// Temperature sweep points.
    pub t_points: usize,
    /// Extraction-rate sweep range (eV).
    pub gamma_range: (f64, f64),
    /// Extraction-rate sweep points.
    pub points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            coupled: true,
            out: None,
            grid_n: DEFAULT_GRID_N,
            gamma_x_range: DEFAULT_GRID_RANGE,
            gamma_c_range: DEFAULT_GRID_RANGE,
            t_range: DEFAULT_T_RANGE,
            t_points: DEFAULT_T_POINTS,
            gamma_range: DEFAULT_GAMMA_SWEEP,
            points: DEFAULT_SWEEP_POINTS,
        }
    }
}

/// Energies and rates accept an explicit `meV` (or redundant `eV`) suffix and
/// are normalised to eV.
fn parse_energy(raw: &str) -> Result<f64> {
    let raw = raw.trim();
    let (body, scale) = if let Some(b) = raw.strip_suffix("meV") {
        (b, 1e-3)
    } else if let Some(b) = raw.strip_suffix("eV") {
        (b, 1.0)
    } else {
        (raw, 1.0)
    };
    let v: f64 = body
        .trim()
        .parse()
        .map_err(|_| anyhow!("unparsable value `{raw}`"))?;
    Ok(v * scale)
}

fn parse_number(raw: &str) -> Result<f64> {
    raw.trim()
        .parse()
        .map_err(|_| anyhow!("unparsable value `{raw}`"))
}

fn parse_count(raw: &str) -> Result<usize> {
    raw.trim()
        .parse()
        .map_err(|_| anyhow!("unparsable value `{raw}`"))
}

fn parse_bool(raw: &str) -> Result<bool> {
    match raw.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(anyhow!("unparsable value `{other}` (expected true/false)")),
    }
}

impl RunConfig {
    /// Parse a configuration from `key = value` text. Unknown keys are
    /// rejected; missing keys keep the published defaults; the resolved
    /// parameter set is validated as a whole.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: HashMap<String, usize> = HashMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`, got `{line}`"))?;
            let key = key.trim();
            let value = value.trim();
            if let Some(first) = seen.insert(key.to_string(), line_no) {
                bail!("line {line_no}: key `{key}` already set on line {first}");
            }

            let at = |e: anyhow::Error| anyhow!("line {line_no}: {e}");
            let energy = |v: &str| parse_energy(v).map_err(at);
            match key {
                "E1" => cfg.params.e1 = energy(value)?,
                "E2" => cfg.params.e2 = energy(value)?,
                "E_alpha" => cfg.params.e_alpha = energy(value)?,
                "E_beta" => cfg.params.e_beta = energy(value)?,
                "J12" => cfg.params.j12 = energy(value)?,
                "gamma_1h" => cfg.params.gamma_1h = energy(value)?,
                "gamma_2h" => cfg.params.gamma_2h = energy(value)?,
                "gamma_1c" => cfg.params.gamma_1c = energy(value)?,
                "gamma_2c" => cfg.params.gamma_2c = energy(value)?,
                "gamma_x" => cfg.params.gamma_x = energy(value)?,
                "Gamma" => cfg.params.gamma_load = energy(value)?,
                "Gamma_c" => cfg.params.gamma_cycle = energy(value)?,
                "T_a" => cfg.params.temperature = parse_number(value).map_err(at)?,
                "n_h" => {
                    cfg.params.photon_occupation = if value == "thermal" {
                        None
                    } else {
                        Some(parse_number(value).map_err(at)?)
                    }
                }
                "coupled" => cfg.coupled = parse_bool(value).map_err(at)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "grid_n" => cfg.grid_n = parse_count(value).map_err(at)?,
                "gamma_x_min" => cfg.gamma_x_range.0 = energy(value)?,
                "gamma_x_max" => cfg.gamma_x_range.1 = energy(value)?,
                "gamma_c_min" => cfg.gamma_c_range.0 = energy(value)?,
                "gamma_c_max" => cfg.gamma_c_range.1 = energy(value)?,
                "t_min" => cfg.t_range.0 = parse_number(value).map_err(at)?,
                "t_max" => cfg.t_range.1 = parse_number(value).map_err(at)?,
                "t_points" => cfg.t_points = parse_count(value).map_err(at)?,
                "gamma_min" => cfg.gamma_range.0 = energy(value)?,
                "gamma_max" => cfg.gamma_range.1 = energy(value)?,
                "points" => cfg.points = parse_count(value).map_err(at)?,
                other => bail!("line {line_no}: unknown key `{other}`"),
            }
        }

        cfg.params.validate().map_err(|e| {
            // Point at the offending line when the violated invariant names a
            // key that was set in this file.
            let msg = e.to_string();
            for (key, line) in &seen {
                if msg.contains(key.as_str()) {
                    return anyhow!("line {line}: {msg}");
                }
            }
            anyhow!(msg)
        })?;
        Ok(cfg)
    }

    /// Load from a file; `None` means the published defaults.
    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    /// Canonical serialisation; `parse(serialize(c)) == c` for any valid `c`.
    pub fn serialize(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        let f = |v: f64| format!("{v:e}");
        kv("E1", f(p.e1));
        kv("E2", f(p.e2));
        kv("E_alpha", f(p.e_alpha));
        kv("E_beta", f(p.e_beta));
        kv("J12", f(p.j12));
        kv("gamma_1h", f(p.gamma_1h));
        kv("gamma_2h", f(p.gamma_2h));
        kv("gamma_1c", f(p.gamma_1c));
        kv("gamma_2c", f(p.gamma_2c));
        kv("gamma_x", f(p.gamma_x));
        kv("Gamma", f(p.gamma_load));
        kv("Gamma_c", f(p.gamma_cycle));
        kv("T_a", f(p.temperature));
        kv(
            "n_h",
            match p.photon_occupation {
                Some(n) => f(n),
                None => "thermal".into(),
            },
        );
        kv("coupled", self.coupled.to_string());
        if let Some(out) = &self.out {
            kv("out", out.display().to_string());
        }
        kv("grid_n", self.grid_n.to_string());
        kv("gamma_x_min", f(self.gamma_x_range.0));
        kv("gamma_x_max", f(self.gamma_x_range.1));
        kv("gamma_c_min", f(self.gamma_c_range.0));
        kv("gamma_c_max", f(self.gamma_c_range.1));
        kv("t_min", f(self.t_range.0));
        kv("t_max", f(self.t_range.1));
        kv("t_points", self.t_points.to_string());
        kv("gamma_min", f(self.gamma_range.0));
        kv("gamma_max", f(self.gamma_range.1));
        kv("points", self.points.to_string());
        s
    }
}
