use std::path::{Path, PathBuf};

use crepant::cohomology::{LambdaPair, Space};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub gkz: f64,
    pub pf: f64,
    /// `None`: 1e−6 for n ≤ 3, 1e−5 above
    pub prop_ac: Option<f64>,
    pub junction: f64,
    pub labeling: f64,
    pub pairing: f64,
    pub quantum: f64,
    pub stability: f64,
    pub corollary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gkz: 1e-9,
            pf: 1e-9,
            prop_ac: None,
            junction: 1e-12,
            labeling: 1e-12,
            pairing: 1e-10,
            quantum: 1e-8,
            stability: 1e-9,
            corollary: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn prop_ac_for(&self, n: usize) -> f64 {
        self.prop_ac.unwrap_or(if n <= 3 { 1e-6 } else { 1e-5 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: usize,
    /// series degree `D`; each command has its own default
    pub degree: Option<usize>,
    /// `z`-window below the leading row; default depends on the command
    pub z_order: Option<usize>,
    pub steps: usize,
    pub precision: String,
    pub side: Space,
    /// `x₀` (or `y₀`) of the I-function prefactor
    pub x0: f64,
    /// explicit `(λ₁, λ₂)` samples; when empty they are drawn from `seed`
    pub lambda: Vec<[f64; 2]>,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            degree: None,
            z_order: None,
            steps: 2000,
            precision: "binary64".into(),
            side: Space::Orbifold,
            x0: 0.0,
            lambda: Vec::new(),
            seed: 0,
            samples: 3,
            tolerances: Tolerances::default(),
            output_dir: None,
            workers: None,
        }
    }
}

impl RunConfig {
    /// Reads TOML or JSON, chosen by extension.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let bad = |e: String| CliError::Usage(format!("{}: {e}", path.display()));
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| bad(e.to_string())),
            Some("toml") | None => toml::from_str(&text).map_err(|e| bad(e.to_string())),
            Some(other) => Err(CliError::Usage(format!("unknown config format .{other}"))),
        }
    }

    pub fn validate(&self, allow_degree_zero: bool) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.n < 2 {
            return usage("n must be at least 2");
        }
        if let Some(d) = self.degree {
            if d == 0 && !allow_degree_zero {
                return usage("degree must be at least 1");
            }
        }
        if self.steps < 100 {
            return usage("steps must be at least 100");
        }
        if self.precision != "binary64" {
            return Err(CliError::Usage(format!(
                "precision {:?} is not available; only \"binary64\" is supported",
                self.precision
            )));
        }
        if self.samples == 0 {
            return usage("samples must be positive");
        }
        if self.workers == Some(0) {
            return usage("workers must be positive");
        }
        for l in &self.lambda {
            let pair = LambdaPair::real(l[0], l[1]);
            pair.check_nondegenerate(self.n)
                .map_err(|e| CliError::Usage(format!("lambda {l:?}: {e}")))?;
        }
        Ok(())
    }

    pub fn degree_or(&self, default: usize) -> usize {
        self.degree.unwrap_or(default)
    }

    /// `count` samples: the explicit list first, then seeded draws.
    pub fn lambdas(&self, count: usize) -> Vec<LambdaPair> {
        let mut out: Vec<LambdaPair> = self
            .lambda
            .iter()
            .take(count)
            .map(|l| LambdaPair::real(l[0], l[1]))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        while out.len() < count {
            out.push(LambdaPair::sample(&mut rng, self.n.max(2)));
        }
        out
    }
}
