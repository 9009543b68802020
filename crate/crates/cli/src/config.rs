//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ising_ge::analysis::{log_grid, EnsembleConfig, FitWindow, TimePolicy};
use ising_ge::propagator::{Backend, EvolveOptions, DEFAULT_CHEBYSHEV_TOL, DEFAULT_DENSE_CAP};
use ising_ge::{build_lattice, spectral_scales, Error, LatticeSpec, ModelParams, Result, StateDesignator};

/// Largest lattice the runner accepts.
pub const MAX_RUN_QUBITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub rows: usize,
    pub cols: usize,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self { rows: 2, cols: 5 }
    }
}

/// Couplings spaced logarithmically from `lo·J_c` to `hi·J_E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JGrid {
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for JGrid {
    fn default() -> Self {
        Self { points: 12, lo: 1.0 / 3.0, hi: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "Delta", default = "one")]
    pub splitting: f64,
    pub delta: OneOrMany,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<OneOrMany>,
    #[serde(rename = "J_grid", default, skip_serializing_if = "Option::is_none")]
    pub coupling_grid: Option<JGrid>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub designator: String,
}

impl Default for StateSection {
    fn default() -> Self {
        Self { designator: "central".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Auto,
    Dense,
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Auto(AutoTag),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub backend: BackendChoice,
    pub tol: f64,
    pub dense_cap: usize,
    /// `"auto"` (`widths / Γ`) or a fixed horizon.
    pub t_max: Horizon,
    pub widths: f64,
    pub samples: usize,
    /// Horizon doublings allowed while looking for a plateau.
    pub extensions: usize,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            backend: BackendChoice::Auto,
            tol: DEFAULT_CHEBYSHEV_TOL,
            dense_cap: DEFAULT_DENSE_CAP,
            t_max: Horizon::Auto(AutoTag::Auto),
            widths: 10.0,
            samples: 400,
            extensions: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub realizations: usize,
    pub seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self { realizations: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    #[serde(rename = "K")]
    pub threshold: f64,
    pub fit_window: FitWindow,
    #[serde(rename = "R")]
    pub rescaling: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self { threshold: 0.9, fit_window: FitWindow::default(), rescaling: 7.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Summary,
    /// Per-realization series.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Csv, Format::Summary] }
    }
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub lattice: LatticeSection,
    pub model: ModelSection,
    #[serde(default)]
    pub state: StateSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// One `(δ, J)` point of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub delta: f64,
    pub coupling: f64,
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text)
            .map_err(|e| Error::InvalidParams(format!("{}: {e}", origin.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        build_lattice(self.lattice.rows, self.lattice.cols)
    }

    pub fn designator(&self) -> Result<StateDesignator> {
        self.state.designator.parse()
    }

    /// Validates everything that can be checked without running.
    pub fn check(&self) -> Result<()> {
        let lattice = self.lattice()?;
        if lattice.n() > MAX_RUN_QUBITS {
            return Err(Error::InvalidParams(format!(
                "n = {} exceeds the runner limit of {MAX_RUN_QUBITS} qubits",
                lattice.n()
            )));
        }
        self.designator()?.build(lattice.n())?;
        if self.model.coupling.is_some() == self.model.coupling_grid.is_some() {
            return Err(Error::InvalidParams("model needs exactly one of `J` and `J_grid`".into()));
        }
        let e = &self.evolution;
        if e.samples < 2 || !(e.widths > 0.0) {
            return Err(Error::InvalidParams("evolution needs samples >= 2 and widths > 0".into()));
        }
        if let Horizon::Fixed(t) = e.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParams(format!("t_max = {t} must be positive")));
            }
        }
        self.analysis.fit_window.validate()?;
        if !(self.analysis.rescaling > 0.0) {
            return Err(Error::InvalidParams("R must be positive".into()));
        }
        for p in self.points()? {
            ModelParams::new(self.model.splitting, p.delta, p.coupling)?;
        }
        self.ensemble_config(self.points()?[0])?.validate()
    }

    /// All `(δ, J)` points in configuration order: δ outer, J inner.
    pub fn points(&self) -> Result<Vec<Point>> {
        let n = self.lattice.rows * self.lattice.cols;
        let mut out = Vec::new();
        for delta in self.model.delta.values() {
            let couplings = match (&self.model.coupling, &self.model.coupling_grid) {
                (Some(j), _) => j.values(),
                (None, Some(grid)) => {
                    let params = ModelParams::new(self.model.splitting, delta, 0.0)?;
                    let s = spectral_scales(&params, n, n / 2)?;
                    let (Some(jc), Some(je)) = (s.j_critical, s.j_ergodic) else {
                        return Err(Error::InvalidParams("`J_grid` needs delta > 0".into()));
                    };
                    log_grid(grid.lo * jc, grid.hi * je, grid.points)?
                }
                (None, None) => Vec::new(),
            };
            out.extend(couplings.into_iter().map(|coupling| Point { delta, coupling }));
        }
        if out.is_empty() {
            return Err(Error::InvalidParams("no (delta, J) points configured".into()));
        }
        Ok(out)
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        let e = &self.evolution;
        EvolveOptions {
            backend: match e.backend {
                BackendChoice::Auto => None,
                BackendChoice::Dense => Some(Backend::Dense),
                BackendChoice::Chebyshev => Some(Backend::Chebyshev),
            },
            tol: e.tol,
            dense_cap: e.dense_cap,
        }
    }

    pub fn time_policy(&self) -> TimePolicy {
        let e = &self.evolution;
        match e.t_max {
            Horizon::Auto(_) => TimePolicy::Auto { widths: e.widths, samples: e.samples },
            Horizon::Fixed(t_max) => TimePolicy::Fixed { t_max, samples: e.samples },
        }
    }

    pub fn ensemble_config(&self, p: Point) -> Result<EnsembleConfig> {
        let params = ModelParams::new(self.model.splitting, p.delta, p.coupling)?;
        let mut cfg = EnsembleConfig::new(self.lattice()?, params, self.designator()?);
        cfg.time = self.time_policy();
        cfg.realizations = self.ensemble.realizations;
        cfg.seed = self.ensemble.seed;
        cfg.threshold = self.analysis.threshold;
        cfg.evolve = self.evolve_options();
        Ok(cfg)
    }
}
