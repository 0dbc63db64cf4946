//! Study configuration files (TOML) and their validation.

use std::path::PathBuf;

use lb_spectra_core::analysis::AlphaPolicy;
use lb_spectra_core::lift::{Perturbation, PointKind};
use lb_spectra_core::mesh::BaseOptions;
use lb_spectra_core::pipeline::Discretization;
use lb_spectra_core::spectral::{SolverMethod, SolverOptions};
use lb_spectra_core::{CellKind, LevelSet, SurfaceDescription};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error(transparent)]
    Core(#[from] lb_spectra_core::Error),
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub name: String,
    pub surface: SurfaceSection,
    pub mesh: MeshSection,
    pub lift: LiftSection,
    pub fe: FeSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    pub levels: LevelRange,
    pub targets: TargetSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub expect: ExpectSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    /// circle | sphere | torus | implicit
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub major: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minor: Option<f64>,
    /// Registry name for `implicit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_set: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip_halfwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    /// segment | triangle | quad
    pub cell: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle_segments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus_tube_cells: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftSection {
    pub k: usize,
    /// equispaced | gauss_lobatto
    #[serde(default = "default_points")]
    pub points: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSection>,
}

fn default_points() -> String {
    "gauss_lobatto".into()
}

/// Node displacement `h^{k+1}(center + width·(u − ½))` along `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    pub center: f64,
    pub width: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeSection {
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    /// Per-direction exactness of the assembly rule; `2r + 2k` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exactness: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRange {
    pub min: usize,
    pub max: usize,
}

impl LevelRange {
    pub fn range(self) -> std::ops::RangeInclusive<usize> {
        self.min..=self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    /// analytic | extrapolated
    pub source: String,
    /// Analytic: the first `count` distinct nonzero eigenvalues.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Analytic: restrict to these 1-based eigenvalue levels (`ℓ`, or `n`
    /// on the circle) instead of `1..=count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub select: Option<Vec<usize>>,
    /// Extrapolated: 0-based indices into the deflated spectrum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
}

/// High-order run that supplies Richardson-extrapolated targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub k: usize,
    pub r: usize,
    #[serde(default = "default_points")]
    pub points: String,
    pub levels: LevelRange,
    /// Convergence rate of the reference sequence; `min(2r, 2k)` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// The reference is refused when its estimate exceeds this fraction of
    /// the smallest study error.
    #[serde(default = "default_reference_fraction")]
    pub max_fraction: f64,
}

fn default_reference_fraction() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// auto | dense | lanczos
    #[serde(default = "default_method")]
    pub method: String,
    /// Pairs to compute; the largest cluster index plus six when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_eigs: Option<usize>,
    #[serde(default = "default_dense_limit")]
    pub dense_limit: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_solver_seed")]
    pub seed: u64,
}

fn default_method() -> String {
    "auto".into()
}
fn default_dense_limit() -> usize {
    SolverOptions::default().dense_limit
}
fn default_tol() -> f64 {
    SolverOptions::default().tol_eig
}
fn default_solver_seed() -> u64 {
    SolverOptions::default().seed
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            num_eigs: None,
            dense_limit: default_dense_limit(),
            tol: default_tol(),
            seed: default_solver_seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Lifted L2 and energy errors of eigenfunctions (analytic targets only).
    #[serde(default = "yes")]
    pub eigenfunctions: bool,
    /// mean_shift | zero
    #[serde(default = "default_alpha")]
    pub alpha: String,
    /// `|a − Ã|(V,V)`, `|m − M̃|(V,V)` for the first cluster eigenvector.
    #[serde(default = "yes")]
    pub consistency_probe: bool,
}

fn yes() -> bool {
    true
}
fn default_alpha() -> String {
    "mean_shift".into()
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self { eigenfunctions: true, alpha: default_alpha(), consistency_probe: true }
    }
}

/// Expected slopes, checked by least squares over the last `fit_levels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalue_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_rate: Option<f64>,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_fit_levels")]
    pub fit_levels: usize,
    /// Bound on max/min of `|λ − Λ|/(λh²)` across targets at the finest level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_spread: Option<f64>,
}

fn default_window() -> f64 {
    0.25
}
fn default_fit_levels() -> usize {
    3
}

impl Default for ExpectSection {
    fn default() -> Self {
        Self {
            eigenvalue_rate: None,
            l2_rate: None,
            energy_rate: None,
            window: default_window(),
            fit_levels: default_fit_levels(),
            constant_spread: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Fill the wall-clock column; off by default so CSV output is
    /// reproducible byte for byte.
    #[serde(default)]
    pub timings: bool,
}

/// Where targets come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// 1-based eigenvalue levels of the closed-form spectrum.
    Analytic(Vec<usize>),
    Extrapolated { indices: Vec<usize>, reference: ReferencePlan },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePlan {
    pub disc: Discretization,
    pub levels: LevelRange,
    pub rate: f64,
    pub max_fraction: f64,
}

/// A validated configuration, mapped onto core types.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub config: StudyConfig,
    pub disc: Discretization,
    pub levels: LevelRange,
    pub targets: TargetSpec,
    pub solver: SolverOptions,
    pub alpha: AlphaPolicy,
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn surface(&self) -> Result<SurfaceDescription, ConfigError> {
        let s = &self.surface;
        let need = |v: Option<f64>, key: &'static str| v.ok_or_else(|| invalid(key, "required for this surface"));
        let mut desc = match s.kind.as_str() {
            "circle" => SurfaceDescription::circle(s.radius.unwrap_or(1.0)),
            "sphere" => SurfaceDescription::sphere(s.radius.unwrap_or(1.0)),
            "torus" => SurfaceDescription::torus(need(s.major, "surface.major")?, need(s.minor, "surface.minor")?),
            "implicit" => {
                let name = s.level_set.as_deref().ok_or_else(|| invalid("surface.level_set", "required"))?;
                let ls = LevelSet::from_name(name).ok_or_else(|| {
                    let known: Vec<&str> = LevelSet::ALL.iter().map(|l| l.name()).collect();
                    invalid("surface.level_set", format!("unknown `{name}`; known: {}", known.join(", ")))
                })?;
                SurfaceDescription::implicit(ls)
            }
            other => return Err(invalid("surface.kind", format!("unknown surface `{other}`"))),
        };
        if let Some(w) = s.strip_halfwidth {
            desc = desc.with_strip_halfwidth(w);
        }
        desc.validate().map_err(|e| invalid("surface", e.to_string()))?;
        Ok(desc)
    }

    fn discretization(
        &self,
        surface: SurfaceDescription,
        k: usize,
        r: usize,
        points: &str,
    ) -> Result<Discretization, ConfigError> {
        let cell = CellKind::from_name(&self.mesh.cell)
            .ok_or_else(|| invalid("mesh.cell", format!("unknown cell kind `{}`", self.mesh.cell)))?;
        if k == 0 {
            return Err(invalid("lift.k", "must be at least 1"));
        }
        if r == 0 {
            return Err(invalid("fe.r", "must be at least 1"));
        }
        let mut disc = Discretization::new(surface, cell, k, r);
        disc.point_kind =
            PointKind::from_name(points).ok_or_else(|| invalid("lift.points", format!("unknown point set `{points}`")))?;
        let defaults = BaseOptions::default();
        disc.base = BaseOptions {
            circle_segments: self.mesh.circle_segments.unwrap_or(defaults.circle_segments),
            torus_tube_cells: self.mesh.torus_tube_cells.unwrap_or(defaults.torus_tube_cells),
        };
        disc.rule_exactness = self.quadrature.exactness;
        // surface/cell/point-set combinations fail here, before any solve
        lb_spectra_core::lift::InterpolationPointSet::new(cell, disc.point_kind, k)?;
        Ok(disc)
    }

    pub fn validate(&self) -> Result<Study, ConfigError> {
        let surface = self.surface()?;
        let mut disc = self.discretization(surface, self.lift.k, self.fe.r, &self.lift.points)?;
        if let Some(p) = self.lift.perturbation {
            if !(p.width >= 0.0) || !p.center.is_finite() {
                return Err(invalid("lift.perturbation", "center must be finite and width non-negative"));
            }
            disc.perturbation = Some(Perturbation { center: p.center, width: p.width, seed: p.seed });
        }
        if self.levels.min > self.levels.max {
            return Err(invalid("levels", "max must not be below min"));
        }
        if self.levels.max > 9 {
            return Err(invalid("levels.max", "above 9 the meshes do not fit in memory"));
        }

        let targets = match self.targets.source.as_str() {
            "analytic" => {
                let levels = match (&self.targets.select, self.targets.count) {
                    (Some(sel), _) => sel.clone(),
                    (None, Some(n)) => (1..=n).collect(),
                    (None, None) => return Err(invalid("targets.count", "analytic targets need `count` or `select`")),
                };
                if levels.is_empty() || levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("targets.select", "levels must be positive and strictly increasing"));
                }
                lb_spectra_core::exact::exact_spectrum(&surface, 1)
                    .map_err(|_| invalid("targets.source", "no closed-form spectrum; use `extrapolated`"))?;
                TargetSpec::Analytic(levels)
            }
            "extrapolated" => {
                let indices = self
                    .targets
                    .indices
                    .clone()
                    .ok_or_else(|| invalid("targets.indices", "extrapolated targets need indices"))?;
                if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("targets.indices", "indices must be strictly increasing"));
                }
                let rs = self.reference.as_ref().ok_or_else(|| invalid("reference", "required for extrapolated targets"))?;
                let rdisc = self.discretization(surface, rs.k, rs.r, &rs.points)?;
                if rs.levels.max < rs.levels.min + 2 {
                    return Err(invalid("reference.levels", "Richardson extrapolation needs at least three levels"));
                }
                let rate = rs.rate.unwrap_or(2.0 * rs.k.min(rs.r) as f64);
                TargetSpec::Extrapolated {
                    indices,
                    reference: ReferencePlan { disc: rdisc, levels: rs.levels, rate, max_fraction: rs.max_fraction },
                }
            }
            other => return Err(invalid("targets.source", format!("unknown source `{other}`"))),
        };

        let method = SolverMethod::from_name(&self.solver.method)
            .ok_or_else(|| invalid("solver.method", format!("unknown method `{}`", self.solver.method)))?;
        if !(self.solver.tol > 0.0) {
            return Err(invalid("solver.tol", "must be positive"));
        }
        let solver = SolverOptions {
            method,
            tol_eig: self.solver.tol,
            dense_limit: self.solver.dense_limit,
            seed: self.solver.seed,
            ..SolverOptions::default()
        };
        let alpha = match self.analysis.alpha.as_str() {
            "mean_shift" => AlphaPolicy::MeanShift,
            "zero" => AlphaPolicy::Zero,
            other => return Err(invalid("analysis.alpha", format!("unknown policy `{other}`"))),
        };
        if !(self.expect.window > 0.0) {
            return Err(invalid("expect.window", "must be positive"));
        }
        Ok(Study { config: self.clone(), disc, levels: self.levels, targets, solver, alpha })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = r#"
name = "s"
surface = { kind = "sphere" }
mesh = { cell = "quad" }
lift = { k = 2 }
fe = { r = 1 }
levels = { min = 1, max = 3 }
targets = { source = "analytic", count = 1 }
"#;

    #[test]
    fn minimal_config_validates() {
        let c = StudyConfig::from_toml(SPHERE).unwrap();
        let s = c.validate().unwrap();
        assert_eq!(s.targets, TargetSpec::Analytic(vec![1]));
        assert_eq!(s.disc.point_kind, PointKind::GaussLobatto);
        assert_eq!(StudyConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let bad = SPHERE.replace("max = 3", "max = 0");
        assert!(matches!(StudyConfig::from_toml(&bad).unwrap().validate(), Err(ConfigError::Invalid { .. })));
        let bad = SPHERE.replace("\"quad\"", "\"hexagon\"");
        assert!(StudyConfig::from_toml(&bad).unwrap().validate().is_err());
        let bad = SPHERE.replace("\"sphere\"", "\"torus\"");
        assert!(StudyConfig::from_toml(&bad).unwrap().validate().is_err());
        assert!(StudyConfig::from_toml("name = 1").is_err());
        let unknown = format!("{SPHERE}\nbogus = 3\n");
        assert!(StudyConfig::from_toml(&unknown).is_err());
    }

    #[test]
    fn triangle_gauss_lobatto_is_rejected_before_solving() {
        let bad = SPHERE.replace("\"quad\"", "\"triangle\"");
        assert!(StudyConfig::from_toml(&bad).unwrap().validate().is_err());
    }
}
