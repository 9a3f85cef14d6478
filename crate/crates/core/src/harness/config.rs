use serde::{Deserialize, Serialize};

use crate::model::{compute_branch_structure, ReactionFunction};
use crate::solver::{Grid1D, InitProfile, SolverConfig, VProfile};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    BuiltinCubic,
    Coefficients,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Ascending powers `c₀, c₁, …`.
    pub coeffs: Vec<f64>,
    pub u_max: f64,
    /// Fold guard relative to `f₊ − f₋`.
    pub fold_guard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSection {
    pub epsilon: f64,
    /// `None` selects `min(0.25 h², 10 ε)`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub n_cells: usize,
    pub length: f64,
    pub theta: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub snapshot_stride: usize,
    /// `None` selects `dt / 1024`.
    pub dt_min: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Constant,
    Cosine,
    PlateauBlend,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VKind {
    Equilibrium,
    Constant,
    Cosine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    pub kind: InitKind,
    pub params: Vec<f64>,
    pub v_kind: VKind,
    pub v_params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticsConfig {
    pub xi_bins: usize,
    /// `None` selects `M`.
    pub xi_max: Option<f64>,
    pub cells_t: usize,
    pub cells_x: usize,
    pub guard_band: f64,
    pub pairs_per_cell: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub label: String,
    pub seed: u64,
    pub out: String,
    /// Number of evenly spaced `fields_*.csv` dumps.
    pub field_dumps: usize,
    /// Times of the `plot_*.dat` shots.
    pub plot_times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub eps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub solver: SolverSection,
    pub init: InitConfig,
    pub kinetics: KineticsConfig,
    pub run: RunSection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig {
                kind: ModelKind::BuiltinCubic,
                coeffs: vec![],
                u_max: 4.0,
                fold_guard: 1e-3,
            },
            solver: SolverSection {
                epsilon: 1e-3,
                dt: None,
                t_end: 1.0,
                n_cells: 256,
                length: 1.0,
                theta: 1.0,
                newton_tol: 1e-12,
                newton_max_iter: 50,
                snapshot_stride: 64,
                dt_min: None,
            },
            init: InitConfig {
                kind: InitKind::PlateauBlend,
                params: vec![0.5, 2.5, 0.25, 0.75, 0.05],
                v_kind: VKind::Equilibrium,
                v_params: vec![0.0],
            },
            kinetics: KineticsConfig {
                xi_bins: 128,
                xi_max: None,
                cells_t: 32,
                cells_x: 16,
                guard_band: 0.05,
                pairs_per_cell: 64,
            },
            run: RunSection {
                label: "run".into(),
                seed: 1,
                out: "out".into(),
                field_dumps: 9,
                plot_times: vec![0.5, 1.0],
            },
            sweep: SweepSection {
                eps: vec![1e-2, 3e-3, 1e-3, 3e-4],
            },
        }
    }
}

fn cosine_modes(params: &[f64]) -> Result<(f64, Vec<(u32, f64)>)> {
    let (&base, rest) = params
        .split_first()
        .ok_or_else(|| Error::Invalid("cosine profile needs a base value".into()))?;
    if rest.len() % 2 != 0 {
        return Err(Error::Invalid("cosine modes come in (k, amplitude) pairs".into()));
    }
    let modes = rest
        .chunks(2)
        .map(|c| {
            if c[0] < 0.0 || c[0].fract() != 0.0 {
                Err(Error::Invalid(format!("cosine wavenumber must be a nonnegative integer, got {}", c[0])))
            } else {
                Ok((c[0] as u32, c[1]))
            }
        })
        .collect::<Result<_>>()?;
    Ok((base, modes))
}

impl RunConfig {
    pub fn reaction(&self) -> Result<ReactionFunction> {
        match self.model.kind {
            ModelKind::BuiltinCubic => Ok(ReactionFunction::reference_cubic()),
            ModelKind::Coefficients => ReactionFunction::polynomial(self.model.coeffs.clone(), self.model.u_max),
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.solver.n_cells, self.solver.length)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let grid = self.grid()?;
        let mut cfg = SolverConfig::new(&grid, self.solver.epsilon, self.solver.t_end);
        if let Some(dt) = self.solver.dt {
            cfg.dt = dt;
        }
        cfg.dt_min = self.solver.dt_min.unwrap_or(cfg.dt / 1024.0);
        cfg.theta = self.solver.theta;
        cfg.newton_tol = self.solver.newton_tol;
        cfg.newton_max_iter = self.solver.newton_max_iter;
        cfg.snapshot_stride = self.solver.snapshot_stride;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn init_profiles(&self) -> Result<(InitProfile, VProfile)> {
        let p = &self.init.params;
        let need = |n: usize, what: &str| {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{what} takes {n} parameters, got {}", p.len())))
            }
        };
        let u = match self.init.kind {
            InitKind::Constant => {
                need(1, "constant")?;
                InitProfile::Constant { u: p[0] }
            }
            InitKind::Cosine => {
                let (base, modes) = cosine_modes(p)?;
                InitProfile::CosineSum { base, modes }
            }
            InitKind::PlateauBlend => {
                need(5, "plateau-blend")?;
                InitProfile::PlateauBlend {
                    low: p[0],
                    high: p[1],
                    x0: p[2] * self.solver.length,
                    x1: p[3] * self.solver.length,
                    jitter: p[4],
                    seed: self.run.seed,
                }
            }
        };
        let q = &self.init.v_params;
        let v = match self.init.v_kind {
            VKind::Equilibrium => VProfile::Equilibrium {
                shift: q.first().copied().unwrap_or(0.0),
            },
            VKind::Constant => VProfile::Constant {
                v: *q.first().ok_or_else(|| Error::Invalid("constant v needs a value".into()))?,
            },
            VKind::Cosine => {
                let (base, modes) = cosine_modes(q)?;
                VProfile::CosineSum { base, modes }
            }
        };
        Ok((u, v))
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut c = self.clone();
        c.solver.epsilon = epsilon;
        c
    }
}

fn config_err(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.into(),
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(line, key, format!("cannot parse `{value}` as {}", std::any::type_name::<T>())))
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(vec![]);
    }
    value.split(',').map(|s| parse_num(line, key, s.trim())).collect()
}

fn parse_auto(line: usize, key: &str, value: &str) -> Result<Option<f64>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_num(line, key, value).map(Some)
    }
}

/// Parses flat `section.key = value` lines; `#` starts a comment. Missing keys
/// keep their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<(String, usize)> = vec![];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, content, "expected `section.key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
            return Err(config_err(line, key, format!("duplicate key, first set on line {first}")));
        }
        seen.push((key.to_string(), line));
        match key {
            "model.kind" => {
                cfg.model.kind = match value {
                    "builtin-cubic" => ModelKind::BuiltinCubic,
                    "coefficients" => ModelKind::Coefficients,
                    _ => return Err(config_err(line, key, format!("unknown model kind `{value}`"))),
                }
            }
            "model.coeffs" => cfg.model.coeffs = parse_list(line, key, value)?,
            "model.u_max" => cfg.model.u_max = parse_num(line, key, value)?,
            "model.fold_guard" => cfg.model.fold_guard = parse_num(line, key, value)?,
            "solver.epsilon" => cfg.solver.epsilon = parse_num(line, key, value)?,
            "solver.dt" => cfg.solver.dt = parse_auto(line, key, value)?,
            "solver.T" => cfg.solver.t_end = parse_num(line, key, value)?,
            "solver.n_cells" => cfg.solver.n_cells = parse_num(line, key, value)?,
            "solver.L" => cfg.solver.length = parse_num(line, key, value)?,
            "solver.theta" => cfg.solver.theta = parse_num(line, key, value)?,
            "solver.newton_tol" => cfg.solver.newton_tol = parse_num(line, key, value)?,
            "solver.newton_max_iter" => cfg.solver.newton_max_iter = parse_num(line, key, value)?,
            "solver.snapshot_stride" => cfg.solver.snapshot_stride = parse_num(line, key, value)?,
            "solver.dt_min" => cfg.solver.dt_min = parse_auto(line, key, value)?,
            "init.kind" => {
                cfg.init.kind = match value {
                    "constant" => InitKind::Constant,
                    "cosine" => InitKind::Cosine,
                    "plateau-blend" => InitKind::PlateauBlend,
                    _ => return Err(config_err(line, key, format!("unknown init kind `{value}`"))),
                };
                if !seen.iter().any(|(k, _)| k == "init.params") {
                    cfg.init.params.clear();
                }
            }
            "init.params" => cfg.init.params = parse_list(line, key, value)?,
            "init.v_kind" => {
                cfg.init.v_kind = match value {
                    "equilibrium" => VKind::Equilibrium,
                    "constant" => VKind::Constant,
                    "cosine" => VKind::Cosine,
                    _ => return Err(config_err(line, key, format!("unknown v profile `{value}`"))),
                }
            }
            "init.v_params" => cfg.init.v_params = parse_list(line, key, value)?,
            "kinetics.xi_bins" => cfg.kinetics.xi_bins = parse_num(line, key, value)?,
            "kinetics.xi_max" => cfg.kinetics.xi_max = parse_auto(line, key, value)?,
            "kinetics.cells_t" => cfg.kinetics.cells_t = parse_num(line, key, value)?,
            "kinetics.cells_x" => cfg.kinetics.cells_x = parse_num(line, key, value)?,
            "kinetics.guard_band" => cfg.kinetics.guard_band = parse_num(line, key, value)?,
            "kinetics.pairs_per_cell" => cfg.kinetics.pairs_per_cell = parse_num(line, key, value)?,
            "run.label" => cfg.run.label = value.to_string(),
            "run.seed" => cfg.run.seed = parse_num(line, key, value)?,
            "run.out" => cfg.run.out = value.to_string(),
            "run.field_dumps" => cfg.run.field_dumps = parse_num(line, key, value)?,
            "run.plot_times" => cfg.run.plot_times = parse_list(line, key, value)?,
            "sweep.eps" => cfg.sweep.eps = parse_list(line, key, value)?,
            _ => return Err(config_err(line, key, "unknown key")),
        }
    }
    let line_of = |key: &str| seen.iter().find(|(k, _)| k == key).map_or(0, |(_, l)| *l);
    let check = |ok: bool, key: &str, msg: &str| if ok { Ok(()) } else { Err(config_err(line_of(key), key, msg)) };
    let s = &cfg.solver;
    check(s.epsilon > 0.0 && s.epsilon.is_finite(), "solver.epsilon", "must be positive")?;
    check(s.dt.is_none_or(|d| d > 0.0 && d.is_finite()), "solver.dt", "must be positive")?;
    check(s.t_end >= 0.0 && s.t_end.is_finite(), "solver.T", "must be nonnegative")?;
    check(s.n_cells >= Grid1D::MIN_CELLS, "solver.n_cells", "must be at least 8")?;
    check(s.length > 0.0 && s.length.is_finite(), "solver.L", "must be positive")?;
    check((0.5..=1.0).contains(&s.theta), "solver.theta", "must lie in [0.5, 1]")?;
    check(s.newton_tol > 0.0, "solver.newton_tol", "must be positive")?;
    check(s.newton_max_iter > 0, "solver.newton_max_iter", "must be positive")?;
    check(s.snapshot_stride > 0, "solver.snapshot_stride", "must be positive")?;
    check(s.dt_min.is_none_or(|d| d > 0.0), "solver.dt_min", "must be positive")?;
    let k = &cfg.kinetics;
    check(k.xi_bins >= 32, "kinetics.xi_bins", "must be at least 32")?;
    check(k.xi_max.is_none_or(|x| x > 0.0), "kinetics.xi_max", "must be positive")?;
    check(k.cells_t > 0, "kinetics.cells_t", "must be positive")?;
    check(k.cells_x > 0, "kinetics.cells_x", "must be positive")?;
    check(k.guard_band >= 0.0, "kinetics.guard_band", "must be nonnegative")?;
    check(k.pairs_per_cell > 0, "kinetics.pairs_per_cell", "must be positive")?;
    check(
        cfg.model.fold_guard > 0.0 && cfg.model.fold_guard < 0.5,
        "model.fold_guard",
        "must lie in (0, 0.5)",
    )?;
    check(cfg.model.u_max > 0.0, "model.u_max", "must be positive")?;
    check(cfg.sweep.eps.iter().all(|&e| e > 0.0 && e.is_finite()), "sweep.eps", "values must be positive")?;
    check(cfg.run.plot_times.iter().all(|&t| t >= 0.0), "run.plot_times", "times must be nonnegative")?;
    if cfg.model.kind == ModelKind::Coefficients {
        let key = if line_of("model.coeffs") > 0 { "model.coeffs" } else { "model.kind" };
        let rf = cfg.reaction().map_err(|e| config_err(line_of(key), key, e.to_string()))?;
        compute_branch_structure(&rf).map_err(|e| config_err(line_of(key), key, e.to_string()))?;
    }
    let init_key = if line_of("init.params") > 0 { "init.params" } else { "init.kind" };
    cfg.init_profiles()
        .map_err(|e| config_err(line_of(init_key), init_key, e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.solver.epsilon, 1e-3);
        assert_eq!(cfg.solver.n_cells, 256);
        assert_eq!(cfg.model.kind, ModelKind::BuiltinCubic);
    }

    #[test]
    fn comments_and_whitespace() {
        let cfg = parse_config("# header\n  solver.epsilon = 0.01   # inline\n\nrun.label=demo\n").unwrap();
        assert_eq!(cfg.solver.epsilon, 0.01);
        assert_eq!(cfg.run.label, "demo");
    }

    #[test]
    fn negative_epsilon_is_a_constraint_error() {
        let err = parse_config("run.seed = 3\nsolver.epsilon = -1").unwrap_err();
        match err {
            Error::Config { line, key, .. } => {
                assert_eq!(line, 2);
                assert_eq!(key, "solver.epsilon");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_and_type_mismatch_name_line_and_key() {
        assert!(matches!(
            parse_config("\nsolver.bogus = 1"),
            Err(Error::Config { line: 2, ref key, .. }) if key == "solver.bogus"
        ));
        assert!(matches!(
            parse_config("solver.n_cells = many"),
            Err(Error::Config { line: 1, ref key, .. }) if key == "solver.n_cells"
        ));
        assert!(matches!(parse_config("solver.T = 1\nsolver.T = 2"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(parse_config("just words"), Err(Error::Config { line: 1, .. })));
    }

    #[test]
    fn custom_cubic_after_admissibility_check() {
        let cfg = parse_config("model.kind = coefficients\nmodel.coeffs = 0, 6, -4.5, 1\nmodel.u_max = 4").unwrap();
        let rf = cfg.reaction().unwrap();
        assert_eq!(rf.value(3.0), 4.5);
        let err = parse_config("model.kind = coefficients\nmodel.coeffs = 0, 1, 0, 1");
        assert!(matches!(err, Err(Error::Config { line: 2, .. })));
    }

    #[test]
    fn init_parameters_are_checked() {
        assert!(parse_config("init.kind = constant\ninit.params = 3").is_ok());
        assert!(matches!(parse_config("init.kind = constant"), Err(Error::Config { .. })));
        assert!(matches!(
            parse_config("init.kind = cosine\ninit.params = 1.5, 1"),
            Err(Error::Config { line: 2, .. })
        ));
    }

    #[test]
    fn auto_values() {
        let cfg = parse_config("solver.dt = auto\nkinetics.xi_max = 5").unwrap();
        assert_eq!(cfg.solver.dt, None);
        assert_eq!(cfg.kinetics.xi_max, Some(5.0));
    }
}
