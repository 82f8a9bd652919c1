//! Run configuration: a line-oriented `key = value` file with `[section]`
//! headers, overlaid by command-line flags.
//!
//! ```text
//! [problem]
//! preset = example1-moving
//! eta = 1e-6
//!
//! [discretization]
//! layers = 15, 30, 60
//! adjoint_space = U_h
//!
//! [run]
//! out = results
//! ```

use std::path::{Path, PathBuf};

use stcontrol::mesh::DEFAULT_RHO_MAX;
use stcontrol::metrics::{GradientKind, MetricOptions};
use stcontrol::problem::{DesiredState, Example1Variant, ExactSolution, ProblemSpec, Velocity};
use stcontrol::solver::{AdjointSpace, SolverOptions};
use stcontrol::study::{ErrorMode, StudyOptions};
use stcontrol::fem::AssemblyOptions;
use stcontrol::{Error, Result};

pub const DEFAULT_REFERENCE_LAYERS: usize = 240;

/// One `key = value` entry with its source line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parsed but uninterpreted config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: Vec<Entry>,
}

const SECTIONS: [&str; 3] = ["problem", "discretization", "run"];

const KEYS: [(&str, &[&str]); 3] = [
    (
        "problem",
        &[
            "preset", "name", "x_min", "x_max", "final_time", "kappa1", "kappa2", "eta", "offsets",
            "velocity", "desired_state",
        ],
    ),
    (
        "discretization",
        &["layers", "adjoint_space", "quad_subdiv", "rho_max", "gradient"],
    ),
    ("run", &["out", "serial", "mode", "reference_layers", "seed", "plot"]),
];

fn syntax(line: usize, section: &str, message: impl Into<String>) -> Error {
    Error::Config(format!("config line {line} [{section}]: {}", message.into()))
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut section = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(line, &section, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(syntax(line, name, format!("unknown section `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax(line, &section, "expected `key = value`"))?;
            let key = key.trim();
            if section.is_empty() {
                return Err(syntax(line, "", format!("`{key}` appears before any section header")));
            }
            let known = KEYS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
            if !known.contains(&key) {
                return Err(syntax(line, &section, format!("unknown key `{key}`")));
            }
            if entries.iter().any(|e| e.section == section && e.key == key) {
                return Err(syntax(line, &section, format!("duplicate key `{key}`")));
            }
            entries.push(Entry {
                section: section.clone(),
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }
}

impl Entry {
    fn error(&self, message: impl Into<String>) -> Error {
        syntax(self.line, &self.section, format!("`{}`: {}", self.key, message.into()))
    }

    fn number(&self) -> Result<f64> {
        parse_number(&self.value).map_err(|m| self.error(m))
    }

    fn numbers(&self) -> Result<Vec<f64>> {
        self.value
            .split_whitespace()
            .map(|w| parse_number(w).map_err(|m| self.error(m)))
            .collect()
    }

    fn boolean(&self) -> Result<bool> {
        match self.value.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(self.error(format!("expected true or false, got `{other}`"))),
        }
    }

    fn count(&self) -> Result<usize> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("expected a non-negative integer, got `{}`", self.value)))
    }
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number, got `{s}`")),
    }
}

/// Parse a comma- or whitespace-separated list of layer counts.
pub fn parse_layers(s: &str) -> Result<Vec<usize>> {
    let layers: Vec<usize> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(|w| {
            w.parse()
                .map_err(|_| Error::Config(format!("invalid layer count `{w}`")))
        })
        .collect::<Result<_>>()?;
    stcontrol::study::check_layers(&layers)?;
    Ok(layers)
}

/// `zero`, `sine <amplitude> <angular_frequency>`, or `table t:v t:v ...`.
pub fn parse_velocity(s: &str) -> Result<Velocity> {
    let mut words = s.split_whitespace();
    let bad = |m: &str| Error::Config(format!("velocity `{s}`: {m}"));
    match words.next() {
        Some("zero") => Ok(Velocity::Zero),
        Some("sine") => {
            let v: Vec<f64> = words
                .map(|w| parse_number(w).map_err(|m| bad(&m)))
                .collect::<Result<_>>()?;
            match v[..] {
                [amplitude, angular_frequency] => Ok(Velocity::Sine {
                    amplitude,
                    angular_frequency,
                }),
                _ => Err(bad("expected `sine <amplitude> <angular_frequency>`")),
            }
        }
        Some("table") => {
            let mut times = Vec::new();
            let mut values = Vec::new();
            for w in words {
                let (t, v) = w.split_once(':').ok_or_else(|| bad("expected `t:v` pairs"))?;
                times.push(parse_number(t).map_err(|m| bad(&m))?);
                values.push(parse_number(v).map_err(|m| bad(&m))?);
            }
            Velocity::tabulated(times, values)
        }
        _ => Err(bad("expected zero, sine or table")),
    }
}

/// `derived`, `zero`, `constant c`, `bump value x0 t0 radius`, or `expquad`.
pub fn parse_desired(s: &str) -> Result<DesiredState> {
    let mut words = s.split_whitespace();
    let bad = |m: &str| Error::Config(format!("desired_state `{s}`: {m}"));
    let head = words.next();
    let args: Vec<f64> = words
        .map(|w| parse_number(w).map_err(|m| bad(&m)))
        .collect::<Result<_>>()?;
    match (head, &args[..]) {
        (Some("derived"), []) => Ok(DesiredState::DerivedFromExact),
        (Some("zero"), []) => Ok(DesiredState::Zero),
        (Some("expquad"), []) => Ok(DesiredState::ExpQuadratic),
        (Some("constant"), &[c]) => Ok(DesiredState::Constant(c)),
        (Some("bump"), &[value, x0, t0, radius]) => Ok(DesiredState::Bump {
            value,
            x0,
            t0,
            radius,
        }),
        _ => Err(bad(
            "expected derived, zero, expquad, `constant c` or `bump value x0 t0 radius`",
        )),
    }
}

pub fn parse_adjoint_space(s: &str) -> Result<AdjointSpace> {
    AdjointSpace::parse(s)
        .ok_or_else(|| Error::Config(format!("adjoint space must be U_h or W_h, got `{s}`")))
}

pub fn parse_gradient(s: &str) -> Result<GradientKind> {
    match s {
        "spatial" => Ok(GradientKind::Spatial),
        "space-time" | "spacetime" => Ok(GradientKind::SpaceTime),
        other => Err(Error::Config(format!(
            "gradient must be spatial or space-time, got `{other}`"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeName {
    Exact,
    Reference,
}

pub fn parse_mode(s: &str) -> Result<ModeName> {
    match s {
        "exact" => Ok(ModeName::Exact),
        "reference" => Ok(ModeName::Reference),
        other => Err(Error::Config(format!("mode must be exact or reference, got `{other}`"))),
    }
}

/// Values given on the command line; `None` leaves the file value or default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub layers: Option<Vec<usize>>,
    pub adjoint_space: Option<AdjointSpace>,
    pub quad_subdiv: Option<usize>,
    pub out: Option<PathBuf>,
    pub serial: bool,
    pub mode: Option<ModeName>,
    pub reference_layers: Option<usize>,
    pub seed: Option<u64>,
    pub plot: bool,
}

/// Everything a subcommand needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ProblemSpec,
    /// `None` when the file and the flags leave the level list to the subcommand.
    pub layers: Option<Vec<usize>>,
    pub adjoint_space: AdjointSpace,
    pub quad_subdiv: usize,
    pub rho_max: f64,
    pub gradient: GradientKind,
    pub out: PathBuf,
    pub serial: bool,
    pub mode: ModeName,
    pub reference_layers: usize,
    pub seed: u64,
    pub plot: bool,
}

/// Geometry and coefficient keys; overriding any of them on a preset
/// invalidates the closed-form solution.
const SHAPE_KEYS: [&str; 7] = [
    "x_min",
    "x_max",
    "final_time",
    "kappa1",
    "kappa2",
    "offsets",
    "velocity",
];

fn build_spec(file: &ConfigFile, preset: Option<&str>) -> Result<ProblemSpec> {
    let get = |k: &str| file.get("problem", k);
    let eta = get("eta").map(Entry::number).transpose()?;
    let preset = preset.map(str::to_owned).or_else(|| get("preset").map(|e| e.value.clone()));

    let mut spec = match preset.as_deref() {
        Some(name) => {
            let mut spec = ProblemSpec::preset(name)?;
            if let Some(eta) = eta {
                let variant = if name == Example1Variant::Moving.preset_name() {
                    Example1Variant::Moving
                } else {
                    Example1Variant::Static
                };
                spec = ProblemSpec::example1_with_eta(variant, eta);
            }
            if SHAPE_KEYS.iter().any(|k| get(k).is_some()) {
                spec.exact = None;
                if get("desired_state").is_none() {
                    return Err(Error::Config(format!(
                        "overriding the geometry or coefficients of preset `{name}` needs an explicit desired_state"
                    )));
                }
            }
            spec
        }
        None => {
            let mut spec = ProblemSpec::example1(Example1Variant::Static);
            spec.name = "custom".into();
            spec.velocity = Velocity::Zero;
            spec.desired = DesiredState::Zero;
            spec.exact = Some(ExactSolution::zero());
            if let Some(eta) = eta {
                spec.eta = eta;
            }
            spec
        }
    };

    if let Some(e) = get("name") {
        spec.name = e.value.clone();
    }
    for (key, slot) in [
        ("x_min", &mut spec.x_min),
        ("x_max", &mut spec.x_max),
        ("final_time", &mut spec.final_time),
        ("kappa1", &mut spec.kappa1),
        ("kappa2", &mut spec.kappa2),
    ] {
        if let Some(e) = get(key) {
            *slot = e.number()?;
        }
    }
    if let Some(e) = get("offsets") {
        match e.numbers()?[..] {
            [a, b] => spec.offsets = (a, b),
            _ => return Err(e.error("expected two numbers `a b`")),
        }
    }
    if let Some(e) = get("velocity") {
        spec.velocity = parse_velocity(&e.value).map_err(|err| e.error(err.to_string()))?;
    }
    if let Some(e) = get("desired_state") {
        spec.desired = parse_desired(&e.value).map_err(|err| e.error(err.to_string()))?;
        spec.exact = match (&spec.desired, spec.exact.take()) {
            // The optimal pair for zero data is zero.
            (DesiredState::Zero, _) => Some(ExactSolution::zero()),
            (DesiredState::DerivedFromExact, exact) => exact,
            _ => None,
        };
    }
    Ok(spec)
}

impl RunConfig {
    pub fn resolve(file: &ConfigFile, cli: &Overrides) -> Result<Self> {
        let spec = build_spec(file, cli.preset.as_deref())?;
        let disc = |k: &str| file.get("discretization", k);
        let run = |k: &str| file.get("run", k);

        let layers = match (&cli.layers, disc("layers")) {
            (Some(l), _) => Some(l.clone()),
            (None, Some(e)) => Some(parse_layers(&e.value).map_err(|err| e.error(err.to_string()))?),
            (None, None) => None,
        };
        let adjoint_space = match (cli.adjoint_space, disc("adjoint_space")) {
            (Some(a), _) => a,
            (None, Some(e)) => parse_adjoint_space(&e.value).map_err(|err| e.error(err.to_string()))?,
            (None, None) => AdjointSpace::default(),
        };
        let quad_subdiv = match (cli.quad_subdiv, disc("quad_subdiv")) {
            (Some(q), _) => q,
            (None, Some(e)) => e.count()?,
            (None, None) => 1,
        };
        let rho_max = disc("rho_max").map(Entry::number).transpose()?.unwrap_or(DEFAULT_RHO_MAX);
        if !(rho_max >= 1.0) {
            return Err(Error::Config(format!("rho_max must be at least 1, got {rho_max}")));
        }
        let gradient = match disc("gradient") {
            Some(e) => parse_gradient(&e.value).map_err(|err| e.error(err.to_string()))?,
            None => GradientKind::Spatial,
        };
        let out = match (&cli.out, run("out")) {
            (Some(p), _) => p.clone(),
            (None, Some(e)) => PathBuf::from(&e.value),
            (None, None) => PathBuf::from("out"),
        };
        let serial = cli.serial || run("serial").map(Entry::boolean).transpose()?.unwrap_or(false);
        let mode = match (cli.mode, run("mode")) {
            (Some(m), _) => m,
            (None, Some(e)) => parse_mode(&e.value).map_err(|err| e.error(err.to_string()))?,
            (None, None) => ModeName::Exact,
        };
        let reference_layers = match (cli.reference_layers, run("reference_layers")) {
            (Some(r), _) => r,
            (None, Some(e)) => e.count()?,
            (None, None) => DEFAULT_REFERENCE_LAYERS,
        };
        let seed = match (cli.seed, run("seed")) {
            (Some(s), _) => s,
            (None, Some(e)) => e.count()? as u64,
            (None, None) => 0,
        };
        let plot = cli.plot || run("plot").map(Entry::boolean).transpose()?.unwrap_or(false);

        Ok(Self {
            spec,
            layers,
            adjoint_space,
            quad_subdiv,
            rho_max,
            gradient,
            out,
            serial,
            mode,
            reference_layers,
            seed,
            plot,
        })
    }

    pub fn layers_or(&self, default: &[usize]) -> Vec<usize> {
        self.layers.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn assembly(&self) -> AssemblyOptions {
        AssemblyOptions {
            parallel: !self.serial,
            quad_subdiv: self.quad_subdiv,
        }
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            adjoint_space: self.adjoint_space,
            assembly: self.assembly(),
            ..SolverOptions::default()
        }
    }

    pub fn metric(&self) -> MetricOptions {
        MetricOptions {
            quad_subdiv: self.quad_subdiv,
            gradient: self.gradient,
            parallel: !self.serial,
        }
    }

    pub fn study(&self) -> StudyOptions {
        StudyOptions {
            solver: self.solver(),
            metric: self.metric(),
            mode: match self.mode {
                ModeName::Exact => ErrorMode::Exact,
                ModeName::Reference => ErrorMode::Reference {
                    layers: self.reference_layers,
                },
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<RunConfig> {
        RunConfig::resolve(&ConfigFile::parse(text)?, &Overrides::default())
    }

    #[test]
    fn empty_config_is_the_zero_data_problem() {
        let c = resolve("").unwrap();
        assert_eq!(c.spec.name, "custom");
        assert!(matches!(c.spec.desired, DesiredState::Zero));
        assert!(c.spec.exact.is_some());
        assert_eq!(c.adjoint_space, AdjointSpace::U);
        assert_eq!(c.quad_subdiv, 1);
        assert_eq!(c.rho_max, DEFAULT_RHO_MAX);
        assert_eq!(c.reference_layers, 240);
        assert!(c.layers.is_none());
    }

    #[test]
    fn full_config_is_read() {
        let c = resolve(
            "# comment\n[problem]\npreset = example1-moving\neta = 1e-4\n\n\
             [discretization]\nlayers = 8, 16,32\nadjoint_space = W_h\nquad_subdiv = 2\ngradient = space-time\n\
             [run]\nout = /tmp/x # trailing\nserial = true\nmode = reference\nreference_layers = 64\nseed = 3\nplot = yes\n",
        )
        .unwrap();
        assert_eq!(c.spec.name, "example1-moving");
        assert_eq!(c.spec.eta, 1e-4);
        assert!(c.spec.exact.is_some());
        assert_eq!(c.layers, Some(vec![8, 16, 32]));
        assert_eq!(c.adjoint_space, AdjointSpace::W);
        assert_eq!(c.quad_subdiv, 2);
        assert_eq!(c.gradient, GradientKind::SpaceTime);
        assert_eq!(c.out, PathBuf::from("/tmp/x"));
        assert!(c.serial && c.plot);
        assert_eq!(c.mode, ModeName::Reference);
        assert_eq!(c.study().mode, ErrorMode::Reference { layers: 64 });
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn flags_override_the_file() {
        let file = ConfigFile::parse("[problem]\npreset = example1-moving\n[discretization]\nlayers = 4,8\n").unwrap();
        let cli = Overrides {
            preset: Some("example1-static".into()),
            layers: Some(vec![3]),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(&file, &cli).unwrap();
        assert_eq!(c.spec.name, "example1-static");
        assert_eq!(c.layers, Some(vec![3]));
    }

    #[test]
    fn custom_problem_fields() {
        let c = resolve(
            "[problem]\nname = wave\noffsets = 0.3 0.5\nkappa1 = 2\nvelocity = sine 0.1 6.283\n\
             desired_state = bump 1 0.5 0.5 0.2\n",
        )
        .unwrap();
        assert_eq!(c.spec.name, "wave");
        assert_eq!(c.spec.offsets, (0.3, 0.5));
        assert_eq!(c.spec.kappa1, 2.0);
        assert!(matches!(c.spec.velocity, Velocity::Sine { .. }));
        assert!(matches!(c.spec.desired, DesiredState::Bump { .. }));
        assert!(c.spec.exact.is_none());
    }

    #[test]
    fn velocity_and_desired_state_forms() {
        assert!(matches!(parse_velocity("zero").unwrap(), Velocity::Zero));
        assert!(matches!(parse_velocity("table 0:0 0.5:1 1:0").unwrap(), Velocity::Tabulated(_)));
        assert!(parse_velocity("sine 1").is_err());
        assert!(parse_velocity("table 0-1").is_err());
        assert!(parse_velocity("spin").is_err());
        assert!(matches!(parse_desired("constant 2").unwrap(), DesiredState::Constant(c) if c == 2.0));
        assert!(matches!(parse_desired("expquad").unwrap(), DesiredState::ExpQuadratic));
        assert!(parse_desired("constant").is_err());
        assert!(parse_desired("bump 1 2").is_err());
    }

    #[test]
    fn malformed_files_report_the_line() {
        for (text, needle) in [
            ("x = 1\n", "line 1"),
            ("[problem]\n\nfoo = 1\n", "line 3"),
            ("[nope]\n", "unknown section"),
            ("[problem\n", "unterminated"),
            ("[problem]\neta\n", "key = value"),
            ("[problem]\neta = 1\neta = 2\n", "duplicate"),
            ("[problem]\neta = abc\n", "finite number"),
            ("[run]\nserial = maybe\n", "true or false"),
        ] {
            let err = resolve(text).unwrap_err();
            assert_eq!(err.kind(), stcontrol::ErrorKind::Usage, "{text}");
            assert!(err.to_string().contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn changed_preset_geometry_needs_desired_state() {
        assert!(resolve("[problem]\npreset = example1-static\nkappa1 = 2\n").is_err());
        let c = resolve("[problem]\npreset = example1-static\nkappa1 = 2\ndesired_state = constant 1\n").unwrap();
        assert!(c.spec.exact.is_none());
        assert!(resolve("[problem]\npreset = example1-static\ndesired_state = derived\n").unwrap().spec.exact.is_some());
        assert!(resolve("[problem]\npreset = nope\n").is_err());
    }

    #[test]
    fn layer_lists_are_validated() {
        assert_eq!(parse_layers("15,30 60").unwrap(), vec![15, 30, 60]);
        assert!(parse_layers("1").is_err());
        assert!(parse_layers("8,4").is_err());
        assert!(parse_layers("a").is_err());
        assert!(parse_layers("").is_err());
    }
}
