//! Experiment configuration: a flat `key = value` file plus command-line
//! overrides.
//!
//! Everything a campaign needs to be reproducible is pinned here: grid
//! size, Robin parameter, RNG seed, trial count, the convex test family,
//! the L^p exponent list, the source recipe, and tolerance overrides.
//! Parsing is line-precise: every rejected key or value reports the file
//! and line it came from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use robinpol::checks::Tolerances;
use robinpol::convex::ConvexTestFunction;
use robinpol::error::{Error, Result};
use robinpol::DOMAIN_HALF_WIDTH;

/// Recipe for the experiment's heat source.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// Load a piecewise-constant source from a grid-function CSV.
    File(PathBuf),
    /// f = c on the whole rod.
    Constant(f64),
    /// Indicator of [a, a+length], projected to cell averages so partial
    /// overlaps become fractional cell values.
    Indicator { a: f64, length: f64 },
    /// Tent profile: peak `height` at `center`, reaching zero at distance
    /// width/2, sampled at cell midpoints.
    Bump { center: f64, width: f64, height: f64 },
    /// Additive overlay of `blocks` random cell blocks; heights and
    /// positions come from the per-trial RNG stream.
    RandomPiecewise { blocks: usize },
}

impl SourceSpec {
    /// Parse the `name(arg, arg, ...)` form, e.g. `constant(1.0)`,
    /// `indicator(-1.0, 1.5)`, `bump(0.0, 2.0, 1.5)`,
    /// `random_piecewise(5)`, `file(sources/f.csv)`.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        let open = text
            .find('(')
            .ok_or_else(|| format!("source spec {text:?} is missing '(...)'"))?;
        if !text.ends_with(')') {
            return Err(format!("source spec {text:?} is missing the closing ')'"));
        }
        let name = text[..open].trim();
        let inner = &text[open + 1..text.len() - 1];
        let args: Vec<&str> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(str::trim).collect()
        };
        let want = |k: usize| -> std::result::Result<(), String> {
            if args.len() == k {
                Ok(())
            } else {
                Err(format!("source {name} takes {k} argument(s), got {}", args.len()))
            }
        };
        let num = |s: &str| -> std::result::Result<f64, String> {
            s.parse::<f64>().map_err(|_| format!("{s:?} is not a number"))
        };
        match name {
            "file" => {
                want(1)?;
                Ok(SourceSpec::File(PathBuf::from(args[0])))
            }
            "constant" => {
                want(1)?;
                let c = num(args[0])?;
                if !c.is_finite() || c < 0.0 {
                    return Err(format!("constant level must be finite and >= 0, got {c}"));
                }
                Ok(SourceSpec::Constant(c))
            }
            "indicator" => {
                want(2)?;
                let a = num(args[0])?;
                let length = num(args[1])?;
                if !a.is_finite() {
                    return Err(format!("indicator start must be finite, got {a}"));
                }
                if !(length > 0.0) || !length.is_finite() {
                    return Err(format!("indicator length must be finite and > 0, got {length}"));
                }
                Ok(SourceSpec::Indicator { a, length })
            }
            "bump" => {
                want(3)?;
                let center = num(args[0])?;
                let width = num(args[1])?;
                let height = num(args[2])?;
                if !center.is_finite() {
                    return Err(format!("bump center must be finite, got {center}"));
                }
                if !(width > 0.0) || !width.is_finite() {
                    return Err(format!("bump width must be finite and > 0, got {width}"));
                }
                if !height.is_finite() || height < 0.0 {
                    return Err(format!("bump height must be finite and >= 0, got {height}"));
                }
                Ok(SourceSpec::Bump { center, width, height })
            }
            "random_piecewise" => {
                want(1)?;
                let blocks: usize = args[0]
                    .parse()
                    .map_err(|_| format!("{:?} is not a block count", args[0]))?;
                if blocks == 0 {
                    return Err("random_piecewise needs at least 1 block".to_string());
                }
                Ok(SourceSpec::RandomPiecewise { blocks })
            }
            other => Err(format!(
                "unknown source kind {other:?} (expected file, constant, indicator, bump, or random_piecewise)"
            )),
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::File(p) => write!(out, "file({})", p.display()),
            SourceSpec::Constant(c) => write!(out, "constant({c})"),
            SourceSpec::Indicator { a, length } => write!(out, "indicator({a}, {length})"),
            SourceSpec::Bump { center, width, height } => {
                write!(out, "bump({center}, {width}, {height})")
            }
            SourceSpec::RandomPiecewise { blocks } => write!(out, "random_piecewise({blocks})"),
        }
    }
}

/// Which move-selection rule the convergence experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Greedy,
    Random,
}

impl StrategyKind {
    fn parse(text: &str) -> std::result::Result<Self, String> {
        match text {
            "greedy" => Ok(StrategyKind::Greedy),
            "random" => Ok(StrategyKind::Random),
            other => Err(format!("strategy must be greedy or random, got {other:?}")),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Greedy => write!(out, "greedy"),
            StrategyKind::Random => write!(out, "random"),
        }
    }
}

/// Full experiment description. `Default` gives a runnable mid-size
/// campaign; a config file and then command-line flags override fields.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_cells: usize,
    pub alpha: f64,
    pub seed: u64,
    pub trials: usize,
    pub phi_family: Vec<ConvexTestFunction>,
    pub p_list: Vec<f64>,
    pub source_spec: SourceSpec,
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub strategy: StrategyKind,
    pub max_iters: usize,
    /// Worker threads for campaign fan-out; 0 means available parallelism.
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Also emit the rearranged-source solution profiles from `solve`.
    pub emit_variants: bool,
    /// Polarization center used where a single b is needed (solve variant
    /// output, rearrange dump). None means pi/2, which sits on the
    /// half-grid for every even n_cells.
    pub b: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_cells: 64,
            alpha: 1.0,
            seed: 42,
            trials: 100,
            phi_family: vec![
                ConvexTestFunction::power(2.0).expect("p=2 is valid"),
                ConvexTestFunction::exponential(0.5).expect("rate=0.5 is valid"),
                ConvexTestFunction::hinge(1.0).expect("threshold=1 is valid"),
                ConvexTestFunction::identity(),
            ],
            p_list: vec![1.0, 2.0, 3.0],
            source_spec: SourceSpec::RandomPiecewise { blocks: 5 },
            tolerance_overrides: BTreeMap::new(),
            strategy: StrategyKind::Greedy,
            max_iters: 10_000,
            workers: 0,
            out_dir: PathBuf::from("."),
            emit_variants: false,
            b: None,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n_cells: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub source: Option<String>,
    pub strategy: Option<String>,
    pub max_iters: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit_variants: Option<bool>,
    pub b: Option<f64>,
    /// `name=value` tolerance override strings.
    pub tol: Vec<String>,
}

impl ExperimentConfig {
    /// Load a config file and fold it over the defaults.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: format!("cannot read config: {e}"),
        })?;
        Self::from_text(&text, &path.display().to_string())
    }

    /// Parse config text. `path` only labels error messages.
    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line: line_no,
                    msg: format!("expected `key = value`, got {line:?}"),
                });
            };
            cfg.set_key(key.trim(), value.trim()).map_err(|msg| Error::Parse {
                path: path.to_string(),
                line: line_no,
                msg,
            })?;
        }
        Ok(cfg)
    }

    /// Apply command-line flags on top of whatever the file set.
    pub fn apply_overrides(&mut self, ov: &Overrides) -> Result<()> {
        let apply = |cfg: &mut Self, key: &str, value: String| -> Result<()> {
            cfg.set_key(key, &value).map_err(|msg| Error::Parse {
                path: "command line".to_string(),
                line: 0,
                msg,
            })
        };
        if let Some(n) = ov.n_cells {
            apply(self, "n_cells", n.to_string())?;
        }
        if let Some(a) = ov.alpha {
            apply(self, "alpha", format!("{a:?}"))?;
        }
        if let Some(s) = ov.seed {
            apply(self, "seed", s.to_string())?;
        }
        if let Some(t) = ov.trials {
            apply(self, "trials", t.to_string())?;
        }
        if let Some(src) = &ov.source {
            apply(self, "source", src.clone())?;
        }
        if let Some(st) = &ov.strategy {
            apply(self, "strategy", st.clone())?;
        }
        if let Some(m) = ov.max_iters {
            apply(self, "max_iters", m.to_string())?;
        }
        if let Some(w) = ov.workers {
            apply(self, "workers", w.to_string())?;
        }
        if let Some(o) = &ov.out {
            self.out_dir = o.clone();
        }
        if let Some(e) = ov.emit_variants {
            self.emit_variants = e;
        }
        if let Some(b) = ov.b {
            apply(self, "b", format!("{b:?}"))?;
        }
        for spec in &ov.tol {
            let Some((name, value)) = spec.split_once('=') else {
                return Err(Error::Parse {
                    path: "command line".to_string(),
                    line: 0,
                    msg: format!("--tol expects name=value, got {spec:?}"),
                });
            };
            apply(self, &format!("tol.{}", name.trim()), value.trim().to_string())?;
        }
        Ok(())
    }

    /// The tolerance table with this config's overrides applied.
    pub fn tolerances(&self) -> Tolerances {
        let mut tols = Tolerances::default();
        for (name, value) in &self.tolerance_overrides {
            tols.set(name, *value)
                .expect("override names are validated at parse time");
        }
        tols
    }

    /// The polarization center value to use when a command needs one.
    pub fn center_b(&self) -> f64 {
        self.b.unwrap_or(DOMAIN_HALF_WIDTH / 2.0)
    }

    fn set_key(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "n_cells" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| format!("n_cells must be an integer, got {value:?}"))?;
                if n < 2 || n % 2 != 0 {
                    return Err(format!("n_cells must be even and at least 2, got {n}"));
                }
                self.n_cells = n;
            }
            "alpha" => {
                let a: f64 = value
                    .parse()
                    .map_err(|_| format!("alpha must be a number, got {value:?}"))?;
                if !a.is_finite() || a <= 0.0 {
                    return Err(format!("alpha must be finite and > 0, got {a}"));
                }
                self.alpha = a;
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("seed must be a 64-bit unsigned integer, got {value:?}"))?;
            }
            "trials" => {
                let t: usize = value
                    .parse()
                    .map_err(|_| format!("trials must be an integer, got {value:?}"))?;
                if t == 0 {
                    return Err("trials must be at least 1".to_string());
                }
                self.trials = t;
            }
            "phi_family" => {
                let mut family = Vec::new();
                for item in value.split(',') {
                    let item = item.trim();
                    if item.is_empty() {
                        continue;
                    }
                    family.push(
                        ConvexTestFunction::parse(item).map_err(|e| e.to_string())?,
                    );
                }
                if family.is_empty() {
                    return Err("phi_family must list at least one test function".to_string());
                }
                self.phi_family = family;
            }
            "p_list" => {
                let mut ps = Vec::new();
                for item in value.split(',') {
                    let item = item.trim();
                    if item.is_empty() {
                        continue;
                    }
                    let p: f64 = item
                        .parse()
                        .map_err(|_| format!("p_list entry {item:?} is not a number"))?;
                    if !(p >= 1.0) {
                        return Err(format!("p_list entries must satisfy p >= 1, got {p}"));
                    }
                    ps.push(p);
                }
                if ps.is_empty() {
                    return Err("p_list must list at least one exponent".to_string());
                }
                self.p_list = ps;
            }
            "source" | "source_spec" => {
                self.source_spec = SourceSpec::parse(value)?;
            }
            "strategy" => {
                self.strategy = StrategyKind::parse(value)?;
            }
            "max_iters" => {
                let m: usize = value
                    .parse()
                    .map_err(|_| format!("max_iters must be an integer, got {value:?}"))?;
                if m == 0 {
                    return Err("max_iters must be at least 1".to_string());
                }
                self.max_iters = m;
            }
            "workers" => {
                self.workers = value
                    .parse()
                    .map_err(|_| format!("workers must be an integer, got {value:?}"))?;
            }
            "out" => {
                self.out_dir = PathBuf::from(value);
            }
            "emit_variants" => {
                self.emit_variants = match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(format!("emit_variants must be true or false, got {other:?}"))
                    }
                };
            }
            "b" => {
                let b: f64 = value
                    .parse()
                    .map_err(|_| format!("b must be a number, got {value:?}"))?;
                if !b.is_finite() || b == 0.0 || b.abs() >= DOMAIN_HALF_WIDTH {
                    return Err(format!(
                        "b must lie in (-pi, 0) or (0, pi), got {b}"
                    ));
                }
                self.b = Some(b);
            }
            _ if key.starts_with("tol.") => {
                let name = &key[4..];
                let v: f64 = value
                    .parse()
                    .map_err(|_| format!("tolerance value {value:?} is not a number"))?;
                if !v.is_finite() || v <= 0.0 {
                    return Err(format!("tolerance {name} must be finite and > 0, got {v}"));
                }
                // Reject unknown names here so the error carries the line.
                Tolerances::default().set(name, v).map_err(|e| e.to_string())?;
                self.tolerance_overrides.insert(name.to_string(), v);
            }
            other => {
                return Err(format!("unknown config key {other:?}"));
            }
        }
        Ok(())
    }
}
