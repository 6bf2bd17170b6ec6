//! Flat, human-editable configuration for the whole pipeline.
//!
//! The format is one `key = value` pair per line with dotted keys,
//! e.g.
//!
//! ```text
//! # restoration strength
//! solver.gamma = 12.5
//! transmission.t_min = 0.08
//! output.suffix = _clear
//! ```
//!
//! Blank lines and lines starting with `#` are ignored; values are
//! trimmed. Unknown keys, malformed values, and out-of-domain settings
//! are all configuration errors — a file either yields a fully
//! validated [`PipelineConfig`] or a message naming the offending line.
//! [`serialize`] writes every key back in a fixed order, and
//! `parse(&serialize(&c))` reproduces `c` exactly.

use crate::color::ColorParams;
use crate::error::{Error, Result};
use crate::guided::GuidedFilterParams;
use crate::illumination::IlluminationParams;
use crate::solver::SolverParams;
use crate::transmission::TransmissionParams;

/// Output-side options of the command-line pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    /// Appended to the input file stem when no explicit output path is
    /// given (must be non-empty, or outputs would overwrite inputs).
    pub suffix: String,
    /// Also write a side-by-side input/restored panel image.
    pub panel: bool,
    /// Display exponent: `0` shows the reflectance alone, `rho > 0`
    /// shows `R * L^rho` (re-lit by a dimmed illumination).
    pub display_rho: f64,
    /// Long-side pixel count above which a size warning is printed
    /// (processing still runs at full size).
    pub size_warning: usize,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            suffix: "_restored".to_string(),
            panel: false,
            display_rho: 0.0,
            size_warning: 1024,
        }
    }
}

impl OutputOptions {
    /// Checks the suffix is non-empty and `display_rho` is finite and
    /// non-negative.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.suffix.is_empty() {
            return Err(Error::InvalidParameter {
                name: "output.suffix",
                reason: "must be non-empty (an empty suffix would overwrite the input)".into(),
            });
        }
        if !(self.display_rho.is_finite() && self.display_rho >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "output.display_rho",
                reason: format!("must be finite and non-negative, got {}", self.display_rho),
            });
        }
        if self.size_warning == 0 {
            return Err(Error::InvalidParameter {
                name: "output.size_warning",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Every tunable of the restoration pipeline, one struct per stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Channel compensation and balance.
    pub color: ColorParams,
    /// Ambient-light estimation.
    pub illumination: IlluminationParams,
    /// Guided filter refining the illumination brightness mask.
    pub mask_filter: GuidedFilterParams,
    /// Transmission estimation.
    pub transmission: TransmissionParams,
    /// Guided filter refining the transmission map.
    pub transmission_filter: GuidedFilterParams,
    /// Variational solver controls.
    pub solver: SolverParams,
    /// File naming and display options.
    pub output: OutputOptions,
}

impl Default for PipelineConfig {
    /// The standard configuration: every stage at its documented default,
    /// with each guided-filter instance on its own preset.
    fn default() -> Self {
        PipelineConfig {
            color: ColorParams::default(),
            illumination: IlluminationParams::default(),
            mask_filter: GuidedFilterParams::MASK,
            transmission: TransmissionParams::default(),
            transmission_filter: GuidedFilterParams::TRANSMISSION,
            solver: SolverParams::default(),
            output: OutputOptions::default(),
        }
    }
}

impl PipelineConfig {
    /// Validates every nested parameter block.
    ///
    /// # Errors
    /// The first nested [`Error::InvalidParameter`] encountered.
    pub fn validate(&self) -> Result<()> {
        self.color.validate()?;
        self.illumination.validate()?;
        self.mask_filter.validate("guided_mask")?;
        self.transmission.validate()?;
        self.transmission_filter.validate("guided_transmission")?;
        self.solver.validate()?;
        self.output.validate()
    }
}

fn parse_f64(key: &str, raw: &str, line_no: usize) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::Config(format!("line {line_no}: {key} expects a number, got `{raw}`")))
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!(
                    "line {line_no}: {key} must be finite, got `{raw}`"
                )))
            }
        })
}

fn parse_usize(key: &str, raw: &str, line_no: usize) -> Result<usize> {
    raw.parse::<usize>().map_err(|_| {
        Error::Config(format!(
            "line {line_no}: {key} expects a non-negative integer, got `{raw}`"
        ))
    })
}

fn parse_bool(key: &str, raw: &str, line_no: usize) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!(
            "line {line_no}: {key} expects `true` or `false`, got `{raw}`"
        ))),
    }
}

/// Parses a configuration text into a validated [`PipelineConfig`].
///
/// Parsing starts from [`PipelineConfig::default`]; each line overrides
/// one key. See the module docs for the format.
///
/// # Errors
/// [`Error::Config`] for malformed lines, unknown keys, or non-parsable
/// values; [`Error::InvalidParameter`] when the assembled configuration
/// violates a parameter domain.
pub fn parse(text: &str) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Config(format!(
                "line {line_no}: expected `key = value`, got `{trimmed}`"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "color.d" => cfg.color.d = parse_f64(key, value, line_no)?,
            "color.phi" => cfg.color.phi = parse_f64(key, value, line_no)?,
            "color.epsilon_var" => cfg.color.epsilon_var = parse_f64(key, value, line_no)?,
            "illumination.patch" => cfg.illumination.patch = parse_usize(key, value, line_no)?,
            "illumination.theta" => cfg.illumination.theta = parse_f64(key, value, line_no)?,
            "illumination.delta" => cfg.illumination.delta = parse_f64(key, value, line_no)?,
            "illumination.floor" => cfg.illumination.floor = parse_f64(key, value, line_no)?,
            "guided_mask.radius" => cfg.mask_filter.radius = parse_usize(key, value, line_no)?,
            "guided_mask.eps" => cfg.mask_filter.eps = parse_f64(key, value, line_no)?,
            "transmission.patch" => cfg.transmission.patch = parse_usize(key, value, line_no)?,
            "transmission.t_min" => cfg.transmission.t_min = parse_f64(key, value, line_no)?,
            "guided_transmission.radius" => {
                cfg.transmission_filter.radius = parse_usize(key, value, line_no)?
            }
            "guided_transmission.eps" => {
                cfg.transmission_filter.eps = parse_f64(key, value, line_no)?
            }
            "solver.alpha" => cfg.solver.alpha = parse_f64(key, value, line_no)?,
            "solver.beta" => cfg.solver.beta = parse_f64(key, value, line_no)?,
            "solver.gamma" => cfg.solver.gamma = parse_f64(key, value, line_no)?,
            "solver.mu1" => cfg.solver.mu[0] = parse_f64(key, value, line_no)?,
            "solver.mu2" => cfg.solver.mu[1] = parse_f64(key, value, line_no)?,
            "solver.mu3" => cfg.solver.mu[2] = parse_f64(key, value, line_no)?,
            "solver.mu4" => cfg.solver.mu[3] = parse_f64(key, value, line_no)?,
            "solver.mu5" => cfg.solver.mu[4] = parse_f64(key, value, line_no)?,
            "solver.mu6" => cfg.solver.mu[5] = parse_f64(key, value, line_no)?,
            "solver.max_iters" => cfg.solver.max_iters = parse_usize(key, value, line_no)?,
            "solver.tol" => cfg.solver.tol = parse_f64(key, value, line_no)?,
            "output.suffix" => cfg.output.suffix = value.to_string(),
            "output.panel" => cfg.output.panel = parse_bool(key, value, line_no)?,
            "output.display_rho" => cfg.output.display_rho = parse_f64(key, value, line_no)?,
            "output.size_warning" => cfg.output.size_warning = parse_usize(key, value, line_no)?,
            _ => {
                return Err(Error::Config(format!(
                    "line {line_no}: unknown key `{key}`"
                )));
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes every key of `cfg` in a fixed order. The result parses back to
/// an identical configuration (floats use Rust's shortest round-trip
/// formatting).
pub fn serialize(cfg: &PipelineConfig) -> String {
    let mut out = String::new();
    let mut push = |key: &str, value: String| {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    };
    push("color.d", cfg.color.d.to_string());
    push("color.phi", cfg.color.phi.to_string());
    push("color.epsilon_var", cfg.color.epsilon_var.to_string());
    push("illumination.patch", cfg.illumination.patch.to_string());
    push("illumination.theta", cfg.illumination.theta.to_string());
    push("illumination.delta", cfg.illumination.delta.to_string());
    push("illumination.floor", cfg.illumination.floor.to_string());
    push("guided_mask.radius", cfg.mask_filter.radius.to_string());
    push("guided_mask.eps", cfg.mask_filter.eps.to_string());
    push("transmission.patch", cfg.transmission.patch.to_string());
    push("transmission.t_min", cfg.transmission.t_min.to_string());
    push(
        "guided_transmission.radius",
        cfg.transmission_filter.radius.to_string(),
    );
    push(
        "guided_transmission.eps",
        cfg.transmission_filter.eps.to_string(),
    );
    push("solver.alpha", cfg.solver.alpha.to_string());
    push("solver.beta", cfg.solver.beta.to_string());
    push("solver.gamma", cfg.solver.gamma.to_string());
    for (k, m) in cfg.solver.mu.iter().enumerate() {
        push(&format!("solver.mu{}", k + 1), m.to_string());
    }
    push("solver.max_iters", cfg.solver.max_iters.to_string());
    push("solver.tol", cfg.solver.tol.to_string());
    push("output.suffix", cfg.output.suffix.clone());
    push("output.panel", cfg.output.panel.to_string());
    push("output.display_rho", cfg.output.display_rho.to_string());
    push("output.size_warning", cfg.output.size_warning.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_config_is_valid_and_uses_both_filter_presets() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.mask_filter, GuidedFilterParams::MASK);
        assert_eq!(cfg.transmission_filter, GuidedFilterParams::TRANSMISSION);
    }

    #[test]
    fn empty_text_parses_to_standard() {
        assert_eq!(parse("").unwrap(), PipelineConfig::default());
        assert_eq!(
            parse("# only a comment\n\n").unwrap(),
            PipelineConfig::default()
        );
    }

    #[test]
    fn overrides_apply_and_round_trip() {
        let text = "solver.gamma = 12.5\n# tweak水\ntransmission.t_min=0.08\noutput.suffix = _clear\noutput.panel = true\nsolver.mu3 = 2\n";
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.solver.gamma, 12.5);
        assert_eq!(cfg.transmission.t_min, 0.08);
        assert_eq!(cfg.output.suffix, "_clear");
        assert!(cfg.output.panel);
        assert_eq!(cfg.solver.mu[2], 2.0);
        // untouched keys keep their defaults
        assert_eq!(cfg.solver.mu[0], 0.1);

        let round = parse(&serialize(&cfg)).unwrap();
        assert_eq!(round, cfg);
    }

    #[test]
    fn serialize_of_standard_round_trips_exactly() {
        let cfg = PipelineConfig::default();
        assert_eq!(parse(&serialize(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_line() {
        let unknown = parse("solver.mu7 = 1\n").unwrap_err();
        assert!(unknown.to_string().contains("line 1"), "{unknown}");
        assert!(unknown.to_string().contains("mu7"), "{unknown}");

        let malformed = parse("solver.gamma\n").unwrap_err();
        assert!(malformed.to_string().contains("key = value"), "{malformed}");

        let bad_value = parse("\nsolver.tol = fast\n").unwrap_err();
        assert!(bad_value.to_string().contains("line 2"), "{bad_value}");
    }

    #[test]
    fn out_of_domain_values_fail_validation() {
        assert!(parse("solver.mu2 = 0\n").is_err());
        assert!(parse("illumination.theta = 1.5\n").is_err());
        assert!(parse("transmission.t_min = 0\n").is_err());
        assert!(parse("output.suffix =\n").is_err());
        assert!(parse("solver.tol = -1e-4\n").is_err());
    }
}
