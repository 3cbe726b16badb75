//! Scenario configuration: TOML with nested sections, unknown keys are hard
//! errors, and `--set key.path=value` overrides are applied on the parsed
//! tree before validation.

use serde::{Deserialize, Serialize};
use uavnet_core::analytic::{InterferenceField, NetworkParams};
use uavnet_core::channel::FadingParams;
use uavnet_core::geometry::HeightLaw;
use uavnet_core::montecarlo::{McConfig, Scheme};

use crate::CliError;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Formation,
    Tracking,
    Coverage,
    Rate,
    Compare,
    Pdfcheck,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: Kind,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub monte_carlo: MonteCarloSection,
    #[serde(default)]
    pub formation: FormationSection,
    #[serde(default)]
    pub tracking: TrackingSection,
}

fn default_seed() -> u64 {
    42
}

fn default_out_dir() -> String {
    "out".into()
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub density_per_km2: f64,
    pub alpha: f64,
    pub nakagami_m: f64,
    pub mean_power: f64,
    pub height_min_m: f64,
    pub height_max_m: f64,
    pub region_radius_m: f64,
    /// "matched" integrates the interference over the simulated field
    /// (guarded disk); "full_plane" uses the unguarded integrals.
    pub interference_field: String,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            density_per_km2: 16.0,
            alpha: 2.8,
            nakagami_m: 2.0,
            mean_power: 1.0,
            height_min_m: 50.0,
            height_max_m: 300.0,
            region_radius_m: 3000.0,
            interference_field: "matched".into(),
        }
    }
}

impl NetworkSection {
    pub fn height_law(&self) -> HeightLaw {
        if self.height_min_m == self.height_max_m {
            HeightLaw::Fixed(self.height_min_m)
        } else {
            HeightLaw::Uniform { min: self.height_min_m, max: self.height_max_m }
        }
    }

    pub fn params(&self) -> Result<NetworkParams, CliError> {
        let density = self.density_per_km2 * 1e-6;
        let field = match self.interference_field.as_str() {
            "matched" => InterferenceField::GuardedDisk { max_radius: 1.2 * self.region_radius_m },
            "full_plane" => InterferenceField::FullPlane,
            other => {
                return Err(CliError::Validation(format!(
                "network.interference_field must be \"matched\" or \"full_plane\", got \"{other}\""
            )))
            }
        };
        let p = NetworkParams {
            density,
            alpha: self.alpha,
            fading: FadingParams { m: self.nakagami_m, omega: self.mean_power },
            height_law: self.height_law(),
            field,
        };
        p.validate().map_err(|e| CliError::Validation(format!("network: {e}")))?;
        Ok(p)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub trials: u64,
    pub gamma_db: Vec<f64>,
    pub scheme: String,
    pub conventional_by_distance: bool,
    /// Path-loss sweep for the coverage/rate scenarios.
    pub alphas: Vec<f64>,
    /// Density sweep (per km²) for the rate scenario.
    pub densities_per_km2: Vec<f64>,
    /// Histogram bins for the pdfcheck scenario.
    pub bins: usize,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            trials: 100_000,
            gamma_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            scheme: "proposed".into(),
            conventional_by_distance: false,
            alphas: vec![2.4, 2.8],
            densities_per_km2: vec![8.0, 16.0, 32.0],
            bins: 60,
        }
    }
}

pub fn parse_scheme(label: &str) -> Result<Scheme, CliError> {
    Ok(match label {
        "proposed" => Scheme::ProposedDelaunay4,
        "no_comp" => Scheme::NoComp,
        "conventional_1" => Scheme::Conventional { n: 1 },
        "conventional_2" => Scheme::Conventional { n: 2 },
        "conventional_3" => Scheme::Conventional { n: 3 },
        "conventional_4" => Scheme::Conventional { n: 4 },
        other => {
            return Err(CliError::Validation(format!(
                "monte_carlo.scheme \"{other}\" is not one of proposed, no_comp, conventional_1..4"
            )))
        }
    })
}

impl MonteCarloSection {
    pub fn gamma_linear(&self) -> Vec<f64> {
        self.gamma_db.iter().map(|db| 10f64.powf(db / 10.0)).collect()
    }

    pub fn mc_config(
        &self,
        net: &NetworkSection,
        master_seed: u64,
        scheme: Scheme,
    ) -> Result<McConfig, CliError> {
        let cfg = McConfig {
            trials: self.trials,
            master_seed,
            network: net.params()?,
            region_radius: net.region_radius_m,
            scheme,
            gamma_grid: self.gamma_linear(),
            conventional_by_distance: self.conventional_by_distance,
        };
        cfg.validate().map_err(|e| CliError::Validation(format!("monte_carlo: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormationSection {
    pub t_end_s: f64,
    pub dt_s: f64,
    pub output_stride: usize,
    pub noise_intensity: f64,
    pub scenario_seed: u64,
}

impl Default for FormationSection {
    fn default() -> Self {
        Self {
            t_end_s: 500.0,
            dt_s: 0.01,
            output_stride: 100,
            noise_intensity: 0.0,
            scenario_seed: 1,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingSection {
    pub t_end_s: f64,
    pub dt_s: f64,
    pub tau_s: f64,
    pub output_stride: usize,
    pub scenario_seed: u64,
    pub target_speed: f64,
    pub rho: f64,
}

impl Default for TrackingSection {
    fn default() -> Self {
        Self {
            t_end_s: 30.0,
            dt_s: 0.01,
            tau_s: 0.02,
            output_stride: 10,
            scenario_seed: 7,
            target_speed: 10.0,
            rho: 1.3,
        }
    }
}

/// Parses a config file, applies `--set` overrides (and the seed/trials/out
/// shorthands), and validates the result. Unknown keys anywhere fail with
/// the key name.
pub fn load_config(
    text: &str,
    sets: &[(String, String)],
    seed: Option<u64>,
    trials: Option<u64>,
    out: Option<&str>,
) -> Result<ScenarioConfig, CliError> {
    let table: toml::Table =
        text.parse().map_err(|e| CliError::Validation(format!("config parse: {e}")))?;
    let mut value = toml::Value::Table(table);
    for (path, raw) in sets {
        apply_override(&mut value, path, raw)?;
    }
    if let Some(s) = seed {
        apply_override(&mut value, "master_seed", &s.to_string())?;
    }
    if let Some(t) = trials {
        apply_override(&mut value, "monte_carlo.trials", &t.to_string())?;
    }
    if let Some(o) = out {
        apply_override(&mut value, "out_dir", &format!("\"{o}\""))?;
    }
    let cfg: ScenarioConfig =
        value.try_into().map_err(|e| CliError::Validation(format!("config: {e}")))?;
    Ok(cfg)
}

/// Pure key-path substitution on the parsed tree; intermediate tables are
/// created as needed so overrides can introduce optional sections.
fn apply_override(root: &mut toml::Value, path: &str, raw: &str) -> Result<(), CliError> {
    let parsed: toml::Value = match raw.parse::<toml::Value>() {
        Ok(v) => v,
        // bare words become strings
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| {
            CliError::Validation(format!("--set {path}: \"{part}\" is not a table"))
        })?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        node =
            table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    Ok(())
}

/// Built-in scenario presets, named after the figures they reproduce as
/// data. `fig7` bundles the coverage and rate kinds.
pub fn builtin(name: &str) -> Option<Vec<&'static str>> {
    match name {
        "fig4" => Some(vec![FIG4]),
        "fig5" => Some(vec![FIG5]),
        "fig6" => Some(vec![FIG6]),
        "fig7" => Some(vec![FIG7_COVERAGE, FIG7_RATE]),
        "fig8" => Some(vec![FIG8]),
        _ => None,
    }
}

pub const FIG4: &str = r#"
kind = "formation"
"#;

pub const FIG5: &str = r#"
kind = "tracking"
"#;

pub const FIG6: &str = r#"
kind = "pdfcheck"

[monte_carlo]
trials = 100000
bins = 60
"#;

pub const FIG7_COVERAGE: &str = r#"
kind = "coverage"

[monte_carlo]
alphas = [2.4, 2.8]
"#;

pub const FIG7_RATE: &str = r#"
kind = "rate"

[monte_carlo]
alphas = [2.2, 2.4, 2.6, 2.8, 3.0, 3.2]
densities_per_km2 = [8.0, 16.0, 32.0]
"#;

pub const FIG8: &str = r#"
kind = "compare"
"#;
