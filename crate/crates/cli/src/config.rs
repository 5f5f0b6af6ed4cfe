//! Flat TOML configuration. The same keys are read from `--config` files and
//! written back as the resolved configuration embedded in every output.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nvlab::dbar::DbarOptions;
use nvlab::linearized::LinearOptions;
use nvlab::scattering::SampledProfile;
use nvlab::{Complex64, GridSpec, Profile, ScatteringData};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every key is optional in a file; after [`Config::resolve`] the keys a
/// command uses are all set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_list: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_list: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_panels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular_panels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// `other` wins wherever it sets a key.
    pub fn merge(&mut self, other: &Config) {
        overlay!(
            self,
            other,
            command,
            profile,
            profile_file,
            theta,
            format,
            output,
            input,
            column,
            tol,
            depth,
            t_list,
            u_list,
            z_list,
            r_min,
            r_max,
            radial_panels,
            angular_panels,
            order,
            budget
        );
    }

    /// Fill defaults for `command` and validate.
    pub fn resolve(mut self, command: &str) -> Result<Config, CliError> {
        if let Some(c) = &self.command {
            if c != command {
                return Err(CliError::Config(format!("config is for command '{c}', running '{command}'")));
            }
        }
        self.command = Some(command.to_string());
        self.format.get_or_insert(Format::Csv);
        let nonlinear = command == "reconstruct";
        let uses_data = matches!(command, "linsolve" | "supscan" | "reconstruct" | "optimality");
        if uses_data {
            self.profile.get_or_insert_with(|| "p1".into());
            self.theta.get_or_insert(if nonlinear { 0.1 } else { 1.0 });
            let base = if nonlinear { DbarOptions::default().grid } else { LinearOptions::default().grid };
            let budget = if nonlinear { DbarOptions::default().budget } else { LinearOptions::default().budget };
            self.r_min.get_or_insert(base.r_min);
            self.r_max.get_or_insert(base.r_max);
            self.radial_panels.get_or_insert(base.radial_panels);
            self.angular_panels.get_or_insert(base.angular_panels);
            self.order.get_or_insert(base.order);
            self.budget.get_or_insert(budget);
        }
        match command {
            "classify" => {
                need(&self.u_list, "u_list (--u)")?;
            }
            "linsolve" => {
                need(&self.t_list, "t_list (--t)")?;
                need(&self.u_list, "u_list (--u)")?;
            }
            "supscan" => {
                need(&self.t_list, "t_list (--t-list)")?;
            }
            "decayfit" => {
                if self.input.is_none() {
                    return Err(CliError::Config("decayfit needs input (--input)".into()));
                }
                self.column.get_or_insert_with(|| "abs_I".into());
            }
            "reconstruct" => {
                need(&self.t_list, "t_list (--t)")?;
                need(&self.z_list, "z_list (--z)")?;
                self.depth.get_or_insert(DbarOptions::default().depth);
            }
            "optimality" => {
                need(&self.t_list, "t_list (--t-list)")?;
            }
            _ => return Err(CliError::Config(format!("unknown command '{command}'"))),
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(th) = self.theta {
            if !(th >= 0.0) || !th.is_finite() {
                return Err(CliError::Config(format!("theta must be a finite number >= 0, got {th}")));
            }
        }
        if let Some(ts) = &self.t_list {
            if ts.iter().any(|t| !t.is_finite()) {
                return Err(CliError::Config("t_list has non-finite entries".into()));
            }
            if ts.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::Config(format!("t_list must be strictly ascending, got {ts:?}")));
            }
        }
        for list in [&self.u_list, &self.z_list].into_iter().flatten() {
            if list.iter().flatten().any(|x| !x.is_finite()) {
                return Err(CliError::Config("u_list / z_list have non-finite entries".into()));
            }
        }
        if let Some(d) = self.depth {
            if d < 1 {
                return Err(CliError::Config("depth must be >= 1".into()));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CliError::Config(format!("tol must be positive, got {tol}")));
            }
        }
        if self.profile.as_deref() == Some("sampled") && self.profile_file.is_none() {
            return Err(CliError::Config("profile 'sampled' needs profile_file".into()));
        }
        if self.profile.is_some() {
            self.grid()?.validate().map_err(CliError::from)?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let (Some(r0), Some(r1), Some(nr), Some(na), Some(order)) =
            (self.r_min, self.r_max, self.radial_panels, self.angular_panels, self.order)
        else {
            return Err(CliError::Config("grid keys unresolved".into()));
        };
        Ok(GridSpec::new(r0, r1, nr, na).with_order(order))
    }

    pub fn linear_options(&self) -> Result<LinearOptions, CliError> {
        Ok(LinearOptions { grid: self.grid()?, budget: self.budget.unwrap_or(LinearOptions::default().budget), ..LinearOptions::default() })
    }

    pub fn dbar_options(&self) -> Result<DbarOptions, CliError> {
        let d = DbarOptions::default();
        Ok(DbarOptions { grid: self.grid()?, budget: self.budget.unwrap_or(d.budget), depth: self.depth.unwrap_or(d.depth), ..d })
    }

    pub fn data(&self) -> Result<ScatteringData, CliError> {
        let theta = self.theta.unwrap_or(1.0);
        let profile = match self.profile.as_deref().unwrap_or("p1") {
            "p1" => return Ok(ScatteringData::p1(theta)),
            "p2" => return Ok(ScatteringData::p2(theta)),
            "zero" => Profile::Zero,
            "constant" => Profile::Constant,
            "sampled" => Profile::Sampled(Arc::new(load_profile(self.profile_file.as_deref().unwrap())?)),
            other => return Err(CliError::Config(format!("unknown profile '{other}' (p1, p2, zero, constant, sampled)"))),
        };
        Ok(ScatteringData::new(profile, theta))
    }

    pub fn u_values(&self) -> Vec<Complex64> {
        to_complex(self.u_list.as_deref().unwrap_or(&[]))
    }

    pub fn z_values(&self) -> Vec<Complex64> {
        to_complex(self.z_list.as_deref().unwrap_or(&[]))
    }
}

fn need<T>(v: &Option<Vec<T>>, what: &str) -> Result<(), CliError> {
    match v {
        Some(x) if !x.is_empty() => Ok(()),
        _ => Err(CliError::Config(format!("missing {what}"))),
    }
}

fn to_complex(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

/// `RE,IM` (or a bare real number).
pub fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("'{s}' is not RE,IM"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(format!("'{s}' is not RE,IM")),
    }
}

/// Rows `Re l, Im l, Re b, Im b`; a header row and `#` comments are allowed.
fn load_profile(path: &Path) -> Result<SampledProfile, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read profile {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("profile {}: {e}", path.display())))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|x| x.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Config(format!("profile {} row {}: not numeric", path.display(), i + 1)))?;
        if v.len() != 4 {
            return Err(CliError::Config(format!("profile {} row {}: expected 4 columns", path.display(), i + 1)));
        }
        rows.push((Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])));
    }
    SampledProfile::from_samples(&rows).map_err(CliError::from)
}
