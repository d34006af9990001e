//! Run configuration: a single JSON document.
//!
//! ```json
//! {
//!   "profile": { "type": "circle", "R": 1, "center": 0 },
//!   "u_range": [0, 6.283185307179586],
//!   "v_range": [-1, 1],
//!   "u_samples": 64,
//!   "v_samples": 64,
//!   "signs": "PlusPlus"
//! }
//! ```

use std::path::{Path, PathBuf};

use catoptrica_core::cylinder::{ProfileCurve, Signs};
use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_V_RANGE: [f64; 2] = [-1.0, 1.0];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// The offending field, when known.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// A complex number written as `x`, `[re, im]` or `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
    Parts { re: f64, im: f64 },
}

impl From<ComplexInput> for Complex64 {
    fn from(c: ComplexInput) -> Self {
        match c {
            ComplexInput::Real(x) => Complex64::new(x, 0.0),
            ComplexInput::Pair([re, im]) => Complex64::new(re, im),
            ComplexInput::Parts { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ProfileInput {
    Circle {
        #[serde(alias = "radius")]
        #[serde(rename = "R")]
        r: f64,
        #[serde(default)]
        center: Option<ComplexInput>,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Parabola {
        #[serde(alias = "focal_length")]
        f: f64,
        #[serde(default)]
        vertex_offset: f64,
    },
    Polynomial {
        coeffs: Vec<ComplexInput>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SignsChoice {
    PlusPlus,
    #[serde(alias = "All")]
    #[serde(rename = "all")]
    All,
}

impl SignsChoice {
    pub fn list(self) -> Vec<Signs> {
        match self {
            SignsChoice::PlusPlus => vec![Signs::PLUS_PLUS],
            SignsChoice::All => Signs::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which congruence the `wavefront` command integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WavefrontTarget {
    /// Normals of the mirror.
    #[default]
    Normals,
    /// The reflected point source.
    Reflected,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct WavefrontInput {
    #[serde(default)]
    congruence: WavefrontTarget,
    /// Signed distance of the wavefront from the mirror at the first grid node.
    #[serde(default)]
    offset: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    profile: ProfileInput,
    #[serde(default)]
    u_range: Option<[f64; 2]>,
    #[serde(default)]
    v_range: Option<[f64; 2]>,
    #[serde(default)]
    u_samples: Option<i64>,
    #[serde(default)]
    v_samples: Option<i64>,
    #[serde(default)]
    signs: Option<SignsChoice>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    format: Option<Format>,
    #[serde(default)]
    r_window: Option<[f64; 2]>,
    #[serde(default)]
    wavefront: Option<WavefrontInput>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefrontConfig {
    pub congruence: WavefrontTarget,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub profile: ProfileCurve,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub u_samples: usize,
    pub v_samples: usize,
    pub signs: SignsChoice,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Affine-parameter window for the caustic scan; defaults to
    /// `10 * scene_scale` on either side of the mirror.
    pub r_window: Option<(f64, f64)>,
    pub wavefront: WavefrontConfig,
}

fn finite(field: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::invalid(field, "must be finite"))
    }
}

fn range(field: &str, r: [f64; 2]) -> Result<(f64, f64), ConfigError> {
    let (a, b) = (finite(field, r[0])?, finite(field, r[1])?);
    if !(b > a) {
        return Err(ConfigError::invalid(
            field,
            format!("range [{a}, {b}] is empty or reversed"),
        ));
    }
    Ok((a, b))
}

fn samples(field: &str, n: Option<i64>) -> Result<usize, ConfigError> {
    match n {
        None => Ok(DEFAULT_SAMPLES),
        Some(n) if n >= 2 => Ok(n as usize),
        Some(n) => Err(ConfigError::invalid(
            field,
            format!("need at least 2 samples, got {n}"),
        )),
    }
}

fn positive(field: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(ConfigError::invalid(
            field,
            format!("must be positive, got {x}"),
        ))
    }
}

fn build_profile(p: ProfileInput, u_range: Option<[f64; 2]>) -> Result<ProfileCurve, ConfigError> {
    let explicit = u_range.map(|r| range("u_range", r)).transpose()?;
    let required =
        || explicit.ok_or_else(|| ConfigError::invalid("u_range", "required for this profile"));
    let curve = match p {
        ProfileInput::Circle { r, center } => {
            let r = positive("profile.R", r)?;
            let center: Complex64 = center.map(Into::into).unwrap_or_default();
            if !(center.re.is_finite() && center.im.is_finite()) {
                return Err(ConfigError::invalid("profile.center", "must be finite"));
            }
            let mut c = ProfileCurve::circle(center, r);
            if let Some(u) = explicit {
                c.u_range = u;
            }
            c
        }
        ProfileInput::Ellipse { a, b } => {
            let mut c = ProfileCurve::ellipse(positive("profile.a", a)?, positive("profile.b", b)?);
            if let Some(u) = explicit {
                c.u_range = u;
            }
            c
        }
        ProfileInput::Parabola { f, vertex_offset } => {
            let f = positive("profile.f", f)?;
            let off = finite("profile.vertex_offset", vertex_offset)?;
            ProfileCurve::parabola(f, off, required()?)
        }
        ProfileInput::Polynomial { coeffs } => {
            if coeffs.is_empty() {
                return Err(ConfigError::invalid("profile.coeffs", "must not be empty"));
            }
            let coeffs: Vec<Complex64> = coeffs.into_iter().map(Into::into).collect();
            if coeffs
                .iter()
                .any(|c| !(c.re.is_finite() && c.im.is_finite()))
            {
                return Err(ConfigError::invalid("profile.coeffs", "must be finite"));
            }
            if coeffs.iter().skip(1).all(|c| c.norm() == 0.0) {
                return Err(ConfigError::invalid(
                    "profile.coeffs",
                    "constant profile has no tangent",
                ));
            }
            ProfileCurve::polynomial(coeffs, required()?)
        }
    };
    Ok(curve)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &[u8]) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_slice(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let profile = build_profile(raw.profile, raw.u_range)?;
    let v_range = range("v_range", raw.v_range.unwrap_or(DEFAULT_V_RANGE))?;
    let r_window = raw.r_window.map(|w| range("r_window", w)).transpose()?;
    let wf = raw.wavefront.unwrap_or_default();
    Ok(RunConfig {
        u_range: profile.u_range,
        profile,
        v_range,
        u_samples: samples("u_samples", raw.u_samples)?,
        v_samples: samples("v_samples", raw.v_samples)?,
        signs: raw.signs.unwrap_or(SignsChoice::PlusPlus),
        out: raw.out,
        format: raw.format.unwrap_or_default(),
        r_window,
        wavefront: WavefrontConfig {
            congruence: wf.congruence,
            offset: finite("wavefront.offset", wf.offset)?,
        },
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

impl RunConfig {
    /// `(u, v)` sample points, row-major with `u` outer.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        catoptrica_core::cylinder::uv_grid(
            self.u_range,
            self.u_samples,
            self.v_range,
            self.v_samples,
        )
    }

    /// Largest distance from the source to a sampled mirror point.
    pub fn scene_scale(&self) -> f64 {
        let vmax = self.v_range.0.abs().max(self.v_range.1.abs());
        let n = self.u_samples.max(2);
        let (a, b) = self.u_range;
        let zmax = (0..n)
            .map(|k| {
                self.profile
                    .z0(a + (b - a) * k as f64 / (n - 1) as f64)
                    .norm()
            })
            .fold(0.0, f64::max);
        zmax.hypot(vmax).max(f64::MIN_POSITIVE)
    }

    pub fn caustic_window(&self) -> (f64, f64) {
        self.r_window.unwrap_or_else(|| {
            let s = 10.0 * self.scene_scale();
            (-s, s)
        })
    }
}
