//! Run configuration: one JSON document drives every subcommand.
//!
//! A document may carry more fields than a given subcommand reads, so the
//! same file can drive a whole pipeline (`evolve`, then `fit`, then
//! `collapse`); each command pulls out the fields it needs and validates
//! them before any compute starts. Unknown keys are rejected outright — a
//! typo in a field name must fail loudly, not silently fall back to a
//! default. The optional `command` key pins a document to one subcommand.
//!
//! Two digests are derived from a config:
//!
//! - [`RunConfig::physics_hash`] covers every field that can change the
//!   numbers in an output file (defaults resolved, so writing a default
//!   out explicitly does not change the hash) and is stamped into every
//!   artifact header as `config_sha256`.
//! - [`RunConfig::trajectory_hash`] covers only the fields that shape the
//!   evolved state itself — model, bond cap, step size, Trotter order,
//!   truncation tolerance, and the operator's site — so a checkpoint can
//!   be resumed under a longer `t_max` or different recording plan but
//!   never under different physics.

use std::fs;
use std::path::{Path, PathBuf};

use otoc::oracles::free_fermion::DEFAULT_QUADRATURE_POINTS;
use otoc::{
    CompetitorModel, HamiltonianSpec, Pauli, WindowConfig, XsFormGuess, DEFAULT_RESTART_SEED,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::run::Failure;

/// Trotter order used when the config omits `trotter_order`.
pub const DEFAULT_TROTTER_ORDER: u32 = 2;
/// Relative truncation tolerance used when the config omits `eps_rel`.
pub const DEFAULT_EPS_REL: f64 = 1e-12;
/// Recording stride used when the config omits `record_stride`.
pub const DEFAULT_RECORD_STRIDE: usize = 1;
/// Probe Pauli used when the config omits `probe_pauli`.
pub const DEFAULT_PROBE_PAULI: Pauli = Pauli::X;
/// Clock factor used when the config omits `clock_factor`.
pub const DEFAULT_CLOCK_FACTOR: f64 = 1.0;

/// Keys that never change any computed number: the command echo and the
/// file-system locations of inputs and outputs. They are stripped before
/// hashing so that re-running the same physics into a different directory
/// keeps the same `config_sha256`.
const NON_PHYSICS_KEYS: [&str; 7] = [
    "command",
    "data",
    "output",
    "entanglement_output",
    "fit_output",
    "checkpoint_out",
    "resume_from",
];

/// Keys that determine the trajectory prefix shared by a checkpointed run
/// and its resumption: everything that shapes the evolved operator state,
/// but not how long the run lasts or what is recorded along the way.
const TRAJECTORY_KEYS: [&str; 6] = ["model", "chi", "dt", "trotter_order", "eps_rel", "base_site"];

/// A full run description. Every field is optional at parse time; each
/// subcommand demands the ones it needs through the checked accessors,
/// which also enforce the numeric preconditions of the modules they feed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present, the subcommand this document is meant for; invoking
    /// any other subcommand with it is a validation error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Chain Hamiltonian (model, couplings, length, boundary).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<HamiltonianSpec>,
    /// Bond-dimension cap for MPO evolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<usize>,
    /// Trotter step size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Evolution time horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Record every n-th step (the initial and final steps are always
    /// recorded). Defaults to every step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    /// Trotter order, 1 or 2. Defaults to 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trotter_order: Option<u32>,
    /// Relative truncation tolerance per bond SVD. Defaults to 1e-12.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_rel: Option<f64>,
    /// Site (1-based) of the evolved Pauli-X operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_site: Option<usize>,
    /// Sites (1-based) probed by the squared commutator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_sites: Option<Vec<usize>>,
    /// Pauli used as the probe operator. Defaults to X.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_pauli: Option<Pauli>,
    /// Bond cuts (1-based; cut x separates sites 1..=x from the rest).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<usize>>,
    /// Early-growth window bounds for `fit` and `collapse`. Defaults to
    /// C in [1e-15, 0.1] at separations x >= 10.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowConfig>,
    /// Starting point for the wavefront fit. Defaults to
    /// (lambda, p, v_B, x0) = (1, 0.5, 1, 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guess: Option<XsFormGuess>,
    /// Competing spreading forms fitted alongside the wavefront form.
    /// Defaults to none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub competitors: Option<Vec<CompetitorModel>>,
    /// Seed for the fit's restart perturbations — the only randomness in
    /// any run. Defaults to the library's fixed restart seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Transverse-field ratio for the free-fermion oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    /// Multiplies evolution times before they enter the free-fermion
    /// closed form, converting chain-clock to analytic-clock time.
    /// Defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock_factor: Option<f64>,
    /// Starting quadrature node count for the free-fermion oracle
    /// (a power of two; the integrator refines from there). Defaults to
    /// the oracle's built-in 4096.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_points: Option<usize>,
    /// Input CSV for `fit` and `collapse` (columns `t,x,C`, extra columns
    /// ignored; `#` lines skipped).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    /// Primary artifact path of the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Entanglement CSV path for `evolve` (which reserves `output` for
    /// the OTOC grid).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entanglement_output: Option<PathBuf>,
    /// Fit-report JSON path for `collapse` (which reserves `output` for
    /// the rescaled points).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_output: Option<PathBuf>,
    /// Where to write the final MPO state (a `.json` sidecar with the
    /// trajectory digest and step count is written next to it).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_out: Option<PathBuf>,
    /// Checkpoint to continue from instead of starting at t = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume_from: Option<PathBuf>,
}

impl RunConfig {
    /// Reads and parses a config file. Both I/O and parse problems are
    /// validation failures: the run never started.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| {
            Failure::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            Failure::Validation(format!("invalid config {}: {e}", path.display()))
        })
    }

    /// Enforces the optional `command` pin against the invoked subcommand.
    pub fn check_command(&self, invoked: &str) -> Result<(), Failure> {
        match self.command.as_deref() {
            Some(pinned) if pinned != invoked => Err(Failure::Validation(format!(
                "config is pinned to command {pinned:?} but {invoked:?} was invoked"
            ))),
            _ => Ok(()),
        }
    }

    /// The config with defaults resolved and non-physics keys stripped:
    /// the canonical form both digests are computed from. Serialization
    /// is already canonical beyond that — object keys are sorted and
    /// floats print in shortest round-trip form.
    fn canonical_value(&self) -> Value {
        let mut value = serde_json::to_value(self).expect("a config always serializes");
        let map = value.as_object_mut().expect("a config serializes to an object");
        for key in NON_PHYSICS_KEYS {
            map.remove(key);
        }
        let defaults = [
            ("record_stride", json!(DEFAULT_RECORD_STRIDE)),
            ("trotter_order", json!(DEFAULT_TROTTER_ORDER)),
            ("eps_rel", json!(DEFAULT_EPS_REL)),
            ("probe_pauli", json!(DEFAULT_PROBE_PAULI)),
            ("clock_factor", json!(DEFAULT_CLOCK_FACTOR)),
            ("seed", json!(DEFAULT_RESTART_SEED)),
            ("quadrature_points", json!(DEFAULT_QUADRATURE_POINTS)),
            ("window", json!(WindowConfig::default())),
            ("guess", json!(XsFormGuess::default())),
            ("competitors", json!([])),
        ];
        for (key, resolved) in defaults {
            map.entry(key).or_insert(resolved);
        }
        value
    }

    /// Digest over every output-determining field, stamped into artifact
    /// headers as `config_sha256`.
    pub fn physics_hash(&self) -> String {
        sha256_hex(self.canonical_value().to_string().as_bytes())
    }

    /// Digest over the fields a checkpoint and its resumption must agree
    /// on; see the module docs.
    pub fn trajectory_hash(&self) -> String {
        let canonical = self.canonical_value();
        let map = canonical.as_object().expect("canonical form is an object");
        let mut picked = serde_json::Map::new();
        for key in TRAJECTORY_KEYS {
            if let Some(v) = map.get(key) {
                picked.insert(key.to_string(), v.clone());
            }
        }
        sha256_hex(Value::Object(picked).to_string().as_bytes())
    }

    // ---- checked accessors ------------------------------------------

    pub fn model(&self) -> Result<&HamiltonianSpec, Failure> {
        self.model.as_ref().ok_or_else(|| missing("model"))
    }

    pub fn chi(&self) -> Result<usize, Failure> {
        let chi = self.chi.ok_or_else(|| missing("chi"))?;
        if chi == 0 {
            return Err(Failure::Validation("chi must be at least 1".to_string()));
        }
        Ok(chi)
    }

    pub fn dt(&self) -> Result<f64, Failure> {
        let dt = self.dt.ok_or_else(|| missing("dt"))?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Failure::Validation(format!(
                "dt must be positive and finite, got {dt}"
            )));
        }
        Ok(dt)
    }

    pub fn t_max(&self) -> Result<f64, Failure> {
        let t_max = self.t_max.ok_or_else(|| missing("t_max"))?;
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(Failure::Validation(format!(
                "t_max must be non-negative and finite, got {t_max}"
            )));
        }
        Ok(t_max)
    }

    pub fn record_stride(&self) -> Result<usize, Failure> {
        let stride = self.record_stride.unwrap_or(DEFAULT_RECORD_STRIDE);
        if stride == 0 {
            return Err(Failure::Validation(
                "record_stride must be at least 1".to_string(),
            ));
        }
        Ok(stride)
    }

    pub fn trotter_order(&self) -> Result<u32, Failure> {
        let order = self.trotter_order.unwrap_or(DEFAULT_TROTTER_ORDER);
        if !(1..=2).contains(&order) {
            return Err(Failure::Validation(format!(
                "trotter_order must be 1 or 2, got {order}"
            )));
        }
        Ok(order)
    }

    pub fn eps_rel(&self) -> Result<f64, Failure> {
        let eps = self.eps_rel.unwrap_or(DEFAULT_EPS_REL);
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Failure::Validation(format!(
                "eps_rel must be non-negative and finite, got {eps}"
            )));
        }
        Ok(eps)
    }

    pub fn base_site(&self) -> Result<usize, Failure> {
        let site = self.base_site.ok_or_else(|| missing("base_site"))?;
        if site == 0 {
            return Err(Failure::Validation(
                "base_site indexing starts at 1".to_string(),
            ));
        }
        Ok(site)
    }

    pub fn probe_sites(&self) -> Result<&[usize], Failure> {
        let sites = self
            .probe_sites
            .as_deref()
            .ok_or_else(|| missing("probe_sites"))?;
        if sites.is_empty() {
            return Err(Failure::Validation(
                "probe_sites must name at least one site".to_string(),
            ));
        }
        if sites.contains(&0) {
            return Err(Failure::Validation(
                "probe_sites indexing starts at 1".to_string(),
            ));
        }
        Ok(sites)
    }

    pub fn probe_pauli(&self) -> Pauli {
        self.probe_pauli.unwrap_or(DEFAULT_PROBE_PAULI)
    }

    pub fn cuts(&self) -> Result<&[usize], Failure> {
        let cuts = self.cuts.as_deref().ok_or_else(|| missing("cuts"))?;
        if cuts.is_empty() {
            return Err(Failure::Validation(
                "cuts must name at least one bond".to_string(),
            ));
        }
        if cuts.contains(&0) {
            return Err(Failure::Validation(
                "cut indexing starts at 1".to_string(),
            ));
        }
        Ok(cuts)
    }

    pub fn window(&self) -> WindowConfig {
        self.window.unwrap_or_default()
    }

    pub fn guess(&self) -> XsFormGuess {
        self.guess.unwrap_or_default()
    }

    pub fn competitors(&self) -> &[CompetitorModel] {
        self.competitors.as_deref().unwrap_or(&[])
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_RESTART_SEED)
    }

    pub fn g(&self) -> Result<f64, Failure> {
        let g = self.g.ok_or_else(|| missing("g"))?;
        if !(g > 0.0) || !g.is_finite() {
            return Err(Failure::Validation(format!(
                "g must be positive and finite, got {g}"
            )));
        }
        Ok(g)
    }

    pub fn clock_factor(&self) -> Result<f64, Failure> {
        let factor = self.clock_factor.unwrap_or(DEFAULT_CLOCK_FACTOR);
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Failure::Validation(format!(
                "clock_factor must be positive and finite, got {factor}"
            )));
        }
        Ok(factor)
    }

    pub fn data(&self) -> Result<&Path, Failure> {
        self.data.as_deref().ok_or_else(|| missing("data"))
    }

    pub fn output(&self) -> Result<&Path, Failure> {
        self.output.as_deref().ok_or_else(|| missing("output"))
    }
}

fn missing(field: &str) -> Failure {
    Failure::Validation(format!("config field {field:?} is required by this command"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(digest.len() * 2);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}
