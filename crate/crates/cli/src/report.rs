//! `csent compute`: measure dispatch and structured reports.

use csent::discord::{geometric_discord, mid, DiscordArgmin, DiscordReport};
use csent::dist::fidelity;
use csent::ent::{bures_entanglement, convex_roof_bures, cse_discord_min, EntCertificate, EntOptions, EntReport};
use csent::{BoundDirection, ComplexMatrix, CsentError, DistanceKind, MultipartiteState, OptimOptions};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    FidelityPair,
    BuresDiscord,
    HsDiscord,
    MidBures,
    MidHs,
    BuresEntanglement,
    ConvexRoofBures,
    CseBures,
    CseHs,
}

impl Measure {
    pub const ALL: [Measure; 9] = [
        Measure::FidelityPair,
        Measure::BuresDiscord,
        Measure::HsDiscord,
        Measure::MidBures,
        Measure::MidHs,
        Measure::BuresEntanglement,
        Measure::ConvexRoofBures,
        Measure::CseBures,
        Measure::CseHs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::FidelityPair => "fidelity-pair",
            Measure::BuresDiscord => "bures-discord",
            Measure::HsDiscord => "hs-discord",
            Measure::MidBures => "mid-bures",
            Measure::MidHs => "mid-hs",
            Measure::BuresEntanglement => "bures-entanglement",
            Measure::ConvexRoofBures => "convex-roof-bures",
            Measure::CseBures => "cse-bures",
            Measure::CseHs => "cse-hs",
        }
    }

    pub fn parse(s: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    /// `None` keeps each quantifier's default.
    pub restarts: Option<usize>,
    pub tol: f64,
    pub fast_mode: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            restarts: None,
            tol: OptimOptions::default().tol,
            fast_mode: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.restarts == Some(0) {
            return Err("restarts must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        Ok(())
    }

    pub fn optim(&self) -> OptimOptions {
        OptimOptions {
            restarts: self.restarts,
            seed: self.seed,
            tol: self.tol,
            fast: self.fast_mode,
            ..OptimOptions::default()
        }
    }

    pub fn ent(&self) -> EntOptions {
        EntOptions {
            optim: self.optim(),
            ..EntOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputeReport {
    pub schema_version: u32,
    pub measure: &'static str,
    pub value: f64,
    pub bound_direction: &'static str,
    /// SHA-256 over the exact bit patterns of the certificate.
    pub certificate_sha256: Option<String>,
    pub restarts_run: usize,
    pub converged_fraction: f64,
    pub config: RunConfig,
}

impl ComputeReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("schema_version {}\n", self.schema_version));
        s.push_str(&format!("measure {}\n", self.measure));
        s.push_str(&format!("value {:.17e}\n", self.value));
        s.push_str(&format!("bound_direction {}\n", self.bound_direction));
        s.push_str(&format!(
            "certificate_sha256 {}\n",
            self.certificate_sha256.as_deref().unwrap_or("none")
        ));
        s.push_str(&format!("restarts_run {}\n", self.restarts_run));
        s.push_str(&format!("converged_fraction {}\n", self.converged_fraction));
        s.push_str(&format!("seed {}\n", self.config.seed));
        s.push_str(&format!(
            "restarts {}\n",
            self.config.restarts.map_or("default".to_string(), |r| r.to_string())
        ));
        s.push_str(&format!("tol {:e}\n", self.config.tol));
        s.push_str(&format!("fast_mode {}\n", self.config.fast_mode));
        s
    }
}

#[derive(Default)]
struct Digest64(Sha256);

impl Digest64 {
    fn tag(&mut self, t: &str) {
        self.0.update((t.len() as u64).to_le_bytes());
        self.0.update(t.as_bytes());
    }

    fn reals(&mut self, xs: &[f64]) {
        self.0.update((xs.len() as u64).to_le_bytes());
        for x in xs {
            self.0.update(x.to_bits().to_le_bytes());
        }
    }

    fn matrix(&mut self, m: &ComplexMatrix) {
        self.0.update((m.nrows() as u64).to_le_bytes());
        self.0.update((m.ncols() as u64).to_le_bytes());
        for z in m.iter() {
            self.0.update(z.re.to_bits().to_le_bytes());
            self.0.update(z.im.to_bits().to_le_bytes());
        }
    }

    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

pub fn discord_digest(r: &DiscordReport) -> String {
    let mut d = Digest64::default();
    let b = r.argmin.bases();
    d.tag("local-bases");
    d.matrix(&b.realized_a);
    d.matrix(&b.realized_b);
    if let DiscordArgmin::Cc(cc) = &r.argmin {
        d.tag("cc-probabilities");
        d.reals(cc.probs.as_slice());
    }
    d.finish()
}

pub fn ent_digest(r: &EntReport) -> String {
    let mut d = Digest64::default();
    match &r.certificate {
        EntCertificate::Schmidt(s) => {
            d.tag("schmidt");
            d.reals(s);
        }
        EntCertificate::Separable(a) => {
            d.tag("separable");
            d.reals(&[a.k as f64, a.da as f64, a.db as f64]);
            d.reals(&a.params);
        }
        EntCertificate::Roof(a) => {
            d.tag("roof");
            d.matrix(&a.frame);
            d.reals(&a.mixing_unitary_params);
            d.matrix(&a.spectral);
        }
    }
    d.finish()
}

fn from_discord(measure: Measure, r: DiscordReport, config: &RunConfig) -> ComputeReport {
    ComputeReport {
        schema_version: REPORT_SCHEMA_VERSION,
        measure: measure.name(),
        value: r.value,
        bound_direction: r.bound_direction.name(),
        certificate_sha256: Some(discord_digest(&r)),
        restarts_run: r.restarts,
        converged_fraction: r.converged_fraction,
        config: *config,
    }
}

fn from_ent(measure: Measure, r: EntReport, config: &RunConfig) -> ComputeReport {
    ComputeReport {
        schema_version: REPORT_SCHEMA_VERSION,
        measure: measure.name(),
        value: r.value,
        bound_direction: r.bound_direction.name(),
        certificate_sha256: Some(ent_digest(&r)),
        restarts_run: r.restarts,
        converged_fraction: r.converged_fraction,
        config: *config,
    }
}

/// Evaluates `measure`; `other` is required by `fidelity-pair` only.
pub fn compute(
    measure: Measure,
    rho: &MultipartiteState,
    other: Option<&MultipartiteState>,
    config: &RunConfig,
) -> Result<ComputeReport, CsentError> {
    let o = config.optim();
    let e = config.ent();
    Ok(match measure {
        Measure::FidelityPair => {
            let sigma = other.ok_or_else(|| CsentError::Domain("fidelity-pair needs a second state (--other)".into()))?;
            ComputeReport {
                schema_version: REPORT_SCHEMA_VERSION,
                measure: measure.name(),
                value: fidelity(rho, sigma)?,
                bound_direction: BoundDirection::Exact.name(),
                certificate_sha256: None,
                restarts_run: 0,
                converged_fraction: 1.0,
                config: *config,
            }
        }
        Measure::BuresDiscord => from_discord(measure, geometric_discord(rho, DistanceKind::BuresSquared, &o)?, config),
        Measure::HsDiscord => from_discord(measure, geometric_discord(rho, DistanceKind::HilbertSchmidt, &o)?, config),
        Measure::MidBures => from_discord(measure, mid(rho, DistanceKind::BuresSquared, &o)?, config),
        Measure::MidHs => from_discord(measure, mid(rho, DistanceKind::HilbertSchmidt, &o)?, config),
        Measure::BuresEntanglement => from_ent(measure, bures_entanglement(rho, &e)?, config),
        Measure::ConvexRoofBures => from_ent(measure, convex_roof_bures(rho, &e)?, config),
        Measure::CseBures => from_ent(measure, cse_discord_min(rho, DistanceKind::BuresSquared, &e)?, config),
        Measure::CseHs => from_ent(measure, cse_discord_min(rho, DistanceKind::HilbertSchmidt, &e)?, config),
    })
}
