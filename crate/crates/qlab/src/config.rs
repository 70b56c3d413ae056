//! Run configuration: one TOML tree covering every subcommand.
//!
//! Every key has a default, so an empty file is a valid config. Unknown keys are
//! rejected. A manifest is this same tree with the `[run]` table filled in.

use std::path::Path;

use qlab_core::gun::{ApparatusSpec, Barrier, DetectionMode, PacketSpec, Slit};
use qlab_core::mechanics::AnalyticPotential;
use qlab_core::schrodinger::{Boundary, PropagatorConfig};
use qlab_core::{Grid, PhysicalConstants, RealField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub constants: Constants,
    pub grid: GridConfig,
    pub packet: PacketConfig,
    pub potential: PotentialConfig,
    pub propagator: PropagatorSection,
    pub optics: OpticsConfig,
    pub mechanics: MechanicsConfig,
    pub ensemble: EnsembleConfig,
    pub apparatus: ApparatusConfig,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunRecord>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            constants: Constants::default(),
            grid: GridConfig::default(),
            packet: PacketConfig::default(),
            potential: PotentialConfig::default(),
            propagator: PropagatorSection::default(),
            optics: OpticsConfig::default(),
            mechanics: MechanicsConfig::default(),
            ensemble: EnsembleConfig::default(),
            apparatus: ApparatusConfig::default(),
            output: OutputConfig::default(),
            tolerances: Tolerances::default(),
            run: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// What produced a manifest: enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub version: String,
    /// Subcommand and its arguments, without global flags.
    pub command: Vec<String>,
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub hbar: f64,
    pub mass: f64,
    pub c: f64,
    pub omega: f64,
}

impl Default for Constants {
    fn default() -> Self {
        let p = PhysicalConstants::default();
        Constants { hbar: p.hbar, mass: p.mass, c: p.c, omega: p.omega }
    }
}

impl Constants {
    pub fn physical(&self) -> PhysicalConstants {
        PhysicalConstants { hbar: self.hbar, mass: self.mass, c: self.c, omega: self.omega }
    }
}

/// Grid for `propagate`, `bohm` and the wave checks. `ny = 0` means 1D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { x_min: -20.0, x_max: 20.0, nx: 256, y_min: -20.0, y_max: 20.0, ny: 0 }
    }
}

impl GridConfig {
    pub fn build(&self) -> qlab_core::Result<Grid> {
        if self.ny == 0 {
            Grid::line(self.x_min, self.x_max, self.nx)
        } else {
            Grid::plane((self.x_min, self.x_max, self.nx), (self.y_min, self.y_max, self.ny))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketConfig {
    pub x0: f64,
    pub y0: f64,
    pub sigma: f64,
    pub kx: f64,
    pub ky: f64,
}

impl Default for PacketConfig {
    fn default() -> Self {
        PacketConfig { x0: 0.0, y0: 0.0, sigma: 1.5, kx: 1.0, ky: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Free,
    Constant,
    Linear,
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// `U = value` for `constant`.
    pub value: f64,
    /// `U = -force x` for `linear`.
    pub force: f64,
    /// `U = stiffness x^2 / 2` for `harmonic`.
    pub stiffness: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig { kind: PotentialKind::Free, value: 0.0, force: 0.0, stiffness: 1.0 }
    }
}

impl PotentialConfig {
    pub fn analytic(&self) -> AnalyticPotential {
        match self.kind {
            PotentialKind::Free => AnalyticPotential::Free,
            PotentialKind::Constant => AnalyticPotential::Constant(self.value),
            PotentialKind::Linear => AnalyticPotential::Linear { force: self.force },
            PotentialKind::Harmonic => AnalyticPotential::Harmonic { stiffness: self.stiffness },
        }
    }

    pub fn sample(&self, grid: Grid) -> qlab_core::Result<RealField> {
        let p = *self;
        RealField::from_fn(grid, move |x, y| match p.kind {
            PotentialKind::Free => 0.0,
            PotentialKind::Constant => p.value,
            PotentialKind::Linear => -p.force * x,
            PotentialKind::Harmonic => 0.5 * p.stiffness * (x * x + y * y),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Reflecting,
    Absorbing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSection {
    pub dt: f64,
    pub steps: usize,
    pub boundary: BoundaryKind,
    pub absorber_width: f64,
    pub absorber_strength: f64,
    /// Norm samples and dumped snapshots every this many steps.
    pub record_stride: usize,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        PropagatorSection {
            dt: 0.01,
            steps: 1000,
            boundary: BoundaryKind::Reflecting,
            absorber_width: 4.0,
            absorber_strength: 5.0,
            record_stride: 100,
        }
    }
}

impl PropagatorSection {
    pub fn build(&self, grid: &Grid, constants: PhysicalConstants) -> PropagatorConfig {
        let mut cfg = PropagatorConfig::for_grid(grid, self.dt);
        cfg.constants = constants;
        cfg.boundary = match self.boundary {
            BoundaryKind::Reflecting => Boundary::Reflecting,
            BoundaryKind::Absorbing => {
                Boundary::Absorbing { width: self.absorber_width, strength: self.absorber_strength }
            }
        };
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Wave,
    Corpuscular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MediumKind {
    Gradient,
    TwoMedia,
}

/// Refraction and ray-tracing parameters. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpticsConfig {
    pub theta1: f64,
    /// Indices for the wave law, speeds for the corpuscular law.
    pub n1: f64,
    pub n2: f64,
    pub law: Law,
    pub medium: MediumKind,
    pub n0: f64,
    pub slope: f64,
    pub interface: f64,
    pub domain: f64,
    pub points: usize,
    pub start_x: f64,
    pub start_y: f64,
    pub angle: f64,
    pub ds: f64,
    pub steps: usize,
}

impl Default for OpticsConfig {
    fn default() -> Self {
        OpticsConfig {
            theta1: 30.0,
            n1: 1.0,
            n2: 1.5,
            law: Law::Wave,
            medium: MediumKind::Gradient,
            n0: 1.0,
            slope: 0.1,
            interface: 5.0,
            domain: 10.0,
            points: 101,
            start_x: 0.5,
            start_y: 0.0,
            angle: 0.0,
            ds: 0.01,
            steps: 800,
        }
    }
}

/// Fixed-energy action surfaces on a line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MechanicsConfig {
    pub energy: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub launch_x: f64,
    /// Launch both ways from `launch_x` instead of only toward +x.
    pub both_ways: bool,
    pub dt: f64,
}

impl Default for MechanicsConfig {
    fn default() -> Self {
        MechanicsConfig { energy: 1.0, x_min: 0.0, x_max: 4.0, nx: 81, launch_x: 0.0, both_ways: false, dt: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub count: usize,
    pub bins: usize,
    /// Ensemble run length; 0 means until a free packet's width doubles, `2 sqrt(3) m sigma0^2 / hbar`.
    pub duration: f64,
    pub dt: f64,
    pub checkpoints: usize,
    /// Trajectories written by `bohm`.
    pub written: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { count: 100_000, bins: 50, duration: 0.0, dt: 0.02, checkpoints: 4, written: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApparatusConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    pub packet_x: f64,
    pub packet_y: f64,
    pub sigma: f64,
    pub k0: f64,
    pub barrier_x: f64,
    pub screen_x: f64,
    pub single_slit_width: f64,
    pub double_slit_separation: f64,
    pub double_slit_width: f64,
    pub run_time: f64,
    pub dt: f64,
    pub absorber_width: f64,
    pub absorber_strength: f64,
    pub shots: usize,
    pub bins: usize,
    /// PGM snapshot every this many steps (0 = none).
    pub snapshot_stride: usize,
}

impl Default for ApparatusConfig {
    fn default() -> Self {
        let d = ApparatusSpec::double_slit(4.0, 1.5);
        let b = d.barrier.as_ref().expect("double slit has a barrier");
        ApparatusConfig {
            x_min: d.x.0,
            x_max: d.x.1,
            nx: d.x.2,
            y_min: d.y.0,
            y_max: d.y.1,
            ny: d.y.2,
            packet_x: d.packet.center[0],
            packet_y: d.packet.center[1],
            sigma: d.packet.sigma,
            k0: d.packet.k0,
            barrier_x: b.x,
            screen_x: d.screen_x,
            single_slit_width: 2.0,
            double_slit_separation: 4.0,
            double_slit_width: 1.5,
            run_time: d.run_time,
            dt: d.dt,
            absorber_width: d.absorber_width,
            absorber_strength: d.absorber_strength,
            shots: d.shots,
            bins: d.bins,
            snapshot_stride: 50,
        }
    }
}

impl ApparatusConfig {
    /// Experiment 1: no barrier; 2: one slit; 3: two slits.
    pub fn spec(&self, experiment: u8, mode: DetectionMode, constants: PhysicalConstants) -> ApparatusSpec {
        let slit = |center, width| Slit { center, width };
        let barrier = match experiment {
            1 => None,
            2 => Some(vec![slit(0.0, self.single_slit_width)]),
            _ => {
                let h = 0.5 * self.double_slit_separation;
                Some(vec![slit(-h, self.double_slit_width), slit(h, self.double_slit_width)])
            }
        };
        ApparatusSpec {
            x: (self.x_min, self.x_max, self.nx),
            y: (self.y_min, self.y_max, self.ny),
            packet: PacketSpec { center: [self.packet_x, self.packet_y], sigma: self.sigma, k0: self.k0 },
            barrier: barrier.map(|slits| Barrier { x: self.barrier_x, slits }),
            screen_x: self.screen_x,
            run_time: self.run_time,
            dt: self.dt,
            absorber_width: self.absorber_width,
            absorber_strength: self.absorber_strength,
            mode,
            shots: self.shots,
            bins: self.bins,
            snapshot_stride: self.snapshot_stride,
            constants,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Overridden by `--out`, then by the `QLAB_OUT` environment variable.
    pub dir: String,
    /// Also write raw field dumps next to the CSVs.
    pub binary: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "qlab-out".into(), binary: true }
    }
}

/// Pass thresholds for `check`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub norm_drift: f64,
    pub eikonal_residual: f64,
    /// Expected ratio under halving of epsilon or hbar, and its relative tolerance.
    pub scaling_ratio: f64,
    pub scaling_relative: f64,
    /// Accepted band for the error ratio under halved spacing.
    pub order_ratio_min: f64,
    pub order_ratio_max: f64,
    pub hj_time_dependent: f64,
    pub momentum_relative: f64,
    pub equivariance_factor: f64,
    pub modes_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm_drift: 1e-10,
            eikonal_residual: 1e-10,
            scaling_ratio: 4.0,
            scaling_relative: 0.05,
            order_ratio_min: 3.5,
            order_ratio_max: 4.5,
            hj_time_dependent: 1e-8,
            momentum_relative: 1e-3,
            equivariance_factor: 2.0,
            modes_factor: 2.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("sed = 3").is_err());
        assert!(RunConfig::parse("[grid]\nnz = 3").is_err());
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let c = RunConfig::parse("seed = 9\n[grid]\nnx = 64\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.grid.nx, 64);
        assert_eq!(c.grid.x_min, GridConfig::default().x_min);
    }

    #[test]
    fn serialized_config_round_trips() {
        let mut c = RunConfig {
            run: Some(RunRecord { version: "x".into(), command: vec!["snell".into()], threads: 1 }),
            ..Default::default()
        };
        c.potential.kind = PotentialKind::Harmonic;
        let text = c.to_toml();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
        assert_eq!(RunConfig::parse(&text).unwrap().to_toml(), text);
    }

    #[test]
    fn apparatus_defaults_match_core_desk() {
        let mut spec = ApparatusConfig::default().spec(3, DetectionMode::Copenhagen, PhysicalConstants::default());
        spec.snapshot_stride = 0;
        assert_eq!(spec, ApparatusSpec::double_slit(4.0, 1.5));
    }
}
