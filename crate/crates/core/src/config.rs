//! TOML scenario configuration. Every physical quantity carries its unit in
//! the key name; unknown keys are rejected and semantic errors point at the
//! offending key's line.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linkphys::{LinkPhysics, MemoryModel};
use crate::orbit::{ConstellationSpec, GroundSite, Network};
use crate::protocol::{ProtocolParams, SegmentedVariant};
use crate::simkit::Scenario;
use crate::spacetime::UtilityWeights;

/// The reference scenario as shipped.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

/// JSON Schema describing the accepted keys.
pub const CONFIG_SCHEMA: &str = include_str!("../config/schema.json");

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub attempts_per_point: usize,
    #[serde(default = "default_variant")]
    pub segmented_variant: String,
    pub constellation: ConstellationSection,
    #[serde(default)]
    pub ground_stations: Vec<GroundStationSection>,
    pub link: LinkSection,
    pub memory: MemorySection,
    pub protocol: ProtocolSection,
    pub routing: RoutingSection,
    pub endpoints: EndpointsSection,
    pub simulation: SimulationSection,
}

fn default_variant() -> String {
    "reconciled".into()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSection {
    pub num_planes: usize,
    pub sats_per_plane: usize,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub earth_radius_km: f64,
    #[serde(default)]
    pub phasing_offset_deg: f64,
    pub max_link_range_km: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroundStationSection {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub path_loss_exponent: f64,
    pub p_t_watts: f64,
    pub n0_watts: f64,
    pub pointing_omega: f64,
    pub pointing_dof: u32,
    pub turbulence_alpha: f64,
    pub turbulence_beta: f64,
    pub fidelity_threshold: f64,
    pub reference_distance_m: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MemorySection {
    pub t_c_seconds: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub rate_ebits_per_second: f64,
    pub p_source_success: f64,
    pub p_bsm_success: f64,
    pub p_memory_mode_failure: f64,
    pub memory_modes: u32,
    pub t_bsm_seconds: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RoutingSection {
    pub fidelity_weight: f64,
    pub memory_weight: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EndpointsSection {
    pub source: String,
    pub destination: String,
    #[serde(default)]
    pub alternates: Vec<[String; 2]>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub horizon_seconds: f64,
    pub sample_dt_seconds: f64,
    pub transmission_times_seconds: Vec<f64>,
    #[serde(default)]
    pub coherence_sweep_seconds: Vec<f64>,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (or at top level for an empty section).
/// `ordinal` selects among repeated `[[section]]` tables.
fn find_key_line(text: &str, section: &str, ordinal: usize, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut seen: usize = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix("[[").and_then(|r| r.split("]]").next()) {
            let name = h.trim();
            if name != current {
                seen = 0;
            }
            current = name.to_string();
            seen += 1;
            continue;
        }
        if let Some(h) = line.strip_prefix('[').and_then(|r| r.split(']').next()) {
            current = h.trim().to_string();
            seen = 1;
            continue;
        }
        if current == section && (section.is_empty() || seen == ordinal + 1) {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(&self, section: &str, ordinal: usize, key: &str, message: impl Into<String>) -> Error {
        let full = match (section.is_empty(), section == "ground_stations") {
            (true, _) => key.to_string(),
            (false, true) => format!("{section}[{ordinal}].{key}"),
            (false, false) => format!("{section}.{key}"),
        };
        Error::Config {
            line: find_key_line(self.text, section, ordinal, key),
            key: Some(full),
            message: message.into(),
        }
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(self.fail(section, 0, key, format!("must be positive and finite, got {v}")))
        }
    }

    fn probability(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(self.fail(section, 0, key, format!("must lie in [0, 1], got {v}")))
        }
    }
}

impl Config {
    /// Parses and validates in one step.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config {
            key: None,
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn reference() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("shipped config is valid")
    }

    fn validate(&self, text: &str) -> Result<()> {
        let c = Checker { text };
        if self.attempts_per_point == 0 {
            return Err(c.fail("", 0, "attempts_per_point", "must be at least 1"));
        }
        if self.segmented_variant.parse::<SegmentedVariant>().is_err() {
            return Err(c.fail("", 0, "segmented_variant", "must be \"reconciled\" or \"literal\""));
        }
        let k = &self.constellation;
        let s = "constellation";
        if k.num_planes == 0 {
            return Err(c.fail(s, 0, "num_planes", "must be at least 1"));
        }
        if k.sats_per_plane == 0 {
            return Err(c.fail(s, 0, "sats_per_plane", "must be at least 1"));
        }
        c.positive(s, "altitude_km", k.altitude_km)?;
        c.positive(s, "earth_radius_km", k.earth_radius_km)?;
        c.positive(s, "max_link_range_km", k.max_link_range_km)?;
        if !(0.0..=180.0).contains(&k.inclination_deg) {
            return Err(c.fail(s, 0, "inclination_deg", "must lie in [0, 180]"));
        }
        if !k.phasing_offset_deg.is_finite() {
            return Err(c.fail(s, 0, "phasing_offset_deg", "must be finite"));
        }
        for (i, g) in self.ground_stations.iter().enumerate() {
            let s = "ground_stations";
            if g.name.is_empty() || g.name.contains(char::is_whitespace) {
                return Err(c.fail(s, i, "name", "must be non-empty without whitespace"));
            }
            if self.ground_stations[..i].iter().any(|o| o.name == g.name) {
                return Err(c.fail(s, i, "name", format!("duplicate ground station {:?}", g.name)));
            }
            if !(g.latitude_deg.abs() <= 90.0) {
                return Err(c.fail(s, i, "latitude_deg", "must lie in [-90, 90]"));
            }
            if !(g.longitude_deg.abs() <= 180.0) {
                return Err(c.fail(s, i, "longitude_deg", "must lie in [-180, 180]"));
            }
        }
        let l = &self.link;
        let s = "link";
        c.positive(s, "path_loss_exponent", l.path_loss_exponent)?;
        c.positive(s, "p_t_watts", l.p_t_watts)?;
        c.positive(s, "n0_watts", l.n0_watts)?;
        c.positive(s, "pointing_omega", l.pointing_omega)?;
        c.positive(s, "turbulence_alpha", l.turbulence_alpha)?;
        c.positive(s, "turbulence_beta", l.turbulence_beta)?;
        c.positive(s, "reference_distance_m", l.reference_distance_m)?;
        if l.pointing_dof == 0 {
            return Err(c.fail(s, 0, "pointing_dof", "must be at least 1"));
        }
        if !(l.fidelity_threshold > 0.25 && l.fidelity_threshold < 1.0) {
            return Err(c.fail(s, 0, "fidelity_threshold", "must lie in (0.25, 1)"));
        }
        c.positive("memory", "t_c_seconds", self.memory.t_c_seconds)?;
        let p = &self.protocol;
        let s = "protocol";
        c.positive(s, "rate_ebits_per_second", p.rate_ebits_per_second)?;
        c.probability(s, "p_source_success", p.p_source_success)?;
        c.probability(s, "p_bsm_success", p.p_bsm_success)?;
        c.probability(s, "p_memory_mode_failure", p.p_memory_mode_failure)?;
        if p.memory_modes == 0 {
            return Err(c.fail(s, 0, "memory_modes", "must be at least 1"));
        }
        if !(p.t_bsm_seconds >= 0.0 && p.t_bsm_seconds.is_finite()) {
            return Err(c.fail(s, 0, "t_bsm_seconds", "must be finite and non-negative"));
        }
        for (key, w) in [
            ("fidelity_weight", self.routing.fidelity_weight),
            ("memory_weight", self.routing.memory_weight),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(c.fail("routing", 0, key, "must be finite and non-negative"));
            }
        }
        let m = &self.simulation;
        let s = "simulation";
        c.positive(s, "horizon_seconds", m.horizon_seconds)?;
        c.positive(s, "sample_dt_seconds", m.sample_dt_seconds)?;
        if m.transmission_times_seconds.is_empty() {
            return Err(c.fail(s, 0, "transmission_times_seconds", "must list at least one time"));
        }
        if m.transmission_times_seconds
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(c.fail(
                s,
                0,
                "transmission_times_seconds",
                "times must be finite and non-negative",
            ));
        }
        if m.coherence_sweep_seconds.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(c.fail(s, 0, "coherence_sweep_seconds", "coherence times must be positive"));
        }
        let net = self
            .network()
            .map_err(|e| c.fail("constellation", 0, "num_planes", e.to_string()))?;
        let src = net
            .parse_node(&self.endpoints.source)
            .map_err(|e| c.fail("endpoints", 0, "source", e.to_string()))?;
        let dst = net
            .parse_node(&self.endpoints.destination)
            .map_err(|e| c.fail("endpoints", 0, "destination", e.to_string()))?;
        if src == dst {
            return Err(c.fail("endpoints", 0, "destination", "must differ from source"));
        }
        for pair in &self.endpoints.alternates {
            for n in pair {
                net.parse_node(n)
                    .map_err(|e| c.fail("endpoints", 0, "alternates", e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn network(&self) -> Result<Network> {
        let k = &self.constellation;
        let spec = ConstellationSpec::new(
            k.num_planes,
            k.sats_per_plane,
            k.altitude_km * 1000.0,
            k.inclination_deg.to_radians(),
            k.earth_radius_km * 1000.0,
            k.phasing_offset_deg.to_radians(),
        )?;
        let sites = self
            .ground_stations
            .iter()
            .map(|g| GroundSite::from_degrees(g.name.clone(), g.latitude_deg, g.longitude_deg))
            .collect::<Result<Vec<_>>>()?;
        Network::new(spec, sites, k.max_link_range_km * 1000.0)
    }

    pub fn physics(&self) -> LinkPhysics {
        let l = &self.link;
        LinkPhysics {
            gamma: l.path_loss_exponent,
            p_t: l.p_t_watts,
            n0: l.n0_watts,
            omega: l.pointing_omega,
            chi_n: l.pointing_dof,
            alpha_turb: l.turbulence_alpha,
            beta_turb: l.turbulence_beta,
            fidelity_threshold: l.fidelity_threshold,
            reference_distance: l.reference_distance_m,
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let network = self.network()?;
        let p = &self.protocol;
        let scenario = Scenario {
            source: network.parse_node(&self.endpoints.source)?,
            destination: network.parse_node(&self.endpoints.destination)?,
            network,
            physics: self.physics(),
            memory: MemoryModel::new(self.memory.t_c_seconds)?,
            protocol: ProtocolParams {
                rate: p.rate_ebits_per_second,
                p_s: p.p_source_success,
                p_b: p.p_bsm_success,
                p_m: p.p_memory_mode_failure,
                modes: p.memory_modes,
                t_bsm: p.t_bsm_seconds,
            },
            weights: UtilityWeights {
                fidelity: self.routing.fidelity_weight,
                memory: self.routing.memory_weight,
            },
            variant: self.segmented_variant.parse()?,
            horizon: self.simulation.horizon_seconds,
            sample_dt: self.simulation.sample_dt_seconds,
            transmission_times: self.simulation.transmission_times_seconds.clone(),
            coherence_sweep: self.simulation.coherence_sweep_seconds.clone(),
            attempts: self.attempts_per_point,
            seed: self.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_matches_reference_scenario() {
        let s = Config::reference().scenario().unwrap();
        let r = Scenario::reference();
        assert_eq!(s.network.constellation, r.network.constellation);
        assert_eq!(s.network.sites, r.network.sites);
        assert_eq!(s.network.max_range, r.network.max_range);
        assert_eq!(s.physics, r.physics);
        assert_eq!(s.protocol, r.protocol);
        assert_eq!((s.source, s.destination), (r.source, r.destination));
        assert_eq!(s.transmission_times, r.transmission_times);
        assert_eq!(s.coherence_sweep, r.coherence_sweep);
        assert_eq!((s.attempts, s.seed), (r.attempts, r.seed));
    }

    #[test]
    fn zero_horizon_names_key_and_line() {
        let text = DEFAULT_CONFIG.replace("horizon_seconds = 6000.0", "horizon_seconds = 0");
        let err = Config::from_toml(&text).unwrap_err();
        let Error::Config { key, line, .. } = &err else {
            panic!("{err}")
        };
        assert_eq!(key.as_deref(), Some("simulation.horizon_seconds"));
        let expected = text.lines().position(|l| l.starts_with("horizon_seconds")).unwrap() + 1;
        assert_eq!(*line, Some(expected));
        assert!(err.to_string().contains("horizon_seconds"));
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = DEFAULT_CONFIG.replace("[memory]\n", "[memory]\nt_c_minutes = 5\n");
        let err = Config::from_toml(&text).unwrap_err();
        let Error::Config { line, message, .. } = &err else {
            panic!("{err}")
        };
        assert!(message.contains("t_c_minutes"), "{message}");
        let expected = text.lines().position(|l| l.starts_with("t_c_minutes")).unwrap() + 1;
        assert_eq!(*line, Some(expected));
    }

    #[test]
    fn ground_station_errors_point_at_the_right_table() {
        let text = DEFAULT_CONFIG.replace("latitude_deg = 59.9139", "latitude_deg = 99.0");
        let err = Config::from_toml(&text).unwrap_err();
        let Error::Config { key, line, .. } = &err else {
            panic!("{err}")
        };
        assert_eq!(key.as_deref(), Some("ground_stations[1].latitude_deg"));
        let expected = text.lines().position(|l| l.starts_with("latitude_deg = 99.0")).unwrap() + 1;
        assert_eq!(*line, Some(expected));
    }

    #[test]
    fn bad_endpoint() {
        let text = DEFAULT_CONFIG.replace("source = \"sat-3\"", "source = \"sat-999\"");
        let err = Config::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("endpoints.source"), "{err}");
    }

    #[test]
    fn schema_lists_every_section() {
        for key in [
            "constellation",
            "ground_stations",
            "link",
            "memory",
            "protocol",
            "routing",
            "endpoints",
            "simulation",
            "horizon_seconds",
            "t_c_seconds",
        ] {
            assert!(CONFIG_SCHEMA.contains(&format!("\"{key}\"")), "{key}");
        }
    }
}
