//! Walker-delta constellation and ground-station kinematics.
//!
//! Satellites follow circular two-body orbits. Ground sites rotate with the
//! Earth at the sidereal rate. Both are expressed in one inertial frame that
//! coincides with the Earth-fixed frame at `t = 0`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{invalid, Error, Result};

/// Earth gravitational parameter, m^3/s^2.
pub const MU_EARTH: f64 = 3.986004418e14;
/// Earth sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.2921159e-5;
/// Mean Earth radius, m.
pub const EARTH_RADIUS: f64 = 6_371_000.0;

/// Slack allowed when a segment endpoint sits on the Earth's surface.
const LOS_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Satellite,
    Ground,
}

/// Identifies a network endpoint. Satellites are numbered `plane * sats_per_plane + slot`
/// starting from zero; ground sites by their position in the site list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: usize,
}

impl NodeId {
    pub const fn satellite(index: usize) -> Self {
        Self {
            kind: NodeKind::Satellite,
            index,
        }
    }

    pub const fn ground(index: usize) -> Self {
        Self {
            kind: NodeKind::Ground,
            index,
        }
    }

    pub fn is_satellite(self) -> bool {
        self.kind == NodeKind::Satellite
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Satellite => write!(f, "sat-{}", self.index),
            NodeKind::Ground => write!(f, "gs-{}", self.index),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    pub num_planes: usize,
    pub sats_per_plane: usize,
    /// Altitude above the mean Earth radius, m.
    pub altitude: f64,
    /// Orbital inclination, rad.
    pub inclination: f64,
    pub earth_radius: f64,
    /// Along-track phase shift between adjacent planes, rad.
    pub phasing_offset: f64,
}

impl ConstellationSpec {
    pub fn new(
        num_planes: usize,
        sats_per_plane: usize,
        altitude: f64,
        inclination: f64,
        earth_radius: f64,
        phasing_offset: f64,
    ) -> Result<Self> {
        let spec = Self {
            num_planes,
            sats_per_plane,
            altitude,
            inclination,
            earth_radius,
            phasing_offset,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 20 planes of 8 satellites at 550 km, 60 degrees inclination.
    pub fn reference() -> Self {
        Self {
            num_planes: 20,
            sats_per_plane: 8,
            altitude: 550_000.0,
            inclination: 60f64.to_radians(),
            earth_radius: EARTH_RADIUS,
            phasing_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_planes == 0 {
            return Err(invalid("num_planes must be at least 1"));
        }
        if self.sats_per_plane == 0 {
            return Err(invalid("sats_per_plane must be at least 1"));
        }
        if !(self.altitude > 0.0) || !self.altitude.is_finite() {
            return Err(invalid("altitude must be positive"));
        }
        if !(0.0..=PI).contains(&self.inclination) {
            return Err(invalid("inclination must lie in [0, pi]"));
        }
        if !(self.earth_radius > 0.0) {
            return Err(invalid("earth_radius must be positive"));
        }
        if !self.phasing_offset.is_finite() {
            return Err(invalid("phasing_offset must be finite"));
        }
        Ok(())
    }

    pub fn num_satellites(&self) -> usize {
        self.num_planes * self.sats_per_plane
    }

    pub fn semi_major_axis(&self) -> f64 {
        self.earth_radius + self.altitude
    }

    pub fn mean_motion(&self) -> f64 {
        (MU_EARTH / self.semi_major_axis().powi(3)).sqrt()
    }

    /// Orbital period `2 pi sqrt(a^3 / mu)`, s.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.mean_motion()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundSite {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
}

impl GroundSite {
    pub fn new(name: impl Into<String>, latitude: f64, longitude: f64) -> Result<Self> {
        if !(latitude.abs() <= PI / 2.0) {
            return Err(invalid("latitude must lie in [-pi/2, pi/2]"));
        }
        if !(longitude.abs() <= PI) {
            return Err(invalid("longitude must lie in [-pi, pi]"));
        }
        Ok(Self {
            name: name.into(),
            latitude,
            longitude,
        })
    }

    pub fn from_degrees(name: impl Into<String>, lat_deg: f64, lon_deg: f64) -> Result<Self> {
        Self::new(name, lat_deg.to_radians(), lon_deg.to_radians())
    }

    pub fn luxembourg() -> Self {
        Self::from_degrees("lux", 49.6116, 6.1319).expect("valid coordinates")
    }

    pub fn oslo() -> Self {
        Self::from_degrees("nor", 59.9139, 10.7522).expect("valid coordinates")
    }
}

/// Inertial position of satellite `sat` at time `t`.
pub fn propagate(spec: &ConstellationSpec, sat: NodeId, t: f64) -> Result<Vec3> {
    if sat.kind != NodeKind::Satellite {
        return Err(invalid(format!("{sat} is not a satellite")));
    }
    if sat.index >= spec.num_satellites() {
        return Err(Error::UnknownNode(sat.to_string()));
    }
    if !(t >= 0.0) {
        return Err(invalid("propagation time must be non-negative"));
    }
    let plane = sat.index / spec.sats_per_plane;
    let slot = sat.index % spec.sats_per_plane;
    let raan = 2.0 * PI * plane as f64 / spec.num_planes as f64;
    let phase0 = 2.0 * PI * slot as f64 / spec.sats_per_plane as f64 + plane as f64 * spec.phasing_offset;
    // Reduce the angle before the trig calls so t = k*P lands on the same point.
    let revs = t / spec.period();
    let u = phase0 + 2.0 * PI * revs.fract();
    let a = spec.semi_major_axis();
    let (su, cu) = u.sin_cos();
    let (sr, cr) = raan.sin_cos();
    let (si, ci) = spec.inclination.sin_cos();
    Ok(Vec3::new(
        a * (cr * cu - sr * su * ci),
        a * (sr * cu + cr * su * ci),
        a * su * si,
    ))
}

/// Inertial position of a ground site on a sphere of `earth_radius`.
pub fn ground_position(site: &GroundSite, earth_radius: f64, t: f64) -> Vec3 {
    let days = t * EARTH_ROTATION_RATE / (2.0 * PI);
    let lon = site.longitude + 2.0 * PI * days.fract();
    let (sl, cl) = site.latitude.sin_cos();
    let (so, co) = lon.sin_cos();
    Vec3::new(earth_radius * cl * co, earth_radius * cl * so, earth_radius * sl)
}

/// True when the straight segment `a`-`b` stays outside the Earth sphere.
pub fn line_of_sight(a: Vec3, b: Vec3, earth_radius: f64) -> bool {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let closest = if len2 == 0.0 {
        a
    } else {
        let s = (-a.dot(ab) / len2).clamp(0.0, 1.0);
        a + ab.scale(s)
    };
    closest.norm() >= earth_radius - LOS_TOLERANCE
}

/// Satellites plus ground sites, with the range threshold used for every link.
#[derive(Debug, Clone)]
pub struct Network {
    pub constellation: ConstellationSpec,
    pub sites: Vec<GroundSite>,
    /// Inclusive range threshold, m.
    pub max_range: f64,
}

impl Network {
    pub fn new(constellation: ConstellationSpec, sites: Vec<GroundSite>, max_range: f64) -> Result<Self> {
        constellation.validate()?;
        if !(max_range > 0.0) {
            return Err(invalid("max_range must be positive"));
        }
        Ok(Self {
            constellation,
            sites,
            max_range,
        })
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        (0..self.constellation.num_satellites())
            .map(NodeId::satellite)
            .chain((0..self.sites.len()).map(NodeId::ground))
            .collect()
    }

    pub fn position(&self, node: NodeId, t: f64) -> Result<Vec3> {
        match node.kind {
            NodeKind::Satellite => propagate(&self.constellation, node, t),
            NodeKind::Ground => self
                .sites
                .get(node.index)
                .map(|s| ground_position(s, self.constellation.earth_radius, t))
                .ok_or_else(|| Error::UnknownNode(node.to_string())),
        }
    }

    pub fn distance(&self, a: NodeId, b: NodeId, t: f64) -> Result<f64> {
        Ok(self.position(a, t)?.distance(self.position(b, t)?))
    }

    pub fn link_feasible(&self, a: NodeId, b: NodeId, t: f64) -> Result<bool> {
        let pa = self.position(a, t)?;
        let pb = self.position(b, t)?;
        Ok(line_of_sight(pa, pb, self.constellation.earth_radius) && pa.distance(pb) <= self.max_range)
    }

    /// Human-facing name: `sat-<i>` or `ground-<site name>`.
    pub fn node_name(&self, node: NodeId) -> String {
        match node.kind {
            NodeKind::Satellite => format!("sat-{}", node.index),
            NodeKind::Ground => match self.sites.get(node.index) {
                Some(s) => format!("ground-{}", s.name),
                None => node.to_string(),
            },
        }
    }

    pub fn parse_node(&self, name: &str) -> Result<NodeId> {
        if let Some(idx) = name.strip_prefix("sat-") {
            let index: usize = idx.parse().map_err(|_| Error::UnknownNode(name.to_string()))?;
            if index < self.constellation.num_satellites() {
                return Ok(NodeId::satellite(index));
            }
        } else if let Some(site) = name.strip_prefix("ground-") {
            if let Some(i) = self.sites.iter().position(|s| s.name == site) {
                return Ok(NodeId::ground(i));
            }
        }
        Err(Error::UnknownNode(name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ConstellationSpec {
        ConstellationSpec::reference()
    }

    #[test]
    fn radius_at_epoch() {
        let r = propagate(&spec(), NodeId::satellite(5), 0.0).unwrap();
        assert!((r.norm() - 6_921_000.0).abs() < 1e-6);
    }

    #[test]
    fn period_matches_kepler() {
        // 2*pi*sqrt(6921e3^3 / 3.986004418e14), evaluated independently.
        assert!((spec().period() - 5730.127089334606).abs() < 1e-6);
    }

    #[test]
    fn periodic_in_time() {
        let s = spec();
        let p = s.period();
        for i in [0, 3, 13, 159] {
            let a = propagate(&s, NodeId::satellite(i), 0.0).unwrap();
            let b = propagate(&s, NodeId::satellite(i), p).unwrap();
            assert!(a.distance(b) < 1e-6, "sat {i}: {}", a.distance(b));
        }
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(propagate(&spec(), NodeId::satellite(160), 0.0).is_err());
        assert!(propagate(&spec(), NodeId::ground(0), 0.0).is_err());
        assert!(propagate(&spec(), NodeId::satellite(0), -1.0).is_err());
    }

    #[test]
    fn ground_reference_points() {
        let eq = GroundSite::new("eq", 0.0, 0.0).unwrap();
        let p = ground_position(&eq, EARTH_RADIUS, 0.0);
        assert_eq!(p, Vec3::new(EARTH_RADIUS, 0.0, 0.0));
        let day = 2.0 * PI / EARTH_ROTATION_RATE;
        let q = ground_position(&eq, EARTH_RADIUS, day);
        assert!(q.distance(Vec3::new(EARTH_RADIUS, 0.0, 0.0)) < 1e-3);
        let pole = GroundSite::new("pole", PI / 2.0, 1.0).unwrap();
        for t in [0.0, 1234.5, 50_000.0] {
            let p = ground_position(&pole, EARTH_RADIUS, t);
            assert!(p.distance(Vec3::new(0.0, 0.0, EARTH_RADIUS)) < 1e-6);
        }
    }

    #[test]
    fn los_cases() {
        let r = 6_921_000.0;
        assert!(!line_of_sight(
            Vec3::new(r, 0.0, 0.0),
            Vec3::new(-r, 0.0, 0.0),
            EARTH_RADIUS
        ));
        let a = Vec3::new(r, 1.0, 2.0);
        assert!(line_of_sight(a, a, EARTH_RADIUS));
        // Closest approach 7000/sqrt(2) ~ 4950 km < 6371 km, so the chord is blocked.
        let a = Vec3::new(7_000_000.0, 0.0, 0.0);
        let b = Vec3::new(0.0, 7_000_000.0, 0.0);
        let closest = 7_000_000.0 / 2f64.sqrt();
        assert!(closest < EARTH_RADIUS);
        assert!(!line_of_sight(a, b, EARTH_RADIUS));
    }

    #[test]
    fn adjacent_in_plane_out_of_range() {
        let net = Network::new(spec(), vec![], 5_000_000.0).unwrap();
        let d = net.distance(NodeId::satellite(0), NodeId::satellite(1), 0.0).unwrap();
        let chord = 2.0 * 6_921_000.0 * (PI / 8.0).sin();
        assert!((d - chord).abs() < 1e-3);
        assert!(!net
            .link_feasible(NodeId::satellite(0), NodeId::satellite(1), 0.0)
            .unwrap());
    }

    #[test]
    fn range_threshold_inclusive() {
        let s = spec();
        let d = propagate(&s, NodeId::satellite(0), 0.0)
            .unwrap()
            .distance(propagate(&s, NodeId::satellite(1), 0.0).unwrap());
        let net = Network::new(s, vec![], d).unwrap();
        assert!(net
            .link_feasible(NodeId::satellite(0), NodeId::satellite(1), 0.0)
            .unwrap());
        assert!(net
            .link_feasible(NodeId::satellite(0), NodeId::satellite(0), 0.0)
            .unwrap());
    }

    #[test]
    fn names_round_trip() {
        let net = Network::new(spec(), vec![GroundSite::luxembourg(), GroundSite::oslo()], 5e6).unwrap();
        for n in net.nodes() {
            assert_eq!(net.parse_node(&net.node_name(n)).unwrap(), n);
        }
        assert!(net.parse_node("sat-160").is_err());
        assert!(net.parse_node("ground-paris").is_err());
    }
}
