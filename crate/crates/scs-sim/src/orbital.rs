//! Circular-orbit placement and inertial/geodetic coordinate conversions.
//!
//! Conventions: spherical Earth of radius [`EARTH_RADIUS_KM`], Earth-centered
//! inertial frame with the prime meridian fixed at +X (Earth rotation is not
//! modeled), and circular orbits parameterized by altitude, inclination, RAAN,
//! and phase (true anomaly). Positions are single static snapshots; there is
//! no propagation over time.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScsError};
use crate::geom::Vec3;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Circular-orbit placement parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalElements {
    pub altitude_km: f64,
    /// Inclination, normalized to [0, 180).
    pub inclination_deg: f64,
    /// Right ascension of the ascending node, normalized to [0, 360).
    pub raan_deg: f64,
    /// True anomaly along the circular orbit, normalized to [0, 360).
    pub phase_deg: f64,
}

impl OrbitalElements {
    pub fn new(altitude_km: f64, inclination_deg: f64, raan_deg: f64, phase_deg: f64) -> Self {
        OrbitalElements {
            altitude_km,
            inclination_deg: wrap_deg(inclination_deg, 180.0),
            raan_deg: wrap_deg(raan_deg, 360.0),
            phase_deg: wrap_deg(phase_deg, 360.0),
        }
    }

    pub fn orbit_radius_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }
}

fn wrap_deg(angle: f64, period: f64) -> f64 {
    let a = angle % period;
    if a < 0.0 {
        a + period
    } else {
        a
    }
}

/// Earth-centered inertial position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EciPosition {
    pub x_km: f64,
    pub y_km: f64,
    pub z_km: f64,
}

impl EciPosition {
    pub fn new(x_km: f64, y_km: f64, z_km: f64) -> Self {
        EciPosition { x_km, y_km, z_km }
    }

    pub fn from_vec3(v: Vec3) -> Self {
        EciPosition::new(v.x, v.y, v.z)
    }

    pub fn as_vec3(&self) -> Vec3 {
        Vec3::new(self.x_km, self.y_km, self.z_km)
    }

    pub fn norm_km(&self) -> f64 {
        self.as_vec3().norm()
    }

    pub fn distance_km(&self, other: &EciPosition) -> f64 {
        self.as_vec3().sub(other.as_vec3()).norm()
    }
}

/// Geodetic coordinate under the spherical-Earth convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticCoord {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_km: f64,
}

/// Place a satellite on a circular orbit: the in-plane point at `phase` is
/// rotated by R_z(raan) · R_x(inclination).
pub fn orbit_position(elements: &OrbitalElements) -> EciPosition {
    let r = elements.orbit_radius_km();
    let inc = elements.inclination_deg.to_radians();
    let raan = elements.raan_deg.to_radians();
    let phase = elements.phase_deg.to_radians();

    let in_plane = Vec3::new(r * phase.cos(), r * phase.sin(), 0.0);
    let tilted = Vec3::new(
        in_plane.x,
        in_plane.y * inc.cos() - in_plane.z * inc.sin(),
        in_plane.y * inc.sin() + in_plane.z * inc.cos(),
    );
    EciPosition::new(
        tilted.x * raan.cos() - tilted.y * raan.sin(),
        tilted.x * raan.sin() + tilted.y * raan.cos(),
        tilted.z,
    )
}

/// Spherical-Earth geodetic conversion: lat = asin(z/|p|), lon = atan2(y, x),
/// alt = |p| − R_e. Longitude at the poles is defined as 0.
pub fn eci_to_geodetic(p: &EciPosition) -> Result<GeodeticCoord> {
    let norm = p.norm_km();
    if norm < 1e-12 {
        return Err(ScsError::DegeneratePosition);
    }
    let lat_deg = (p.z_km / norm).clamp(-1.0, 1.0).asin().to_degrees();
    let lon_deg = if p.x_km == 0.0 && p.y_km == 0.0 {
        0.0
    } else {
        p.y_km.atan2(p.x_km).to_degrees()
    };
    Ok(GeodeticCoord {
        lat_deg,
        lon_deg,
        alt_km: norm - EARTH_RADIUS_KM,
    })
}

/// Inverse of [`eci_to_geodetic`] under the same spherical convention.
pub fn geodetic_to_eci(g: &GeodeticCoord) -> EciPosition {
    let r = EARTH_RADIUS_KM + g.alt_km;
    let lat = g.lat_deg.to_radians();
    let lon = g.lon_deg.to_radians();
    EciPosition::new(
        r * lat.cos() * lon.cos(),
        r * lat.cos() * lon.sin(),
        r * lat.sin(),
    )
}

/// Canonical circular-orbit elements passing through an arbitrary position.
///
/// Positions produced by ball sampling (secondaries, targets) still need
/// orbital metadata. The polar-orbit parameterization (inclination 90°) is
/// the unique clean inverse: raan = atan2(y, x), phase from the z component.
pub fn elements_for_position(p: &EciPosition) -> Result<OrbitalElements> {
    let norm = p.norm_km();
    if norm < 1e-12 {
        return Err(ScsError::DegeneratePosition);
    }
    let phase = (p.z_km / norm).clamp(-1.0, 1.0).asin().to_degrees();
    let raan = if p.x_km == 0.0 && p.y_km == 0.0 {
        0.0
    } else {
        p.y_km.atan2(p.x_km).to_degrees()
    };
    Ok(OrbitalElements::new(
        norm - EARTH_RADIUS_KM,
        90.0,
        raan,
        phase,
    ))
}
