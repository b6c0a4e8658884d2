use serde::{Deserialize, Serialize};

use super::hierarchy::{Hierarchy, NodeId};
use crate::error::{Error, Result};

/// Mean Earth radius used for great-circle distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// A point in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub lat: f64,
    pub lon: f64,
}

impl Centroid {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::Data(format!(
                "coordinates ({lat}, {lon}) outside [-90, 90] x [-180, 180]"
            )));
        }
        Ok(Centroid { lat, lon })
    }
}

/// Haversine great-circle distance in kilometres.
pub fn haversine_km(a: Centroid, b: Centroid) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Distance between the centroids of two spatial nodes.
pub fn geo_distance(zones: &Hierarchy, a: NodeId, b: NodeId) -> Result<f64> {
    zones.check(a)?;
    zones.check(b)?;
    let centroid = |id: NodeId| {
        zones.node(id).centroid.ok_or_else(|| {
            Error::Data(format!("location {:?} has no centroid", zones.key(id)))
        })
    };
    Ok(haversine_km(centroid(a)?, centroid(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent route: chord length between unit vectors, then arc length.
    fn chord_oracle(a: Centroid, b: Centroid) -> f64 {
        let v = |c: Centroid| {
            let (p, l) = (c.lat.to_radians(), c.lon.to_radians());
            [p.cos() * l.cos(), p.cos() * l.sin(), p.sin()]
        };
        let (u, w) = (v(a), v(b));
        let chord = ((u[0] - w[0]).powi(2) + (u[1] - w[1]).powi(2) + (u[2] - w[2]).powi(2)).sqrt();
        2.0 * EARTH_RADIUS_KM * (chord / 2.0).min(1.0).asin()
    }

    #[test]
    fn known_distances() {
        let origin = Centroid::new(0.0, 0.0).unwrap();
        assert_eq!(haversine_km(origin, origin), 0.0);
        let antipode = Centroid::new(0.0, 180.0).unwrap();
        // pi * 6371
        assert!((haversine_km(origin, antipode) - 20015.086796).abs() < 1e-3);
        let paris = Centroid::new(48.8566, 2.3522).unwrap();
        let london = Centroid::new(51.5074, -0.1278).unwrap();
        let d = haversine_km(paris, london);
        assert!((d - chord_oracle(paris, london)).abs() < 1e-6);
        assert!((d - 343.556).abs() < 0.01, "{d}");
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Centroid::new(91.0, 0.0).is_err());
        assert!(Centroid::new(0.0, -181.0).is_err());
    }

    fn point() -> impl Strategy<Value = Centroid> {
        (-90.0f64..=90.0, -180.0f64..=180.0).prop_map(|(lat, lon)| Centroid { lat, lon })
    }

    proptest! {
        #[test]
        fn metric_properties(a in point(), b in point(), c in point()) {
            let ab = haversine_km(a, b);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - haversine_km(b, a)).abs() <= 1e-9 * ab.max(1.0));
            let tol = 1e-6 * (ab + haversine_km(b, c)).max(1.0);
            prop_assert!(haversine_km(a, c) <= ab + haversine_km(b, c) + tol);
            prop_assert!((ab - chord_oracle(a, b)).abs() < 1e-6);
        }
    }
}
