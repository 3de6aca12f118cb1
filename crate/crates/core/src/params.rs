//! Kinetic parameters of the coagulation model and the state space.
//!
//! All quantities are nondimensional. The JSON form is a flat object with
//! keys `k1..k8`, `kbar6`, `kbar8`, `h1..h8`, `rho3..rho8` and `D1..D8`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Concentrations `(v1, ..., v7, T)`; index 7 is thrombin.
pub type State = [f64; 8];

pub const NSPECIES: usize = 8;

/// Rate constants, capacities and diffusion coefficients.
///
/// `rho8` doubles as `T0`, the thrombin capacity. Species `v1` and `v2`
/// (the complexes) carry no capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub k6: f64,
    pub k7: f64,
    pub k8: f64,
    pub kbar6: f64,
    pub kbar8: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
    pub h5: f64,
    pub h6: f64,
    pub h7: f64,
    pub h8: f64,
    pub rho3: f64,
    pub rho4: f64,
    pub rho5: f64,
    pub rho6: f64,
    pub rho7: f64,
    pub rho8: f64,
    pub diffusion: [f64; 8],
}

/// JSON key order used for serialization.
pub const PARAM_KEYS: [&str; 32] = [
    "k1", "k2", "k3", "k4", "k5", "k6", "k7", "k8", "kbar6", "kbar8", "h1", "h2", "h3", "h4", "h5",
    "h6", "h7", "h8", "rho3", "rho4", "rho5", "rho6", "rho7", "rho8", "D1", "D2", "D3", "D4", "D5",
    "D6", "D7", "D8",
];

impl KineticParams {
    /// Every rate, capacity and diffusion coefficient set to one.
    pub fn unit() -> Self {
        Self::from_values(&[1.0; 32])
    }

    fn from_values(v: &[f64; 32]) -> Self {
        Self {
            k1: v[0],
            k2: v[1],
            k3: v[2],
            k4: v[3],
            k5: v[4],
            k6: v[5],
            k7: v[6],
            k8: v[7],
            kbar6: v[8],
            kbar8: v[9],
            h1: v[10],
            h2: v[11],
            h3: v[12],
            h4: v[13],
            h5: v[14],
            h6: v[15],
            h7: v[16],
            h8: v[17],
            rho3: v[18],
            rho4: v[19],
            rho5: v[20],
            rho6: v[21],
            rho7: v[22],
            rho8: v[23],
            diffusion: [v[24], v[25], v[26], v[27], v[28], v[29], v[30], v[31]],
        }
    }

    /// Values in [`PARAM_KEYS`] order.
    pub fn values(&self) -> [f64; 32] {
        let d = self.diffusion;
        [
            self.k1, self.k2, self.k3, self.k4, self.k5, self.k6, self.k7, self.k8, self.kbar6,
            self.kbar8, self.h1, self.h2, self.h3, self.h4, self.h5, self.h6, self.h7, self.h8,
            self.rho3, self.rho4, self.rho5, self.rho6, self.rho7, self.rho8, d[0], d[1], d[2],
            d[3], d[4], d[5], d[6], d[7],
        ]
    }

    pub fn values_mut(&mut self) -> [&mut f64; 32] {
        let [d1, d2, d3, d4, d5, d6, d7, d8] = &mut self.diffusion;
        [
            &mut self.k1,
            &mut self.k2,
            &mut self.k3,
            &mut self.k4,
            &mut self.k5,
            &mut self.k6,
            &mut self.k7,
            &mut self.k8,
            &mut self.kbar6,
            &mut self.kbar8,
            &mut self.h1,
            &mut self.h2,
            &mut self.h3,
            &mut self.h4,
            &mut self.h5,
            &mut self.h6,
            &mut self.h7,
            &mut self.h8,
            &mut self.rho3,
            &mut self.rho4,
            &mut self.rho5,
            &mut self.rho6,
            &mut self.rho7,
            &mut self.rho8,
            d1,
            d2,
            d3,
            d4,
            d5,
            d6,
            d7,
            d8,
        ]
    }

    /// Thrombin capacity `T0 = rho8`.
    pub fn t0(&self) -> f64 {
        self.rho8
    }

    /// Capacity of species `i` (0-based), `None` for the two complexes.
    pub fn capacity(&self, i: usize) -> Option<f64> {
        match i {
            2 => Some(self.rho3),
            3 => Some(self.rho4),
            4 => Some(self.rho5),
            5 => Some(self.rho6),
            6 => Some(self.rho7),
            7 => Some(self.rho8),
            _ => None,
        }
    }

    pub fn max_diffusion(&self) -> f64 {
        self.diffusion.iter().copied().fold(0.0, f64::max)
    }

    /// Checks that every field is finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (key, value) in PARAM_KEYS.iter().zip(self.values()) {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Schema(format!("{key} must be > 0")));
            }
        }
        Ok(())
    }

    /// Parses the flat JSON object, naming the offending key on failure.
    pub fn from_json_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Schema("params must be a JSON object".into()))?;
        Self::from_map(obj)
    }

    fn from_map(obj: &Map<String, Value>) -> Result<Self> {
        for key in obj.keys() {
            if !PARAM_KEYS.contains(&key.as_str()) {
                let hint = match key.as_str() {
                    "rho1" | "rho2" => " (v1 and v2 have no capacity)",
                    _ => "",
                };
                return Err(Error::Schema(format!("unknown key \"{key}\"{hint}")));
            }
        }
        let mut values = [0.0; 32];
        for (slot, key) in values.iter_mut().zip(PARAM_KEYS) {
            let v = obj
                .get(key)
                .ok_or_else(|| Error::Schema(format!("missing key \"{key}\"")))?;
            *slot = v
                .as_f64()
                .ok_or_else(|| Error::Schema(format!("{key} must be a number")))?;
        }
        let params = Self::from_values(&values);
        params.validate()?;
        Ok(params)
    }

    pub fn to_json_value(&self) -> Value {
        let mut map = Map::new();
        for (key, v) in PARAM_KEYS.iter().zip(self.values()) {
            map.insert((*key).to_string(), Value::from(v));
        }
        Value::Object(map)
    }
}

impl Serialize for KineticParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(PARAM_KEYS.len()))?;
        for (key, v) in PARAM_KEYS.iter().zip(self.values()) {
            map.serialize_entry(key, &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for KineticParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        Self::from_json_value(&value).map_err(serde::de::Error::custom)
    }
}

/// Membership in the region `C`: all components nonnegative, and species
/// 3..8 below their capacities.
pub fn in_region_c(params: &KineticParams, v: &State) -> bool {
    first_violation_of_c(params, v).is_none()
}

/// 0-based index of the first component violating `C`.
pub fn first_violation_of_c(params: &KineticParams, v: &State) -> Option<usize> {
    v.iter().enumerate().find_map(|(i, &vi)| {
        let above = params.capacity(i).is_some_and(|cap| vi > cap);
        (vi < 0.0 || above || !vi.is_finite()).then_some(i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_keeps_every_key() {
        let mut p = KineticParams::unit();
        p.h8 = 2.5;
        p.diffusion[3] = 0.25;
        let v = p.to_json_value();
        assert_eq!(v.as_object().unwrap().len(), 32);
        let back: KineticParams = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn negative_rate_names_the_key() {
        let mut v = KineticParams::unit().to_json_value();
        v["h3"] = Value::from(-1.0);
        let err = KineticParams::from_json_value(&v).unwrap_err();
        assert_eq!(err.to_string(), "schema error: h3 must be > 0");
    }

    #[test]
    fn rho1_is_rejected() {
        let mut v = KineticParams::unit().to_json_value();
        v["rho1"] = Value::from(1.0);
        let err = KineticParams::from_json_value(&v).unwrap_err().to_string();
        assert!(err.contains("rho1"), "{err}");
        assert!(err.contains("no capacity"), "{err}");
    }

    #[test]
    fn missing_key_is_reported() {
        let mut v = KineticParams::unit().to_json_value();
        v.as_object_mut().unwrap().remove("D5");
        let err = KineticParams::from_json_value(&v).unwrap_err().to_string();
        assert!(err.contains("D5"), "{err}");
    }

    #[test]
    fn region_c_membership() {
        let p = KineticParams::unit();
        assert!(in_region_c(&p, &[5.0, 5.0, 0.5, 0.5, 0.5, 0.5, 0.5, 1.0]));
        assert_eq!(
            first_violation_of_c(&p, &[0.0, 0.0, 1.5, 0.0, 0.0, 0.0, 0.0, 0.0]),
            Some(2)
        );
        assert_eq!(
            first_violation_of_c(&p, &[-1e-3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            Some(0)
        );
    }
}
