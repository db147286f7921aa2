use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Radial profile `phi(|x|)` of a nonnegative even pair potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum RadialProfile {
    /// `height * 1{r <= radius}`
    Indicator { height: f64, radius: f64 },
    /// `amplitude * exp(-r / length)`
    ExponentialDecay { amplitude: f64, length: f64 },
    /// `amplitude * (1 + r)^{-exponent}`
    PowerTail { amplitude: f64, exponent: f64 },
    /// Piecewise linear through `(radii[i], values[i])`, zero beyond the last
    /// radius. Radii must start at 0 and increase strictly.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl RadialProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidPotential(msg.to_string()));
        match self {
            RadialProfile::Indicator { height, radius } => {
                if !(height.is_finite() && *height >= 0.0 && radius.is_finite() && *radius >= 0.0) {
                    return bad("indicator needs finite height >= 0 and radius >= 0");
                }
            }
            RadialProfile::ExponentialDecay { amplitude, length } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0 && length.is_finite() && *length > 0.0) {
                    return bad("exponential decay needs amplitude >= 0 and length > 0");
                }
            }
            RadialProfile::PowerTail { amplitude, exponent } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0 && exponent.is_finite() && *exponent > 0.0) {
                    return bad("power tail needs amplitude >= 0 and exponent > 0");
                }
            }
            RadialProfile::Tabulated { radii, values } => {
                if radii.len() != values.len() || radii.is_empty() {
                    return bad("tabulated profile needs matching nonempty radii and values");
                }
                if radii[0] != 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !r.is_finite()) {
                    return bad("tabulated radii must start at 0 and increase strictly");
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return bad("tabulated values must be finite and >= 0");
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Indicator { height, radius } => {
                if r <= *radius {
                    *height
                } else {
                    0.0
                }
            }
            RadialProfile::ExponentialDecay { amplitude, length } => amplitude * (-r / length).exp(),
            RadialProfile::PowerTail { amplitude, exponent } => amplitude * (1.0 + r).powf(-exponent),
            RadialProfile::Tabulated { radii, values } => {
                let last = radii.len() - 1;
                if r > radii[last] {
                    return 0.0;
                }
                let i = radii.partition_point(|&q| q <= r).saturating_sub(1).min(last);
                if i == last {
                    return values[last];
                }
                let t = (r - radii[i]) / (radii[i + 1] - radii[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    /// Radius beyond which the profile vanishes, if finite.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            RadialProfile::Indicator { radius, .. } => Some(*radius),
            RadialProfile::Tabulated { radii, .. } => radii.last().copied(),
            RadialProfile::ExponentialDecay { amplitude, .. } | RadialProfile::PowerTail { amplitude, .. } => {
                (*amplitude == 0.0).then_some(0.0)
            }
        }
    }

    /// Radii where the profile or its derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RadialProfile::Indicator { radius, .. } => vec![*radius],
            RadialProfile::Tabulated { radii, .. } => radii.clone(),
            _ => Vec::new(),
        }
    }
}

/// Nonnegative even pair potential `phi(x) = profile(|x|)` on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPairPotential {
    dimension: usize,
    profile: RadialProfile,
}

impl RadialPairPotential {
    pub fn new(dimension: usize, profile: RadialProfile) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidPotential("dimension must be positive".into()));
        }
        profile.validate()?;
        Ok(Self { dimension, profile })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn value_at(&self, displacement: &[f64]) -> f64 {
        let r = displacement.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.profile.value(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_evaluate() {
        let ind = RadialProfile::Indicator { height: 2.0, radius: 0.5 };
        assert_eq!(ind.value(0.5), 2.0);
        assert_eq!(ind.value(0.51), 0.0);
        let tab = RadialProfile::Tabulated {
            radii: vec![0.0, 1.0, 2.0],
            values: vec![2.0, 1.0, 0.0],
        };
        assert_eq!(tab.value(0.5), 1.5);
        assert_eq!(tab.value(1.0), 1.0);
        assert_eq!(tab.value(3.0), 0.0);
        let e = RadialProfile::ExponentialDecay { amplitude: 1.0, length: 2.0 };
        assert!((e.value(2.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn even_and_nonnegative() {
        let p = RadialPairPotential::new(2, RadialProfile::PowerTail { amplitude: 1.0, exponent: 3.0 }).unwrap();
        assert_eq!(p.value_at(&[0.3, -0.4]), p.value_at(&[-0.3, 0.4]));
        assert!(RadialPairPotential::new(1, RadialProfile::Indicator { height: -1.0, radius: 1.0 }).is_err());
    }
}
