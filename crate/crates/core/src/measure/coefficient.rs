//! Continuous coefficient fields `a: Omega -> [c_a, C_a]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientField {
    Constant {
        value: f64,
    },
    /// `base + amplitude * sin(frequency x) sin(frequency y)`.
    Sinusoidal {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `base + amplitude * min(|x - center|, 1)^exponent`.
    RadialHolder {
        base: f64,
        amplitude: f64,
        exponent: f64,
        center: [f64; 2],
    },
}

/// Declared modulus of continuity `omega_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    Constant,
    Holder { exponent: f64, scale: f64 },
    Lipschitz { scale: f64 },
}

impl Modulus {
    pub fn bound(&self, dist: f64) -> f64 {
        match *self {
            Modulus::Constant => 0.0,
            Modulus::Holder { exponent, scale } => scale * dist.powf(exponent),
            Modulus::Lipschitz { scale } => scale * dist,
        }
    }
}

impl Default for CoefficientField {
    fn default() -> Self {
        CoefficientField::Constant { value: 1.0 }
    }
}

impl CoefficientField {
    pub fn constant(value: f64) -> Result<Self> {
        let a = CoefficientField::Constant { value };
        a.validate()?;
        Ok(a)
    }

    pub fn sinusoidal(base: f64, amplitude: f64, frequency: f64) -> Result<Self> {
        let a = CoefficientField::Sinusoidal {
            base,
            amplitude,
            frequency,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn radial_holder(base: f64, amplitude: f64, exponent: f64, center: [f64; 2]) -> Result<Self> {
        let a = CoefficientField::RadialHolder {
            base,
            amplitude,
            exponent,
            center,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CoefficientField::Constant { value } => value > 0.0 && value.is_finite(),
            CoefficientField::Sinusoidal {
                base,
                amplitude,
                frequency,
            } => amplitude >= 0.0 && base > amplitude && frequency.is_finite() && base.is_finite(),
            CoefficientField::RadialHolder {
                base,
                amplitude,
                exponent,
                ..
            } => base > 0.0 && amplitude >= 0.0 && exponent > 0.0 && exponent <= 1.0 && amplitude.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("coefficient field {self:?} is not positive and continuous")))
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            CoefficientField::Constant { value } => value,
            CoefficientField::Sinusoidal {
                base,
                amplitude,
                frequency,
            } => base + amplitude * (frequency * x[0]).sin() * (frequency * x[1]).sin(),
            CoefficientField::RadialHolder {
                base,
                amplitude,
                exponent,
                center,
            } => {
                let d = (x[0] - center[0]).hypot(x[1] - center[1]).min(1.0);
                base + amplitude * d.powf(exponent)
            }
        }
    }

    /// `(c_a, C_a)`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            CoefficientField::Constant { value } => (value, value),
            CoefficientField::Sinusoidal { base, amplitude, .. } => (base - amplitude, base + amplitude),
            CoefficientField::RadialHolder { base, amplitude, .. } => (base, base + amplitude),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.modulus(), Modulus::Constant)
    }

    pub fn modulus(&self) -> Modulus {
        match *self {
            CoefficientField::Constant { .. } => Modulus::Constant,
            CoefficientField::Sinusoidal {
                amplitude,
                frequency,
                ..
            } => Modulus::Lipschitz {
                scale: amplitude * frequency.abs(),
            },
            CoefficientField::RadialHolder {
                amplitude,
                exponent,
                ..
            } => Modulus::Holder {
                exponent,
                scale: amplitude,
            },
        }
    }

    /// Largest observed `|a(x) - a(y)| / omega_a(|x - y|)` over random pairs
    /// in `[-half, half]²`; at most 1 when the declared modulus is valid.
    pub fn check_modulus(&self, half: f64, samples: usize, seed: u64) -> f64 {
        let modulus = self.modulus();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = [rng.random_range(-half..half), rng.random_range(-half..half)];
            let scale = 10f64.powf(rng.random_range(-4.0..0.0)) * half;
            let y = [
                x[0] + scale * rng.random_range(-1.0..1.0),
                x[1] + scale * rng.random_range(-1.0..1.0),
            ];
            let dist = (x[0] - y[0]).hypot(x[1] - y[1]);
            let inc = (self.eval(x) - self.eval(y)).abs();
            let bound = modulus.bound(dist);
            if inc > 0.0 {
                worst = worst.max(if bound > 0.0 { inc / bound } else { f64::INFINITY });
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_and_moduli_hold() {
        let fields = [
            CoefficientField::constant(2.0).unwrap(),
            CoefficientField::sinusoidal(1.0, 0.5, 3.0).unwrap(),
            CoefficientField::radial_holder(1.0, 0.5, 0.5, [0.1, 0.0]).unwrap(),
        ];
        for a in &fields {
            let (lo, hi) = a.bounds();
            assert!(lo > 0.0 && lo <= hi);
            for k in 0..200 {
                let x = [((k * 7) % 19) as f64 / 10.0 - 1.0, ((k * 3) % 23) as f64 / 11.0 - 1.0];
                let v = a.eval(x);
                assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
            }
            assert!(a.check_modulus(1.0, 20_000, 7) <= 1.0 + 1e-9, "{a:?}");
        }
    }

    #[test]
    fn rejects_degenerate_fields() {
        assert!(CoefficientField::constant(0.0).is_err());
        assert!(CoefficientField::sinusoidal(1.0, 1.0, 1.0).is_err());
        assert!(CoefficientField::radial_holder(1.0, 1.0, 1.5, [0.0, 0.0]).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let a = CoefficientField::sinusoidal(1.0, 0.25, 2.0).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"kind\":\"sinusoidal\""));
        let back: CoefficientField = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }
}
