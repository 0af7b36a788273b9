use serde::{Deserialize, Serialize};

use super::{Family, YoungFunction};
use crate::error::Error;

/// JSON form of a Young function: `{"family": ..., "params": {...}}`.
///
/// ```json
/// {"family": "power_law", "params": {"p": 3}}
/// {"family": "zygmund", "params": {"p": 3, "alpha": 1}}
/// {"family": "scaled", "params": {"base": {"family": "power_law", "params": {"p": 2}}, "factor": 0.5}}
/// {"family": "tabulated", "params": {"t_min": 0.001, "t_max": 1000, "g": [ ... ]}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum YoungDescriptor {
    PowerLaw {
        p: f64,
    },
    Zygmund {
        p: f64,
        alpha: f64,
    },
    Scaled {
        base: Box<YoungDescriptor>,
        factor: f64,
    },
    Tabulated {
        t_min: f64,
        t_max: f64,
        g: Vec<f64>,
    },
}

impl TryFrom<YoungDescriptor> for YoungFunction {
    type Error = Error;

    fn try_from(d: YoungDescriptor) -> Result<Self, Error> {
        match d {
            YoungDescriptor::PowerLaw { p } => YoungFunction::power_law(p),
            YoungDescriptor::Zygmund { p, alpha } => YoungFunction::zygmund(p, alpha),
            YoungDescriptor::Scaled { base, factor } => {
                YoungFunction::scaled(YoungFunction::try_from(*base)?, factor)
            }
            YoungDescriptor::Tabulated { t_min, t_max, g } => {
                YoungFunction::tabulated(t_min, t_max, g)
            }
        }
    }
}

impl From<YoungFunction> for YoungDescriptor {
    fn from(f: YoungFunction) -> Self {
        match f.family {
            Family::PowerLaw { p } => YoungDescriptor::PowerLaw { p },
            Family::Zygmund { p, alpha } => YoungDescriptor::Zygmund { p, alpha },
            Family::Scaled { base, factor } => YoungDescriptor::Scaled {
                base: Box::new(YoungDescriptor::from(*base)),
                factor,
            },
            Family::Tabulated(t) => YoungDescriptor::Tabulated {
                t_min: t.t_min,
                t_max: t.t_max,
                g: t.samples,
            },
        }
    }
}
