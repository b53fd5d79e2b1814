//! 2x2 independence statistics between a perturbation indicator and a
//! prediction-change indicator.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Counts of a 2x2 table. `a` = (R=1, I=1), `b` = (R=1, I=0),
/// `c` = (R=0, I=1), `d` = (R=0, I=0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Contingency {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependencyStat {
    pub chi2: f64,
    pub p_value: f64,
    /// |phi| = sqrt(chi2 / N), in [0, 1].
    pub phi: f64,
}

impl DependencyStat {
    pub const NULL: DependencyStat = DependencyStat { chi2: 0.0, p_value: 1.0, phi: 0.0 };
}

impl Contingency {
    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// Pearson chi-square without continuity correction. A zero row or
    /// column total leaves dependence undefined and yields the null result.
    pub fn stat(&self) -> DependencyStat {
        let [a, b, c, d] = [self.a, self.b, self.c, self.d].map(|x| x as f64);
        let margins = (a + b) * (c + d) * (a + c) * (b + d);
        if margins == 0.0 {
            return DependencyStat::NULL;
        }
        let n = a + b + c + d;
        let cross = a * d - b * c;
        let chi2 = n * cross * cross / margins;
        DependencyStat { chi2, p_value: chi2_sf(chi2), phi: (chi2 / n).sqrt().min(1.0) }
    }
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(1.0).expect("one degree of freedom is valid");
    dist.sf(x).clamp(0.0, 1.0)
}
