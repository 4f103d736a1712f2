//! Commutativity report documents shared by the continuous and discrete
//! checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Commuting,
    NonCommuting,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Commuting => "commuting",
            Verdict::NonCommuting => "non-commuting",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Thresholds turning per-point commutators and error estimates into a
/// verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRule {
    /// Commuting when `max |delta| ≤ commuting_factor · max error`.
    pub commuting_factor: f64,
    /// Non-commuting when some `|delta| > separation_factor · error`.
    pub separation_factor: f64,
    /// Inconclusive when more than this fraction of points failed.
    pub max_failure_fraction: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        Self {
            commuting_factor: 10.0,
            separation_factor: 100.0,
            max_failure_fraction: 0.1,
        }
    }
}

impl VerdictRule {
    /// `samples` holds `(delta, error_estimate)` per point, `None` for a
    /// failed point. A clear separation anywhere decides non-commuting
    /// before the commuting bound is looked at.
    pub fn decide<I>(&self, samples: I) -> Verdict
    where
        I: IntoIterator<Item = Option<(f64, f64)>>,
    {
        let mut total = 0usize;
        let mut failed = 0usize;
        let mut max_delta = 0.0_f64;
        let mut max_err = 0.0_f64;
        let mut separated = false;
        for sample in samples {
            total += 1;
            match sample {
                Some((delta, err)) if delta.is_finite() && err.is_finite() => {
                    max_delta = max_delta.max(delta.abs());
                    max_err = max_err.max(err);
                    separated |= delta.abs() > self.separation_factor * err;
                }
                _ => failed += 1,
            }
        }
        if total == 0 || failed as f64 > self.max_failure_fraction * total as f64 {
            Verdict::Inconclusive
        } else if separated {
            Verdict::NonCommuting
        } else if max_delta <= self.commuting_factor * max_err {
            Verdict::Commuting
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Evenly spaced sample coordinates: `points` values in `[-qrange, qrange]`
/// for configurations and `[-prange, prange]` for momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub qrange: f64,
    pub prange: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 5,
            qrange: 0.5,
            prange: 1.0,
        }
    }
}

fn linspace(n: usize, range: f64) -> Vec<f64> {
    match n {
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| -range + 2.0 * range * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidGrid("grid needs at least one point per axis".into()));
        }
        for (name, r) in [("qrange", self.qrange), ("prange", self.prange)] {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidGrid(format!("{name} must be finite and non-negative, got {r}")));
            }
        }
        Ok(())
    }

    /// Endpoint pairs `(q0, q12)`, each coordinate replicated across the
    /// `n` dimensions, in row-major order.
    pub fn endpoint_pairs(&self, n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        square(&linspace(self.points, self.qrange), &linspace(self.points, self.qrange), n)
    }

    /// Phase-space probes `(q, p)` with `q` from the configuration range and
    /// `p` from the momentum range.
    pub fn phase_probes(&self, n: usize) -> Vec<Vec<f64>> {
        square(&linspace(self.points, self.qrange), &linspace(self.points, self.prange), n)
            .into_iter()
            .map(|(q, p)| [q, p].concat())
            .collect()
    }
}

fn square(a: &[f64], b: &[f64], n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (vec![x; n], vec![y; n])))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePair {
    pub t1: f64,
    pub t2: f64,
}

pub fn default_times() -> Vec<TimePair> {
    vec![TimePair { t1: 0.5, t2: 0.5 }, TimePair { t1: 1.0, t2: 1.0 }]
}

/// Echo of everything that determined a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub systems: [String; 2],
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<TimePair>,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_resolution: Option<usize>,
    pub verdict_rule: VerdictRule,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max_action_commutator: Option<f64>,
    pub max_poisson_bracket: Option<f64>,
    pub max_flow_commutator: Option<f64>,
    pub max_error_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_endpoint_momentum_mismatch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_energy_transport_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_junction_jump: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_genhje_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_corner_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_map_commutator: Option<f64>,
    pub failed_points: usize,
    pub total_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutativityReport<P, Q> {
    pub config: ReportConfig,
    pub points: Vec<P>,
    pub phase_probes: Vec<Q>,
    pub summary: Summary,
    pub verdict: Verdict,
    pub tool_version: String,
}

impl<P: Serialize, Q: Serialize> CommutativityReport<P, Q> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Running maximum of absolute values; `None` until something is seen.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct MaxAbs(Option<f64>);

impl MaxAbs {
    pub fn push(&mut self, v: f64) {
        let v = v.abs();
        self.0 = Some(match self.0 {
            Some(m) if m.is_nan() || v <= m => m,
            _ => v,
        });
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, values: I) {
        values.into_iter().for_each(|v| self.push(v));
    }

    pub fn get(self) -> Option<f64> {
        self.0
    }
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let rule = VerdictRule::default();
        assert_eq!(rule.decide([Some((1e-12, 1e-12)), Some((0.0, 1e-13))]), Verdict::Commuting);
        assert_eq!(rule.decide([Some((0.3, 1e-6)), Some((0.0, 1e-6))]), Verdict::NonCommuting);
        assert_eq!(rule.decide([Some((1e-10, 1e-11))]), Verdict::Inconclusive);
        let mostly_failed = [None, None, Some((0.0, 1e-10))];
        assert_eq!(rule.decide(mostly_failed), Verdict::Inconclusive);
        assert_eq!(rule.decide(std::iter::empty()), Verdict::Inconclusive);
    }

    #[test]
    fn grid_layout() {
        let g = GridSpec::default();
        let pairs = g.endpoint_pairs(2);
        assert_eq!(pairs.len(), 25);
        assert_eq!(pairs[0], (vec![-0.5, -0.5], vec![-0.5, -0.5]));
        assert_eq!(pairs[1].1, vec![-0.25, -0.25]);
        let probes = g.phase_probes(1);
        assert_eq!(probes[24], vec![0.5, 1.0]);
        assert_eq!(GridSpec { points: 1, ..g }.endpoint_pairs(1), vec![(vec![0.0], vec![0.0])]);
        assert!(GridSpec { points: 0, ..g }.validate().is_err());
    }

    #[test]
    fn verdict_serializes_kebab() {
        assert_eq!(serde_json::to_string(&Verdict::NonCommuting).unwrap(), "\"non-commuting\"");
    }

    #[test]
    fn max_abs_tracks_nan() {
        let mut m = MaxAbs::default();
        assert_eq!(m.get(), None);
        m.extend([1.0, -3.0, 2.0]);
        assert_eq!(m.get(), Some(3.0));
        m.push(f64::NAN);
        assert!(m.get().unwrap().is_nan());
    }
}
