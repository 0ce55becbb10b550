//! Finite probability distributions, product systems and seeded sampling.
//!
//! A [`Distribution`] is a point of the probability simplex with `W ≥ 1`
//! states. Construction always goes through validation, so every value of the
//! type has nonnegative entries bounded by 1 that sum to 1 within
//! [`NORMALIZATION_TOL`].
//!
//! State indices are zero-based throughout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Allowed deviation of the entry sum from 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Entries in `[-NEGATIVE_NOISE, 0)` are treated as rounding noise and clamped to 0.
pub const NEGATIVE_NOISE: f64 = 1e-15;

/// Minimum entry for interior points used by derivative-based checks.
pub const INTERIOR_MARGIN: f64 = 1e-3;

/// Off-peak mass of the near-delta stratum.
const NEAR_DELTA_FLOOR: f64 = 1e-3;

const INTERIOR_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates raw probabilities, optionally dividing them by their sum first.
    pub fn validate(raw: &[f64], renormalize: bool) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value < -NEGATIVE_NOISE {
                return Err(Error::NegativeProbability { index, value });
            }
        }
        let mut probs: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
        let sum = pairwise_sum(probs.iter().copied());
        if renormalize {
            if !(sum > 0.0) || !sum.is_finite() {
                return Err(Error::NotNormalized { sum });
            }
            probs.iter_mut().for_each(|x| *x /= sum);
        } else if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        for (index, x) in probs.iter_mut().enumerate() {
            if *x > 1.0 + NORMALIZATION_TOL {
                return Err(Error::ProbabilityAboveOne { index, value: *x });
            }
            *x = x.min(1.0);
        }
        Ok(Distribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> usize {
        self.probs.len()
    }

    pub fn sum(&self) -> f64 {
        pairwise_sum(self.probs.iter().copied())
    }

    pub fn min_entry(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Formats the entries as one comma-separated line of the distribution file format.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self.probs.iter().map(|p| p.to_string()).collect();
        parts.join(",")
    }
}

pub fn uniform(states: usize) -> Result<Distribution> {
    if states == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(Distribution {
        probs: vec![1.0 / states as f64; states],
    })
}

/// The certainty state with all mass on `index`.
pub fn delta(states: usize, index: usize) -> Result<Distribution> {
    if states == 0 {
        return Err(Error::EmptyInput);
    }
    if index >= states {
        return Err(Error::IndexOutOfRange { index, len: states });
    }
    let mut probs = vec![0.0; states];
    probs[index] = 1.0;
    Ok(Distribution { probs })
}

/// Joint distribution of two independent systems, `p_i^A * p_j^B` with `i` as the outer index.
pub fn product(a: &Distribution, b: &Distribution) -> Distribution {
    let probs = a
        .probs
        .iter()
        .flat_map(|&pa| b.probs.iter().map(move |&pb| pa * pb))
        .collect();
    Distribution { probs }
}

/// Appends one state of probability zero.
pub fn expand_zero(p: &Distribution) -> Distribution {
    let mut probs = p.probs.clone();
    probs.push(0.0);
    Distribution { probs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Uniform (flat Dirichlet) law on the simplex.
    Flat,
    /// Cycles through a flat draw, the uniform point and a near-delta point.
    Stratified,
}

/// Draws the `index`-th sample of the stream identified by `seed`.
///
/// The output is a pure function of `(states, seed, strategy, index)`, so
/// callers can partition the index space across threads.
pub fn sample(states: usize, seed: u64, strategy: Strategy, index: u64) -> Result<Distribution> {
    if states < 2 {
        return Err(Error::DegenerateSampling { states });
    }
    match strategy {
        Strategy::Flat => Ok(flat_draw(states, &mut stream_rng(seed, index))),
        Strategy::Stratified => match index % 3 {
            0 => Ok(flat_draw(states, &mut stream_rng(seed, index))),
            1 => uniform(states),
            _ => {
                let peak = ((index / 3) % states as u64) as usize;
                let mut probs = vec![NEAR_DELTA_FLOOR; states];
                probs[peak] = 1.0 - (states - 1) as f64 * NEAR_DELTA_FLOOR;
                Ok(Distribution { probs })
            }
        },
    }
}

/// A flat draw pulled into the interior: every entry is at least `margin`.
pub fn sample_interior(states: usize, seed: u64, index: u64, margin: f64) -> Result<Distribution> {
    if states < 2 {
        return Err(Error::DegenerateSampling { states });
    }
    if !(margin >= 0.0) || margin * states as f64 >= 1.0 {
        return Err(Error::ParameterOutOfRange {
            name: "margin",
            value: margin,
            reason: "need 0 <= margin < 1/W",
        });
    }
    let flat = flat_draw(states, &mut stream_rng(seed ^ INTERIOR_SALT, index));
    let scale = 1.0 - margin * states as f64;
    let raw: Vec<f64> = flat.probs.iter().map(|&x| margin + scale * x).collect();
    Distribution::validate(&raw, false)
}

fn stream_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn flat_draw(states: usize, rng: &mut ChaCha20Rng) -> Distribution {
    // -ln u with u in (0, 1]
    let e: Vec<f64> = (0..states)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total = pairwise_sum(e.iter().copied());
    Distribution {
        probs: e.into_iter().map(|x| x / total).collect(),
    }
}

/// One point `p(s)` on a straight variation curve through an interior distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationSpec {
    base: Distribution,
    direction: Vec<f64>,
    step: f64,
}

impl VariationSpec {
    /// `direction` has `W - 1` components and Euclidean norm at most 1; the
    /// last state absorbs the negated sum so the curve stays on the simplex.
    pub fn new(base: Distribution, direction: Vec<f64>, step: f64) -> Result<Self> {
        if base.states() < 2 {
            return Err(Error::InvalidVariation(
                "base needs at least 2 states".into(),
            ));
        }
        if base.min_entry() < INTERIOR_MARGIN {
            return Err(Error::InvalidVariation(format!(
                "base entries must be >= {INTERIOR_MARGIN}"
            )));
        }
        if direction.len() + 1 != base.states() {
            return Err(Error::InvalidVariation(format!(
                "direction has {} components, expected {}",
                direction.len(),
                base.states() - 1
            )));
        }
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > 1.0 + 1e-12 {
            return Err(Error::InvalidVariation(format!(
                "direction norm {norm} exceeds 1"
            )));
        }
        if !step.is_finite() {
            return Err(Error::InvalidVariation("step must be finite".into()));
        }
        Ok(VariationSpec {
            base,
            direction,
            step,
        })
    }

    pub fn with_step(&self, step: f64) -> Result<Self> {
        Self::new(self.base.clone(), self.direction.clone(), step)
    }

    pub fn base(&self) -> &Distribution {
        &self.base
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

pub fn variation_point(spec: &VariationSpec) -> Result<Distribution> {
    let s = spec.step;
    let base = spec.base.probs();
    let last = base.len() - 1;
    let mut probs: Vec<f64> = base[..last]
        .iter()
        .zip(&spec.direction)
        .map(|(&p, &d)| p + s * d)
        .collect();
    probs.push(base[last] - s * spec.direction.iter().sum::<f64>());
    if probs.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::StepTooLarge { step: s });
    }
    Ok(Distribution { probs })
}

/// Parses the distribution file format: one comma-separated distribution per
/// line, `#` comments and blank lines ignored. Entries must already be normalized.
pub fn parse_distributions(text: &str) -> Result<Vec<Distribution>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |e: Error| Error::AtLine {
            line: i + 1,
            source: Box::new(e),
        };
        let raw = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                    input: tok.trim().to_string(),
                    reason: "not a decimal number".into(),
                })
            })
            .collect::<Result<Vec<f64>>>()
            .map_err(at)?;
        out.push(Distribution::validate(&raw, false).map_err(at)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validate_accepts_normalized() {
        let p = Distribution::validate(&[0.5, 0.5], false).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn validate_renormalizes() {
        let p = Distribution::validate(&[2.0, 2.0], true).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn validate_rejects_bad_input() {
        assert!(matches!(
            Distribution::validate(&[0.5, 0.6], false),
            Err(Error::NotNormalized { .. })
        ));
        assert_eq!(Distribution::validate(&[], false), Err(Error::EmptyInput));
        assert!(matches!(
            Distribution::validate(&[1.1, -0.1], false),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
        assert!(matches!(
            Distribution::validate(&[f64::NAN, 1.0], true),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(matches!(
            Distribution::validate(&[0.0, 0.0], true),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn validate_clamps_negative_noise() {
        let p = Distribution::validate(&[1.0, -1e-16], false).unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn uniform_cases() {
        assert_eq!(uniform(1).unwrap().probs(), &[1.0]);
        assert_eq!(uniform(4).unwrap().probs(), &[0.25; 4]);
        assert!((uniform(3).unwrap().sum() - 1.0).abs() <= f64::EPSILON);
        assert_eq!(uniform(0), Err(Error::EmptyInput));
    }

    #[test]
    fn delta_cases() {
        assert_eq!(delta(3, 0).unwrap().probs(), &[1.0, 0.0, 0.0]);
        assert_eq!(delta(1, 0).unwrap().probs(), &[1.0]);
        assert_eq!(
            delta(2, 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        );
    }

    #[test]
    fn product_cases() {
        let u6 = product(&uniform(2).unwrap(), &uniform(3).unwrap());
        assert_eq!(u6, uniform(6).unwrap());

        let p = Distribution::validate(&[0.2, 0.3, 0.5], false).unwrap();
        let d = product(&delta(2, 0).unwrap(), &p);
        assert_eq!(d.probs(), &[0.2, 0.3, 0.5, 0.0, 0.0, 0.0]);

        let a = Distribution::validate(&[0.5, 0.5], false).unwrap();
        let b = Distribution::validate(&[0.6, 0.4], false).unwrap();
        let ab = product(&a, &b);
        // direct multiplication, row-major
        let expected = [0.5 * 0.6, 0.5 * 0.4, 0.5 * 0.6, 0.5 * 0.4];
        assert_eq!(ab.probs(), &expected);
        assert_abs_diff_eq!(ab.probs()[0], 0.30, epsilon = 1e-16);
        assert_abs_diff_eq!(ab.probs()[1], 0.20, epsilon = 1e-16);
    }

    #[test]
    fn expand_zero_appends() {
        let one = expand_zero(&uniform(1).unwrap());
        assert_eq!(one.probs(), &[1.0, 0.0]);
        let twice = expand_zero(&expand_zero(&uniform(2).unwrap()));
        assert_eq!(twice.probs(), &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn sampling_contract() {
        for strategy in [Strategy::Flat, Strategy::Stratified] {
            for idx in 0..50 {
                let p = sample(5, 7, strategy, idx).unwrap();
                Distribution::validate(p.probs(), false).unwrap();
                assert_eq!(p, sample(5, 7, strategy, idx).unwrap());
            }
        }
        assert_ne!(
            sample(4, 1, Strategy::Flat, 0).unwrap(),
            sample(4, 1, Strategy::Flat, 1).unwrap()
        );
        assert_eq!(
            sample(3, 42, Strategy::Stratified, 1).unwrap(),
            uniform(3).unwrap()
        );
        assert_eq!(
            sample(1, 0, Strategy::Flat, 0),
            Err(Error::DegenerateSampling { states: 1 })
        );
    }

    #[test]
    fn near_delta_stratum_rotates() {
        let a = sample(3, 0, Strategy::Stratified, 2).unwrap();
        let b = sample(3, 0, Strategy::Stratified, 5).unwrap();
        assert_abs_diff_eq!(a.probs()[0], 0.998, epsilon = 1e-15);
        assert_abs_diff_eq!(b.probs()[1], 0.998, epsilon = 1e-15);
    }

    #[test]
    fn interior_samples_respect_margin() {
        for idx in 0..100 {
            let p = sample_interior(4, 3, idx, INTERIOR_MARGIN).unwrap();
            assert!(p.min_entry() >= INTERIOR_MARGIN);
        }
    }

    #[test]
    fn variation_examples() {
        let base = uniform(3).unwrap();
        let spec = VariationSpec::new(base.clone(), vec![0.5, 0.0], 0.0).unwrap();
        assert_eq!(variation_point(&spec).unwrap(), base);

        let moved = variation_point(&spec.with_step(0.1).unwrap()).unwrap();
        // direct arithmetic
        let third = 1.0 / 3.0;
        assert_eq!(moved.probs(), &[third + 0.05, third + 0.0, third - 0.05]);
        assert_abs_diff_eq!(moved.probs()[0], 0.383_333_333_333_333_3, epsilon = 1e-15);
        assert_abs_diff_eq!(moved.probs()[2], 0.283_333_333_333_333_3, epsilon = 1e-15);
        assert_abs_diff_eq!(moved.sum(), 1.0, epsilon = 1e-15);

        assert!(matches!(
            variation_point(&spec.with_step(1.0).unwrap()),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn variation_spec_invariants() {
        let base = uniform(3).unwrap();
        assert!(VariationSpec::new(base.clone(), vec![1.0, 1.0], 0.0).is_err());
        assert!(VariationSpec::new(base.clone(), vec![1.0], 0.0).is_err());
        let edge = Distribution::validate(&[0.0, 0.5, 0.5], false).unwrap();
        assert!(VariationSpec::new(edge, vec![0.1, 0.1], 0.0).is_err());
    }

    #[test]
    fn parses_file_format() {
        let text = "# header\n0.5,0.5\n\n 0.25, 0.25,0.25,0.25\n";
        let ps = parse_distributions(text).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[1].states(), 4);

        let err = parse_distributions("0.5,0.5\n0.5,0.6\n").unwrap_err();
        assert!(matches!(err, Error::AtLine { line: 2, .. }));
        assert!(parse_distributions("0.5,x\n").is_err());
    }

    #[test]
    fn line_round_trip() {
        let p = sample(6, 11, Strategy::Flat, 3).unwrap();
        let back = parse_distributions(&p.to_line()).unwrap();
        assert_eq!(back, vec![p]);
    }
}
