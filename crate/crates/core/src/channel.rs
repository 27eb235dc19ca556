//! Path loss and quantized block fading.
//!
//! Every link carries a [`GainSet`]: the unit-mean exponential power fading
//! (Rayleigh amplitude) is cut into equiprobable bins and each bin is
//! represented by its conditional mean, scaled by the linear path gain. The
//! quantized representatives are the ground truth of the simulator, so the
//! finite-gain-set model holds exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Indoor path loss in dB: `30 log10(d) + 20 log10(2.4) + 46`.
pub fn path_loss_db(distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(invalid(format!("distance must be positive, got {distance_m}")));
    }
    Ok(30.0 * distance_m.log10() + 20.0 * 2.4f64.log10() + 46.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeId {
    Bs(usize),
    Mu(usize),
    Controller,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub tx: NodeId,
    pub rx: NodeId,
    pub distance_m: f64,
}

impl LinkSpec {
    pub fn new(tx: NodeId, rx: NodeId, distance_m: f64) -> Result<Self> {
        if !(distance_m > 0.0) || !distance_m.is_finite() {
            return Err(invalid(format!("link distance must be positive, got {distance_m}")));
        }
        Ok(Self { tx, rx, distance_m })
    }

    /// Linear power gain of the path loss alone.
    pub fn path_gain(&self) -> Result<f64> {
        Ok(db_to_linear(-path_loss_db(self.distance_m)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainLevel {
    /// Linear power gain.
    pub gain: f64,
    pub probability: f64,
}

/// Finite set of channel gains with their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    levels: Vec<GainLevel>,
    /// Bin boundaries between consecutive levels, in gain units
    /// (`levels.len() - 1` entries).
    thresholds: Vec<f64>,
}

impl GainSet {
    /// Equiprobable quantization of `scale * Exp(1)` into `num_levels` bins
    /// with conditional-mean representatives.
    pub fn exponential(scale: f64, num_levels: usize) -> Result<Self> {
        if num_levels < 2 {
            return Err(invalid(format!("need at least 2 levels, got {num_levels}")));
        }
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(invalid(format!("gain scale must be finite and non-negative, got {scale}")));
        }
        let n = num_levels as f64;
        let mut levels = Vec::with_capacity(num_levels);
        let mut thresholds = Vec::with_capacity(num_levels - 1);
        for k in 0..num_levels {
            // Bin [a, b) with survival probabilities 1 - k/n and 1 - (k+1)/n.
            let surv_a = 1.0 - k as f64 / n;
            let surv_b = 1.0 - (k + 1) as f64 / n;
            let a = -surv_a.ln();
            let mean = if k + 1 == num_levels {
                a + 1.0
            } else {
                let b = -surv_b.ln();
                thresholds.push(scale * b);
                ((a + 1.0) * surv_a - (b + 1.0) * surv_b) * n
            };
            levels.push(GainLevel { gain: scale * mean, probability: 1.0 / n });
        }
        Ok(Self { levels, thresholds })
    }

    /// Single deterministic gain.
    pub fn point_mass(gain: f64) -> Self {
        Self { levels: vec![GainLevel { gain, probability: 1.0 }], thresholds: Vec::new() }
    }

    /// Arbitrary levels; gains must be strictly increasing and probabilities
    /// must sum to one.
    pub fn from_levels(levels: Vec<GainLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid("gain set needs at least one level"));
        }
        if levels.windows(2).any(|w| !(w[0].gain < w[1].gain)) {
            return Err(invalid("gain levels must be strictly increasing"));
        }
        if levels.iter().any(|l| !(l.probability >= 0.0) || !(l.gain >= 0.0)) {
            return Err(invalid("gains and probabilities must be non-negative"));
        }
        let sum: f64 = levels.iter().map(|l| l.probability).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(crate::Error::NotNormalized { what: "gain set".into(), sum });
        }
        let thresholds = levels.windows(2).map(|w| 0.5 * (w[0].gain + w[1].gain)).collect();
        Ok(Self { levels, thresholds })
    }

    pub fn levels(&self) -> &[GainLevel] {
        &self.levels
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn gain(&self, level: usize) -> f64 {
        self.levels[level].gain
    }

    pub fn max_gain(&self) -> f64 {
        self.levels.last().map_or(0.0, |l| l.gain)
    }

    pub fn mean(&self) -> f64 {
        self.levels.iter().map(|l| l.gain * l.probability).sum()
    }

    /// Draw a level index. Always consumes exactly one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, l) in self.levels.iter().enumerate() {
            acc += l.probability;
            if u < acc {
                return i as u8;
            }
        }
        (self.levels.len() - 1) as u8
    }
}

/// Quantized Rayleigh gain set for a link: path gain times the unit-mean
/// fading representatives.
pub fn build_gain_set(link: &LinkSpec, num_levels: usize) -> Result<GainSet> {
    GainSet::exponential(link.path_gain()?, num_levels)
}

/// One block of fading: a level index per (link, sub-carrier).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelRealization {
    num_subcarriers: usize,
    levels: Vec<u8>,
}

impl ChannelRealization {
    pub fn from_levels(num_subcarriers: usize, levels: Vec<u8>) -> Self {
        assert!(num_subcarriers > 0 && levels.len().is_multiple_of(num_subcarriers));
        Self { num_subcarriers, levels }
    }

    pub fn level(&self, link: usize, subcarrier: usize) -> u8 {
        self.levels[link * self.num_subcarriers + subcarrier]
    }

    pub fn num_links(&self) -> usize {
        self.levels.len() / self.num_subcarriers
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }
}

/// Independently draw a level for every (link, sub-carrier), link-major.
pub fn sample_realization<R: Rng + ?Sized>(
    gain_sets: &[GainSet],
    num_subcarriers: usize,
    rng: &mut R,
) -> ChannelRealization {
    let mut levels = Vec::with_capacity(gain_sets.len() * num_subcarriers);
    for set in gain_sets {
        for _ in 0..num_subcarriers {
            levels.push(set.sample(rng));
        }
    }
    ChannelRealization { num_subcarriers, levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_loss_reference_points() {
        for (d, expect) in [(10.0, 83.604), (20.0, 92.635), (40.0, 101.666)] {
            let pl = path_loss_db(d).unwrap();
            assert!((pl - expect).abs() < 5e-4, "d={d}: {pl}");
        }
        assert!(path_loss_db(0.0).is_err());
        assert!(path_loss_db(-3.0).is_err());
    }

    #[test]
    fn two_level_unit_gain_set() {
        let g = GainSet::exponential(1.0, 2).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((g.thresholds()[0] - ln2).abs() < 1e-15);
        assert!((g.gain(0) - (1.0 - ln2)).abs() < 1e-15);
        assert!((g.gain(1) - (1.0 + ln2)).abs() < 1e-15);
        assert_eq!(g.levels()[0].probability, 0.5);
        assert_eq!(g.levels()[1].probability, 0.5);
    }

    #[test]
    fn scaled_gain_set_at_ten_metres() {
        let link = LinkSpec::new(NodeId::Bs(0), NodeId::Mu(0), 10.0).unwrap();
        let g = build_gain_set(&link, 2).unwrap();
        let scale = 10f64.powf(-path_loss_db(10.0).unwrap() / 10.0);
        assert!((g.gain(0) / scale - 0.306_852_819).abs() < 1e-9);
        assert!((g.gain(1) / scale - 1.693_147_181).abs() < 1e-9);
    }

    #[test]
    fn conditional_means_preserve_mean() {
        for n in 2..12 {
            let g = GainSet::exponential(3.5, n).unwrap();
            let psum: f64 = g.levels().iter().map(|l| l.probability).sum();
            assert!((psum - 1.0).abs() < 1e-12);
            assert!((g.mean() / 3.5 - 1.0).abs() < 1e-9, "n={n}");
            assert!(g.levels().windows(2).all(|w| w[0].gain < w[1].gain));
            assert_eq!(g.len(), n);
        }
        assert!(GainSet::exponential(1.0, 1).is_err());
    }

    #[test]
    fn point_mass_always_same_level() {
        let sets = vec![GainSet::point_mass(2.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_realization(&sets, 3, &mut rng).levels(), &[0, 0, 0]);
        }
    }

    #[test]
    fn equiprobable_frequency() {
        let sets = vec![GainSet::exponential(1.0, 2).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let zeros = (0..n).filter(|_| sample_realization(&sets, 1, &mut rng).level(0, 0) == 0).count();
        let f = zeros as f64 / n as f64;
        assert!((0.49..=0.51).contains(&f), "{f}");
    }

    #[test]
    fn same_seed_same_stream() {
        let sets = vec![GainSet::exponential(1.0, 2).unwrap(), GainSet::exponential(2.0, 3).unwrap()];
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            assert_eq!(sample_realization(&sets, 2, &mut a), sample_realization(&sets, 2, &mut b));
        }
    }

    #[test]
    fn disjoint_links_independent() {
        // Joint frequency of (level 0, level 0) on two links vs product of marginals.
        let sets = vec![GainSet::exponential(1.0, 2).unwrap(), GainSet::exponential(5.0, 2).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000usize;
        let (mut a0, mut b0, mut both) = (0usize, 0usize, 0usize);
        for _ in 0..n {
            let r = sample_realization(&sets, 1, &mut rng);
            let (x, y) = (r.level(0, 0) == 0, r.level(1, 0) == 0);
            a0 += x as usize;
            b0 += y as usize;
            both += (x && y) as usize;
        }
        let p = (a0 as f64 / n as f64) * (b0 as f64 / n as f64);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((both as f64 / n as f64 - p).abs() < 3.0 * sigma);
    }
}
