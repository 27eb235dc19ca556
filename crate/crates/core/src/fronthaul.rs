//! In-band fronthaul time cost.
//!
//! At the start of every frame each BS uploads its statistics to the
//! controller with an equal power split over the sub-carriers, and the
//! controller answers with the mapping rules. Both legs share the DL
//! sub-carriers, so the round trip `tau` is charged against the frame.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FronthaulConfig {
    /// Rate needed to carry one statistical value (bit/s/Hz).
    pub r_unit: f64,
    /// Allowed overhead values, strictly increasing (slots).
    pub tau_levels: Vec<f64>,
    pub controller_power_mw: f64,
    pub bs_power_mw: f64,
    pub noise_mw: f64,
}

/// Quantized round-trip overhead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Overhead {
    Quantized { index: usize, slots: f64 },
    NoRecommendation,
}

impl Overhead {
    pub fn slots(&self) -> Option<f64> {
        match *self {
            Overhead::Quantized { slots, .. } => Some(slots),
            Overhead::NoRecommendation => None,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match *self {
            Overhead::Quantized { index, .. } => Some(index),
            Overhead::NoRecommendation => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FronthaulOutcome {
    pub tau_upload: Vec<f64>,
    pub tau_download: Vec<f64>,
    pub tau_raw: f64,
    pub tau: Overhead,
}

/// Number of statistical values a BS uploads per frame: one per gain level
/// of every direct link and sub-carrier, one per overhead level, plus the
/// mean arrival.
pub fn statistics_count(direct_link_levels: &[usize], num_tau_levels: usize) -> usize {
    direct_link_levels.iter().sum::<usize>() + num_tau_levels + 1
}

impl FronthaulConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_unit > 0.0) {
            return Err(invalid("r_unit must be positive"));
        }
        if self.tau_levels.is_empty() || self.tau_levels.iter().any(|t| !(*t > 0.0)) {
            return Err(invalid("tau levels must be positive and non-empty"));
        }
        if self.tau_levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("tau levels must be strictly increasing"));
        }
        for (name, p) in [
            ("controller power", self.controller_power_mw),
            ("bs power", self.bs_power_mw),
            ("noise", self.noise_mw),
        ] {
            if !(p > 0.0) || !p.is_finite() {
                return Err(invalid(format!("{name} must be positive, got {p}")));
            }
        }
        Ok(())
    }

    pub fn upload_target_rate(&self, bs_statistics_count: usize) -> Result<f64> {
        if bs_statistics_count == 0 {
            return Err(invalid("statistics count must be at least 1"));
        }
        Ok(bs_statistics_count as f64 * self.r_unit)
    }

    pub fn download_target_rate(&self, t0: usize) -> Result<f64> {
        if t0 == 0 {
            return Err(invalid("frame length T0 must be at least 1"));
        }
        Ok(t0 as f64 * self.r_unit)
    }

    /// Time for one BS to upload `r_u` with its gains to the controller,
    /// while every other BS uploads simultaneously on the same sub-carriers.
    /// `other_gains[j][s]` is the gain of the j-th other BS on sub-carrier s.
    pub fn upload_time(&self, r_u: f64, own_gains: &[f64], other_gains: &[Vec<f64>]) -> Result<f64> {
        check_gains(own_gains)?;
        for g in other_gains {
            check_gains(g)?;
            if g.len() != own_gains.len() {
                return Err(Error::DimensionMismatch("interfering BS gain vector length".into()));
            }
        }
        let se: f64 = (0..own_gains.len())
            .map(|s| {
                let interference: f64 = other_gains.iter().map(|g| self.bs_power_mw * g[s]).sum();
                (1.0 + self.bs_power_mw * own_gains[s] / (self.noise_mw + interference)).log2()
            })
            .sum();
        time_for(r_u, se)
    }

    /// Time for the controller to deliver `r_d` to one BS when its power is
    /// split equally among `num_bs` BSs on every sub-carrier.
    pub fn download_time(&self, r_d: f64, gains: &[f64], num_bs: usize) -> Result<f64> {
        if num_bs == 0 {
            return Err(invalid("need at least one BS"));
        }
        check_gains(gains)?;
        let nb = num_bs as f64;
        let se: f64 = gains
            .iter()
            .map(|&h| {
                let signal = self.controller_power_mw * h;
                (1.0 + signal / (nb * self.noise_mw + (nb - 1.0) * signal)).log2()
            })
            .sum();
        time_for(r_d, se)
    }

    /// Ceiling onto the overhead levels.
    pub fn quantize_overhead(&self, tau_raw: f64) -> Overhead {
        self.tau_levels
            .iter()
            .position(|&t| t >= tau_raw)
            .map_or(Overhead::NoRecommendation, |index| Overhead::Quantized {
                index,
                slots: self.tau_levels[index],
            })
    }

    /// Full round trip: `up_gains[b][s]` BS-to-controller, `down_gains[b][s]`
    /// controller-to-BS. A leg with zero spectral efficiency yields an
    /// infinite raw overhead and therefore no recommendation.
    pub fn round_trip(
        &self,
        r_u: f64,
        r_d: f64,
        up_gains: &[Vec<f64>],
        down_gains: &[Vec<f64>],
    ) -> Result<FronthaulOutcome> {
        let nb = up_gains.len();
        if down_gains.len() != nb || nb == 0 {
            return Err(Error::DimensionMismatch("fronthaul gains per BS".into()));
        }
        let mut tau_upload = Vec::with_capacity(nb);
        let mut tau_download = Vec::with_capacity(nb);
        for b in 0..nb {
            let others: Vec<Vec<f64>> =
                up_gains.iter().enumerate().filter(|(j, _)| *j != b).map(|(_, g)| g.clone()).collect();
            tau_upload.push(degenerate_is_infinite(self.upload_time(r_u, &up_gains[b], &others))?);
            tau_download.push(degenerate_is_infinite(self.download_time(r_d, &down_gains[b], nb))?);
        }
        let tau_raw = tau_upload.iter().cloned().fold(0.0, f64::max)
            + tau_download.iter().cloned().fold(0.0, f64::max);
        let tau = self.quantize_overhead(tau_raw);
        Ok(FronthaulOutcome { tau_upload, tau_download, tau_raw, tau })
    }
}

fn check_gains(g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(invalid("need at least one sub-carrier"));
    }
    if g.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(invalid("gains must be finite and non-negative"));
    }
    Ok(())
}

fn time_for(rate: f64, spectral_efficiency: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(invalid("target rate must be positive"));
    }
    if !(spectral_efficiency > 0.0) {
        return Err(Error::DegenerateChannel("all sub-carriers have zero spectral efficiency".into()));
    }
    Ok(rate / spectral_efficiency)
}

fn degenerate_is_infinite(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::DegenerateChannel(_)) => Ok(f64::INFINITY),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FronthaulConfig {
        FronthaulConfig {
            r_unit: 0.25 * 1.05f64.log2(),
            tau_levels: vec![0.25, 0.5],
            controller_power_mw: 10f64.powf(2.5),
            bs_power_mw: 100.0,
            noise_mw: 10f64.powf(-8.5),
        }
    }

    /// Gain giving spectral efficiency `se` on an interference-free upload.
    fn gain_for_se(c: &FronthaulConfig, se: f64) -> f64 {
        (2f64.powf(se) - 1.0) * c.noise_mw / c.bs_power_mw
    }

    #[test]
    fn target_rates() {
        let c = cfg();
        assert!((c.r_unit - 0.017_597).abs() < 5e-7);
        let count = statistics_count(&[2, 2, 2, 2], 2);
        assert_eq!(count, 11);
        assert!((c.upload_target_rate(count).unwrap() - 0.193_57).abs() < 5e-6);
        assert_eq!(c.upload_target_rate(1).unwrap(), c.r_unit);
        assert!((c.download_target_rate(10).unwrap() - 0.175_97).abs() < 5e-6);
        assert_eq!(c.download_target_rate(1).unwrap(), c.r_unit);
        assert!(c.download_target_rate(0).is_err());
    }

    #[test]
    fn upload_time_examples() {
        let c = cfg();
        let g = gain_for_se(&c, 0.4);
        let t = c.upload_time(0.19357, &[g, g], &[]).unwrap();
        assert!((t - 0.2420).abs() < 5e-5);
        let t2 = c.upload_time(2.0 * 0.19357, &[g, g], &[]).unwrap();
        assert!((t2 / t - 2.0).abs() < 1e-12);
        let g1 = gain_for_se(&c, 1.0);
        let t3 = c.upload_time(0.3, &[g1], &[]).unwrap();
        assert!((t3 - 0.3).abs() < 1e-12);
        assert!(matches!(c.upload_time(0.3, &[0.0, 0.0], &[]), Err(Error::DegenerateChannel(_))));
    }

    #[test]
    fn download_time_examples() {
        let c = cfg();
        // High SNR with two BSs: efficiency tends to log2(2) = 1 per sub-carrier.
        let t = c.download_time(0.17597, &[1e3, 1e3], 2).unwrap();
        assert!((t - 0.17597 / 2.0).abs() < 1e-6);
        // Single BS, huge gain: no self-interference, time vanishes.
        let t = c.download_time(0.17597, &[1e6], 1).unwrap();
        assert!(t < 0.01);
        // Two sub-carriers each at efficiency 0.9 with two BSs.
        let x = 2f64.powf(0.9) - 1.0; // SINR
        let s = 2.0 * x / (1.0 - x); // signal/N0 solving s/(2 + s) = x
        let h = s * c.noise_mw / c.controller_power_mw;
        let t = c.download_time(0.17597, &[h, h], 2).unwrap();
        assert!((t - 0.09776).abs() < 5e-6);
    }

    #[test]
    fn quantize_examples() {
        let c = cfg();
        assert_eq!(c.quantize_overhead(0.242), Overhead::Quantized { index: 0, slots: 0.25 });
        assert_eq!(c.quantize_overhead(0.25), Overhead::Quantized { index: 0, slots: 0.25 });
        assert_eq!(c.quantize_overhead(0.3), Overhead::Quantized { index: 1, slots: 0.5 });
        assert_eq!(c.quantize_overhead(0.60), Overhead::NoRecommendation);
        assert_eq!(c.quantize_overhead(f64::INFINITY), Overhead::NoRecommendation);
    }

    #[test]
    fn round_trip_reconstructs_rates() {
        let c = cfg();
        let up = vec![vec![3e-10, 7e-10], vec![2e-10, 1e-9]];
        let down = vec![vec![4e-10, 5e-11], vec![1e-10, 2e-10]];
        let out = c.round_trip(0.19357, 0.17597, &up, &down).unwrap();
        for b in 0..2 {
            let other = &up[1 - b];
            let se: f64 = (0..2)
                .map(|s| (1.0 + c.bs_power_mw * up[b][s] / (c.noise_mw + c.bs_power_mw * other[s])).log2())
                .sum();
            assert!(((out.tau_upload[b] * se) / 0.19357 - 1.0).abs() < 1e-10);
        }
        let max_u = out.tau_upload.iter().cloned().fold(0.0, f64::max);
        let max_d = out.tau_download.iter().cloned().fold(0.0, f64::max);
        assert_eq!(out.tau_raw, max_u + max_d);
        if let Some(t) = out.tau.slots() {
            assert!(t >= out.tau_raw);
        }
    }

    #[test]
    fn dead_fronthaul_gives_no_recommendation() {
        let c = cfg();
        let z = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let out = c.round_trip(0.19357, 0.17597, &z, &z).unwrap();
        assert_eq!(out.tau, Overhead::NoRecommendation);
    }

    proptest::proptest! {
        #[test]
        fn upload_monotone_in_gains(h in 1e-12f64..1e-8, i in 0.0f64..1e-8, dh in 0.0f64..1e-8, di in 0.0f64..1e-8) {
            let c = cfg();
            let base = c.upload_time(0.2, &[h], &[vec![i]]).unwrap();
            let better = c.upload_time(0.2, &[h + dh], &[vec![i]]).unwrap();
            let worse = c.upload_time(0.2, &[h], &[vec![i + di]]).unwrap();
            proptest::prop_assert!(better <= base);
            proptest::prop_assert!(worse >= base);
        }

        #[test]
        fn quantized_never_underestimates(raw in 1e-6f64..1.0) {
            let c = cfg();
            if let Some(t) = c.quantize_overhead(raw).slots() {
                proptest::prop_assert!(t >= raw);
            } else {
                proptest::prop_assert!(raw > 0.5);
            }
        }
    }
}
