//! Synthetic data generation for screening experiments.
//!
//! Designs have rows drawn iid from N(0, (1 - rho) I + rho 11'), the true
//! coefficients sit in the first p0 slots with magnitudes kept above a
//! detectability floor, and the noise variance is solved from a target
//! population R^2. Each random component (design, coefficients, noise) uses
//! its own sub-stream of one base seed, so regenerating with a different r2
//! reuses exactly the same design and coefficients.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DesignMatrix;

/// Stream offsets for the per-component generators.
const DESIGN_STREAM: u64 = 0;
const BETA_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Probability that a true coefficient is negative.
const NEGATIVE_SIGN_PROB: f64 = 0.4;

/// One cell of a simulation grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSetting {
    /// Observations.
    pub n: usize,
    /// Predictors.
    pub p: usize,
    /// Pairwise correlation of predictors, in [0, 1).
    pub rho: f64,
    /// Number of nonzero coefficients, in 1..=p.
    pub p0: usize,
    /// Target population R^2, in (0, 1).
    pub r2: f64,
    /// Base seed; all sub-streams derive from it.
    pub seed: u64,
}

impl SimSetting {
    /// Checks every field range.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 observations, got {}",
                self.n
            )));
        }
        if self.p == 0 {
            return Err(Error::InvalidArgument("need at least 1 predictor".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidArgument(format!(
                "correlation must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if self.p0 == 0 || self.p0 > self.p {
            return Err(Error::InvalidArgument(format!(
                "true support size must lie in 1..={}, got {}",
                self.p, self.p0
            )));
        }
        if !(self.r2 > 0.0 && self.r2 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "target R^2 must lie in (0, 1), got {}",
                self.r2
            )));
        }
        Ok(())
    }
}

/// A generated dataset together with its ground truth.
#[derive(Clone, Debug)]
pub struct SimDataset {
    /// The setting that produced this dataset.
    pub setting: SimSetting,
    /// Raw (unstandardized) design.
    pub x: DesignMatrix,
    /// Response X beta + noise.
    pub y: DVector<f64>,
    /// True coefficients; zero outside the first p0 entries.
    pub beta: DVector<f64>,
    /// Indices of the nonzero coefficients (always 0..p0).
    pub true_features: Vec<usize>,
    /// Noise variance implied by the target R^2.
    pub sigma2: f64,
}

/// Mixes seed components into one stream seed (splitmix64 chain).
///
/// Used wherever a family of runs needs independent, reproducible seeds
/// derived from one base value.
pub fn mix_seed(parts: &[u64]) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut acc = 0x51_7C_C1_B7_27_22_0A_95u64;
    for &part in parts {
        acc = splitmix64(acc ^ part);
    }
    acc
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws n rows from N(0, (1 - rho) I + rho 11') using the one-factor form
/// sqrt(rho) g 1 + sqrt(1 - rho) z with g scalar and z iid standard normal.
///
/// Rows are generated in order; within a row the shared factor g is drawn
/// first, then the p idiosyncratic terms. The factor is drawn even when
/// rho = 0 so the draw sequence does not depend on rho.
pub fn gen_design(n: usize, p: usize, rho: f64, rng: &mut impl Rng) -> Result<DesignMatrix> {
    if n < 2 || p == 0 {
        return Err(Error::InvalidArgument(format!(
            "design dimensions must satisfy n >= 2 and p >= 1, got {n}x{p}"
        )));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!(
            "correlation must lie in [0, 1), got {rho}"
        )));
    }
    let shared = rho.sqrt();
    let own = (1.0 - rho).sqrt();
    let mut m = DMatrix::zeros(n, p);
    for i in 0..n {
        let g: f64 = StandardNormal.sample(rng);
        for j in 0..p {
            let z: f64 = StandardNormal.sample(rng);
            m[(i, j)] = shared * g + own * z;
        }
    }
    DesignMatrix::new(m)
}

/// Sparse coefficients: entry j < p0 is (-1)^u (|z| + 4 ln n / sqrt n) with
/// z standard normal and u Bernoulli(0.4); entries from p0 on are zero.
///
/// The additive floor keeps every true coefficient detectable at sample
/// size n. For each entry the magnitude draw precedes the sign draw.
pub fn gen_beta(n: usize, p: usize, p0: usize, rng: &mut impl Rng) -> Result<DVector<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "magnitude floor is defined for n >= 2, got {n}"
        )));
    }
    if p0 == 0 || p0 > p {
        return Err(Error::InvalidArgument(format!(
            "true support size must lie in 1..={p}, got {p0}"
        )));
    }
    let floor = 4.0 * (n as f64).ln() / (n as f64).sqrt();
    let sign = Bernoulli::new(NEGATIVE_SIGN_PROB).expect("probability in range");
    let mut beta = DVector::zeros(p);
    for j in 0..p0 {
        let z: f64 = StandardNormal.sample(rng);
        let negative = sign.sample(rng);
        let value = z.abs() + floor;
        beta[j] = if negative { -value } else { value };
    }
    Ok(beta)
}

/// Population variance of x'beta under the equicorrelated design:
/// (1 - rho) ||beta||^2 + rho (sum beta)^2.
pub fn signal_variance(beta: &DVector<f64>, rho: f64) -> f64 {
    let total: f64 = beta.sum();
    (1.0 - rho) * beta.norm_squared() + rho * total * total
}

/// Adds Gaussian noise sized so the population R^2 equals `r2`; returns the
/// response and the noise variance used.
///
/// The noise variance comes from the population identity
/// sigma^2 = (1 - r2) / r2 * Var(x'beta), not from the realized sample
/// variance, so repeated draws share one noise level.
pub fn gen_response(
    x: &DesignMatrix,
    beta: &DVector<f64>,
    rho: f64,
    r2: f64,
    rng: &mut impl Rng,
) -> Result<(DVector<f64>, f64)> {
    if beta.len() != x.p() {
        return Err(Error::DimensionMismatch(format!(
            "coefficients have {} entries but the design has {} columns",
            beta.len(),
            x.p()
        )));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!(
            "correlation must lie in [0, 1), got {rho}"
        )));
    }
    if !(r2 > 0.0 && r2 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target R^2 must lie in (0, 1), got {r2}"
        )));
    }
    let sv = signal_variance(beta, rho);
    if sv == 0.0 {
        return Err(Error::InvalidArgument(
            "all-zero coefficients leave the target R^2 unreachable".into(),
        ));
    }
    let sigma2 = (1.0 - r2) / r2 * sv;
    let sigma = sigma2.sqrt();
    let mut y = x.matrix() * beta;
    for i in 0..y.len() {
        let e: f64 = StandardNormal.sample(rng);
        y[i] += sigma * e;
    }
    Ok((y, sigma2))
}

/// Generates a full dataset from one setting.
///
/// The design, coefficients, and noise come from sub-streams 0, 1, and 2 of
/// the base seed, in that order, so any component can be regenerated alone.
pub fn gen_dataset(setting: &SimSetting) -> Result<SimDataset> {
    setting.validate()?;
    let mut design_rng = stream_rng(setting.seed, DESIGN_STREAM);
    let mut beta_rng = stream_rng(setting.seed, BETA_STREAM);
    let mut noise_rng = stream_rng(setting.seed, NOISE_STREAM);
    let x = gen_design(setting.n, setting.p, setting.rho, &mut design_rng)?;
    let beta = gen_beta(setting.n, setting.p, setting.p0, &mut beta_rng)?;
    let (y, sigma2) = gen_response(&x, &beta, setting.rho, setting.r2, &mut noise_rng)?;
    Ok(SimDataset {
        setting: *setting,
        x,
        y,
        beta,
        true_features: (0..setting.p0).collect(),
        sigma2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screening::{default_threshold, screen_sis};
    use approx::assert_relative_eq;

    fn sample_correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut sab = 0.0;
        let mut saa = 0.0;
        let mut sbb = 0.0;
        for i in 0..a.len() {
            let da = a[i] - ma;
            let db = b[i] - mb;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn design_columns_hit_target_correlation() {
        let mut rng = stream_rng(4242, DESIGN_STREAM);
        let x = gen_design(5000, 4, 0.6, &mut rng).unwrap();
        for j in 0..4 {
            let col: Vec<f64> = x.matrix().column(j).iter().copied().collect();
            let mean = col.iter().sum::<f64>() / 5000.0;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4999.0;
            assert!(mean.abs() < 0.05, "column {j} mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "column {j} variance {var}");
            for k in (j + 1)..4 {
                let other: Vec<f64> = x.matrix().column(k).iter().copied().collect();
                let r = sample_correlation(&col, &other);
                assert!((r - 0.6).abs() < 0.05, "columns {j},{k} correlation {r}");
            }
        }
    }

    #[test]
    fn independent_design_has_near_zero_correlations() {
        let mut rng = stream_rng(777, DESIGN_STREAM);
        let x = gen_design(5000, 3, 0.0, &mut rng).unwrap();
        for j in 0..3 {
            for k in (j + 1)..3 {
                let a: Vec<f64> = x.matrix().column(j).iter().copied().collect();
                let b: Vec<f64> = x.matrix().column(k).iter().copied().collect();
                assert!(sample_correlation(&a, &b).abs() < 0.05);
            }
        }
    }

    #[test]
    fn beta_respects_floor_sparsity_and_sign_rate() {
        let mut rng = stream_rng(31337, BETA_STREAM);
        let n = 100usize;
        let floor = 4.0 * (n as f64).ln() / (n as f64).sqrt();
        let mut negative = 0usize;
        let draws = 2000usize;
        for _ in 0..draws / 5 {
            let beta = gen_beta(n, 8, 5, &mut rng).unwrap();
            for j in 0..5 {
                assert!(beta[j].abs() >= floor - 1e-12);
                if beta[j] < 0.0 {
                    negative += 1;
                }
            }
            for j in 5..8 {
                assert_eq!(beta[j], 0.0);
            }
        }
        let rate = negative as f64 / draws as f64;
        assert!((rate - 0.4).abs() < 0.05, "negative rate {rate}");
    }

    #[test]
    fn signal_variance_matches_quadratic_form_oracle() {
        // Direct beta' Sigma beta with Sigma = (1 - rho) I + rho 11'.
        let beta = nalgebra::dvector![1.5, -2.0, 0.0, 0.5];
        for &rho in &[0.0, 0.3, 0.9] {
            let p = beta.len();
            let mut sigma = DMatrix::from_element(p, p, rho);
            for j in 0..p {
                sigma[(j, j)] = 1.0;
            }
            let oracle = (beta.transpose() * &sigma * &beta)[(0, 0)];
            assert_relative_eq!(signal_variance(&beta, rho), oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn empirical_r2_concentrates_near_target() {
        for &(rho, r2) in &[(0.0, 0.5), (0.6, 0.75), (0.3, 0.9)] {
            let setting = SimSetting {
                n: 5000,
                p: 6,
                rho,
                p0: 3,
                r2,
                seed: 90,
            };
            let data = gen_dataset(&setting).unwrap();
            let signal = data.x.matrix() * &data.beta;
            let sm = signal.sum() / 5000.0;
            let ym = data.y.sum() / 5000.0;
            let var_signal: f64 = signal.iter().map(|v| (v - sm) * (v - sm)).sum();
            let var_y: f64 = data.y.iter().map(|v| (v - ym) * (v - ym)).sum();
            let emp = var_signal / var_y;
            assert!((emp - r2).abs() < 0.03, "rho {rho}: empirical R^2 {emp} vs {r2}");
        }
    }

    #[test]
    fn same_seed_reproduces_and_r2_change_preserves_design() {
        let setting = SimSetting {
            n: 25,
            p: 40,
            rho: 0.3,
            p0: 4,
            r2: 0.5,
            seed: 1234,
        };
        let first = gen_dataset(&setting).unwrap();
        let second = gen_dataset(&setting).unwrap();
        assert_eq!(first.x.matrix(), second.x.matrix());
        assert_eq!(first.y, second.y);

        let richer = SimSetting { r2: 0.9, ..setting };
        let third = gen_dataset(&richer).unwrap();
        assert_eq!(first.x.matrix(), third.x.matrix());
        assert_eq!(first.beta, third.beta);
        assert_ne!(first.y, third.y);
        assert!(third.sigma2 < first.sigma2);
    }

    #[test]
    fn sigma2_solves_the_population_identity() {
        let setting = SimSetting {
            n: 30,
            p: 10,
            rho: 0.6,
            p0: 3,
            r2: 0.75,
            seed: 5,
        };
        let data = gen_dataset(&setting).unwrap();
        let sv = signal_variance(&data.beta, 0.6);
        assert_relative_eq!(data.sigma2, sv / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn setting_validation_rejects_bad_fields() {
        let good = SimSetting {
            n: 10,
            p: 5,
            rho: 0.5,
            p0: 2,
            r2: 0.5,
            seed: 0,
        };
        assert!(good.validate().is_ok());
        assert!(SimSetting { n: 1, ..good }.validate().is_err());
        assert!(SimSetting { p: 0, p0: 0, ..good }.validate().is_err());
        assert!(SimSetting { rho: 1.0, ..good }.validate().is_err());
        assert!(SimSetting { rho: -0.1, ..good }.validate().is_err());
        assert!(SimSetting { p0: 6, ..good }.validate().is_err());
        assert!(SimSetting { r2: 0.0, ..good }.validate().is_err());
        assert!(SimSetting { r2: 1.0, ..good }.validate().is_err());
    }

    #[test]
    fn mix_seed_is_deterministic_and_order_sensitive() {
        assert_eq!(mix_seed(&[1, 2, 3]), mix_seed(&[1, 2, 3]));
        assert_ne!(mix_seed(&[1, 2, 3]), mix_seed(&[3, 2, 1]));
        assert_ne!(mix_seed(&[0]), mix_seed(&[1]));
    }

    #[test]
    fn easy_settings_keep_true_features_near_the_top() {
        // Independent predictors, strong signal: correlation screening should
        // retain all three true features in nearly every replicate.
        let mut hits = 0;
        let m = default_threshold(125).unwrap();
        assert_eq!(m, 26);
        for rep in 0..100 {
            let setting = SimSetting {
                n: 125,
                p: 250,
                rho: 0.0,
                p0: 3,
                r2: 0.95,
                seed: mix_seed(&[808, rep]),
            };
            let data = gen_dataset(&setting).unwrap();
            let result = screen_sis(&data.x, &data.y, m).unwrap();
            let all_in = data
                .true_features
                .iter()
                .all(|&f| result.rank_of(f).unwrap() <= m);
            if all_in {
                hits += 1;
            }
        }
        assert!(hits >= 90, "only {hits} of 100 replicates retained the truth");
    }
}
