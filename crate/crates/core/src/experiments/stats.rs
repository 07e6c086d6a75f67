use crate::error::{Error, Result};

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    /// 95% normal-approximation half-width, `1.96 s / sqrt(n)`.
    pub half_width: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn overlaps(&self, other: &MeanCi) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }
}

/// Sample mean with a 95% confidence half-width.
pub fn mean_with_ci(samples: &[f64]) -> Result<MeanCi> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(
            "samples",
            format!("need at least 2 samples, got {n}"),
        ));
    }
    let mean = compensated_sum(samples.iter().copied()) / n as f64;
    let ss = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean)));
    let sd = (ss / (n - 1) as f64).sqrt();
    Ok(MeanCi {
        mean,
        half_width: 1.96 * sd / (n as f64).sqrt(),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn constant_samples() {
        let ci = mean_with_ci(&[2.5; 10]).unwrap();
        assert_eq!((ci.mean, ci.half_width), (2.5, 0.0));
        assert!(mean_with_ci(&[1.0]).is_err());
    }

    #[test]
    fn bernoulli_mean() {
        let mut rng = substream(3, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
            .collect();
        assert!((mean_with_ci(&xs).unwrap().mean - 0.5).abs() < 0.01);
    }

    #[test]
    fn unit_variance_half_width() {
        let mut rng = substream(4, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        assert_relative_eq!(
            mean_with_ci(&xs).unwrap().half_width,
            0.0196,
            max_relative = 0.03
        );
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
