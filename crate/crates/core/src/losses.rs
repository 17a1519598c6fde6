//! Forward evaluators for the depth-regression and adversarial objectives.

use crate::codec::MouldPair;
use crate::error::{Error, Result};

/// Lower/upper clamp applied to discriminator probabilities before logs.
pub const PROB_CLAMP: f64 = 1e-7;

/// Default weight of the L1 term in the combined objective.
pub const DEFAULT_LAMBDA: f64 = 1e4;

/// `batch × 2 × n × n` centered depths, channel 0 visible, channel 1 hidden.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthBatch {
    batch: usize,
    n: usize,
    data: Vec<f64>,
}

impl DepthBatch {
    pub fn new(batch: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != batch * 2 * n * n {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {batch}x2x{n}x{n} batch",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(DepthBatch { batch, n, data })
    }

    pub fn from_pairs(pairs: &[&MouldPair]) -> Result<Self> {
        let n = pairs.first().ok_or(Error::EmptyInput("no pairs"))?.resolution;
        let mut data = Vec::with_capacity(pairs.len() * 2 * n * n);
        for p in pairs {
            if p.resolution != n {
                return Err(Error::ResolutionMismatch(n, p.resolution));
            }
            data.extend_from_slice(&p.z_vis);
            data.extend_from_slice(&p.z_hid);
        }
        DepthBatch::new(pairs.len(), n, data)
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.batch, 2, self.n, self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<DepthBatch> {
        DepthBatch::new(self.batch, self.n, self.data.iter().map(|&v| f(v)).collect())
    }
}

fn same_shape(a: &DepthBatch, b: &DepthBatch) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("empty depth batch"));
    }
    Ok(())
}

/// Mean absolute difference over every pixel of both maps in the batch.
pub fn l1_loss(gt: &DepthBatch, pred: &DepthBatch) -> Result<f64> {
    same_shape(gt, pred)?;
    let sum: f64 = gt.data.iter().zip(&pred.data).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / gt.len() as f64)
}

/// Gradient of [`l1_loss`] with respect to the prediction: `sign(pred - gt) / P`,
/// zero where the two agree.
pub fn l1_gradient(gt: &DepthBatch, pred: &DepthBatch) -> Result<Vec<f64>> {
    same_shape(gt, pred)?;
    let scale = 1.0 / gt.len() as f64;
    Ok(gt
        .data
        .iter()
        .zip(&pred.data)
        .map(|(a, b)| {
            let d = b - a;
            if d > 0.0 {
                scale
            } else if d < 0.0 {
                -scale
            } else {
                0.0
            }
        })
        .collect())
}

/// Discriminator outputs on ground-truth and generated pairs, clamped into
/// `[1e-7, 1 - 1e-7]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorScores {
    real: Vec<f64>,
    fake: Vec<f64>,
}

impl DiscriminatorScores {
    pub fn new(real: Vec<f64>, fake: Vec<f64>) -> Result<Self> {
        if real.is_empty() || fake.is_empty() {
            return Err(Error::EmptyInput("score vectors must be non-empty"));
        }
        let clamp = |v: Vec<f64>, offset: usize| -> Result<Vec<f64>> {
            v.into_iter()
                .enumerate()
                .map(|(i, s)| {
                    if s.is_nan() {
                        Err(Error::NonFinite(offset + i))
                    } else {
                        Ok(s.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))
                    }
                })
                .collect()
        };
        let n_real = real.len();
        Ok(DiscriminatorScores {
            real: clamp(real, 0)?,
            fake: clamp(fake, n_real)?,
        })
    }

    pub fn real(&self) -> &[f64] {
        &self.real
    }

    pub fn fake(&self) -> &[f64] {
        &self.fake
    }
}

/// `mean(log D(real)) + mean(log(1 - D(fake)))`.
pub fn gan_loss(scores: &DiscriminatorScores) -> f64 {
    let mean = |v: &[f64], f: fn(f64) -> f64| v.iter().map(|&s| f(s)).sum::<f64>() / v.len() as f64;
    mean(&scores.real, f64::ln) + mean(&scores.fake, |s| (1.0 - s).ln())
}

/// `gan + lambda * l1`. `lambda` must be non-negative.
pub fn combined_objective(gan: f64, l1: f64, lambda: f64) -> f64 {
    assert!(lambda >= 0.0, "lambda must be non-negative, got {lambda}");
    gan + lambda * l1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn batch(values: Vec<f64>) -> DepthBatch {
        let n = ((values.len() / 2) as f64).sqrt() as usize;
        DepthBatch::new(1, n, values).unwrap()
    }

    #[test]
    fn l1_trivial_cases() {
        let gt = batch(vec![0.1, -0.2, 0.3, 1.5, 0.0, 0.2, -0.4, 1.5]);
        assert_eq!(l1_loss(&gt, &gt).unwrap(), 0.0);
        let shifted = gt.map(|v| v + 0.5).unwrap();
        assert!((l1_loss(&gt, &shifted).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shape_and_finiteness_errors() {
        assert!(DepthBatch::new(1, 2, vec![0.0; 7]).is_err());
        assert!(matches!(DepthBatch::new(1, 1, vec![0.0, f64::NAN]), Err(Error::NonFinite(1))));
        let a = DepthBatch::new(1, 1, vec![0.0; 2]).unwrap();
        let b = DepthBatch::new(2, 1, vec![0.0; 4]).unwrap();
        assert!(matches!(l1_loss(&a, &b), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn gan_closed_forms() {
        let half = DiscriminatorScores::new(vec![0.5; 4], vec![0.5; 3]).unwrap();
        assert!((gan_loss(&half) + 2.0 * 2f64.ln()).abs() < 1e-12);
        let perfect = DiscriminatorScores::new(vec![1.0 - 1e-7], vec![1e-7]).unwrap();
        let v = gan_loss(&perfect);
        assert!(v <= 0.0 && v > -1e-6);
        // Saturated inputs are clamped to finite values.
        let saturated = DiscriminatorScores::new(vec![0.0], vec![1.0]).unwrap();
        assert!(gan_loss(&saturated).is_finite());
        assert!(DiscriminatorScores::new(vec![], vec![0.5]).is_err());
    }

    #[test]
    fn combined_examples() {
        let gan = -1.386294;
        assert!((combined_objective(gan, 0.5, 1e4) - 4998.613706).abs() < 1e-9);
        assert_eq!(combined_objective(gan, 0.5, 0.0), gan);
        assert_eq!(combined_objective(gan, 0.0, 1e4), gan);
    }

    #[test]
    #[should_panic]
    fn negative_lambda_panics() {
        combined_objective(0.0, 1.0, -1.0);
    }

    proptest! {
        #[test]
        fn l1_homogeneous(vals in prop::collection::vec(-1.0f64..1.0, 8), noise in prop::collection::vec(-1.0f64..1.0, 8), a in -10.0f64..10.0) {
            let gt = batch(vals.clone());
            let pred = batch(vals.iter().zip(&noise).map(|(v, n)| v + n).collect());
            let base = l1_loss(&gt, &pred).unwrap();
            prop_assert!(base >= 0.0);
            let scaled = l1_loss(&gt.map(|v| a * v).unwrap(), &pred.map(|v| a * v).unwrap()).unwrap();
            prop_assert!((scaled - a.abs() * base).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn gan_monotone(real in prop::collection::vec(0.01f64..0.98, 1..6), fake in prop::collection::vec(0.01f64..0.98, 1..6), k in 0usize..6, bump in 0.001f64..0.01) {
            let base = gan_loss(&DiscriminatorScores::new(real.clone(), fake.clone()).unwrap());
            prop_assert!(base <= 0.0);
            let mut r = real.clone();
            let i = k % r.len();
            r[i] += bump;
            prop_assert!(gan_loss(&DiscriminatorScores::new(r, fake.clone()).unwrap()) > base);
            let mut f = fake.clone();
            let j = k % f.len();
            f[j] += bump;
            prop_assert!(gan_loss(&DiscriminatorScores::new(real, f).unwrap()) < base);
        }
    }
}
