//! Supervised objectives with hand-written backpropagation.
//!
//! Parameter packing is fixed and documented so evolutionary operators can
//! act on stable entry indices: for each layer, the weight matrix in
//! row-major order (`W[out][in]`, entry `k*in + j`) followed by the bias
//! vector. Layers are packed input-to-output.

use crate::core::{Dataset, ParamVector};
use crate::error::{Error, Result};
use crate::losses::softmax_cross_entropy;
use crate::models::{check_dim, Batch, Objective};

fn batch_rows<'a>(name: &str, batch: Batch<'a>) -> Result<(&'a Dataset, &'a [usize])> {
    match batch {
        Batch::Rows(data, idx) if !idx.is_empty() => Ok((data, idx)),
        Batch::Rows(..) => Err(Error::invalid(format!("{name}: empty batch"))),
        Batch::None => Err(Error::invalid(format!(
            "{name}: supervised objective needs a dataset batch"
        ))),
    }
}

fn check_data_dims(name: &str, d_x: usize, d_y: usize, data: &Dataset) -> Result<()> {
    if data.feature_dim() != d_x || data.label_dim() != d_y {
        return Err(Error::invalid(format!(
            "{name}: dataset is {}x{}, model expects {d_x}x{d_y}",
            data.feature_dim(),
            data.label_dim()
        )));
    }
    Ok(())
}

/// Multinomial logistic regression: softmax over `W x + b` with mean
/// cross-entropy loss over the batch.
pub struct SoftmaxRegression {
    d_x: usize,
    d_y: usize,
}

impl SoftmaxRegression {
    pub fn new(d_x: usize, d_y: usize) -> Result<Self> {
        if d_x == 0 || d_y < 2 {
            return Err(Error::invalid(
                "softmax regression: need d_x >= 1 and d_y >= 2",
            ));
        }
        Ok(SoftmaxRegression { d_x, d_y })
    }
}

impl Objective for SoftmaxRegression {
    fn dim(&self) -> usize {
        self.d_y * (self.d_x + 1)
    }

    fn name(&self) -> &str {
        "softmax_regression"
    }

    fn eval(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<(f64, ParamVector)> {
        check_dim(self.name(), self.dim(), theta)?;
        let (data, idx) = batch_rows(self.name(), batch)?;
        check_data_dims(self.name(), self.d_x, self.d_y, data)?;

        let (d_x, d_y) = (self.d_x, self.d_y);
        let params = theta.as_slice();
        let (weights, bias) = params.split_at(d_y * d_x);
        let scale = 1.0 / idx.len() as f64;

        let mut loss = 0.0;
        let mut grad = vec![0.0; self.dim()];
        let (grad_w, grad_b) = grad.split_at_mut(d_y * d_x);
        let mut logits = vec![0.0; d_y];
        for &i in idx {
            let x = data.feature_row(i);
            let y = data.label_row(i);
            for k in 0..d_y {
                let row = &weights[k * d_x..(k + 1) * d_x];
                logits[k] = bias[k] + row.iter().zip(x).map(|(&w, &v)| w * v).sum::<f64>();
            }
            let (ce, dz) = softmax_cross_entropy(&logits, y)?;
            loss += ce * scale;
            for k in 0..d_y {
                let dzk = dz[k] * scale;
                let row = &mut grad_w[k * d_x..(k + 1) * d_x];
                for (gw, &v) in row.iter_mut().zip(x) {
                    *gw += dzk * v;
                }
                grad_b[k] += dzk;
            }
        }
        Ok((loss, ParamVector::new(grad)?))
    }
}

/// Architecture of the one-hidden-layer perceptron: widths
/// `[d_x, hidden, d_y]`, tanh hidden activation, softmax output trained with
/// cross entropy.
#[derive(Clone, Copy, Debug)]
pub struct MlpSpec {
    pub d_x: usize,
    pub hidden: usize,
    pub d_y: usize,
}

impl MlpSpec {
    pub fn new(d_x: usize, hidden: usize, d_y: usize) -> Result<Self> {
        if d_x == 0 || hidden == 0 || d_y < 2 {
            return Err(Error::invalid(
                "mlp: need d_x >= 1, hidden >= 1 and d_y >= 2",
            ));
        }
        Ok(MlpSpec { d_x, hidden, d_y })
    }

    /// Exactly `hidden*(d_x+1) + d_y*(hidden+1)`.
    pub fn param_count(&self) -> usize {
        self.hidden * (self.d_x + 1) + self.d_y * (self.hidden + 1)
    }
}

/// One-hidden-layer MLP classifier; mean cross-entropy over the batch with
/// exact backpropagated gradients.
pub struct Mlp {
    spec: MlpSpec,
}

impl Mlp {
    pub fn new(spec: MlpSpec) -> Self {
        Mlp { spec }
    }
}

impl Objective for Mlp {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn name(&self) -> &str {
        "mlp"
    }

    fn eval(&self, theta: &ParamVector, batch: Batch<'_>) -> Result<(f64, ParamVector)> {
        check_dim(self.name(), self.dim(), theta)?;
        let (data, idx) = batch_rows(self.name(), batch)?;
        let MlpSpec { d_x, hidden, d_y } = self.spec;
        check_data_dims(self.name(), d_x, d_y, data)?;

        let params = theta.as_slice();
        let (w1, rest) = params.split_at(hidden * d_x);
        let (b1, rest) = rest.split_at(hidden);
        let (w2, b2) = rest.split_at(d_y * hidden);

        let scale = 1.0 / idx.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.dim()];
        let (gw1, grest) = grad.split_at_mut(hidden * d_x);
        let (gb1, grest) = grest.split_at_mut(hidden);
        let (gw2, gb2) = grest.split_at_mut(d_y * hidden);

        let mut hidden_out = vec![0.0; hidden];
        let mut logits = vec![0.0; d_y];
        let mut d_hidden = vec![0.0; hidden];
        for &i in idx {
            let x = data.feature_row(i);
            let y = data.label_row(i);
            for j in 0..hidden {
                let row = &w1[j * d_x..(j + 1) * d_x];
                let pre = b1[j] + row.iter().zip(x).map(|(&w, &v)| w * v).sum::<f64>();
                hidden_out[j] = pre.tanh();
            }
            for k in 0..d_y {
                let row = &w2[k * hidden..(k + 1) * hidden];
                logits[k] = b2[k]
                    + row
                        .iter()
                        .zip(&hidden_out)
                        .map(|(&w, &h)| w * h)
                        .sum::<f64>();
            }
            let (ce, dz) = softmax_cross_entropy(&logits, y)?;
            loss += ce * scale;

            d_hidden.fill(0.0);
            for k in 0..d_y {
                let dzk = dz[k] * scale;
                let row = &mut gw2[k * hidden..(k + 1) * hidden];
                for (j, (gw, &h)) in row.iter_mut().zip(&hidden_out).enumerate() {
                    *gw += dzk * h;
                    d_hidden[j] += dz[k] * w2[k * hidden + j];
                }
                gb2[k] += dzk;
            }
            for j in 0..hidden {
                let da = d_hidden[j] * (1.0 - hidden_out[j] * hidden_out[j]) * scale;
                let row = &mut gw1[j * d_x..(j + 1) * d_x];
                for (gw, &v) in row.iter_mut().zip(x) {
                    *gw += da * v;
                }
                gb1[j] += da;
            }
        }
        Ok((loss, ParamVector::new(grad)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{init_normal, Prng};
    use crate::models::grad_check;
    use crate::models::synth::gaussian_blobs;

    fn blob_data() -> Dataset {
        gaussian_blobs(24, 4, 3, 0.5, &mut Prng::new(77)).unwrap()
    }

    #[test]
    fn zero_weights_give_uniform_softmax_loss() {
        let data = blob_data();
        let obj = SoftmaxRegression::new(4, 3).unwrap();
        let idx: Vec<usize> = (0..data.len()).collect();
        let theta = ParamVector::zeros(obj.dim());
        let (loss, _) = obj.eval(&theta, Batch::Rows(&data, &idx)).unwrap();
        assert!((loss - 3.0f64.ln()).abs() < 1e-12, "loss {loss}");
    }

    #[test]
    fn mlp_parameter_count_matches_formula() {
        let spec = MlpSpec::new(4, 6, 3).unwrap();
        assert_eq!(spec.param_count(), 6 * 5 + 3 * 7);
        assert_eq!(Mlp::new(spec).dim(), 51);
    }

    #[test]
    fn single_instance_batch_equals_instance_gradient() {
        let data = blob_data();
        let obj = SoftmaxRegression::new(4, 3).unwrap();
        let theta = init_normal(obj.dim(), 0.3, &mut Prng::new(5)).unwrap();
        let (l_one, g_one) = obj.eval(&theta, Batch::Rows(&data, &[3])).unwrap();
        let (l_again, g_again) = obj.eval(&theta, Batch::Rows(&data, &[3])).unwrap();
        assert_eq!(l_one, l_again);
        assert_eq!(g_one, g_again);
    }

    #[test]
    fn duplicated_batch_leaves_gradient_unchanged() {
        let data = blob_data();
        let obj = Mlp::new(MlpSpec::new(4, 5, 3).unwrap());
        let theta = init_normal(obj.dim(), 0.2, &mut Prng::new(9)).unwrap();
        let idx: Vec<usize> = (0..8).collect();
        let doubled: Vec<usize> = idx.iter().chain(&idx).copied().collect();
        let (l1, g1) = obj.eval(&theta, Batch::Rows(&data, &idx)).unwrap();
        let (l2, g2) = obj.eval(&theta, Batch::Rows(&data, &doubled)).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.as_slice().iter().zip(g2.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let data = blob_data();
        let idx: Vec<usize> = (0..16).collect();
        let batch = Batch::Rows(&data, &idx);
        let softmax = SoftmaxRegression::new(4, 3).unwrap();
        let mlp = Mlp::new(MlpSpec::new(4, 6, 3).unwrap());
        let mut rng = Prng::new(31);
        for _ in 0..3 {
            let t1 = init_normal(softmax.dim(), 0.1, &mut rng).unwrap();
            assert!(grad_check(&softmax, &t1, batch).unwrap() <= 1e-5);
            let t2 = init_normal(mlp.dim(), 0.1, &mut rng).unwrap();
            assert!(grad_check(&mlp, &t2, batch).unwrap() <= 1e-5);
        }
    }

    #[test]
    fn supervised_objectives_require_a_batch() {
        let obj = SoftmaxRegression::new(2, 2).unwrap();
        let theta = ParamVector::zeros(obj.dim());
        assert!(obj.eval(&theta, Batch::None).is_err());
    }

    #[test]
    fn dataset_dimension_mismatch_is_rejected() {
        let data = blob_data(); // 4 features, 3 classes
        let obj = SoftmaxRegression::new(3, 3).unwrap();
        let theta = ParamVector::zeros(obj.dim());
        let idx = [0usize];
        assert!(obj.eval(&theta, Batch::Rows(&data, &idx)).is_err());
    }

    #[test]
    fn constructors_reject_degenerate_dimensions() {
        assert!(SoftmaxRegression::new(0, 3).is_err());
        assert!(SoftmaxRegression::new(3, 1).is_err());
        assert!(MlpSpec::new(3, 0, 2).is_err());
    }
}
