//! Training objectives with analytic gradients. All objectives report the
//! mean loss over a row subset plus an L2 penalty on weight (not bias)
//! parameters, so mini-batch gradients and full-batch values share one code
//! path and the gradients can be checked against finite differences.

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow; `softplus(z) - y*z` is the Bernoulli
/// negative log-likelihood of `sigmoid(z)`.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standardized feature rows with {0,1} targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.x.first().map(Vec::len).unwrap_or(0)
    }
}

pub trait Objective {
    /// Number of parameters.
    fn dim(&self) -> usize;
    /// Number of data rows.
    fn rows(&self) -> usize;
    /// Mean loss over `rows` plus regularization.
    fn value(&self, params: &[f64], rows: &[usize]) -> f64;
    /// Gradient of [`Objective::value`].
    fn gradient(&self, params: &[f64], rows: &[usize]) -> Vec<f64>;
}

/// Binary cross-entropy on a linear score; params are `[w..., b]`.
pub struct LogisticObjective<'a> {
    pub data: &'a Dataset,
    pub l2: f64,
}

impl Objective for LogisticObjective<'_> {
    fn dim(&self) -> usize {
        self.data.width() + 1
    }

    fn rows(&self) -> usize {
        self.data.len()
    }

    fn value(&self, params: &[f64], rows: &[usize]) -> f64 {
        let (w, b) = params.split_at(self.data.width());
        let mut loss = 0.0;
        for &i in rows {
            let z = dot(w, &self.data.x[i]) + b[0];
            loss += softplus(z) - self.data.y[i] * z;
        }
        loss / rows.len() as f64 + 0.5 * self.l2 * dot(w, w)
    }

    fn gradient(&self, params: &[f64], rows: &[usize]) -> Vec<f64> {
        let width = self.data.width();
        let (w, b) = params.split_at(width);
        let mut grad = vec![0.0; self.dim()];
        for &i in rows {
            let z = dot(w, &self.data.x[i]) + b[0];
            let residual = sigmoid(z) - self.data.y[i];
            for (g, x) in grad[..width].iter_mut().zip(&self.data.x[i]) {
                *g += residual * x;
            }
            grad[width] += residual;
        }
        let scale = 1.0 / rows.len() as f64;
        for g in grad.iter_mut() {
            *g *= scale;
        }
        for (g, wi) in grad[..width].iter_mut().zip(w) {
            *g += self.l2 * wi;
        }
        grad
    }
}

/// One hidden layer of `hidden` sigmoid units with a sigmoid output. Trains
/// under cross-entropy or, with `squared_loss`, least squares against {0,1}
/// targets. Params are `[w1 (hidden x width, row-major), b1, w2, b2]`.
pub struct MlpObjective<'a> {
    pub data: &'a Dataset,
    pub hidden: usize,
    pub l2: f64,
    pub squared_loss: bool,
}

impl MlpObjective<'_> {
    fn width(&self) -> usize {
        self.data.width()
    }

    fn split<'p>(&self, params: &'p [f64]) -> (&'p [f64], &'p [f64], &'p [f64], f64) {
        let width = self.width();
        let (w1, rest) = params.split_at(self.hidden * width);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        (w1, b1, w2, rest[0])
    }

    fn forward(&self, w1: &[f64], b1: &[f64], w2: &[f64], b2: f64, x: &[f64]) -> (Vec<f64>, f64) {
        let width = self.width();
        let mut activations = Vec::with_capacity(self.hidden);
        for j in 0..self.hidden {
            let a = dot(&w1[j * width..(j + 1) * width], x) + b1[j];
            activations.push(sigmoid(a));
        }
        let z = dot(w2, &activations) + b2;
        (activations, z)
    }

    /// Output probability for one standardized row.
    pub fn probability(&self, params: &[f64], x: &[f64]) -> f64 {
        let (w1, b1, w2, b2) = self.split(params);
        let (_, z) = self.forward(w1, b1, w2, b2, x);
        sigmoid(z)
    }
}

impl Objective for MlpObjective<'_> {
    fn dim(&self) -> usize {
        self.hidden * self.width() + 2 * self.hidden + 1
    }

    fn rows(&self) -> usize {
        self.data.len()
    }

    fn value(&self, params: &[f64], rows: &[usize]) -> f64 {
        let (w1, b1, w2, b2) = self.split(params);
        let mut loss = 0.0;
        for &i in rows {
            let (_, z) = self.forward(w1, b1, w2, b2, &self.data.x[i]);
            let y = self.data.y[i];
            if self.squared_loss {
                let diff = sigmoid(z) - y;
                loss += 0.5 * diff * diff;
            } else {
                loss += softplus(z) - y * z;
            }
        }
        loss / rows.len() as f64 + 0.5 * self.l2 * (dot(w1, w1) + dot(w2, w2))
    }

    fn gradient(&self, params: &[f64], rows: &[usize]) -> Vec<f64> {
        let width = self.width();
        let (w1, b1, w2, b2) = self.split(params);
        let mut grad = vec![0.0; self.dim()];
        let (gw1, rest) = grad.split_at_mut(self.hidden * width);
        let (gb1, rest) = rest.split_at_mut(self.hidden);
        let (gw2, gb2) = rest.split_at_mut(self.hidden);

        for &i in rows {
            let x = &self.data.x[i];
            let (h, z) = self.forward(w1, b1, w2, b2, x);
            let o = sigmoid(z);
            let y = self.data.y[i];
            // d(loss)/dz: cross-entropy through the sigmoid collapses to o - y
            let dz = if self.squared_loss {
                (o - y) * o * (1.0 - o)
            } else {
                o - y
            };
            for j in 0..self.hidden {
                gw2[j] += dz * h[j];
                let da = dz * w2[j] * h[j] * (1.0 - h[j]);
                gb1[j] += da;
                for (g, xv) in gw1[j * width..(j + 1) * width].iter_mut().zip(x) {
                    *g += da * xv;
                }
            }
            gb2[0] += dz;
        }
        let scale = 1.0 / rows.len() as f64;
        for g in grad.iter_mut() {
            *g *= scale;
        }
        let (gw1, rest) = grad.split_at_mut(self.hidden * width);
        for (g, w) in gw1.iter_mut().zip(w1) {
            *g += self.l2 * w;
        }
        let (_, rest) = rest.split_at_mut(self.hidden);
        let (gw2, _) = rest.split_at_mut(self.hidden);
        for (g, w) in gw2.iter_mut().zip(w2) {
            *g += self.l2 * w;
        }
        grad
    }
}

/// Hinge loss on a linear score with L2 weight decay; params are `[w..., b]`.
/// Targets are mapped to ±1.
pub struct HingeObjective<'a> {
    pub data: &'a Dataset,
    pub l2: f64,
}

impl Objective for HingeObjective<'_> {
    fn dim(&self) -> usize {
        self.data.width() + 1
    }

    fn rows(&self) -> usize {
        self.data.len()
    }

    fn value(&self, params: &[f64], rows: &[usize]) -> f64 {
        let (w, b) = params.split_at(self.data.width());
        let mut loss = 0.0;
        for &i in rows {
            let t = 2.0 * self.data.y[i] - 1.0;
            let margin = t * (dot(w, &self.data.x[i]) + b[0]);
            loss += (1.0 - margin).max(0.0);
        }
        loss / rows.len() as f64 + 0.5 * self.l2 * dot(w, w)
    }

    fn gradient(&self, params: &[f64], rows: &[usize]) -> Vec<f64> {
        let width = self.data.width();
        let (w, b) = params.split_at(width);
        let mut grad = vec![0.0; self.dim()];
        for &i in rows {
            let t = 2.0 * self.data.y[i] - 1.0;
            let margin = t * (dot(w, &self.data.x[i]) + b[0]);
            if margin < 1.0 {
                for (g, x) in grad[..width].iter_mut().zip(&self.data.x[i]) {
                    *g -= t * x;
                }
                grad[width] -= t;
            }
        }
        let scale = 1.0 / rows.len() as f64;
        for g in grad.iter_mut() {
            *g *= scale;
        }
        for (g, wi) in grad[..width].iter_mut().zip(w) {
            *g += self.l2 * wi;
        }
        grad
    }
}

/// Bernoulli negative log-likelihood of `sigmoid(a*d + b)` over decision
/// values; params are `[a, b]`.
pub struct CalibrationObjective {
    pub decisions: Vec<f64>,
    pub y: Vec<f64>,
}

impl Objective for CalibrationObjective {
    fn dim(&self) -> usize {
        2
    }

    fn rows(&self) -> usize {
        self.y.len()
    }

    fn value(&self, params: &[f64], rows: &[usize]) -> f64 {
        let mut loss = 0.0;
        for &i in rows {
            let z = params[0] * self.decisions[i] + params[1];
            loss += softplus(z) - self.y[i] * z;
        }
        loss / rows.len() as f64
    }

    fn gradient(&self, params: &[f64], rows: &[usize]) -> Vec<f64> {
        let mut grad = vec![0.0; 2];
        for &i in rows {
            let z = params[0] * self.decisions[i] + params[1];
            let residual = sigmoid(z) - self.y[i];
            grad[0] += residual * self.decisions[i];
            grad[1] += residual;
        }
        let scale = 1.0 / rows.len() as f64;
        grad[0] *= scale;
        grad[1] *= scale;
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset {
            x: vec![vec![1.0, 0.5], vec![-1.0, 0.2], vec![0.3, -0.7], vec![-0.4, 1.1]],
            y: vec![1.0, 0.0, 1.0, 0.0],
        }
    }

    fn finite_diff<O: Objective>(obj: &O, params: &[f64], rows: &[usize]) -> Vec<f64> {
        let h = 1e-6;
        (0..params.len())
            .map(|k| {
                let mut plus = params.to_vec();
                let mut minus = params.to_vec();
                plus[k] += h;
                minus[k] -= h;
                (obj.value(&plus, rows) - obj.value(&minus, rows)) / (2.0 * h)
            })
            .collect()
    }

    fn assert_close(analytic: &[f64], numeric: &[f64]) {
        for (a, n) in analytic.iter().zip(numeric) {
            assert!(
                (a - n).abs() <= 1e-5 * a.abs().max(n.abs()).max(1.0),
                "gradient mismatch: {a} vs {n}"
            );
        }
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let data = toy();
        let obj = LogisticObjective { data: &data, l2: 0.01 };
        let params = vec![0.2, -0.3, 0.1];
        let rows: Vec<usize> = (0..data.len()).collect();
        assert_close(&obj.gradient(&params, &rows), &finite_diff(&obj, &params, &rows));
    }

    #[test]
    fn mlp_gradients_match_finite_differences() {
        let data = toy();
        for squared_loss in [false, true] {
            let obj = MlpObjective { data: &data, hidden: 3, l2: 0.01, squared_loss };
            let params: Vec<f64> = (0..obj.dim()).map(|i| 0.05 * (i as f64 % 7.0) - 0.15).collect();
            let rows: Vec<usize> = (0..data.len()).collect();
            assert_close(&obj.gradient(&params, &rows), &finite_diff(&obj, &params, &rows));
        }
    }

    #[test]
    fn hinge_gradient_matches_away_from_kink() {
        let data = toy();
        let obj = HingeObjective { data: &data, l2: 0.01 };
        let params = vec![0.2, -0.3, 0.05];
        let rows: Vec<usize> = (0..data.len()).collect();
        assert_close(&obj.gradient(&params, &rows), &finite_diff(&obj, &params, &rows));
    }

    #[test]
    fn calibration_gradient_matches_finite_differences() {
        let obj = CalibrationObjective {
            decisions: vec![-1.5, -0.2, 0.4, 2.0],
            y: vec![0.0, 0.0, 1.0, 1.0],
        };
        let params = vec![0.8, -0.1];
        let rows = vec![0, 1, 2, 3];
        assert_close(&obj.gradient(&params, &rows), &finite_diff(&obj, &params, &rows));
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert!(sigmoid(0.0) == 0.5);
    }
}
