//! L2-regularised linear classifiers (logistic regression and squared-hinge
//! linear SVM) trained by full-batch gradient descent.
//!
//! Labels are encoded `OFF = +1`, `NOT = -1` and the objective is
//!
//! ```text
//! J(w, b) = 1/2 |w|^2 + C * sum_i L(y_i, w.x_i + b)
//! L_logistic(y, f) = ln(1 + exp(-y f))
//! L_sq_hinge(y, f) = max(0, 1 - y f)^2
//! ```
//!
//! The bias is not regularised. Each iteration tries a Barzilai-Borwein
//! step and backtracks until the Armijo condition holds, so accepted
//! iterations never increase `J`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{check_dim, check_training_set, Classifier};
use crate::corpus::Label;
use crate::error::{bail, Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    Logistic,
    SquaredHinge,
}

impl Loss {
    pub fn as_str(self) -> &'static str {
        match self {
            Loss::Logistic => "logistic",
            Loss::SquaredHinge => "squared_hinge",
        }
    }

    /// Loss value and derivative with respect to the decision value `f`.
    fn value_and_slope(self, y: f64, f: f64) -> (f64, f64) {
        let margin = y * f;
        match self {
            Loss::Logistic => {
                // ln(1 + e^{-m}) evaluated without overflow
                let value = if margin > 0.0 {
                    libm::log1p(libm::exp(-margin))
                } else {
                    -margin + libm::log1p(libm::exp(margin))
                };
                let sig_neg = if margin >= 0.0 {
                    let e = libm::exp(-margin);
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + libm::exp(margin))
                };
                (value, -y * sig_neg)
            }
            Loss::SquaredHinge => {
                let gap = 1.0 - margin;
                if gap > 0.0 {
                    (gap * gap, -2.0 * y * gap)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(Loss::Logistic),
            "squared_hinge" => Ok(Loss::SquaredHinge),
            _ => bail!(Config, "unknown loss {:?}", s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConfig {
    pub loss: Loss,
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Kept with the model; the full-batch solver itself draws no random
    /// numbers.
    pub seed: u64,
}

impl LinearConfig {
    pub fn logistic() -> Self {
        LinearConfig {
            loss: Loss::Logistic,
            ..Default::default()
        }
    }

    pub fn svm() -> Self {
        LinearConfig {
            loss: Loss::SquaredHinge,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            bail!(Config, "C must be positive, got {}", self.c);
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            bail!(Config, "tol must be positive, got {}", self.tol);
        }
        Ok(())
    }
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            loss: Loss::SquaredHinge,
            c: 1.0,
            max_iter: 1000,
            tol: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: LinearConfig,
    /// Objective value at the returned parameters.
    pub objective: f64,
    pub iterations: usize,
}

/// Objective value and gradient at `(weights, bias)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveGrad {
    pub objective: f64,
    pub grad_weights: Vec<f64>,
    pub grad_bias: f64,
}

pub fn linear_objective_grad(
    weights: &[f64],
    bias: f64,
    x: &[SparseVector],
    y: &[Label],
    cfg: &LinearConfig,
) -> Result<ObjectiveGrad> {
    if x.len() != y.len() {
        bail!(Usage, "{} feature vectors but {} labels", x.len(), y.len());
    }
    for v in x {
        check_dim(weights.len(), v)?;
    }
    Ok(objective_grad(weights, bias, x, y, cfg))
}

fn objective_grad(weights: &[f64], bias: f64, x: &[SparseVector], y: &[Label], cfg: &LinearConfig) -> ObjectiveGrad {
    let mut objective = 0.5 * weights.iter().map(|w| w * w).sum::<f64>();
    let mut grad_weights = weights.to_vec();
    let mut grad_bias = 0.0;
    for (v, label) in x.iter().zip(y) {
        let f = v.dot(weights) + bias;
        let (loss, slope) = cfg.loss.value_and_slope(label.sign(), f);
        objective += cfg.c * loss;
        if slope != 0.0 {
            let s = cfg.c * slope;
            for (i, xi) in v.iter() {
                grad_weights[i] += s * xi;
            }
            grad_bias += s;
        }
    }
    ObjectiveGrad {
        objective,
        grad_weights,
        grad_bias,
    }
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

pub fn train_linear(x: &[SparseVector], y: &[Label], cfg: &LinearConfig) -> Result<LinearModel> {
    cfg.validate()?;
    let dim = check_training_set(x, y)?;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut cur = objective_grad(&w, b, x, y, cfg);
    if !cur.objective.is_finite() {
        bail!(Numeric, "initial objective is not finite");
    }
    let mut step = 1.0 / (1.0 + cfg.c * x.len() as f64);
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let g2: f64 = cur.grad_weights.iter().map(|g| g * g).sum::<f64>() + cur.grad_bias * cur.grad_bias;
        if g2 == 0.0 {
            break;
        }
        let mut t = step;
        let (next_w, next_b, next) = loop {
            let nw: Vec<f64> = w.iter().zip(&cur.grad_weights).map(|(wi, gi)| wi - t * gi).collect();
            let nb = b - t * cur.grad_bias;
            let trial = objective_grad(&nw, nb, x, y, cfg);
            if trial.objective.is_finite() && trial.objective <= cur.objective - ARMIJO * t * g2 {
                break (nw, nb, trial);
            }
            if !trial.objective.is_finite() && t <= MIN_STEP {
                bail!(Numeric, "objective diverged at iteration {}", iterations);
            }
            t *= 0.5;
            if t < MIN_STEP {
                // no descent possible at machine precision
                return Ok(finish(w, b, *cfg, cur.objective, iterations));
            }
        };
        iterations += 1;

        // Barzilai-Borwein proposal for the next trial step
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..dim {
            let s = next_w[i] - w[i];
            ss += s * s;
            sy += s * (next.grad_weights[i] - cur.grad_weights[i]);
        }
        let sb = next_b - b;
        ss += sb * sb;
        sy += sb * (next.grad_bias - cur.grad_bias);
        step = if sy > 0.0 { ss / sy } else { 2.0 * t };

        let decrease = cur.objective - next.objective;
        w = next_w;
        b = next_b;
        cur = next;
        if decrease.abs() < cfg.tol * cur.objective.max(1.0) {
            break;
        }
    }
    Ok(finish(w, b, *cfg, cur.objective, iterations))
}

fn finish(weights: Vec<f64>, bias: f64, config: LinearConfig, objective: f64, iterations: usize) -> LinearModel {
    LinearModel {
        weights,
        bias,
        config,
        objective,
        iterations,
    }
}

impl LinearModel {
    pub fn decision(&self, x: &SparseVector) -> Result<f64> {
        check_dim(self.weights.len(), x)?;
        Ok(x.dot(&self.weights) + self.bias)
    }

    /// Label and decision value; a decision of exactly 0 is `NOT`.
    pub fn predict_with_decision(&self, x: &SparseVector) -> Result<(Label, f64)> {
        let d = self.decision(x)?;
        Ok((if d > 0.0 { Label::Off } else { Label::Not }, d))
    }
}

impl Classifier for LinearModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, x: &SparseVector) -> Result<Label> {
        self.predict_with_decision(x).map(|(l, _)| l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(d: &[f64]) -> SparseVector {
        SparseVector::from_dense(d)
    }

    fn model(w: &[f64], b: f64) -> LinearModel {
        finish(w.to_vec(), b, LinearConfig::default(), 0.0, 0)
    }

    /// Four points, margin 1 around the line x0 = x1.
    fn separable() -> (Vec<SparseVector>, Vec<Label>) {
        (
            vec![sv(&[2.0, 0.0]), sv(&[3.0, 1.0]), sv(&[0.0, 2.0]), sv(&[1.0, 3.0])],
            vec![Label::Off, Label::Off, Label::Not, Label::Not],
        )
    }

    #[test]
    fn prediction_rules() {
        let m = model(&[1.0, 0.0], 0.0);
        assert_eq!(m.predict_with_decision(&sv(&[0.5, 0.0])).unwrap(), (Label::Off, 0.5));
        assert_eq!(m.predict(&SparseVector::zeros(2)).unwrap(), Label::Not);
        assert_eq!(
            model(&[1.0, 0.0], 0.3).predict(&SparseVector::zeros(2)).unwrap(),
            Label::Off
        );
        assert_eq!(
            model(&[1.0, 0.0], -0.3).predict(&SparseVector::zeros(2)).unwrap(),
            Label::Not
        );
        assert!(matches!(m.predict(&SparseVector::zeros(3)), Err(Error::Usage(_))));
    }

    #[test]
    fn separable_toy_is_fit_exactly() {
        let (x, y) = separable();
        for cfg in [LinearConfig::logistic(), LinearConfig::svm()] {
            let m = train_linear(&x, &y, &cfg).unwrap();
            assert_eq!(m.predict_all(&x).unwrap(), y, "{}", cfg.loss);
        }
    }

    #[test]
    fn identical_inputs_give_flat_weights() {
        let x = vec![sv(&[1.0, 1.0]); 4];
        let y = vec![Label::Off, Label::Not, Label::Off, Label::Not];
        let m = train_linear(&x, &y, &LinearConfig::logistic()).unwrap();
        // w and b can only trade off along x.w + b = const; the optimum is f = 0.
        assert!((x[0].dot(&m.weights) + m.bias).abs() < 1e-3);
        assert_eq!(m.predict(&x[0]).unwrap(), Label::Not);
    }

    #[test]
    fn logistic_objective_at_origin_is_n_ln2() {
        let (x, y) = separable();
        let cfg = LinearConfig {
            c: 2.5,
            ..LinearConfig::logistic()
        };
        let og = linear_objective_grad(&[0.0, 0.0], 0.0, &x, &y, &cfg).unwrap();
        assert!((og.objective - 2.5 * 4.0 * core::f64::consts::LN_2).abs() < 1e-12);
        // symmetric classes: bias gradient vanishes at the origin
        assert!(og.grad_bias.abs() < 1e-12);
    }

    #[test]
    fn squared_hinge_beyond_margin_is_pure_regulariser() {
        let (x, y) = separable();
        let w = [3.0, -3.0];
        let og = linear_objective_grad(&w, 0.0, &x, &y, &LinearConfig::svm()).unwrap();
        assert_eq!(og.objective, 9.0);
        assert_eq!(og.grad_weights, w.to_vec());
        assert_eq!(og.grad_bias, 0.0);
    }

    #[test]
    fn objective_never_increases_with_more_iterations() {
        let (x, y) = separable();
        let mut last = f64::INFINITY;
        for max_iter in [0, 1, 2, 5, 10, 50] {
            let cfg = LinearConfig {
                max_iter,
                tol: 1e-15,
                ..LinearConfig::logistic()
            };
            let m = train_linear(&x, &y, &cfg).unwrap();
            assert!(m.objective <= last + 1e-12);
            last = m.objective;
        }
    }

    #[test]
    fn config_errors() {
        let (x, y) = separable();
        let bad = LinearConfig {
            c: 0.0,
            ..Default::default()
        };
        assert!(matches!(train_linear(&x, &y, &bad), Err(Error::Config(_))));
        assert!(matches!(
            train_linear(&x, &[Label::Off; 4], &LinearConfig::default()),
            Err(Error::Training(_))
        ));
    }
}
