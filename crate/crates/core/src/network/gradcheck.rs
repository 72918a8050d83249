//! Backpropagation versus central finite differences.

use super::{Activation, Network, NetworkSpec};
use crate::error::Result;
use crate::numerics::{rand_uniform, Matrix, SeededRng};

/// Denominator floor of the relative error, so entries whose true gradient
/// is essentially zero are judged on absolute error instead.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub parameters_checked: usize,
    pub networks: usize,
}

impl GradCheckReport {
    fn merge(self, other: GradCheckReport) -> GradCheckReport {
        GradCheckReport {
            max_relative_error: self.max_relative_error.max(other.max_relative_error),
            parameters_checked: self.parameters_checked + other.parameters_checked,
            networks: self.networks + other.networks,
        }
    }
}

/// `|a − b| / max(|a|, |b|, RELATIVE_ERROR_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Compares every entry of `backward` with `(E(θ+ε) − E(θ−ε)) / 2ε`.
pub fn check_gradients(net: &Network, batch: &Matrix, targets: &Matrix, eps: f64) -> Result<GradCheckReport> {
    let grads = net.backward(batch, targets)?;
    let mut probe = net.clone();
    let mut worst = 0.0_f64;
    let mut checked = 0;

    let numeric = |probe: &mut Network, l: usize, idx: usize, is_bias: bool| -> Result<f64> {
        let read = |n: &mut Network| -> f64 {
            let layer = &n.layers()[l];
            if is_bias {
                layer.bias[idx]
            } else {
                layer.weights.as_slice()[idx]
            }
        };
        let write = |n: &mut Network, v: f64| {
            let layer = &mut n.layers_mut()[l];
            if is_bias {
                layer.bias[idx] = v;
            } else {
                layer.weights.as_mut_slice()[idx] = v;
            }
        };
        let orig = read(probe);
        write(probe, orig + eps);
        let plus = probe.loss(batch, targets)?;
        write(probe, orig - eps);
        let minus = probe.loss(batch, targets)?;
        write(probe, orig);
        Ok((plus - minus) / (2.0 * eps))
    };

    for (l, g) in grads.layers.iter().enumerate() {
        for (idx, &analytic) in g.weights.as_slice().iter().enumerate() {
            let n = numeric(&mut probe, l, idx, false)?;
            worst = worst.max(relative_error(analytic, n));
            checked += 1;
        }
        for (idx, &analytic) in g.bias.iter().enumerate() {
            let n = numeric(&mut probe, l, idx, true)?;
            worst = worst.max(relative_error(analytic, n));
            checked += 1;
        }
    }
    Ok(GradCheckReport {
        max_relative_error: worst,
        parameters_checked: checked,
        networks: 1,
    })
}

/// Checks `count` random networks (2–4 layers, widths 1–8).
///
/// Network `i` uses activation tag `i mod 3` on every layer, so each tag is
/// covered once `count ≥ 3`.
pub fn random_gradcheck(seed: u64, count: usize, eps: f64) -> Result<GradCheckReport> {
    let mut rng = SeededRng::new(seed);
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        parameters_checked: 0,
        networks: 0,
    };
    for i in 0..count {
        let n_sizes = 2 + rng.below(3);
        let sizes: Vec<usize> = (0..n_sizes).map(|_| 1 + rng.below(8)).collect();
        let act = Activation::ALL[i % Activation::ALL.len()];
        let spec = NetworkSpec::new(sizes.clone())
            .with_activations(act, act)
            .with_seed(rng.next_u64());
        let net = Network::init(spec)?;
        let rows = 1 + rng.below(5);
        let batch = rand_uniform(&mut rng, rows, sizes[0], -1.0, 1.0)?;
        let targets = rand_uniform(&mut rng, rows, *sizes.last().unwrap(), 0.0, 1.0)?;
        report = report.merge(check_gradients(&net, &batch, &targets, eps)?);
    }
    Ok(report)
}
