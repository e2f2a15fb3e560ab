//! Single-layer LSTM regressor trained by adaptive moment estimation on
//! min-max-scaled series.
//!
//! Framing is point-by-point: each training sample is one time step of
//! covariates mapped to that day's turbidity, with the hidden state reset
//! per sample. Parameters live in one flat vector so the optimizer, the
//! serializer, and finite-difference checks all see the same layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::dataset::TimeSeriesFrame;
use crate::error::{Error, Result};
use crate::forecast::{ForecastPoint, ModelTag};

/// Gate order in the flat parameter vector.
const GATES: usize = 4; // input, forget, cell, output

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub units: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_hat: f64,
    pub seed: u64,
    /// Append lag-1 turbidity to the covariate inputs.
    pub include_lag_turbidity: bool,
}

impl Default for LstmParams {
    fn default() -> Self {
        LstmParams {
            units: 10,
            epochs: 50,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps_hat: 1e-8,
            seed: 0,
            include_lag_turbidity: false,
        }
    }
}

/// Min-max scale to [0, 1]. Training bounds are reused for test data, so
/// out-of-range inputs map outside the unit interval rather than clipping.
pub fn scale_minmax(series: &[f64], bounds: Option<(f64, f64)>) -> Result<(Vec<f64>, (f64, f64))> {
    if series.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let (lo, hi) = match bounds {
        Some(b) => b,
        None => {
            let lo = series.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    if hi <= lo {
        return Err(Error::ConstantSeries);
    }
    let scaled = series.iter().map(|v| (v - lo) / (hi - lo)).collect();
    Ok((scaled, (lo, hi)))
}

pub fn inverse_scale(value: f64, bounds: (f64, f64)) -> f64 {
    bounds.0 + value * (bounds.1 - bounds.0)
}

/// Index layout of the flat parameter vector: per gate the input weights
/// (h x m), recurrent weights (h x h), and bias (h); then the dense output
/// weights (h) and bias (1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    m: usize,
    h: usize,
}

impl Layout {
    fn gate_stride(&self) -> usize {
        self.h * self.m + self.h * self.h + self.h
    }
    fn w(&self, gate: usize) -> usize {
        gate * self.gate_stride()
    }
    fn u(&self, gate: usize) -> usize {
        self.w(gate) + self.h * self.m
    }
    fn b(&self, gate: usize) -> usize {
        self.u(gate) + self.h * self.h
    }
    fn w_out(&self) -> usize {
        GATES * self.gate_stride()
    }
    fn b_out(&self) -> usize {
        self.w_out() + self.h
    }
    fn total(&self) -> usize {
        self.b_out() + 1
    }
}

/// Fitted LSTM: flat weights, the training scaler, and optimizer state.
#[derive(Debug, Clone)]
pub struct LstmState {
    layout: Layout,
    params: Vec<f64>,
    /// Per-input (min, max) pairs.
    pub scaler_x: Vec<(f64, f64)>,
    /// Target (min, max) pair.
    pub scaler_y: (f64, f64),
    /// Adam first/second moment accumulators and step counter.
    adam_m: Vec<f64>,
    adam_v: Vec<f64>,
    adam_step: usize,
    /// Training MSE per epoch (on the scaled target).
    pub epoch_losses: Vec<f64>,
    /// Last training turbidity level, used as the lag input when enabled.
    last_target: f64,
    include_lag: bool,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmState {
    /// Fresh network with Xavier-uniform weights and forget bias +1.
    pub fn new_random(input_dim: usize, units: usize, seed: u64) -> Self {
        assert!(input_dim >= 1 && units >= 1);
        let layout = Layout { m: input_dim, h: units };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; layout.total()];
        let fill = |range: std::ops::Range<usize>, fan_in: usize, fan_out: usize,
                        params: &mut Vec<f64>, rng: &mut ChaCha8Rng| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for i in range {
                params[i] = rng.gen_range(-bound..bound);
            }
        };
        for gate in 0..GATES {
            fill(layout.w(gate)..layout.w(gate) + units * input_dim, input_dim, units, &mut params, &mut rng);
            fill(layout.u(gate)..layout.u(gate) + units * units, units, units, &mut params, &mut rng);
        }
        fill(layout.w_out()..layout.w_out() + units, units, 1, &mut params, &mut rng);
        // Forget gate bias +1 stabilizes early training.
        for i in 0..units {
            params[layout.b(1) + i] = 1.0;
        }

        let total = layout.total();
        LstmState {
            layout,
            params,
            scaler_x: Vec::new(),
            scaler_y: (0.0, 1.0),
            adam_m: vec![0.0; total],
            adam_v: vec![0.0; total],
            adam_step: 0,
            epoch_losses: Vec::new(),
            last_target: 0.0,
            include_lag: false,
        }
    }

    /// Same-shape network with all parameters zero.
    pub fn new_zeroed(input_dim: usize, units: usize) -> Self {
        let mut s = Self::new_random(input_dim, units, 0);
        s.params.iter_mut().for_each(|p| *p = 0.0);
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layout.m
    }

    pub fn units(&self) -> usize {
        self.layout.h
    }

    /// Flat parameter vector (gate weights, dense layer last).
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Bias slice of one gate (0 input, 1 forget, 2 cell, 3 output).
    pub fn gate_bias_mut(&mut self, gate: usize) -> &mut [f64] {
        let start = self.layout.b(gate);
        let h = self.layout.h;
        &mut self.params[start..start + h]
    }

    pub fn dense_bias(&self) -> f64 {
        self.params[self.layout.b_out()]
    }

    /// Flat JSON of named numeric arrays.
    pub fn weights_json(&self) -> serde_json::Value {
        let l = &self.layout;
        let slice = |start: usize, len: usize| self.params[start..start + len].to_vec();
        let names = ["input", "forget", "cell", "output"];
        let mut obj = serde_json::Map::new();
        for (gate, name) in names.iter().enumerate() {
            obj.insert(format!("w_{name}"), json!(slice(l.w(gate), l.h * l.m)));
            obj.insert(format!("u_{name}"), json!(slice(l.u(gate), l.h * l.h)));
            obj.insert(format!("b_{name}"), json!(slice(l.b(gate), l.h)));
        }
        obj.insert("w_dense".into(), json!(slice(l.w_out(), l.h)));
        obj.insert("b_dense".into(), json!(vec![self.params[l.b_out()]]));
        obj.insert("scaler_x".into(), json!(self.scaler_x));
        obj.insert("scaler_y".into(), json!([self.scaler_y.0, self.scaler_y.1]));
        serde_json::Value::Object(obj)
    }
}

/// Per-step activations kept for backpropagation.
#[derive(Debug, Clone)]
pub struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    pub gate_i: Vec<f64>,
    pub gate_f: Vec<f64>,
    pub gate_g: Vec<f64>,
    pub gate_o: Vec<f64>,
    pub cell: Vec<f64>,
    tanh_cell: Vec<f64>,
    pub hidden: Vec<f64>,
}

/// Forward pass over a (scaled) input sequence: the standard LSTM recursion
/// followed by a dense layer on the final hidden state.
pub fn lstm_forward(state: &LstmState, input_sequence: &[Vec<f64>]) -> Result<(f64, Vec<StepCache>)> {
    let l = state.layout;
    let (m, h) = (l.m, l.h);
    if input_sequence.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    for row in input_sequence {
        if row.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: row.len() });
        }
    }

    let p = &state.params;
    let mut h_state = vec![0.0; h];
    let mut c_state = vec![0.0; h];
    let mut caches = Vec::with_capacity(input_sequence.len());

    for x in input_sequence {
        let mut pre = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
        for (gate, pre_g) in pre.iter_mut().enumerate() {
            let (w0, u0, b0) = (l.w(gate), l.u(gate), l.b(gate));
            for j in 0..h {
                let mut acc = p[b0 + j];
                for k in 0..m {
                    acc += p[w0 + j * m + k] * x[k];
                }
                for k in 0..h {
                    acc += p[u0 + j * h + k] * h_state[k];
                }
                pre_g[j] = acc;
            }
        }
        let gate_i: Vec<f64> = pre[0].iter().map(|&v| sigmoid(v)).collect();
        let gate_f: Vec<f64> = pre[1].iter().map(|&v| sigmoid(v)).collect();
        let gate_g: Vec<f64> = pre[2].iter().map(|&v| v.tanh()).collect();
        let gate_o: Vec<f64> = pre[3].iter().map(|&v| sigmoid(v)).collect();

        let mut cell = vec![0.0; h];
        let mut tanh_cell = vec![0.0; h];
        let mut hidden = vec![0.0; h];
        for j in 0..h {
            cell[j] = gate_f[j] * c_state[j] + gate_i[j] * gate_g[j];
            tanh_cell[j] = cell[j].tanh();
            hidden[j] = gate_o[j] * tanh_cell[j];
        }

        caches.push(StepCache {
            x: x.clone(),
            h_prev: h_state.clone(),
            c_prev: c_state.clone(),
            gate_i,
            gate_f,
            gate_g,
            gate_o,
            cell: cell.clone(),
            tanh_cell: tanh_cell.clone(),
            hidden: hidden.clone(),
        });
        h_state = hidden;
        c_state = cell;
    }

    let mut pred = p[l.b_out()];
    for j in 0..h {
        pred += p[l.w_out() + j] * h_state[j];
    }
    Ok((pred, caches))
}

/// MSE loss over samples and its analytic gradient (backpropagation through
/// time within each sample's sequence).
pub fn loss_and_gradient(
    state: &LstmState,
    sequences: &[Vec<Vec<f64>>],
    targets: &[f64],
) -> Result<(f64, Vec<f64>)> {
    if sequences.len() != targets.len() || sequences.is_empty() {
        return Err(Error::DimensionMismatch { expected: sequences.len(), got: targets.len() });
    }
    let l = state.layout;
    let (m, h) = (l.m, l.h);
    let p = &state.params;
    let n = sequences.len() as f64;

    let mut grad = vec![0.0; l.total()];
    let mut loss = 0.0;

    for (seq, &y) in sequences.iter().zip(targets) {
        let (pred, caches) = lstm_forward(state, seq)?;
        let err = pred - y;
        loss += err * err;
        let dpred = 2.0 * err / n;

        let last_hidden = &caches.last().expect("non-empty sequence").hidden;
        for j in 0..h {
            grad[l.w_out() + j] += dpred * last_hidden[j];
        }
        grad[l.b_out()] += dpred;

        let mut dh: Vec<f64> = (0..h).map(|j| dpred * p[l.w_out() + j]).collect();
        let mut dc = vec![0.0; h];

        for cache in caches.iter().rev() {
            let mut da = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
            for j in 0..h {
                let do_j = dh[j] * cache.tanh_cell[j];
                let dcell = dc[j] + dh[j] * cache.gate_o[j] * (1.0 - cache.tanh_cell[j] * cache.tanh_cell[j]);
                let di = dcell * cache.gate_g[j];
                let dg = dcell * cache.gate_i[j];
                let df = dcell * cache.c_prev[j];
                dc[j] = dcell * cache.gate_f[j];

                da[0][j] = di * cache.gate_i[j] * (1.0 - cache.gate_i[j]);
                da[1][j] = df * cache.gate_f[j] * (1.0 - cache.gate_f[j]);
                da[2][j] = dg * (1.0 - cache.gate_g[j] * cache.gate_g[j]);
                da[3][j] = do_j * cache.gate_o[j] * (1.0 - cache.gate_o[j]);
            }

            let mut dh_prev = vec![0.0; h];
            for (gate, da_g) in da.iter().enumerate() {
                let (w0, u0, b0) = (l.w(gate), l.u(gate), l.b(gate));
                for j in 0..h {
                    let d = da_g[j];
                    for k in 0..m {
                        grad[w0 + j * m + k] += d * cache.x[k];
                    }
                    for k in 0..h {
                        grad[u0 + j * h + k] += d * cache.h_prev[k];
                        dh_prev[k] += p[u0 + j * h + k] * d;
                    }
                    grad[b0 + j] += d;
                }
            }
            dh = dh_prev;
        }
    }

    Ok((loss / n, grad))
}

/// One Adam update with bias correction.
#[allow(clippy::needless_range_loop)]
fn adam_step(state: &mut LstmState, grad: &[f64], params: &LstmParams) {
    state.adam_step += 1;
    let t = state.adam_step as i32;
    let (b1, b2) = (params.beta1, params.beta2);
    let bc1 = 1.0 - b1.powi(t);
    let bc2 = 1.0 - b2.powi(t);
    for i in 0..state.params.len() {
        let g = grad[i];
        state.adam_m[i] = b1 * state.adam_m[i] + (1.0 - b1) * g;
        state.adam_v[i] = b2 * state.adam_v[i] + (1.0 - b2) * g * g;
        let m_hat = state.adam_m[i] / bc1;
        let v_hat = state.adam_v[i] / bc2;
        state.params[i] -= params.learning_rate * m_hat / (v_hat.sqrt() + params.eps_hat);
    }
}

/// Train on (covariate row at t) -> (target at t) pairs for the configured
/// number of full-batch epochs. Deterministic for a fixed seed.
pub fn train_lstm(
    frame: &TimeSeriesFrame,
    target: &str,
    covariates: &[String],
    params: &LstmParams,
) -> Result<LstmState> {
    if params.units < 1 || params.epochs < 1 {
        return Err(Error::Config("units and epochs must be at least 1".into()));
    }
    if params.learning_rate <= 0.0 || !params.learning_rate.is_finite() {
        return Err(Error::Config("learning rate must be positive and finite".into()));
    }
    let y_raw = frame.column(target)?.to_vec();
    let n_total = y_raw.len();
    if n_total < 20 {
        return Err(Error::InsufficientData { needed: 20, got: n_total });
    }

    // Point-by-point framing; the lag variant shifts everything by one day.
    let start = usize::from(params.include_lag_turbidity);
    let mut input_cols: Vec<Vec<f64>> = covariates
        .iter()
        .map(|c| frame.column(c).map(|v| v[start..].to_vec()))
        .collect::<Result<_>>()?;
    if params.include_lag_turbidity {
        input_cols.push(y_raw[..n_total - 1].to_vec());
    }
    let y_train = y_raw[start..].to_vec();

    let mut scaler_x = Vec::with_capacity(input_cols.len());
    let mut scaled_cols = Vec::with_capacity(input_cols.len());
    for col in &input_cols {
        let (scaled, bounds) = scale_minmax(col, None)?;
        scaled_cols.push(scaled);
        scaler_x.push(bounds);
    }
    let (y_scaled, scaler_y) = scale_minmax(&y_train, None)?;

    let n = y_scaled.len();
    let input_dim = scaled_cols.len().max(1);
    let sequences: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            let row: Vec<f64> = if scaled_cols.is_empty() {
                vec![0.0]
            } else {
                scaled_cols.iter().map(|c| c[i]).collect()
            };
            vec![row]
        })
        .collect();

    let mut state = LstmState::new_random(input_dim, params.units, params.seed);
    state.scaler_x = scaler_x;
    state.scaler_y = scaler_y;
    state.include_lag = params.include_lag_turbidity;
    state.last_target = *y_raw.last().expect("non-empty target");

    for epoch in 0..params.epochs {
        let (loss, grad) = loss_and_gradient(&state, &sequences, &y_scaled)?;
        if !loss.is_finite() {
            return Err(Error::Diverged(epoch + 1));
        }
        state.epoch_losses.push(loss);
        adam_step(&mut state, &grad, params);
    }

    Ok(state)
}

/// Write the per-epoch training losses as a two-column CSV.
pub fn write_epoch_losses_csv(state: &LstmState, path: &std::path::Path) -> Result<()> {
    let mut out = String::from("epoch,mse\n");
    for (i, loss) in state.epoch_losses.iter().enumerate() {
        out.push_str(&format!("{},{loss:.12e}\n", i + 1));
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Scale the next day's covariates with the training bounds, run the
/// forward pass, and inverse-scale the output. No interval is attached.
pub fn predict_one_step_lstm(state: &LstmState, next_covariates: &[f64]) -> Result<ForecastPoint> {
    if state.scaler_x.is_empty() {
        return Err(Error::Config("state has no scaler; train first".into()));
    }
    let mut raw: Vec<f64> = next_covariates.to_vec();
    if state.include_lag {
        raw.push(state.last_target);
    }
    if raw.len() != state.scaler_x.len() {
        return Err(Error::DimensionMismatch { expected: state.scaler_x.len(), got: raw.len() });
    }
    let row: Vec<f64> = raw
        .iter()
        .zip(&state.scaler_x)
        .map(|(&v, &(lo, hi))| (v - lo) / (hi - lo))
        .collect();
    let (pred_scaled, _) = lstm_forward(state, &[row])?;
    Ok(ForecastPoint::point_only(
        inverse_scale(pred_scaled, state.scaler_y),
        ModelTag::Lstm,
    ))
}
