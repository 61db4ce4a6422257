//! Class-balanced, regularized logistic regression.

use std::cell::OnceCell;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::select::select_features;
use super::LearnError;

pub const MAX_ITER: usize = 10_000;
pub const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L2,
    L1,
}

impl Penalty {
    pub fn as_str(self) -> &'static str {
        match self {
            Penalty::L1 => "l1",
            Penalty::L2 => "l2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub penalty: Penalty,
    /// Inverse regularization strength.
    #[serde(rename = "C")]
    pub c: f64,
    pub select_m: Option<usize>,
    pub standardize: bool,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(penalty: Penalty, c: f64) -> ModelConfig {
        ModelConfig {
            penalty,
            c,
            select_m: None,
            standardize: true,
            seed: 0,
        }
    }
}

/// Per-feature training mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Constant in the training data; the weight is held at 0.
    pub constant: Vec<bool>,
}

impl Scaler {
    pub fn fit(x: ArrayView2<'_, f64>, standardize: bool) -> Scaler {
        let n = x.nrows() as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut std = Vec::with_capacity(x.ncols());
        let mut constant = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let first = col.first().copied().unwrap_or(0.0);
            let is_const = col.iter().all(|&v| v == first);
            let m = col.sum() / n;
            let var = col.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / n;
            constant.push(is_const);
            if !standardize {
                mean.push(0.0);
                std.push(1.0);
            } else if is_const {
                mean.push(first);
                std.push(1.0);
            } else {
                mean.push(m);
                std.push(var.sqrt());
            }
        }
        Scaler { mean, std, constant }
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            if self.constant[j] {
                col.fill(0.0);
            } else {
                let (m, s) = (self.mean[j], self.std[j]);
                col.mapv_inplace(|v| (v - m) / s);
            }
        }
        out
    }
}

/// The training objective on already-transformed features:
///
/// ```text
/// J(w, b) = 1/2 mean_{y=1} l_i + 1/2 mean_{y=0} l_i + R(w)
/// R(w)    = |w|^2 / (2 C n)   (L2)   or   |w|_1 / (C n)   (L1)
/// ```
///
/// `l_i` is the logistic loss. Up to a factor of `C n` this is the usual
/// `C sum_i omega_i l_i + R` form with balanced class weights
/// `omega_i = n / (2 n_class)`. The intercept is not penalized.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [bool],
    n_pos: f64,
    n_neg: f64,
    penalty: Penalty,
    reg: f64,
    active: Vec<bool>,
    row_space: Option<&'a RowSpace>,
}

/// Orthonormal row-space basis `q` of a design and the design in that basis.
#[derive(Debug, Clone)]
pub struct RowSpace {
    q: Array2<f64>,
    z: Array2<f64>,
}

impl RowSpace {
    fn new(x: ArrayView2<'_, f64>) -> RowSpace {
        let q = row_space_basis(x);
        let z = x.dot(&q.t());
        RowSpace { q, z }
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl<'a> Objective<'a> {
    pub fn new(x: ArrayView2<'a, f64>, y: &'a [bool], penalty: Penalty, c: f64) -> Result<Objective<'a>, LearnError> {
        check_inputs(x, y)?;
        if !(c.is_finite() && c > 0.0) {
            return Err(LearnError::InvalidC(c));
        }
        let n_pos = y.iter().filter(|&&v| v).count() as f64;
        let n_neg = y.len() as f64 - n_pos;
        Ok(Objective {
            x,
            y,
            n_pos,
            n_neg,
            penalty,
            reg: 1.0 / (c * y.len() as f64),
            active: vec![true; x.ncols()],
            row_space: None,
        })
    }

    fn with_active(mut self, active: Vec<bool>) -> Self {
        self.active = active;
        self
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Loss plus the L2 term when that is the penalty; also the gradient of that part.
    pub fn smooth(&self, w: &[f64], b: f64, grad_w: Option<&mut [f64]>) -> (f64, f64) {
        let d = self.dim();
        let mut loss = [0.0f64; 2];
        let mut resid_sum = [0.0f64; 2];
        let gd = if grad_w.is_some() { d } else { 0 };
        let mut gw = [vec![0.0; gd], vec![0.0; gd]];
        for (i, row) in self.x.axis_iter(Axis(0)).enumerate() {
            let z = row.dot(&ArrayView1::from(w)) + b;
            let cls = usize::from(self.y[i]);
            let (l, r) = if self.y[i] {
                (softplus(-z), sigmoid(z) - 1.0)
            } else {
                (softplus(z), sigmoid(z))
            };
            loss[cls] += l;
            resid_sum[cls] += r;
            if grad_w.is_some() {
                for (g, &v) in gw[cls].iter_mut().zip(row.iter()) {
                    *g += r * v;
                }
            }
        }
        let (wn, wp) = (0.5 / self.n_neg, 0.5 / self.n_pos);
        // divide per class first so that balanced all-zero residuals cancel exactly
        let mut value = 0.5 * (loss[0] / self.n_neg) + 0.5 * (loss[1] / self.n_pos);
        let grad_b = 0.5 * (resid_sum[0] / self.n_neg) + 0.5 * (resid_sum[1] / self.n_pos);
        if self.penalty == Penalty::L2 {
            value += 0.5 * self.reg * w.iter().map(|v| v * v).sum::<f64>();
        }
        if let Some(g) = grad_w {
            for j in 0..d {
                g[j] = if self.active[j] {
                    let mut v = wn * gw[0][j] + wp * gw[1][j];
                    if self.penalty == Penalty::L2 {
                        v += self.reg * w[j];
                    }
                    v
                } else {
                    0.0
                };
            }
        }
        (value, grad_b)
    }

    /// The non-smooth part: the L1 term, or zero.
    pub fn nonsmooth(&self, w: &[f64]) -> f64 {
        match self.penalty {
            Penalty::L1 => self.reg * w.iter().map(|v| v.abs()).sum::<f64>(),
            Penalty::L2 => 0.0,
        }
    }

    pub fn value(&self, w: &[f64], b: f64) -> f64 {
        self.smooth(w, b, None).0 + self.nonsmooth(w)
    }

    /// Gradient of the full objective; for L1 this is the gradient wherever no weight is zero.
    pub fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let mut g = vec![0.0; self.dim()];
        let (_, gb) = self.smooth(w, b, Some(&mut g));
        if self.penalty == Penalty::L1 {
            for (gj, wj) in g.iter_mut().zip(w) {
                if *wj != 0.0 {
                    *gj += self.reg * wj.signum();
                }
            }
        }
        (g, gb)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// L1 problems wider than this are solved over a growing working set of columns.
const WORKING_SET_MIN_DIM: usize = 64;

/// Minimizes the objective from `init` (or zero).
///
/// Wide L1 problems are solved on a working set of columns that grows until
/// every excluded column satisfies the optimality condition |grad_j| <= 1/(Cn).
pub fn solve(obj: &Objective<'_>, init: Option<(&[f64], f64)>) -> Solution {
    match obj.penalty {
        Penalty::L1 if obj.dim() > WORKING_SET_MIN_DIM => solve_working_set(obj, init),
        Penalty::L2 if is_wide(obj) => solve_row_space(obj, init),
        _ => solve_dense(obj, init),
    }
}

fn is_wide(obj: &Objective<'_>) -> bool {
    obj.dim() > WORKING_SET_MIN_DIM && obj.dim() > obj.x.nrows()
}

/// Orthonormal basis of the span of the rows, one basis vector per row of
/// the result; modified Gram-Schmidt with one reorthogonalization pass.
fn row_space_basis(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let d = x.ncols();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in x.axis_iter(Axis(0)) {
        let mut u = row.to_vec();
        let norm0 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = q.iter().zip(&u).map(|(a, b)| a * b).sum();
                for (ui, qi) in u.iter_mut().zip(q) {
                    *ui -= dot * qi;
                }
            }
        }
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-10 * norm0 {
            u.iter_mut().for_each(|v| *v /= norm);
            basis.push(u);
        }
    }
    let mut q = Array2::zeros((basis.len(), d));
    for (k, b) in basis.into_iter().enumerate() {
        q.row_mut(k).assign(&ArrayView1::from(&b));
    }
    q
}

/// With an L2 penalty the optimal weights lie in the row space of X, so a
/// problem with more columns than rows is solved in an orthonormal basis of
/// that space: with w = Q'v, Xw = (XQ')v and |w| = |v|.
fn solve_row_space(obj: &Objective<'_>, init: Option<(&[f64], f64)>) -> Solution {
    let owned;
    let rs = match obj.row_space {
        Some(rs) => rs,
        None => {
            owned = RowSpace::new(obj.x);
            &owned
        }
    };
    let q = &rs.q;
    let sub = Objective {
        x: rs.z.view(),
        y: obj.y,
        n_pos: obj.n_pos,
        n_neg: obj.n_neg,
        penalty: obj.penalty,
        reg: obj.reg,
        active: vec![true; q.nrows()],
        row_space: None,
    };
    let start = init.map(|(w, b)| (q.dot(&ArrayView1::from(w)).to_vec(), b));
    let sol = solve_dense(&sub, start.as_ref().map(|(v, b)| (v.as_slice(), *b)));
    let w = q.t().dot(&ArrayView1::from(&sol.weights)).to_vec();
    Solution {
        objective: obj.value(&w, sol.intercept),
        weights: w,
        intercept: sol.intercept,
        iterations: sol.iterations,
        converged: sol.converged,
    }
}

fn solve_working_set(obj: &Objective<'_>, init: Option<(&[f64], f64)>) -> Solution {
    let d = obj.dim();
    let (mut w, mut b) = match init {
        Some((w, b)) => (w.to_vec(), b),
        None => (vec![0.0; d], 0.0),
    };
    for (j, v) in w.iter_mut().enumerate() {
        if !obj.active[j] {
            *v = 0.0;
        }
    }
    let mut in_set: Vec<bool> = w.iter().map(|&v| v != 0.0).collect();
    let mut grad = vec![0.0; d];
    let mut iterations = 0;
    let mut converged = true;
    let mut first = true;
    loop {
        obj.smooth(&w, b, Some(&mut grad));
        let mut violators: Vec<usize> = (0..d)
            .filter(|&j| obj.active[j] && !in_set[j] && grad[j].abs() > obj.reg * (1.0 + 1e-9))
            .collect();
        if violators.is_empty() && !first {
            break;
        }
        first = false;
        violators.sort_by(|&a, &c| grad[c].abs().total_cmp(&grad[a].abs()).then(a.cmp(&c)));
        let grow = in_set.iter().filter(|&&v| v).count().max(10);
        for &j in violators.iter().take(grow) {
            in_set[j] = true;
        }
        let cols: Vec<usize> = (0..d).filter(|&j| in_set[j]).collect();
        let sub = obj.x.select(Axis(1), &cols);
        let sub_obj = Objective {
            x: sub.view(),
            y: obj.y,
            n_pos: obj.n_pos,
            n_neg: obj.n_neg,
            penalty: obj.penalty,
            reg: obj.reg,
            active: vec![true; cols.len()],
            row_space: None,
        };
        let start: Vec<f64> = cols.iter().map(|&j| w[j]).collect();
        let sol = solve_dense(&sub_obj, Some((&start, b)));
        for (k, &j) in cols.iter().enumerate() {
            w[j] = sol.weights[k];
        }
        b = sol.intercept;
        iterations += sol.iterations;
        converged = sol.converged;
    }
    Solution {
        objective: obj.value(&w, b),
        weights: w,
        intercept: b,
        iterations,
        converged,
    }
}

/// Accelerated proximal gradient with backtracking and restart. The weights
/// and the intercept get separate step sizes.
fn solve_dense(obj: &Objective<'_>, init: Option<(&[f64], f64)>) -> Solution {
    let d = obj.dim();
    let (mut xw, mut xb) = match init {
        Some((w, b)) => (w.to_vec(), b),
        None => (vec![0.0; d], 0.0),
    };
    for (j, v) in xw.iter_mut().enumerate() {
        if !obj.active[j] {
            *v = 0.0;
        }
    }
    let max_row = obj
        .x
        .axis_iter(Axis(0))
        .map(|r| r.iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    let l2 = if obj.penalty == Penalty::L2 { obj.reg } else { 0.0 };
    let mut lw = (0.5 * max_row + l2).max(1e-12);
    let mut lb = 0.5;
    let l1 = if obj.penalty == Penalty::L1 { obj.reg } else { 0.0 };

    let mut yw = xw.clone();
    let mut yb = xb;
    let mut t = 1.0f64;
    let mut f_prev = obj.value(&xw, xb);
    let mut grad = vec![0.0; d];
    let mut cand = vec![0.0; d];
    let mut restarted = true;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        iterations += 1;
        let (fy, gb) = obj.smooth(&yw, yb, Some(&mut grad));
        let (f_cand, cand_b) = loop {
            for j in 0..d {
                cand[j] = if obj.active[j] {
                    let u = yw[j] - grad[j] / lw;
                    let thr = l1 / lw;
                    u.signum() * (u.abs() - thr).max(0.0)
                } else {
                    0.0
                };
            }
            let cb = yb - gb / lb;
            let (fc, _) = obj.smooth(&cand, cb, None);
            let mut lin = gb * (cb - yb);
            let mut quad_w = 0.0;
            for j in 0..d {
                let dj = cand[j] - yw[j];
                lin += grad[j] * dj;
                quad_w += dj * dj;
            }
            let bound = fy + lin + 0.5 * (lw * quad_w + lb * (cb - yb) * (cb - yb));
            if fc <= bound + 1e-13 * fy.abs().max(1.0) || lw > 1e300 {
                break (fc, cb);
            }
            lw *= 2.0;
            lb *= 2.0;
        };
        let f_new = f_cand + obj.nonsmooth(&cand);
        if f_new > f_prev {
            if restarted {
                converged = true;
                break;
            }
            yw.copy_from_slice(&xw);
            yb = xb;
            t = 1.0;
            restarted = true;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        for j in 0..d {
            yw[j] = cand[j] + mom * (cand[j] - xw[j]);
        }
        yb = cand_b + mom * (cand_b - xb);
        xw.copy_from_slice(&cand);
        xb = cand_b;
        t = t_next;
        restarted = false;
        let change = f_prev - f_new;
        f_prev = f_new;
        if change < TOLERANCE {
            converged = true;
            break;
        }
        lw *= 0.9;
        lb *= 0.9;
    }
    Solution {
        weights: xw,
        intercept: xb,
        objective: f_prev,
        iterations,
        converged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    /// Indices into the input columns that the model uses.
    pub selected: Vec<usize>,
    /// One weight per selected feature, in standardized units.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub scaler: Scaler,
    pub config: ModelConfig,
    pub iterations: usize,
    pub converged: bool,
}

fn check_inputs(x: ArrayView2<'_, f64>, y: &[bool]) -> Result<(), LearnError> {
    if x.nrows() != y.len() {
        return Err(LearnError::Shape {
            rows: x.nrows(),
            labels: y.len(),
        });
    }
    if y.len() < 2 || y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(LearnError::SingleClass);
    }
    if let Some(((i, j), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(LearnError::NonFinite { row: i, col: j });
    }
    Ok(())
}

pub fn fit(x: ArrayView2<'_, f64>, y: &[bool], cfg: &ModelConfig) -> Result<TrainedModel, LearnError> {
    fit_warm(x, y, cfg, None)
}

/// As [`fit`], starting the solver from `warm` when its shape matches.
pub fn fit_warm(
    x: ArrayView2<'_, f64>,
    y: &[bool],
    cfg: &ModelConfig,
    warm: Option<&TrainedModel>,
) -> Result<TrainedModel, LearnError> {
    let prepared = Prepared::new(x, y, cfg.select_m, cfg.standardize)?;
    fit_prepared(&prepared, y, cfg, warm)
}

/// Selection, scaling and the transformed design for one training set;
/// shared by every fit along a regularization path.
#[derive(Debug)]
pub struct Prepared {
    selected: Vec<usize>,
    scaler: Scaler,
    z: Array2<f64>,
    select_m: Option<usize>,
    standardize: bool,
    row_space: OnceCell<RowSpace>,
}

impl Prepared {
    pub fn new(
        x: ArrayView2<'_, f64>,
        y: &[bool],
        select_m: Option<usize>,
        standardize: bool,
    ) -> Result<Prepared, LearnError> {
        check_inputs(x, y)?;
        let selected = match select_m {
            Some(m) => select_features(x, y, m)?,
            None => (0..x.ncols()).collect(),
        };
        let sub = x.select(Axis(1), &selected);
        let scaler = Scaler::fit(sub.view(), standardize);
        let z = scaler.transform(sub.view());
        Ok(Prepared {
            selected,
            scaler,
            z,
            select_m,
            standardize,
            row_space: OnceCell::new(),
        })
    }
}

/// Fits on a prepared training set; `cfg` must agree with how it was prepared.
pub fn fit_prepared(
    prepared: &Prepared,
    y: &[bool],
    cfg: &ModelConfig,
    warm: Option<&TrainedModel>,
) -> Result<TrainedModel, LearnError> {
    assert_eq!(cfg.select_m, prepared.select_m, "selection differs from the prepared design");
    assert_eq!(cfg.standardize, prepared.standardize, "scaling differs from the prepared design");
    let active: Vec<bool> = prepared.scaler.constant.iter().map(|c| !c).collect();
    let mut obj = Objective::new(prepared.z.view(), y, cfg.penalty, cfg.c)?.with_active(active);
    if cfg.penalty == Penalty::L2 && is_wide(&obj) {
        obj.row_space = Some(prepared.row_space.get_or_init(|| RowSpace::new(prepared.z.view())));
    }
    let init = warm
        .filter(|m| m.selected == prepared.selected)
        .map(|m| (m.weights.as_slice(), m.intercept));
    let sol = solve(&obj, init);
    Ok(TrainedModel {
        selected: prepared.selected.clone(),
        weights: sol.weights,
        intercept: sol.intercept,
        scaler: prepared.scaler.clone(),
        config: *cfg,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

impl TrainedModel {
    /// P(For wins) for one row of the full input columns.
    pub fn probability(&self, row: ArrayView1<'_, f64>) -> f64 {
        let mut z = self.intercept;
        for (k, &j) in self.selected.iter().enumerate() {
            if self.scaler.constant[k] {
                continue;
            }
            z += self.weights[k] * (row[j] - self.scaler.mean[k]) / self.scaler.std[k];
        }
        sigmoid(z)
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        x.axis_iter(Axis(0)).map(|r| self.probability(r)).collect()
    }

    /// For when p >= 0.5; an exact 0.5 goes to For.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<bool> {
        self.predict_proba(x).into_iter().map(|p| p >= 0.5).collect()
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Selected features with nonzero weight.
    pub fn used_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(&j, _)| j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy(n: usize, d: usize, seed: u64) -> (Array2<f64>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let x = Array2::from_shape_fn((n, d), |(i, j)| {
            let shift = if y[i] && j == 0 { 1.0 } else { 0.0 };
            rng.gen_range(-1.0..1.0) + shift
        });
        (x, y)
    }

    #[test]
    fn zero_model_is_a_coin() {
        let m = TrainedModel {
            selected: vec![0, 1],
            weights: vec![0.0, 0.0],
            intercept: 0.0,
            scaler: Scaler { mean: vec![0.0; 2], std: vec![1.0; 2], constant: vec![false; 2] },
            config: ModelConfig::new(Penalty::L2, 1.0),
            iterations: 0,
            converged: true,
        };
        assert_eq!(m.predict_proba(array![[3.0, -7.0], [1e9, 2.0]].view()), [0.5, 0.5]);
        assert_eq!(m.predict(array![[3.0, -7.0]].view()), [true]);
    }

    #[test]
    fn separable_one_dimension() {
        let x = array![[-3.0], [-2.0], [-1.0], [1.0], [2.0], [3.0]];
        let y = [false, false, false, true, true, true];
        for penalty in [Penalty::L1, Penalty::L2] {
            let m = fit(x.view(), &y, &ModelConfig::new(penalty, 1e4)).unwrap();
            assert_eq!(m.predict(x.view()), y);
            assert!(m.weights[0] > 0.0);
        }
    }

    #[test]
    fn input_validation() {
        let x = array![[1.0], [2.0]];
        let cfg = ModelConfig::new(Penalty::L2, 1.0);
        assert_eq!(fit(x.view(), &[true, true], &cfg).unwrap_err(), LearnError::SingleClass);
        assert_eq!(fit(x.view(), &[true], &cfg).unwrap_err(), LearnError::Shape { rows: 2, labels: 1 });
        let bad = array![[1.0], [f64::INFINITY]];
        assert_eq!(
            fit(bad.view(), &[true, false], &cfg).unwrap_err(),
            LearnError::NonFinite { row: 1, col: 0 }
        );
        let zero_c = ModelConfig::new(Penalty::L2, 0.0);
        assert_eq!(fit(x.view(), &[true, false], &zero_c).unwrap_err(), LearnError::InvalidC(0.0));
    }

    #[test]
    fn constant_features_keep_zero_weight() {
        let x = array![[5.0, -1.0], [5.0, 0.0], [5.0, 1.0], [5.0, 2.0]];
        let y = [false, false, true, true];
        let m = fit(x.view(), &y, &ModelConfig::new(Penalty::L2, 10.0)).unwrap();
        assert!(m.scaler.constant[0]);
        assert_eq!(m.weights[0], 0.0);
        let all_const = array![[1.0], [1.0], [1.0], [1.0]];
        let m = fit(all_const.view(), &y, &ModelConfig::new(Penalty::L1, 10.0)).unwrap();
        assert_eq!(m.weights, [0.0]);
        assert_eq!(m.intercept, 0.0);
        assert_eq!(m.predict_proba(array![[7.0]].view()), [0.5]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (x, y) = noisy(30, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for penalty in [Penalty::L2, Penalty::L1] {
            let obj = Objective::new(x.view(), &y, penalty, 0.7).unwrap();
            for _ in 0..10 {
                let w: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.5) * if rng.gen() { 1.0 } else { -1.0 }).collect();
                let b = rng.gen_range(-1.0..1.0);
                let (g, gb) = obj.gradient(&w, b);
                let h = 1e-6;
                for j in 0..=4 {
                    let (mut wp, mut wm) = (w.clone(), w.clone());
                    let (mut bp, mut bm) = (b, b);
                    if j < 4 {
                        wp[j] += h;
                        wm[j] -= h;
                    } else {
                        bp += h;
                        bm -= h;
                    }
                    let fd = (obj.value(&wp, bp) - obj.value(&wm, bm)) / (2.0 * h);
                    let an = if j < 4 { g[j] } else { gb };
                    let rel = (fd - an).abs() / an.abs().max(1e-3);
                    assert!(rel < 1e-5, "{penalty:?} coord {j}: fd {fd} analytic {an}");
                }
            }
        }
    }

    #[test]
    fn solver_reaches_stationarity() {
        let (x, y) = noisy(60, 3, 5);
        let obj = Objective::new(x.view(), &y, Penalty::L2, 1.0).unwrap();
        let sol = solve(&obj, None);
        assert!(sol.converged);
        let (g, gb) = obj.gradient(&sol.weights, sol.intercept);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt() + gb.abs();
        assert!(norm < 1e-3, "{norm}");
    }

    #[test]
    fn l1_zeroes_weak_features_first() {
        let (x, y) = noisy(80, 5, 9);
        let m = fit(x.view(), &y, &ModelConfig::new(Penalty::L1, 0.05)).unwrap();
        let nonzero = m.weights.iter().filter(|&&w| w != 0.0).count();
        assert!(nonzero <= 2, "{:?}", m.weights);
        assert!(m.weights[0] > 0.0, "{:?}", m.weights);
    }

    #[test]
    fn l2_norm_shrinks_with_c() {
        let (x, y) = noisy(50, 4, 21);
        let mut last = f64::INFINITY;
        for e in (-5..=5).rev() {
            let m = fit(x.view(), &y, &ModelConfig::new(Penalty::L2, 10f64.powi(e))).unwrap();
            let norm = m.weight_norm();
            assert!(norm <= last * (1.0 + 1e-6), "C=1e{e}: {norm} > {last}");
            last = norm;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn working_set_agrees_with_dense_solver() {
        let (x, y) = noisy(30, 120, 8);
        for c in [0.05, 1.0, 100.0] {
            let obj = Objective::new(x.view(), &y, Penalty::L1, c).unwrap();
            let ws = solve(&obj, None);
            let dense = solve_dense(&obj, None);
            let gap = (ws.objective - dense.objective).abs();
            assert!(gap < 1e-5 * dense.objective.max(1e-3), "C={c}: {} vs {}", ws.objective, dense.objective);
        }
    }

    #[test]
    fn row_space_agrees_with_dense_solver() {
        let (x, y) = noisy(30, 120, 12);
        for c in [1e-3, 1.0, 100.0] {
            let obj = Objective::new(x.view(), &y, Penalty::L2, c).unwrap();
            let rs = solve(&obj, None);
            let dense = solve_dense(&obj, None);
            let gap = (rs.objective - dense.objective).abs();
            assert!(gap < 1e-5 * dense.objective.max(1e-3), "C={c}: {} vs {}", rs.objective, dense.objective);
        }
        let q = row_space_basis(x.view());
        assert_eq!(q.nrows(), 30);
        let gram = q.dot(&q.t());
        for ((i, j), v) in gram.indexed_iter() {
            assert!((v - f64::from(u8::from(i == j))).abs() < 1e-10);
        }
    }

    #[test]
    fn warm_start_lands_on_same_model() {
        let (x, y) = noisy(40, 3, 2);
        let cold_small = fit(x.view(), &y, &ModelConfig::new(Penalty::L2, 0.1)).unwrap();
        let cfg = ModelConfig::new(Penalty::L2, 10.0);
        let cold = fit(x.view(), &y, &cfg).unwrap();
        let warm = fit_warm(x.view(), &y, &cfg, Some(&cold_small)).unwrap();
        for (a, b) in cold.weights.iter().zip(&warm.weights) {
            assert!((a - b).abs() < 1e-3, "{a} {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn standardized_predictions_ignore_affine_rescaling(
            seed in 0u64..1000,
            scale in prop::sample::select(vec![0.001, 0.5, 3.0, 1000.0]),
            shift in -50.0f64..50.0,
            col in 0usize..3,
            e in -2i32..=2,
        ) {
            let (x, y) = noisy(30, 3, seed);
            let mut x2 = x.clone();
            x2.column_mut(col).mapv_inplace(|v| v * scale + shift);
            let cfg = ModelConfig::new(Penalty::L2, 10f64.powi(e));
            let a = fit(x.view(), &y, &cfg).unwrap();
            let b = fit(x2.view(), &y, &cfg).unwrap();
            let pa = a.predict_proba(x.view());
            let pb = b.predict_proba(x2.view());
            for (p, q) in pa.iter().zip(&pb) {
                prop_assert!((p - q).abs() < 1e-6, "{} vs {}", p, q);
            }
        }
    }
}
