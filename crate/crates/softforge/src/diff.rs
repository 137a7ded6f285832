//! Reverse-mode autodiff on a scalar tape, plus the parameter store and
//! optimizers used by training.
//!
//! Nodes are appended in evaluation order, so the tape is already a
//! topological sort; `backward` walks it once in reverse. Parameters are
//! named vectors (predicate embeddings, or one flat vector of core-fact
//! logits) whose adjoints accumulate outside the tape.

use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const BCE_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub u32);

/// A named parameter vector.
#[derive(Debug, Clone)]
pub struct Param {
    pub name: String,
    pub values: Vec<f64>,
    pub adjoints: Vec<f64>,
    pub trainable: bool,
    /// Embeddings receive exploration noise; logit vectors do not.
    pub embedding: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    params: Vec<Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, values: Vec<f64>, trainable: bool, embedding: bool) -> ParamId {
        let id = ParamId(self.params.len() as u32);
        let n = values.len();
        self.params.push(Param {
            name: name.to_string(),
            values,
            adjoints: vec![0.0; n],
            trainable,
            embedding,
        });
        id
    }

    pub fn get(&self, id: ParamId) -> &Param {
        &self.params[id.0 as usize]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Param {
        &mut self.params[id.0 as usize]
    }

    pub fn values(&self, id: ParamId) -> &[f64] {
        &self.params[id.0 as usize].values
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Param)> {
        self.params
            .iter()
            .enumerate()
            .map(|(i, p)| (ParamId(i as u32), p))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn zero_adjoints(&mut self) {
        for p in &mut self.params {
            for a in &mut p.adjoints {
                *a = 0.0;
            }
        }
    }

    /// Adds independent Gaussian noise of the given sigma to every trainable
    /// embedding coordinate. Sigma 0 leaves parameters untouched.
    pub fn add_noise<R: Rng>(&mut self, sigma: f64, rng: &mut R) {
        if sigma == 0.0 {
            return;
        }
        for p in &mut self.params {
            if !p.trainable || !p.embedding {
                continue;
            }
            for v in &mut p.values {
                let n: f64 = StandardNormal.sample(rng);
                *v += sigma * n;
            }
        }
    }
}

/// A one-hot basis vector of length `d`.
pub fn one_hot(d: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[index] = 1.0;
    v
}

/// Samples an embedding with coordinates from Gaussian(mean, 1/sqrt(d)),
/// re-drawing in the vanishingly unlikely case of a near-zero norm so the
/// cosine never sees a zero vector.
pub fn init_embedding<R: Rng>(d: usize, mean: f64, rng: &mut R) -> Vec<f64> {
    let std = 1.0 / (d as f64).sqrt();
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| {
                let n: f64 = StandardNormal.sample(rng);
                mean + std * n
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm >= 1e-8 {
            return v;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const,
    /// One coordinate of a parameter vector.
    Coord { param: ParamId, idx: u32 },
    /// Cosine similarity of two parameter vectors.
    Cos { a: ParamId, b: ParamId },
    /// Product of the argument slice; gradients by the product rule.
    Mul { start: u32, len: u32 },
    /// Sum of the argument slice.
    Sum { start: u32, len: u32 },
    /// max(a, b); gradient follows the first argument on ties.
    Max { a: NodeId, b: NodeId },
    Sigmoid { x: NodeId },
    /// Binary cross-entropy against a constant target; the prediction is
    /// clamped into [eps, 1-eps] before the logs.
    Bce { x: NodeId, target: f64 },
    Scale { x: NodeId, c: f64 },
    /// Clamp into [0, 1]; unit gradient inside the interval, zero outside.
    Clamp01 { x: NodeId },
}

/// The computation graph for one epoch.
#[derive(Debug, Default)]
pub struct Tape {
    vals: Vec<f64>,
    ops: Vec<Op>,
    args: Vec<u32>,
}

/// Cosine similarity of two raw vectors, clamped into [-1, 1]. Exact 1.0 for
/// identical one-hot inputs.
pub fn cosine_value(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    debug_assert!(na > 0.0 && nb > 0.0, "cosine of a zero vector");
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn value(&self, n: NodeId) -> f64 {
        self.vals[n.0 as usize]
    }

    fn push(&mut self, op: Op, val: f64) -> NodeId {
        let id = NodeId(self.ops.len() as u32);
        self.ops.push(op);
        self.vals.push(val);
        id
    }

    fn push_args(&mut self, nodes: &[NodeId]) -> (u32, u32) {
        let start = self.args.len() as u32;
        self.args.extend(nodes.iter().map(|n| n.0));
        (start, nodes.len() as u32)
    }

    pub fn constant(&mut self, v: f64) -> NodeId {
        self.push(Op::Const, v)
    }

    pub fn coord(&mut self, params: &ParamStore, p: ParamId, idx: usize) -> NodeId {
        let v = params.values(p)[idx];
        self.push(Op::Coord { param: p, idx: idx as u32 }, v)
    }

    pub fn cosine(&mut self, params: &ParamStore, a: ParamId, b: ParamId) -> NodeId {
        let v = cosine_value(params.values(a), params.values(b));
        self.push(Op::Cos { a, b }, v)
    }

    pub fn mul(&mut self, factors: &[NodeId]) -> NodeId {
        debug_assert!(!factors.is_empty());
        let v = factors.iter().map(|&f| self.value(f)).product();
        let (start, len) = self.push_args(factors);
        self.push(Op::Mul { start, len }, v)
    }

    pub fn sum(&mut self, terms: &[NodeId]) -> NodeId {
        let v = terms.iter().map(|&t| self.value(t)).sum();
        let (start, len) = self.push_args(terms);
        self.push(Op::Sum { start, len }, v)
    }

    /// Fuzzy disjunction: max, with ties resolved towards the first input.
    pub fn soft_or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.value(a).max(self.value(b));
        self.push(Op::Max { a, b }, v)
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let v = 1.0 / (1.0 + (-self.value(x)).exp());
        self.push(Op::Sigmoid { x }, v)
    }

    pub fn bce(&mut self, pred: NodeId, target: f64) -> Result<NodeId> {
        if !(0.0..=1.0).contains(&target) {
            return Err(Error::Argument(format!(
                "binary cross-entropy target {} outside [0,1]",
                target
            )));
        }
        let p = self.value(pred).clamp(BCE_EPS, 1.0 - BCE_EPS);
        let v = -(target * p.ln() + (1.0 - target) * (1.0 - p).ln());
        Ok(self.push(Op::Bce { x: pred, target }, v))
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let v = c * self.value(x);
        self.push(Op::Scale { x, c }, v)
    }

    pub fn clamp01(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).clamp(0.0, 1.0);
        self.push(Op::Clamp01 { x }, v)
    }

    /// Backpropagates from `loss`, accumulating into parameter adjoints.
    /// Returns the per-node gradients for inspection.
    pub fn backward(&self, loss: NodeId, params: &mut ParamStore) -> Vec<f64> {
        let mut grads = vec![0.0; self.ops.len()];
        grads[loss.0 as usize] = 1.0;
        for i in (0..=loss.0 as usize).rev() {
            let g = grads[i];
            if g == 0.0 {
                continue;
            }
            match self.ops[i] {
                Op::Const => {}
                Op::Coord { param, idx } => {
                    params.get_mut(param).adjoints[idx as usize] += g;
                }
                Op::Cos { a, b } => {
                    let (va, vb) = (params.values(a).to_vec(), params.values(b).to_vec());
                    let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let cos = self.vals[i];
                    {
                        let pa = params.get_mut(a);
                        for k in 0..va.len() {
                            pa.adjoints[k] += g * (vb[k] / (na * nb) - cos * va[k] / (na * na));
                        }
                    }
                    let pb = params.get_mut(b);
                    for k in 0..vb.len() {
                        pb.adjoints[k] += g * (va[k] / (na * nb) - cos * vb[k] / (nb * nb));
                    }
                }
                Op::Mul { start, len } => {
                    let (s, l) = (start as usize, len as usize);
                    for j in 0..l {
                        let mut others = 1.0;
                        for k in 0..l {
                            if k != j {
                                others *= self.vals[self.args[s + k] as usize];
                            }
                        }
                        grads[self.args[s + j] as usize] += g * others;
                    }
                }
                Op::Sum { start, len } => {
                    let (s, l) = (start as usize, len as usize);
                    for j in 0..l {
                        grads[self.args[s + j] as usize] += g;
                    }
                }
                Op::Max { a, b } => {
                    if self.vals[a.0 as usize] >= self.vals[b.0 as usize] {
                        grads[a.0 as usize] += g;
                    } else {
                        grads[b.0 as usize] += g;
                    }
                }
                Op::Sigmoid { x } => {
                    let v = self.vals[i];
                    grads[x.0 as usize] += g * v * (1.0 - v);
                }
                Op::Bce { x, target } => {
                    let p = self.vals[x.0 as usize].clamp(BCE_EPS, 1.0 - BCE_EPS);
                    grads[x.0 as usize] += g * (-target / p + (1.0 - target) / (1.0 - p));
                }
                Op::Scale { x, c } => {
                    grads[x.0 as usize] += g * c;
                }
                Op::Clamp01 { x } => {
                    let raw = self.vals[x.0 as usize];
                    if (0.0..=1.0).contains(&raw) {
                        grads[x.0 as usize] += g;
                    }
                }
            }
        }
        grads
    }
}

/// Gradient descent flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptKind {
    Sgd,
    Adam,
}

impl std::str::FromStr for OptKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptKind::Sgd),
            "adam" => Ok(OptKind::Adam),
            other => Err(Error::Config(format!("unknown optimizer '{}'", other))),
        }
    }
}

/// Optimizer with per-parameter state. Adam uses the usual bias-corrected
/// moment estimates; SGD is plain descent.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptKind,
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptKind, lr: f64) -> Self {
        Optimizer {
            kind,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    /// Applies one update from the accumulated adjoints, then clears them.
    /// Fails without touching parameters if any gradient is non-finite.
    pub fn step(&mut self, params: &mut ParamStore) -> std::result::Result<(), String> {
        for (_, p) in params.iter() {
            if p.trainable && p.adjoints.iter().any(|a| !a.is_finite()) {
                return Err(format!("non-finite gradient in parameter '{}'", p.name));
            }
        }
        while self.m.len() < params.len() {
            let d = params.get(ParamId(self.m.len() as u32)).values.len();
            self.m.push(vec![0.0; d]);
            self.v.push(vec![0.0; d]);
        }
        self.t += 1;
        for i in 0..params.len() {
            let p = params.get_mut(ParamId(i as u32));
            if !p.trainable {
                continue;
            }
            match self.kind {
                OptKind::Sgd => {
                    for k in 0..p.values.len() {
                        p.values[k] -= self.lr * p.adjoints[k];
                    }
                }
                OptKind::Adam => {
                    let bc1 = 1.0 - self.beta1.powi(self.t as i32);
                    let bc2 = 1.0 - self.beta2.powi(self.t as i32);
                    for k in 0..p.values.len() {
                        let g = p.adjoints[k];
                        self.m[i][k] = self.beta1 * self.m[i][k] + (1.0 - self.beta1) * g;
                        self.v[i][k] = self.beta2 * self.v[i][k] + (1.0 - self.beta2) * g * g;
                        let mh = self.m[i][k] / bc1;
                        let vh = self.v[i][k] / bc2;
                        p.values[k] -= self.lr * mh / (vh.sqrt() + self.eps);
                    }
                }
            }
        }
        params.zero_adjoints();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cosine_matches_hand_values() {
        let mut params = ParamStore::new();
        let a = params.add("a", vec![1.0, 1.0], true, true);
        let b = params.add("b", vec![1.0, 0.0], true, true);
        let mut tape = Tape::new();
        let c = tape.cosine(&params, a, b);
        assert_relative_eq!(tape.value(c), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn cosine_of_identical_vectors_is_one() {
        let mut params = ParamStore::new();
        let a = params.add("a", vec![0.3, -0.7, 0.2], true, true);
        let h = params.add("h", one_hot(3, 1), false, true);
        let mut tape = Tape::new();
        let caa = tape.cosine(&params, a, a);
        assert_relative_eq!(tape.value(caa), 1.0, epsilon = 1e-12);
        let chh = tape.cosine(&params, h, h);
        assert_eq!(tape.value(chh), 1.0);
    }

    #[test]
    fn mul_reproduces_soft_rule_score() {
        let mut tape = Tape::new();
        let ns: Vec<NodeId> = [0.9, 0.8, 1.0, 1.0, 0.5]
            .iter()
            .map(|&v| tape.constant(v))
            .collect();
        let m = tape.mul(&ns);
        assert_relative_eq!(tape.value(m), 0.36, epsilon = 1e-12);
    }

    #[test]
    fn soft_or_tie_routes_gradient_to_first() {
        let mut params = ParamStore::new();
        let p = params.add("p", vec![0.5, 0.5], true, false);
        let mut tape = Tape::new();
        let a = tape.coord(&params, p, 0);
        let b = tape.coord(&params, p, 1);
        let m = tape.soft_or(a, b);
        tape.backward(m, &mut params);
        assert_eq!(params.get(p).adjoints, vec![1.0, 0.0]);
    }

    #[test]
    fn sigmoid_saturates() {
        let mut tape = Tape::new();
        let x = tape.constant(50.0);
        let s = tape.sigmoid(x);
        assert_abs_diff_eq!(tape.value(s), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bce_hand_values() {
        let mut tape = Tape::new();
        let half = tape.constant(0.5);
        let b = tape.bce(half, 1.0).unwrap();
        assert_relative_eq!(tape.value(b), 2f64.ln(), epsilon = 1e-12);
        let p9 = tape.constant(0.9);
        let b2 = tape.bce(p9, 0.0).unwrap();
        assert_relative_eq!(tape.value(b2), -(0.1f64.ln()), epsilon = 1e-9);
        let near_one = tape.constant(1.0 - 1e-9);
        let b3 = tape.bce(near_one, 1.0).unwrap();
        assert!(tape.value(b3) < 1e-6);
    }

    #[test]
    fn bce_rejects_bad_target() {
        let mut tape = Tape::new();
        let x = tape.constant(0.5);
        assert!(tape.bce(x, 1.5).is_err());
        assert!(tape.bce(x, -0.1).is_err());
    }

    #[test]
    fn product_gradients() {
        let mut params = ParamStore::new();
        let p = params.add("p", vec![3.0, 4.0], true, false);
        let mut tape = Tape::new();
        let x = tape.coord(&params, p, 0);
        let y = tape.coord(&params, p, 1);
        let m = tape.mul(&[x, y]);
        tape.backward(m, &mut params);
        assert_eq!(params.get(p).adjoints, vec![4.0, 3.0]);
    }

    #[test]
    fn cosine_gradient_at_orthogonal_vectors() {
        let mut params = ParamStore::new();
        let a = params.add("a", vec![1.0, 0.0], true, true);
        let b = params.add("b", vec![0.0, 1.0], true, true);
        let mut tape = Tape::new();
        let c = tape.cosine(&params, a, b);
        tape.backward(c, &mut params);
        // d cos / d a = b when both are unit and orthogonal.
        assert_relative_eq!(params.get(a).adjoints[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(params.get(a).adjoints[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn backward_is_linear_over_summed_losses() {
        let mut params = ParamStore::new();
        let p = params.add("p", vec![0.4, 0.7, -0.2], true, true);
        let q = params.add("q", vec![0.1, 0.9, 0.3], true, true);

        let run = |losses: &[usize], params: &mut ParamStore| -> Vec<f64> {
            let mut tape = Tape::new();
            let c = tape.cosine(params, ParamId(0), ParamId(1));
            let s = tape.sigmoid(c);
            let l1 = tape.bce(s, 1.0).unwrap();
            let l2 = tape.scale(c, -0.5);
            let all = [l1, l2];
            let chosen: Vec<NodeId> = losses.iter().map(|&i| all[i]).collect();
            let total = tape.sum(&chosen);
            params.zero_adjoints();
            tape.backward(total, params);
            let mut out = params.get(ParamId(0)).adjoints.clone();
            out.extend(params.get(ParamId(1)).adjoints.clone());
            out
        };

        let g1 = run(&[0], &mut params);
        let g2 = run(&[1], &mut params);
        let gsum = run(&[0, 1], &mut params);
        for i in 0..gsum.len() {
            assert_relative_eq!(gsum[i], g1[i] + g2[i], epsilon = 1e-12);
        }
        let _ = (p, q);
    }

    #[test]
    fn sgd_step_moves_against_gradient() {
        let mut params = ParamStore::new();
        let p = params.add("p", vec![1.0], true, false);
        params.get_mut(p).adjoints[0] = 2.0;
        let mut opt = Optimizer::new(OptKind::Sgd, 0.1);
        opt.step(&mut params).unwrap();
        assert_relative_eq!(params.values(p)[0], 0.8, epsilon = 1e-15);
        assert_eq!(params.get(p).adjoints[0], 0.0);
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut params = ParamStore::new();
        let p = params.add("p", vec![0.5, -0.5], true, false);
        let before = params.values(p).to_vec();
        let mut opt = Optimizer::new(OptKind::Adam, 0.05);
        opt.step(&mut params).unwrap();
        assert_eq!(params.values(p), &before[..]);
    }

    #[test]
    fn non_finite_gradient_is_reported() {
        let mut params = ParamStore::new();
        let p = params.add("bad", vec![0.5], true, false);
        params.get_mut(p).adjoints[0] = f64::NAN;
        let mut opt = Optimizer::new(OptKind::Adam, 0.05);
        let err = opt.step(&mut params).unwrap_err();
        assert!(err.contains("bad"));
    }

    #[test]
    fn fixed_params_never_move() {
        let mut params = ParamStore::new();
        let p = params.add("hot", one_hot(3, 0), false, true);
        params.get_mut(p).adjoints[1] = 5.0;
        let mut opt = Optimizer::new(OptKind::Adam, 0.05);
        opt.step(&mut params).unwrap();
        assert_eq!(params.values(p), &[1.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        params.add_noise(0.5, &mut rng);
        assert_eq!(params.values(p), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn noise_statistics_match_sigma() {
        let mut params = ParamStore::new();
        let n = 10_000;
        let p = params.add("p", vec![0.0; n], true, true);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        params.add_noise(0.1, &mut rng);
        let vals = params.values(p);
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {}", mean);
        assert!((var.sqrt() - 0.1).abs() < 0.01, "sd {}", var.sqrt());
        // Sigma zero is a no-op.
        let before = params.values(p).to_vec();
        params.add_noise(0.0, &mut rng);
        assert_eq!(params.values(p), &before[..]);
    }

    #[test]
    fn identical_seeds_give_identical_training_steps() {
        let run = |seed: u64| -> Vec<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut params = ParamStore::new();
            let a = params.add("a", init_embedding(4, 0.0, &mut rng), true, true);
            let b = params.add("b", one_hot(4, 2), false, true);
            let mut opt = Optimizer::new(OptKind::Adam, 0.05);
            for _ in 0..25 {
                let mut tape = Tape::new();
                let c = tape.cosine(&params, a, b);
                let s = tape.sigmoid(c);
                let l = tape.bce(s, 1.0).unwrap();
                tape.backward(l, &mut params);
                opt.step(&mut params).unwrap();
            }
            params.values(a).to_vec()
        };
        let r1 = run(11);
        let r2 = run(11);
        assert_eq!(r1, r2);
        let bits1: Vec<u64> = r1.iter().map(|v| v.to_bits()).collect();
        let bits2: Vec<u64> = r2.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits1, bits2);
    }

    #[test]
    fn init_embedding_never_returns_zero_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = init_embedding(5, 0.0, &mut rng);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(norm >= 1e-8);
        }
    }
}
