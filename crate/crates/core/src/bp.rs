//! Sum-product belief propagation on a Tanner graph, with flooding and
//! layered schedules.
//!
//! All messages and posteriors are clamped to `±CLAMP`. The check-node rule
//! evaluates `2·atanh(Π tanh(x/2))` with tanh values limited to
//! `±TANH_LIMIT`, so a check node never emits more than `2·atanh(TANH_LIMIT)`
//! (about 28.3) in magnitude.

use crate::channel::LlrVector;
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVector};

pub const CLAMP: f64 = 30.0;
pub const TANH_LIMIT: f64 = 1.0 - 1e-12;

#[inline]
fn clamp_llr(x: f64) -> f64 {
    x.clamp(-CLAMP, CLAMP)
}

#[inline]
fn clamp_tanh(t: f64) -> f64 {
    t.clamp(-TANH_LIMIT, TANH_LIMIT)
}

/// `tanh(x/2)` through a single exponential.
#[inline]
fn tanh_half(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    ((1.0 - e) / (1.0 + e)).copysign(x)
}

/// `2·atanh(t)` through a single logarithm.
#[inline]
fn two_atanh(t: f64) -> f64 {
    ((1.0 + t) / (1.0 - t)).ln()
}

/// Edge-indexed bipartite graph of a parity-check matrix.
///
/// Edges are numbered check-major: the edges of check `c` are
/// `check_start[c]..check_start[c + 1]`, ordered by variable index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    n_checks: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
}

impl TannerGraph {
    pub fn from_matrix(h: &BinaryMatrix) -> Self {
        let n_vars = h.cols();
        let n_checks = h.rows();
        let mut check_start = Vec::with_capacity(n_checks + 1);
        let mut edge_var = Vec::new();
        check_start.push(0);
        for r in 0..n_checks {
            edge_var.extend(h.row(r).iter_ones());
            check_start.push(edge_var.len());
        }

        let mut degree = vec![0usize; n_vars];
        for &v in &edge_var {
            degree[v] += 1;
        }
        let mut var_start = Vec::with_capacity(n_vars + 1);
        var_start.push(0);
        for d in &degree {
            var_start.push(var_start.last().unwrap() + d);
        }
        let mut fill = var_start[..n_vars].to_vec();
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }

        Self {
            n_vars,
            n_checks,
            check_start,
            edge_var,
            var_start,
            var_edges,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Edge ids attached to check `c`.
    #[inline]
    pub fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    /// Edge ids attached to variable `v`.
    #[inline]
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[self.var_start[v]..self.var_start[v + 1]]
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    /// All `(check, var)` pairs in edge order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_checks).flat_map(move |c| self.check_edges(c).map(move |e| (c, self.edge_var[e])))
    }

    /// True iff every check sees even parity in `bits`.
    pub fn syndrome_is_zero(&self, bits: &BitVector) -> bool {
        (0..self.n_checks).all(|c| self.check_edges(c).filter(|&e| bits.get(self.edge_var[e])).count() % 2 == 0)
    }
}

/// Ordered partition of the check indices into layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    layers: Vec<Vec<usize>>,
    n_l: usize,
}

impl Schedule {
    /// Validates that `layers` partitions `0..n_checks`.
    pub fn new(layers: Vec<Vec<usize>>, n_checks: usize) -> Result<Self> {
        let mut seen = vec![false; n_checks];
        for layer in &layers {
            if layer.is_empty() {
                return Err(Error::InvalidSchedule("empty layer".into()));
            }
            for &c in layer {
                if c >= n_checks {
                    return Err(Error::InvalidSchedule(format!(
                        "check {c} out of range for {n_checks} checks"
                    )));
                }
                if std::mem::replace(&mut seen[c], true) {
                    return Err(Error::InvalidSchedule(format!("check {c} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidSchedule(format!("check {missing} is never updated")));
        }
        let n_l = layers.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self { layers, n_l })
    }

    /// Consecutive blocks of `n_l` checks, processed top to bottom.
    pub fn top_to_bottom(n_checks: usize, n_l: usize) -> Result<Self> {
        if n_l == 0 {
            return Err(Error::InvalidSchedule("layer size must be positive".into()));
        }
        let layers = (0..n_checks)
            .collect::<Vec<_>>()
            .chunks(n_l)
            .map(<[usize]>::to_vec)
            .collect();
        Self::new(layers, n_checks)
    }

    /// Same layers, visited in `order`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.layers.len() {
            return Err(Error::InvalidSchedule(format!(
                "layer order has {} entries for {} layers",
                order.len(),
                self.layers.len()
            )));
        }
        let mut used = vec![false; self.layers.len()];
        let mut layers = Vec::with_capacity(order.len());
        for &i in order {
            if i >= used.len() || std::mem::replace(&mut used[i], true) {
                return Err(Error::InvalidSchedule(format!("bad layer index {i}")));
            }
            layers.push(self.layers[i].clone());
        }
        Ok(Self { layers, n_l: self.n_l })
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn n_l(&self) -> usize {
        self.n_l
    }

    pub fn n_checks(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub candidate: BitVector,
    /// Zero syndrome with respect to the decoder's own matrix.
    pub valid: bool,
    pub iterations_used: usize,
    pub posterior: LlrVector,
}

/// Variable-node rule: channel LLR plus all incoming check messages except
/// the one on `exclude`.
pub fn vn_update(l_ch: f64, incoming: &[f64], exclude: Option<usize>) -> f64 {
    let sum: f64 = incoming
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != exclude)
        .map(|(_, &m)| m)
        .sum();
    clamp_llr(l_ch + sum)
}

/// Check-node rule for the message leaving on edge `exclude`.
pub fn cn_update(incoming: &[f64], exclude: usize) -> f64 {
    let product: f64 = incoming
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != exclude)
        .map(|(_, &m)| clamp_tanh((clamp_llr(m) * 0.5).tanh()))
        .product();
    clamp_llr(2.0 * clamp_tanh(product).atanh())
}

/// Final posterior: channel LLR plus every incoming check message.
pub fn output_llr(l_ch: f64, incoming: &[f64]) -> f64 {
    clamp_llr(l_ch + incoming.iter().sum::<f64>())
}

/// Bit 1 for negative LLRs; ties decode to 0.
pub fn hard_decision(l: &[f64]) -> BitVector {
    BitVector::from_support(l.len(), l.iter().enumerate().filter(|(_, &x)| x < 0.0).map(|(i, _)| i))
}

/// Writes all extrinsic check-node outputs for one check, using
/// forward/backward partial products of the tanh values.
#[inline]
fn check_node_all(input: &[f64], output: &mut [f64], tanh_buf: &mut Vec<f64>) {
    tanh_buf.clear();
    tanh_buf.extend(input.iter().map(|&m| clamp_tanh(tanh_half(m))));
    let mut acc = 1.0;
    for (o, &t) in output.iter_mut().zip(tanh_buf.iter()) {
        *o = acc;
        acc *= t;
    }
    let mut bwd = 1.0;
    for (o, &t) in output.iter_mut().zip(tanh_buf.iter()).rev() {
        *o = clamp_llr(two_atanh(clamp_tanh(*o * bwd)));
        bwd *= t;
    }
}

/// Per-call state of a belief-propagation decoder on one graph.
pub struct BpDecoder<'g> {
    graph: &'g TannerGraph,
    early_stop: bool,
    l_ch: Vec<f64>,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    fresh: Vec<f64>,
    posterior: Vec<f64>,
    tanh_buf: Vec<f64>,
}

impl<'g> BpDecoder<'g> {
    pub fn new(graph: &'g TannerGraph) -> Self {
        let e = graph.n_edges();
        Self {
            graph,
            early_stop: true,
            l_ch: vec![0.0; graph.n_vars()],
            c2v: vec![0.0; e],
            v2c: vec![0.0; e],
            fresh: vec![0.0; e],
            posterior: vec![0.0; graph.n_vars()],
            tanh_buf: Vec::new(),
        }
    }

    /// Stop as soon as the hard decision has zero syndrome (default on).
    pub fn with_early_stop(mut self, early_stop: bool) -> Self {
        self.early_stop = early_stop;
        self
    }

    fn load_input(&mut self, l_ch: &[f64]) -> Result<()> {
        if l_ch.len() != self.graph.n_vars() {
            return Err(Error::DimensionMismatch {
                what: "LLR vector length",
                expected: self.graph.n_vars(),
                found: l_ch.len(),
            });
        }
        for (dst, &src) in self.l_ch.iter_mut().zip(l_ch) {
            *dst = clamp_llr(src);
        }
        Ok(())
    }

    /// Zero syndrome of the current hard decision, without materializing it.
    fn hard_decision_is_valid(&self) -> bool {
        let g = self.graph;
        (0..g.n_checks()).all(|c| {
            !g.check_edges(c)
                .fold(false, |parity, e| parity ^ (self.posterior[g.edge_var(e)] < 0.0))
        })
    }

    fn snapshot(&self, iterations_used: usize) -> DecodeOutcome {
        let posterior: Vec<f64> = self.posterior.iter().map(|&p| clamp_llr(p)).collect();
        let candidate = hard_decision(&posterior);
        DecodeOutcome {
            valid: self.graph.syndrome_is_zero(&candidate),
            candidate,
            iterations_used,
            posterior: LlrVector::new(posterior),
        }
    }

    pub fn decode_flooding(&mut self, l_ch: &[f64], max_iter: usize) -> Result<DecodeOutcome> {
        Ok(self
            .decode_flooding_checkpoints(l_ch, &[max_iter])?
            .pop()
            .expect("one checkpoint"))
    }

    /// Runs flooding BP up to the last checkpoint and reports the outcome
    /// after each listed iteration count. Checkpoints must be ascending.
    ///
    /// With early stopping, checkpoints past the stopping iteration repeat
    /// the stopped outcome, which is exactly what a shorter run would report.
    pub fn decode_flooding_checkpoints(&mut self, l_ch: &[f64], checkpoints: &[usize]) -> Result<Vec<DecodeOutcome>> {
        if checkpoints.windows(2).any(|w| w[0] > w[1]) || checkpoints.is_empty() {
            return Err(Error::config(
                "iterations",
                "checkpoints must be non-empty and ascending",
            ));
        }
        self.load_input(l_ch)?;
        let g = self.graph;
        for v in 0..g.n_vars() {
            self.posterior[v] = self.l_ch[v];
            for &e in g.var_edges(v) {
                self.v2c[e] = self.l_ch[v];
            }
        }
        self.c2v.iter_mut().for_each(|m| *m = 0.0);

        let mut out = Vec::with_capacity(checkpoints.len());
        let mut next = 0;
        while next < checkpoints.len() && checkpoints[next] == 0 {
            out.push(self.snapshot(0));
            next += 1;
        }
        let max_iter = *checkpoints.last().unwrap();
        for it in 1..=max_iter {
            for c in 0..g.n_checks() {
                let r = g.check_edges(c);
                check_node_all(&self.v2c[r.clone()], &mut self.c2v[r], &mut self.tanh_buf);
            }
            for v in 0..g.n_vars() {
                let edges = g.var_edges(v);
                let sum = self.l_ch[v] + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
                self.posterior[v] = sum;
                for &e in edges {
                    self.v2c[e] = clamp_llr(sum - self.c2v[e]);
                }
            }

            if self.early_stop && self.hard_decision_is_valid() {
                let outcome = self.snapshot(it);
                out.resize(checkpoints.len(), outcome);
                return Ok(out);
            }
            if checkpoints[next] == it {
                let outcome = self.snapshot(it);
                while next < checkpoints.len() && checkpoints[next] == it {
                    out.push(outcome.clone());
                    next += 1;
                }
            }
        }
        Ok(out)
    }

    /// Layered BP: within an iteration, layers are visited in schedule order;
    /// all checks of a layer read the posteriors from the start of the layer,
    /// then the posteriors of their variables are refreshed.
    pub fn decode_layered(&mut self, l_ch: &[f64], schedule: &Schedule, max_iter: usize) -> Result<DecodeOutcome> {
        let g = self.graph;
        if schedule.n_checks() != g.n_checks() || schedule.layers().iter().flatten().any(|&c| c >= g.n_checks()) {
            return Err(Error::InvalidSchedule(format!(
                "schedule covers {} checks, graph has {}",
                schedule.n_checks(),
                g.n_checks()
            )));
        }
        self.load_input(l_ch)?;
        self.posterior.copy_from_slice(&self.l_ch);
        self.c2v.iter_mut().for_each(|m| *m = 0.0);

        for it in 1..=max_iter {
            for layer in schedule.layers() {
                for &c in layer {
                    let r = g.check_edges(c);
                    for e in r.clone() {
                        self.v2c[e] = clamp_llr(self.posterior[g.edge_var(e)] - self.c2v[e]);
                    }
                    check_node_all(&self.v2c[r.clone()], &mut self.fresh[r], &mut self.tanh_buf);
                }
                for &c in layer {
                    for e in g.check_edges(c) {
                        self.posterior[g.edge_var(e)] += self.fresh[e] - self.c2v[e];
                        self.c2v[e] = self.fresh[e];
                    }
                }
            }
            if self.early_stop && self.hard_decision_is_valid() {
                return Ok(self.snapshot(it));
            }
        }
        Ok(self.snapshot(max_iter))
    }
}

pub fn decode_flooding(graph: &TannerGraph, l_ch: &[f64], max_iter: usize) -> Result<DecodeOutcome> {
    BpDecoder::new(graph).decode_flooding(l_ch, max_iter)
}

pub fn decode_layered(
    graph: &TannerGraph,
    l_ch: &[f64],
    schedule: &Schedule,
    max_iter: usize,
) -> Result<DecodeOutcome> {
    BpDecoder::new(graph).decode_layered(l_ch, schedule, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hamming74() -> BinaryMatrix {
        BinaryMatrix::from_dense(&[
            vec![1, 1, 0, 1, 1, 0, 0],
            vec![1, 0, 1, 1, 0, 1, 0],
            vec![0, 1, 1, 1, 0, 0, 1],
        ])
        .unwrap()
    }

    /// Cycle-free matrix on 10 bits: three checks arranged as a tree.
    fn tree_code() -> BinaryMatrix {
        BinaryMatrix::from_dense(&[
            vec![1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 1, 1, 0, 0, 0, 0],
            vec![0, 1, 0, 0, 0, 0, 1, 1, 0, 0],
            vec![0, 0, 0, 0, 0, 1, 0, 0, 1, 1],
        ])
        .unwrap()
    }

    fn random_llrs(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-4.0..4.0)).collect()
    }

    /// Exact bitwise posterior LLRs by enumerating every codeword.
    fn brute_force_marginals(h: &BinaryMatrix, l: &[f64]) -> Vec<f64> {
        let n = h.cols();
        let mut p0 = vec![0.0; n];
        let mut p1 = vec![0.0; n];
        for word in 0u32..(1 << n) {
            let c = BitVector::from_support(n, (0..n).filter(|&i| word >> i & 1 == 1));
            if !h.mul_vec(&c).unwrap().is_zero() {
                continue;
            }
            let weight: f64 = (0..n).map(|i| if c.get(i) { -l[i] / 2.0 } else { l[i] / 2.0 }).sum();
            let w = weight.exp();
            for i in 0..n {
                if c.get(i) {
                    p1[i] += w;
                } else {
                    p0[i] += w;
                }
            }
        }
        p0.iter().zip(&p1).map(|(a, b)| (a / b).ln()).collect()
    }

    #[test]
    fn vn_update_examples() {
        assert_eq!(vn_update(1.0, &[2.0, 3.0], Some(1)), 3.0);
        assert_eq!(vn_update(1.5, &[], None), 1.5);
        assert_eq!(vn_update(0.0, &[-1.0, 1.0], Some(1)), -1.0);
        assert_eq!(vn_update(0.0, &[-1.0, 1.0], Some(0)), 1.0);
    }

    #[test]
    fn cn_update_zero_absorbs() {
        assert_eq!(cn_update(&[0.0, 5.0, -3.0], 2), 0.0);
        assert_eq!(cn_update(&[3.0, 0.0, 1.0, -2.0], 0), 0.0);
    }

    #[test]
    fn cn_update_saturated_input_passes_other_message() {
        for x in [-6.0, -0.7, 0.25, 2.0, 9.0] {
            let out = cn_update(&[CLAMP, x, 1.0], 2);
            assert_relative_eq!(out, x, epsilon = 1e-7);
            let out = cn_update(&[-CLAMP, x, 1.0], 2);
            assert_relative_eq!(out, -x, epsilon = 1e-7);
        }
    }

    #[test]
    fn cn_update_two_equal_inputs() {
        // 2·atanh(tanh(1)²), evaluated independently
        let t = 1f64.tanh();
        let expect = ((1.0 + t * t) / (1.0 - t * t)).ln();
        assert_relative_eq!(expect, 1.3250, epsilon = 1e-4);
        assert_relative_eq!(cn_update(&[2.0, 2.0, 2.0], 0), expect, epsilon = 1e-12);
    }

    #[test]
    fn cn_update_output_is_bounded() {
        let out = cn_update(&[CLAMP, CLAMP, CLAMP], 0);
        assert!(out < CLAMP && out > 27.0);
        assert!(cn_update(&[CLAMP, CLAMP], 0) < 28.4);
        assert!(out.is_finite());
    }

    #[test]
    fn check_node_all_matches_scalar_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut fwd = Vec::new();
        for d in 1..9 {
            let input = random_llrs(d, &mut rng);
            let mut out = vec![0.0; d];
            check_node_all(&input, &mut out, &mut fwd);
            for (i, &o) in out.iter().enumerate() {
                assert_relative_eq!(o, cn_update(&input, i), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn output_llr_examples() {
        assert_eq!(output_llr(0.7, &[]), 0.7);
        assert_eq!(output_llr(1.0, &[1.0, -3.0]), -1.0);
        let incoming = [0.5, -1.25, 2.0];
        for j in 0..3 {
            let diff = output_llr(0.3, &incoming) - vn_update(0.3, &incoming, Some(j));
            assert_relative_eq!(diff, incoming[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn hard_decision_examples() {
        assert_eq!(hard_decision(&[2.0, -1.0, 0.0]).to_bits(), vec![0, 1, 0]);
        assert!(hard_decision(&[0.1, 4.0, 9.0]).is_zero());
        assert_eq!(hard_decision(&[-1e-300]).to_bits(), vec![1]);
    }

    #[test]
    fn graph_adjacency_is_consistent() {
        let h = hamming74();
        let g = TannerGraph::from_matrix(&h);
        assert_eq!(g.n_edges(), h.count_ones());
        let edges: Vec<_> = g.edges().collect();
        for &(c, v) in &edges {
            assert!(h.get(c, v));
        }
        for v in 0..g.n_vars() {
            for &e in g.var_edges(v) {
                assert_eq!(g.edge_var(e), v);
            }
        }
        assert_eq!(g.var_edges(3).len(), 3);
    }

    #[test]
    fn noiseless_input_decodes_in_one_iteration() {
        let g = TannerGraph::from_matrix(&hamming74());
        let out = decode_flooding(&g, &[20.0; 7], 8).unwrap();
        assert!(out.valid && out.candidate.is_zero());
        assert_eq!(out.iterations_used, 1);

        let sched = Schedule::top_to_bottom(3, 1).unwrap();
        let out = decode_layered(&g, &[20.0; 7], &sched, 4).unwrap();
        assert!(out.valid && out.candidate.is_zero());
        assert_eq!(out.iterations_used, 1);
    }

    #[test]
    fn zero_input_stays_zero() {
        let g = TannerGraph::from_matrix(&hamming74());
        let out = BpDecoder::new(&g)
            .with_early_stop(false)
            .decode_flooding(&[0.0; 7], 5)
            .unwrap();
        assert!(out.candidate.is_zero());
        assert!(out.posterior.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn single_error_corrected() {
        let g = TannerGraph::from_matrix(&hamming74());
        let mut l = vec![3.0; 7];
        l[2] = -1.0;
        let out = decode_flooding(&g, &l, 10).unwrap();
        assert!(out.valid);
        assert!(out.candidate.is_zero());
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = TannerGraph::from_matrix(&hamming74());
        assert!(matches!(
            decode_flooding(&g, &[1.0; 6], 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(vec![vec![0, 1], vec![2]], 3).is_ok());
        assert!(matches!(
            Schedule::new(vec![vec![0, 1]], 3),
            Err(Error::InvalidSchedule(_))
        ));
        assert!(Schedule::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        assert!(Schedule::new(vec![vec![0, 3]], 3).is_err());
        let s = Schedule::top_to_bottom(7, 3).unwrap();
        assert_eq!(s.layers(), &[vec![0, 1, 2], vec![3, 4, 5], vec![6]]);
        assert_eq!(s.n_l(), 3);
        let r = s.reordered(&[2, 0, 1]).unwrap();
        assert_eq!(r.layers()[0], vec![6]);
        assert!(s.reordered(&[0, 0, 1]).is_err());

        let g = TannerGraph::from_matrix(&hamming74());
        let wrong = Schedule::top_to_bottom(2, 1).unwrap();
        assert!(matches!(
            decode_layered(&g, &[1.0; 7], &wrong, 2),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn single_layer_layered_matches_flooding() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = hamming74();
        let g = TannerGraph::from_matrix(&h);
        let sched = Schedule::top_to_bottom(3, 3).unwrap();
        for _ in 0..200 {
            let l = random_llrs(7, &mut rng);
            for iters in 1..5 {
                let f = BpDecoder::new(&g)
                    .with_early_stop(false)
                    .decode_flooding(&l, iters)
                    .unwrap();
                let y = BpDecoder::new(&g)
                    .with_early_stop(false)
                    .decode_layered(&l, &sched, iters)
                    .unwrap();
                assert_eq!(f.candidate, y.candidate);
                for (a, b) in f.posterior.iter().zip(y.posterior.iter()) {
                    assert_relative_eq!(a, b, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn flooding_and_layered_agree_on_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = tree_code();
        let g = TannerGraph::from_matrix(&h);
        let sched = Schedule::top_to_bottom(h.rows(), 1).unwrap();
        for _ in 0..200 {
            let l = random_llrs(10, &mut rng);
            let f = BpDecoder::new(&g)
                .with_early_stop(false)
                .decode_flooding(&l, 6)
                .unwrap();
            let y = BpDecoder::new(&g)
                .with_early_stop(false)
                .decode_layered(&l, &sched, 6)
                .unwrap();
            assert_eq!(f.candidate, y.candidate);
            for (a, b) in f.posterior.iter().zip(y.posterior.iter()) {
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn tree_posteriors_equal_exact_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let h = tree_code();
        let g = TannerGraph::from_matrix(&h);
        for _ in 0..100 {
            let l = random_llrs(10, &mut rng);
            let exact = brute_force_marginals(&h, &l);
            let out = BpDecoder::new(&g)
                .with_early_stop(false)
                .decode_flooding(&l, 6)
                .unwrap();
            for (bp, ml) in out.posterior.iter().zip(&exact) {
                assert_relative_eq!(bp, ml, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn negated_input_negates_posteriors() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = TannerGraph::from_matrix(&hamming74());
        for _ in 0..100 {
            let l = random_llrs(7, &mut rng);
            let neg: Vec<f64> = l.iter().map(|x| -x).collect();
            let a = BpDecoder::new(&g)
                .with_early_stop(false)
                .decode_flooding(&l, 5)
                .unwrap();
            let b = BpDecoder::new(&g)
                .with_early_stop(false)
                .decode_flooding(&neg, 5)
                .unwrap();
            for (x, y) in a.posterior.iter().zip(b.posterior.iter()) {
                assert_relative_eq!(*x, -*y, max_relative = 1e-12);
            }
            for i in 0..7 {
                if a.posterior[i] != 0.0 {
                    assert_ne!(a.candidate.get(i), b.candidate.get(i));
                }
            }
        }
    }

    #[test]
    fn checkpoints_match_separate_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = TannerGraph::from_matrix(&hamming74());
        for early in [true, false] {
            for _ in 0..100 {
                let l = random_llrs(7, &mut rng);
                let trace = BpDecoder::new(&g)
                    .with_early_stop(early)
                    .decode_flooding_checkpoints(&l, &[0, 1, 3, 8])
                    .unwrap();
                for (&it, got) in [0, 1, 3, 8].iter().zip(&trace) {
                    let alone = BpDecoder::new(&g)
                        .with_early_stop(early)
                        .decode_flooding(&l, it)
                        .unwrap();
                    assert_eq!(&alone, got);
                }
            }
        }
    }
}
