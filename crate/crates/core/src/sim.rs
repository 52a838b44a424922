//! Monte-Carlo estimation of block error rate, undetected error rate and
//! ensemble recovery probability.
//!
//! Each trial draws its randomness from counter-based substreams keyed by
//! (master seed, point index, label) and positioned at the trial index, so
//! a trial's outcome does not depend on which worker runs it. Trials are
//! processed in batches whose sizes depend only on the counts collected so
//! far, and the stop rule is checked between batches; the totals are
//! therefore identical for any thread count.

use std::fmt::Write as _;
use std::ops::AddAssign;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bp::{BpDecoder, TannerGraph};
use crate::channel::{channel_llr, ebn0_to_sigma, transmit};
use crate::codes::{Code, CodeBundle, HVariant};
use crate::ensemble::{build_ensemble, Ensemble, EnsembleSpec, Method};
use crate::error::{Error, Result};
use crate::gf2::{self, BinaryMatrix, BitVector};

/// Largest code dimension accepted by the exhaustive ML decoder.
pub const ML_MAX_K: usize = 24;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ENSLDPC_THREADS";

const LABEL_CHANNEL: u64 = 1;
const LABEL_MESSAGE: u64 = 2;
const LABEL_NED: u64 = 3;

const MIN_BATCH: u64 = 64;
const MAX_BATCH: u64 = 1 << 18;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one trial of one labelled stream.
pub fn trial_rng(seed: u64, point: u64, label: u64, trial: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ point) ^ label);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}

/// Which error count the stop rule's target refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopCount {
    #[default]
    BlockErrors,
    /// Failures of the first branch, which bound the precision of ρ.
    FirstBranchErrors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub target_errors: u64,
    pub max_trials: u64,
    pub count: StopCount,
}

impl Default for StopRule {
    fn default() -> Self {
        Self::new(100, 10_000_000)
    }
}

impl StopRule {
    pub fn new(target_errors: u64, max_trials: u64) -> Self {
        Self {
            target_errors,
            max_trials,
            count: StopCount::BlockErrors,
        }
    }

    pub fn on_first_branch(target_errors: u64, max_trials: u64) -> Self {
        Self {
            count: StopCount::FirstBranchErrors,
            ..Self::new(target_errors, max_trials)
        }
    }

    fn errors(&self, c: &Counts) -> u64 {
        match self.count {
            StopCount::BlockErrors => c.block_errors,
            StopCount::FirstBranchErrors => c.dec1_errors,
        }
    }

    fn done(&self, errors: u64, trials: u64) -> bool {
        errors >= self.target_errors || trials >= self.max_trials
    }

    /// Next batch size, a function of the counts so far only.
    fn next_batch(&self, errors: u64, trials: u64) -> u64 {
        let wanted = if errors == 0 {
            trials.max(MIN_BATCH)
        } else {
            let missing = self.target_errors.saturating_sub(errors);
            (missing as u128 * trials as u128 / errors as u128) as u64
        };
        wanted
            .clamp(MIN_BATCH, MAX_BATCH)
            .min(self.max_trials.saturating_sub(trials))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over trials. Without the `parallel` feature this runs
    /// sequentially.
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub execution: Execution,
    /// Worker count; `None` reads `ENSLDPC_THREADS`, then uses all cores.
    pub threads: Option<usize>,
    pub random_messages: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            execution: Execution::Parallel,
            threads: None,
            random_messages: false,
        }
    }
}

fn thread_cap(explicit: Option<usize>) -> Result<Option<usize>> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(THREADS_ENV, format!("`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `trial` over index ranges and sums the results.
struct Runner {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Runner {
    fn new(options: &SimOptions) -> Result<Self> {
        let cap = thread_cap(options.threads)?;
        #[cfg(feature = "parallel")]
        {
            let pool = match options.execution {
                Execution::Sequential => None,
                Execution::Parallel => {
                    let mut b = rayon::ThreadPoolBuilder::new();
                    if let Some(n) = cap {
                        b = b.num_threads(n);
                    }
                    Some(b.build().map_err(|e| Error::config("threads", e.to_string()))?)
                }
            };
            Ok(Self { pool })
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = cap;
            Ok(Self {})
        }
    }

    fn run<C, F>(&self, range: std::ops::Range<u64>, trial: F) -> Result<C>
    where
        C: Default + AddAssign + Send,
        F: Fn(u64) -> Result<C> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| {
                range.into_par_iter().map(&trial).try_reduce(C::default, |mut a, b| {
                    a += b;
                    Ok(a)
                })
            });
        }
        let mut acc = C::default();
        for t in range {
            acc += trial(t)?;
        }
        Ok(acc)
    }
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: u64,
    pub dec1_success: bool,
    pub success: bool,
    pub selected_valid: bool,
    pub undetected: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub trials: u64,
    pub block_errors: u64,
    pub undetected_errors: u64,
    pub dec1_errors: u64,
    pub recoveries: u64,
}

impl Counts {
    fn from_record(r: &TrialRecord) -> Self {
        Self {
            trials: 1,
            block_errors: u64::from(!r.success),
            undetected_errors: u64::from(r.undetected),
            dec1_errors: u64::from(!r.dec1_success),
            recoveries: u64::from(!r.dec1_success && r.success),
        }
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Self) {
        self.trials += o.trials;
        self.block_errors += o.block_errors;
        self.undetected_errors += o.undetected_errors;
        self.dec1_errors += o.dec1_errors;
        self.recoveries += o.recoveries;
    }
}

/// 95% normal-approximation half-width for a proportion.
pub fn ci_half_width(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub ebn0_db: f64,
    pub counts: Counts,
}

impl PointResult {
    pub fn trials(&self) -> u64 {
        self.counts.trials
    }

    fn rate(&self, k: u64) -> f64 {
        if self.counts.trials == 0 {
            0.0
        } else {
            k as f64 / self.counts.trials as f64
        }
    }

    pub fn bler(&self) -> f64 {
        self.rate(self.counts.block_errors)
    }

    pub fn uer(&self) -> f64 {
        self.rate(self.counts.undetected_errors)
    }

    pub fn dec1_bler(&self) -> f64 {
        self.rate(self.counts.dec1_errors)
    }

    pub fn ci_bler(&self) -> f64 {
        ci_half_width(self.bler(), self.counts.trials)
    }

    pub fn ci_uer(&self) -> f64 {
        ci_half_width(self.uer(), self.counts.trials)
    }

    /// Fraction of first-branch failures that the ensemble corrects.
    pub fn rho_direct(&self) -> Option<f64> {
        (self.counts.dec1_errors > 0).then(|| self.counts.recoveries as f64 / self.counts.dec1_errors as f64)
    }

    pub fn ci_rho_direct(&self) -> Option<f64> {
        self.rho_direct().map(|r| ci_half_width(r, self.counts.dec1_errors))
    }

    /// `1 − BLER_E / BLER_1`.
    pub fn rho_ratio(&self) -> Option<f64> {
        (self.counts.dec1_errors > 0).then(|| 1.0 - self.counts.block_errors as f64 / self.counts.dec1_errors as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub code: String,
    pub method: String,
    pub m: usize,
    pub decoder: String,
    pub iters: usize,
    pub points: Vec<PointResult>,
}

pub const CSV_HEADER: &str = "code,method,M,decoder,iters,ebn0_db,trials,block_errors,undetected_errors,\
dec1_errors,recoveries,bler,uer,rho_direct,rho_ratio,ci_bler";

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

impl SweepResult {
    /// ρ is left empty for single-decoder rows.
    pub fn csv_rows(&self) -> Vec<String> {
        let ensemble = self.m > 1;
        self.points
            .iter()
            .map(|p| {
                let c = &p.counts;
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    self.code,
                    self.method,
                    self.m,
                    self.decoder,
                    self.iters,
                    sci(p.ebn0_db),
                    c.trials,
                    c.block_errors,
                    c.undetected_errors,
                    c.dec1_errors,
                    c.recoveries,
                    sci(p.bler()),
                    sci(p.uer()),
                    p.rho_direct().filter(|_| ensemble).map(sci).unwrap_or_default(),
                    p.rho_ratio().filter(|_| ensemble).map(sci).unwrap_or_default(),
                    sci(p.ci_bler()),
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        write_csv(std::slice::from_ref(self))
    }
}

/// One header followed by the rows of every sweep.
pub fn write_csv(sweeps: &[SweepResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for s in sweeps {
        for row in s.csv_rows() {
            let _ = writeln!(out, "{row}");
        }
    }
    out
}

/// Exhaustive ML decoding: the codeword with the largest correlation to
/// `l_ch`, ties resolved towards the lexicographically smallest message.
pub fn ml_oracle_decode(generator: &BinaryMatrix, l_ch: &[f64]) -> Result<BitVector> {
    MlOracle::new(generator.clone())?.decode(l_ch)
}

#[derive(Debug, Clone)]
pub struct MlOracle {
    generator: BinaryMatrix,
    supports: Vec<Vec<usize>>,
}

impl MlOracle {
    pub fn new(generator: BinaryMatrix) -> Result<Self> {
        let k = generator.rows();
        if k > ML_MAX_K {
            return Err(Error::DimensionTooLarge { k, limit: ML_MAX_K });
        }
        let supports = generator
            .row_vectors()
            .iter()
            .map(|r| r.iter_ones().collect())
            .collect();
        Ok(Self { generator, supports })
    }

    pub fn decode(&self, l_ch: &[f64]) -> Result<BitVector> {
        let n = self.generator.cols();
        if l_ch.len() != n {
            return Err(Error::DimensionMismatch {
                what: "LLR vector length",
                expected: n,
                found: l_ch.len(),
            });
        }
        let k = self.supports.len();
        // Gray-code walk; `key` orders messages lexicographically by
        // (m_0, m_1, ...).
        let key_bit = |j: usize| 1u64 << (k - 1 - j);
        let mut word = vec![false; n];
        let mut metric: f64 = l_ch.iter().sum();
        let mut key = 0u64;
        let (mut best_metric, mut best_key) = (metric, 0u64);
        for step in 1u64..(1u64 << k) {
            let j = step.trailing_zeros() as usize;
            for &i in &self.supports[j] {
                metric += if word[i] { 2.0 * l_ch[i] } else { -2.0 * l_ch[i] };
                word[i] = !word[i];
            }
            key ^= key_bit(j);
            if metric > best_metric || (metric == best_metric && key < best_key) {
                best_metric = metric;
                best_key = key;
            }
        }
        let message = BitVector::from_support(k, (0..k).filter(|&j| best_key & key_bit(j) != 0));
        self.generator.left_mul(&message)
    }
}

/// What decodes each trial.
#[derive(Debug, Clone)]
pub enum TrialDecoder {
    Ensemble(Ensemble),
    MlOracle(MlOracle),
}

/// A code, a decoder and the transmission settings for one experiment.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub code: Code,
    pub decoder: TrialDecoder,
    pub spec: EnsembleSpec,
    pub seed: u64,
    pub random_messages: bool,
}

impl Simulation {
    pub fn new(bundle: &CodeBundle, spec: &EnsembleSpec, seed: u64) -> Result<Self> {
        let decoder = match spec.method {
            Method::MlOracle => TrialDecoder::MlOracle(MlOracle::new(bundle.code.generator.clone())?),
            _ => TrialDecoder::Ensemble(build_ensemble(bundle, spec, seed)?),
        };
        Ok(Self {
            code: bundle.code.clone(),
            decoder,
            spec: spec.clone(),
            seed,
            random_messages: false,
        })
    }

    fn codeword(&self, point: u64, trial: u64) -> Result<BitVector> {
        if !self.random_messages {
            return Ok(BitVector::zeros(self.code.n));
        }
        let mut rng = trial_rng(self.seed, point, LABEL_MESSAGE, trial);
        let msg = BitVector::from_support(self.code.k, (0..self.code.k).filter(|_| rng.random::<bool>()));
        self.code.encode(&msg)
    }

    fn received(&self, point: u64, trial: u64, sigma: f64) -> Result<(BitVector, Vec<f64>)> {
        let c = self.codeword(point, trial)?;
        let mut rng = trial_rng(self.seed, point, LABEL_CHANNEL, trial);
        let y = transmit(&c, sigma, &mut rng);
        Ok((c, channel_llr(&y, sigma)?.into_inner()))
    }

    pub fn sigma(&self, ebn0_db: f64) -> Result<f64> {
        ebn0_to_sigma(ebn0_db, self.code.rate())
    }

    pub fn run_trial(&self, point: u64, trial: u64, sigma: f64) -> Result<TrialRecord> {
        let (c, l) = self.received(point, trial, sigma)?;
        let (dec1, selected, valid) = match &self.decoder {
            TrialDecoder::Ensemble(e) => {
                let mut ned = trial_rng(self.seed, point, LABEL_NED, trial);
                let r = e.decode(&l, &mut ned)?;
                (r.per_branch[0].candidate == c, r.selected, r.selected_valid)
            }
            TrialDecoder::MlOracle(ml) => {
                let s = ml.decode(&l)?;
                (s == c, s, true)
            }
        };
        let success = selected == c;
        Ok(TrialRecord {
            trial,
            dec1_success: dec1,
            success,
            selected_valid: valid,
            undetected: valid && !success,
        })
    }

    pub fn run_point(&self, point: u64, ebn0_db: f64, stop: &StopRule, options: &SimOptions) -> Result<PointResult> {
        let sigma = self.sigma(ebn0_db)?;
        let runner = Runner::new(options)?;
        let mut counts = Counts::default();
        while !stop.done(stop.errors(&counts), counts.trials) {
            let batch = stop.next_batch(stop.errors(&counts), counts.trials);
            let start = counts.trials;
            counts += runner.run(start..start + batch, |t| {
                Ok(Counts::from_record(&self.run_trial(point, t, sigma)?))
            })?;
        }
        Ok(PointResult { ebn0_db, counts })
    }
}

pub fn run_point(
    bundle: &CodeBundle,
    spec: &EnsembleSpec,
    ebn0_db: f64,
    stop: &StopRule,
    seed: u64,
    options: &SimOptions,
) -> Result<PointResult> {
    let mut sim = Simulation::new(bundle, spec, seed)?;
    sim.random_messages = options.random_messages;
    sim.run_point(0, ebn0_db, stop, options)
}

pub fn run_sweep(
    bundle: &CodeBundle,
    spec: &EnsembleSpec,
    ebn0_db: &[f64],
    stop: &StopRule,
    seed: u64,
    options: &SimOptions,
) -> Result<SweepResult> {
    let mut sim = Simulation::new(bundle, spec, seed)?;
    sim.random_messages = options.random_messages;
    let points = ebn0_db
        .iter()
        .enumerate()
        .map(|(i, &e)| sim.run_point(i as u64, e, stop, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        code: bundle.code.name.clone(),
        method: spec.method.name().to_string(),
        m: spec.branch_count(),
        decoder: spec.decoder_label().to_string(),
        iters: if spec.method == Method::MlOracle { 0 } else { spec.iters },
        points,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct MultiCounts(Vec<Counts>);

impl AddAssign for MultiCounts {
    fn add_assign(&mut self, o: Self) {
        if self.0.is_empty() {
            self.0 = o.0;
        } else {
            for (a, b) in self.0.iter_mut().zip(o.0) {
                *a += b;
            }
        }
    }
}

/// Block and undetected error rates of one flooding BP decoder after each
/// of several iteration counts, all taken from the same decoding run.
///
/// Early termination is always on. The stop rule's error target applies to
/// the undetected errors of the least-iterated decoder.
pub fn measure_uer(
    bundle: &CodeBundle,
    h_variant: HVariant,
    ebn0_db: &[f64],
    iteration_counts: &[usize],
    stop: &StopRule,
    seed: u64,
    options: &SimOptions,
) -> Result<Vec<SweepResult>> {
    let mut iters = iteration_counts.to_vec();
    iters.sort_unstable();
    iters.dedup();
    if iters.is_empty() {
        return Err(Error::config("iters", "at least one iteration count is required"));
    }
    let h = bundle.parity_check(h_variant)?;
    let graph = TannerGraph::from_matrix(&h);
    let spans_dual = gf2::rank(&h) == bundle.code.n - bundle.code.k;
    let spec = EnsembleSpec::new(Method::Bp, 1, iters[iters.len() - 1]);
    let mut sim = Simulation::new(bundle, &spec, seed)?;
    sim.random_messages = options.random_messages;
    let runner = Runner::new(options)?;

    let mut per_point: Vec<Vec<Counts>> = Vec::new();
    for (point, &ebn0) in ebn0_db.iter().enumerate() {
        let point = point as u64;
        let sigma = sim.sigma(ebn0)?;
        let mut acc = MultiCounts(vec![Counts::default(); iters.len()]);
        while !stop.done(acc.0[0].undetected_errors, acc.0[0].trials) {
            let batch = stop.next_batch(acc.0[0].undetected_errors, acc.0[0].trials);
            let start = acc.0[0].trials;
            acc += runner.run(start..start + batch, |t| {
                let (c, l) = sim.received(point, t, sigma)?;
                let outs = BpDecoder::new(&graph).decode_flooding_checkpoints(&l, &iters)?;
                let mut v = Vec::with_capacity(outs.len());
                for o in outs {
                    let valid = if spans_dual {
                        o.valid
                    } else {
                        gf2::is_codeword(&bundle.code.h_default, &o.candidate)?
                    };
                    let success = o.candidate == c;
                    v.push(Counts::from_record(&TrialRecord {
                        trial: t,
                        dec1_success: success,
                        success,
                        selected_valid: valid,
                        undetected: valid && !success,
                    }));
                }
                Ok(MultiCounts(v))
            })?;
        }
        per_point.push(acc.0);
    }

    Ok(iters
        .iter()
        .enumerate()
        .map(|(j, &it)| SweepResult {
            code: bundle.code.name.clone(),
            method: Method::Bp.name().to_string(),
            m: 1,
            decoder: "BP".to_string(),
            iters: it,
            points: ebn0_db
                .iter()
                .zip(&per_point)
                .map(|(&e, counts)| PointResult {
                    ebn0_db: e,
                    counts: counts[j],
                })
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::load_code;
    use crate::ensemble::correlation_metric;

    #[test]
    fn substreams_are_distinct_and_repeatable() {
        let draw = |s, p, l, t| trial_rng(s, p, l, t).random::<u64>();
        assert_eq!(draw(1, 2, 3, 4), draw(1, 2, 3, 4));
        let base = draw(1, 2, 3, 4);
        assert_ne!(base, draw(2, 2, 3, 4));
        assert_ne!(base, draw(1, 3, 3, 4));
        assert_ne!(base, draw(1, 2, 4, 4));
        assert_ne!(base, draw(1, 2, 3, 5));
    }

    #[test]
    fn batch_sizes_follow_counts() {
        let rule = StopRule::new(100, 1000);
        assert_eq!(rule.next_batch(0, 0), MIN_BATCH);
        assert_eq!(rule.next_batch(0, 500), 500);
        assert_eq!(rule.next_batch(50, 100), 100);
        assert_eq!(rule.next_batch(1, 990), 10);
        assert!(rule.done(100, 10));
        assert!(rule.done(3, 1000));
        assert!(!rule.done(3, 999));
    }

    #[test]
    fn ci_examples() {
        assert!((ci_half_width(0.5, 100) - 0.098).abs() < 1e-12);
        assert_eq!(ci_half_width(0.0, 10), 0.0);
    }

    #[test]
    fn rho_fields() {
        let p = PointResult {
            ebn0_db: 1.0,
            counts: Counts {
                trials: 100,
                block_errors: 10,
                undetected_errors: 0,
                dec1_errors: 40,
                recoveries: 30,
            },
        };
        assert_eq!(p.rho_direct(), Some(0.75));
        assert_eq!(p.rho_ratio(), Some(0.75));
        let none = PointResult {
            ebn0_db: 1.0,
            counts: Counts {
                trials: 10,
                ..Counts::default()
            },
        };
        assert_eq!(none.rho_direct(), None);
        assert_eq!(none.rho_ratio(), None);
    }

    #[test]
    fn csv_formatting() {
        let s = SweepResult {
            code: "simplex63".into(),
            method: "aed".into(),
            m: 8,
            decoder: "BP".into(),
            iters: 8,
            points: vec![PointResult {
                ebn0_db: 4.0,
                counts: Counts {
                    trials: 1000,
                    block_errors: 3,
                    undetected_errors: 0,
                    dec1_errors: 0,
                    recoveries: 0,
                },
            }],
        };
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("simplex63,aed,8,BP,8,4.000e0,1000,3,0,0,0,3.000e-3,0.000e0,,,3.390e-3")
        );
        assert_eq!(CSV_HEADER.split(',').count(), 16);
    }

    #[test]
    fn ml_oracle_small_examples() {
        // K = 1 repetition code
        let g = BinaryMatrix::from_dense(&[vec![1, 1, 1, 1]]).unwrap();
        let c = ml_oracle_decode(&g, &[-1.0, -2.0, 0.5, -0.1]).unwrap();
        assert_eq!(c.to_bits(), vec![1, 1, 1, 1]);
        let c = ml_oracle_decode(&g, &[1.0, -2.0, 0.5, 0.6]).unwrap();
        assert!(c.is_zero());
        // all-zero LLRs tie everywhere; the smallest message wins
        assert!(ml_oracle_decode(&g, &[0.0; 4]).unwrap().is_zero());
    }

    #[test]
    fn ml_oracle_matches_direct_enumeration() {
        let bundle = load_code("simplex63").unwrap();
        let g = &bundle.code.generator;
        let oracle = MlOracle::new(g.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let l: Vec<f64> = (0..63).map(|_| rng.random_range(-1.0..2.0)).collect();
            let mut best = (f64::NEG_INFINITY, BitVector::zeros(63));
            for m in 0u32..64 {
                let msg = BitVector::from_support(6, (0..6).filter(|&j| m >> j & 1 == 1));
                let c = g.left_mul(&msg).unwrap();
                let metric = correlation_metric(&l, &c);
                if metric > best.0 {
                    best = (metric, c);
                }
            }
            assert_eq!(oracle.decode(&l).unwrap(), best.1);
        }
    }

    #[test]
    fn ml_oracle_rejects_large_dimension() {
        let g = BinaryMatrix::zeros(25, 30).unwrap();
        assert!(matches!(MlOracle::new(g), Err(Error::DimensionTooLarge { k: 25, .. })));
    }

    #[test]
    fn noiseless_channel_has_no_errors() {
        let bundle = load_code("simplex63").unwrap();
        let spec = EnsembleSpec::new(Method::Bp, 1, 8);
        let p = run_point(&bundle, &spec, 60.0, &StopRule::new(1, 500), 1, &SimOptions::default()).unwrap();
        assert_eq!(p.counts.trials, 500);
        assert_eq!(p.counts.block_errors, 0);
        assert_eq!(p.bler(), 0.0);
    }
}
