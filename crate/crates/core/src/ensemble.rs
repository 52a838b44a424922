//! Ensembles of BP decoders and the ML-in-the-list selector.
//!
//! Every branch decodes a transformed copy of the channel LLRs (or uses its
//! own parity-check matrix), its candidate is mapped back to the original
//! coordinates, and the valid candidate with the best correlation to the
//! channel LLRs wins. Validity is always judged against the code's default
//! matrix, so branches on reduced or alternative matrices target the same
//! code.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::automorphisms::{self, Permutation};
use crate::bp::{BpDecoder, DecodeOutcome, Schedule, TannerGraph, CLAMP};
use crate::channel::LlrVector;
use crate::codes::{self, Code, CodeBundle, HVariant, Structure};
use crate::error::{Error, Result};
use crate::gf2::{self, BinaryMatrix, BitVector};

/// Magnitude written into saturated SBP positions.
pub const L_SAT: f64 = CLAMP;

/// Rows removed from the 5G-like matrix before AED so that BP stops being
/// invariant to the QC shifts.
pub const AED_QC_DELETED_ROWS: [usize; 3] = [0, 1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderConfig {
    pub max_iter: usize,
    pub early_stop: bool,
}

impl DecoderConfig {
    pub fn new(max_iter: usize) -> Self {
        Self {
            max_iter,
            early_stop: true,
        }
    }
}

/// How a branch alters the channel LLRs before decoding.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Identity,
    Permute(Permutation),
    /// Adds i.i.d. zero-mean Gaussian noise of the given variance.
    Noise(f64),
    /// Forces the least reliable positions to `±L_SAT`; bit `b` of the
    /// pattern selects the sign of the `b`-th least reliable position.
    Saturate(usize),
}

#[derive(Debug, Clone)]
pub struct Branch {
    graph: TannerGraph,
    schedule: Option<Schedule>,
    transform: Transform,
    // decoder matrix spans exactly the code's dual, so its own syndrome
    // test already decides code membership
    spans_dual: bool,
}

impl Branch {
    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        self.schedule.as_ref()
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub selected: BitVector,
    pub selected_valid: bool,
    /// Branch outcomes mapped back to the original coordinates, with
    /// `valid` judged against the code.
    pub per_branch: Vec<DecodeOutcome>,
    /// 0-based index of the winning branch.
    pub winner: Option<usize>,
}

/// Correlation `Σ L_i (1 − 2c_i)` between a candidate and the LLRs.
pub fn correlation_metric(l_ch: &[f64], c: &BitVector) -> f64 {
    l_ch.iter()
        .enumerate()
        .map(|(i, &l)| if c.get(i) { -l } else { l })
        .sum()
}

/// Picks the valid candidate with the largest correlation metric, lowest
/// index on ties. With no valid candidate, returns the first one and `None`.
pub fn select_ml(l_ch: &[f64], candidates: &[(BitVector, bool)]) -> Result<(BitVector, Option<usize>)> {
    let Some(first) = candidates.first() else {
        return Err(Error::EmptyList);
    };
    let mut best: Option<(usize, f64)> = None;
    for (j, (c, valid)) in candidates.iter().enumerate() {
        if c.len() != l_ch.len() {
            return Err(Error::DimensionMismatch {
                what: "candidate length",
                expected: l_ch.len(),
                found: c.len(),
            });
        }
        if !valid {
            continue;
        }
        let m = correlation_metric(l_ch, c);
        if best.is_none_or(|(_, b)| m > b) {
            best = Some((j, m));
        }
    }
    Ok(match best {
        Some((j, _)) => (candidates[j].0.clone(), Some(j)),
        None => (first.0.clone(), None),
    })
}

/// A fixed set of constituent decoders for one code.
#[derive(Debug, Clone)]
pub struct Ensemble {
    code_h: BinaryMatrix,
    generator: BinaryMatrix,
    dual_dim: usize,
    branches: Vec<Branch>,
    config: DecoderConfig,
}

impl Ensemble {
    fn empty(code: &Code, config: DecoderConfig) -> Self {
        Self {
            code_h: code.h_default.clone(),
            generator: code.generator.clone(),
            dual_dim: code.n - code.k,
            branches: Vec::new(),
            config,
        }
    }

    fn push(&mut self, h: &BinaryMatrix, schedule: Option<Schedule>, transform: Transform) -> Result<()> {
        if h.cols() != self.code_h.cols() {
            return Err(Error::DimensionMismatch {
                what: "parity-check columns",
                expected: self.code_h.cols(),
                found: h.cols(),
            });
        }
        if let Some(s) = &schedule {
            if s.n_checks() != h.rows() || s.layers().iter().flatten().any(|&c| c >= h.rows()) {
                return Err(Error::InvalidSchedule(format!(
                    "schedule covers {} checks, matrix has {} rows",
                    s.n_checks(),
                    h.rows()
                )));
            }
        }
        let spans_dual = gf2::rank(h) == self.dual_dim
            && self
                .generator
                .row_vectors()
                .iter()
                .all(|g| h.mul_vec(g).map(|s| s.is_zero()).unwrap_or(false));
        self.branches.push(Branch {
            graph: TannerGraph::from_matrix(h),
            schedule,
            transform,
            spans_dual,
        });
        Ok(())
    }

    /// One plain decoder: flooding, or layered when a schedule is given.
    pub fn single(code: &Code, h: &BinaryMatrix, schedule: Option<Schedule>, config: DecoderConfig) -> Result<Self> {
        let mut e = Self::empty(code, config);
        e.push(h, schedule, Transform::Identity)?;
        Ok(e)
    }

    /// One flooding decoder per parity-check basis.
    pub fn mbbp(code: &Code, bases: &[BinaryMatrix], config: DecoderConfig) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::EmptyList);
        }
        let mut e = Self::empty(code, config);
        for h in bases {
            e.push(h, None, Transform::Identity)?;
        }
        Ok(e)
    }

    /// Flooding decoders on `h`, each fed the LLRs permuted by one
    /// automorphism. Permutations are checked against the code.
    pub fn aed(code: &Code, h: &BinaryMatrix, perms: &[Permutation], config: DecoderConfig) -> Result<Self> {
        if perms.is_empty() {
            return Err(Error::EmptyList);
        }
        let mut e = Self::empty(code, config);
        for (index, p) in perms.iter().enumerate() {
            if !automorphisms::is_automorphism(p, code) {
                return Err(Error::NotAnAutomorphism { index });
            }
            let t = if p.is_identity() {
                Transform::Identity
            } else {
                Transform::Permute(p.clone())
            };
            e.push(h, None, t)?;
        }
        Ok(e)
    }

    /// Layered decoders on `h`, one per schedule.
    pub fn sed(code: &Code, h: &BinaryMatrix, schedules: &[Schedule], config: DecoderConfig) -> Result<Self> {
        if schedules.is_empty() {
            return Err(Error::EmptyList);
        }
        let mut e = Self::empty(code, config);
        for s in schedules {
            e.push(h, Some(s.clone()), Transform::Identity)?;
        }
        Ok(e)
    }

    /// `m` flooding decoders on `h`; all but the first see extra Gaussian
    /// noise of variance `sigma2_ned`.
    pub fn ned(code: &Code, h: &BinaryMatrix, m: usize, sigma2_ned: f64, config: DecoderConfig) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyList);
        }
        if !(sigma2_ned >= 0.0 && sigma2_ned.is_finite()) {
            return Err(Error::config(
                "sigma2-ned",
                format!("variance {sigma2_ned} must be non-negative"),
            ));
        }
        let mut e = Self::empty(code, config);
        for j in 0..m {
            let t = if j == 0 || sigma2_ned == 0.0 {
                Transform::Identity
            } else {
                Transform::Noise(sigma2_ned)
            };
            e.push(h, None, t)?;
        }
        Ok(e)
    }

    /// `m = 2^s` flooding decoders on `h`, one per sign pattern of the `s`
    /// least reliable positions.
    pub fn sbp(code: &Code, h: &BinaryMatrix, m: usize, config: DecoderConfig) -> Result<Self> {
        if !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        if m.trailing_zeros() as usize > code.n {
            return Err(Error::config(
                "M",
                format!("2^{} patterns exceed length {}", m.trailing_zeros(), code.n),
            ));
        }
        let mut e = Self::empty(code, config);
        for pattern in 0..m {
            e.push(h, None, Transform::Saturate(pattern))?;
        }
        Ok(e)
    }

    pub fn size(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn config(&self) -> DecoderConfig {
        self.config
    }

    /// Number of saturated positions, `log2` of the branch count.
    fn saturated_positions(&self, l_ch: &[f64]) -> Vec<usize> {
        let count = self.branches.len().trailing_zeros() as usize;
        let mut idx: Vec<usize> = (0..l_ch.len()).collect();
        idx.sort_by(|&a, &b| l_ch[a].abs().total_cmp(&l_ch[b].abs()).then(a.cmp(&b)));
        idx.truncate(count);
        idx
    }

    /// Decodes with every branch in order and selects the output.
    /// `rng` is only drawn from by noise branches.
    pub fn decode<R: Rng + ?Sized>(&self, l_ch: &[f64], rng: &mut R) -> Result<EnsembleResult> {
        let n = self.code_h.cols();
        if l_ch.len() != n {
            return Err(Error::DimensionMismatch {
                what: "LLR vector length",
                expected: n,
                found: l_ch.len(),
            });
        }
        let saturated = if self
            .branches
            .iter()
            .any(|b| matches!(b.transform, Transform::Saturate(_)))
        {
            self.saturated_positions(l_ch)
        } else {
            Vec::new()
        };

        let mut per_branch = Vec::with_capacity(self.branches.len());
        for branch in &self.branches {
            let input: Vec<f64> = match &branch.transform {
                Transform::Identity => l_ch.to_vec(),
                Transform::Permute(p) => automorphisms::apply(p, l_ch)?,
                Transform::Noise(var) => {
                    let sd = var.sqrt();
                    l_ch.iter()
                        .map(|&l| {
                            let z: f64 = rng.sample(StandardNormal);
                            l + sd * z
                        })
                        .collect()
                }
                Transform::Saturate(pattern) => {
                    let mut v = l_ch.to_vec();
                    for (b, &pos) in saturated.iter().enumerate() {
                        v[pos] = if pattern >> b & 1 == 1 { -L_SAT } else { L_SAT };
                    }
                    v
                }
            };

            let mut decoder = BpDecoder::new(&branch.graph).with_early_stop(self.config.early_stop);
            let mut out = match &branch.schedule {
                None => decoder.decode_flooding(&input, self.config.max_iter)?,
                Some(s) => decoder.decode_layered(&input, s, self.config.max_iter)?,
            };
            if let Transform::Permute(p) = &branch.transform {
                let back = automorphisms::inverse(p);
                out.candidate = automorphisms::apply_bits(&back, &out.candidate)?;
                out.posterior = LlrVector::new(automorphisms::apply(&back, &out.posterior)?);
            }
            if !branch.spans_dual {
                out.valid = gf2::is_codeword(&self.code_h, &out.candidate)?;
            }
            per_branch.push(out);
        }

        let candidates: Vec<(BitVector, bool)> = per_branch.iter().map(|o| (o.candidate.clone(), o.valid)).collect();
        let (selected, winner) = select_ml(l_ch, &candidates)?;
        Ok(EnsembleResult {
            selected,
            selected_valid: winner.is_some(),
            per_branch,
            winner,
        })
    }
}

fn unused_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

pub fn run_mbbp(l_ch: &[f64], code: &Code, bases: &[BinaryMatrix], config: DecoderConfig) -> Result<EnsembleResult> {
    Ensemble::mbbp(code, bases, config)?.decode(l_ch, &mut unused_rng())
}

pub fn run_aed(
    l_ch: &[f64],
    code: &Code,
    perms: &[Permutation],
    h: &BinaryMatrix,
    config: DecoderConfig,
) -> Result<EnsembleResult> {
    Ensemble::aed(code, h, perms, config)?.decode(l_ch, &mut unused_rng())
}

pub fn run_sed(
    l_ch: &[f64],
    code: &Code,
    schedules: &[Schedule],
    h: &BinaryMatrix,
    config: DecoderConfig,
) -> Result<EnsembleResult> {
    Ensemble::sed(code, h, schedules, config)?.decode(l_ch, &mut unused_rng())
}

pub fn run_ned<R: Rng + ?Sized>(
    l_ch: &[f64],
    code: &Code,
    m: usize,
    sigma2_ned: f64,
    h: &BinaryMatrix,
    config: DecoderConfig,
    rng: &mut R,
) -> Result<EnsembleResult> {
    Ensemble::ned(code, h, m, sigma2_ned, config)?.decode(l_ch, rng)
}

pub fn run_sbp(l_ch: &[f64], code: &Code, m: usize, h: &BinaryMatrix, config: DecoderConfig) -> Result<EnsembleResult> {
    Ensemble::sbp(code, h, m, config)?.decode(l_ch, &mut unused_rng())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bp,
    Lbp,
    Mbbp,
    Aed,
    Sed,
    Ned,
    Sbp,
    MlOracle,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Bp,
        Method::Lbp,
        Method::Mbbp,
        Method::Aed,
        Method::Sed,
        Method::Ned,
        Method::Sbp,
        Method::MlOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bp => "bp",
            Method::Lbp => "lbp",
            Method::Mbbp => "mbbp",
            Method::Aed => "aed",
            Method::Sed => "sed",
            Method::Ned => "ned",
            Method::Sbp => "sbp",
            Method::MlOracle => "ml-oracle",
        }
    }

    /// Runs layered constituent decoders.
    pub fn is_layered(self) -> bool {
        matches!(self, Method::Lbp | Method::Sed)
    }

    /// Uses more than one branch.
    pub fn is_ensemble(self) -> bool {
        matches!(
            self,
            Method::Mbbp | Method::Aed | Method::Sed | Method::Ned | Method::Sbp
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
            Error::config(
                "method",
                format!("unknown method `{s}` (expected one of {})", names.join(", ")),
            )
        })
    }
}

/// Everything needed to build an ensemble for a code.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub method: Method,
    pub m: usize,
    pub iters: usize,
    /// Layer size for layered decoders; defaults to 1 for cyclic codes and
    /// the lifting size for QC codes.
    pub n_l: Option<usize>,
    /// Defaults to 0.25 for `M = 8` and 0.64 otherwise.
    pub sigma2_ned: Option<f64>,
    /// Defaults per method, see [`default_h_variant`].
    pub h_variant: Option<HVariant>,
    pub early_stop: bool,
}

impl EnsembleSpec {
    pub fn new(method: Method, m: usize, iters: usize) -> Self {
        Self {
            method,
            m,
            iters,
            n_l: None,
            sigma2_ned: None,
            h_variant: None,
            early_stop: true,
        }
    }

    /// Number of branches actually run.
    pub fn branch_count(&self) -> usize {
        if self.method.is_ensemble() {
            self.m
        } else {
            1
        }
    }

    pub fn decoder_label(&self) -> &'static str {
        if self.method == Method::MlOracle {
            "ML"
        } else if self.method.is_layered() {
            "LBP"
        } else {
            "BP"
        }
    }

    pub fn effective_sigma2_ned(&self) -> f64 {
        self.sigma2_ned.unwrap_or(if self.m == 8 { 0.25 } else { 0.64 })
    }

    pub fn effective_n_l(&self, code: &Code) -> usize {
        self.n_l.unwrap_or(match code.structure {
            Structure::QuasiCyclic { z } => z,
            _ => 1,
        })
    }

    pub fn effective_h_variant(&self, bundle: &CodeBundle) -> HVariant {
        self.h_variant.unwrap_or_else(|| default_h_variant(self.method, bundle))
    }
}

/// On the simplex code, whose default matrix is the systematic one, only
/// the ensembles that deform the decoder (AED, SED) keep it; plain BP and
/// the noise-adding ensembles run on random minimum-weight checks. Other
/// codes always use their default matrix.
pub fn default_h_variant(method: Method, bundle: &CodeBundle) -> HVariant {
    let systematic_default = bundle.code.name == "simplex63" && bundle.pool.is_some();
    match method {
        Method::Bp | Method::Lbp | Method::Ned | Method::Sbp if systematic_default => HVariant::RandomMinWeight,
        _ => HVariant::Default,
    }
}

/// Derives a construction RNG from a seed so that every sweep of the same
/// configuration draws the same bases, automorphisms and schedules.
fn construction_rng(seed: u64, label: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label);
    rng
}

const STREAM_MBBP: u64 = 0x6d62;
const STREAM_AED: u64 = 0x6165;
const STREAM_SED: u64 = 0x7365;

/// `count − 1` distinct non-identity group elements after the identity.
pub fn draw_automorphisms<R: Rng + ?Sized>(
    group: &[Permutation],
    count: usize,
    rng: &mut R,
) -> Result<Vec<Permutation>> {
    let n = group.first().map(Permutation::n).ok_or(Error::EmptyList)?;
    let mut others: Vec<&Permutation> = group.iter().filter(|p| !p.is_identity()).collect();
    if others.len() + 1 < count {
        return Err(Error::PoolTooSmall { requested: count });
    }
    others.shuffle(rng);
    let mut out = vec![Permutation::identity(n)];
    out.extend(others.into_iter().take(count.saturating_sub(1)).cloned());
    Ok(out)
}

/// Top-to-bottom first, then random layer orders. Orders are kept distinct
/// while enough of them exist.
pub fn draw_schedules<R: Rng + ?Sized>(base: &Schedule, count: usize, rng: &mut R) -> Result<Vec<Schedule>> {
    let layers = base.layers().len();
    let available = (1..=layers)
        .try_fold(1usize, |acc, k| acc.checked_mul(k))
        .unwrap_or(usize::MAX);
    let mut orders: Vec<Vec<usize>> = vec![(0..layers).collect()];
    let mut attempts = 0;
    while orders.len() < count {
        let mut order: Vec<usize> = (0..layers).collect();
        order.shuffle(rng);
        attempts += 1;
        if orders.len() >= available || attempts > 64 * count || !orders.contains(&order) {
            orders.push(order);
        }
    }
    orders.iter().map(|o| base.reordered(o)).collect()
}

/// Builds the ensemble described by `spec`; `seed` fixes every random
/// construction choice.
pub fn build_ensemble(bundle: &CodeBundle, spec: &EnsembleSpec, seed: u64) -> Result<Ensemble> {
    let code = &bundle.code;
    let config = DecoderConfig {
        max_iter: spec.iters,
        early_stop: spec.early_stop,
    };
    if spec.method.is_ensemble() && spec.m == 0 {
        return Err(Error::config("M", "ensemble size must be positive"));
    }
    let h = bundle.parity_check(spec.effective_h_variant(bundle))?;
    let layered = |h: &BinaryMatrix| Schedule::top_to_bottom(h.rows(), spec.effective_n_l(code));
    match spec.method {
        Method::Bp => Ensemble::single(code, &h, None, config),
        Method::Lbp => Ensemble::single(code, &h, Some(layered(&h)?), config),
        Method::Mbbp => {
            let pool = bundle
                .pool
                .as_ref()
                .ok_or_else(|| Error::config("method", format!("code {} has no check pool for mbbp", code.name)))?;
            let mut rng = construction_rng(seed, STREAM_MBBP);
            let bases = codes::mbbp_bases(pool, code.n - code.k, spec.m, &mut rng)?;
            Ensemble::mbbp(code, &bases, config)
        }
        Method::Aed => {
            let (h, group) = match code.structure {
                Structure::Cyclic => (h, automorphisms::s0_group(code.n)),
                Structure::QuasiCyclic { z } => (
                    codes::break_qc_symmetry(&h, &AED_QC_DELETED_ROWS)?,
                    automorphisms::qc_group(code.n, z)?,
                ),
                Structure::Unstructured => {
                    return Err(Error::config(
                        "method",
                        format!("code {} has no known automorphisms", code.name),
                    ))
                }
            };
            let mut rng = construction_rng(seed, STREAM_AED);
            let perms = draw_automorphisms(&group, spec.m, &mut rng)?;
            Ensemble::aed(code, &h, &perms, config)
        }
        Method::Sed => {
            let mut rng = construction_rng(seed, STREAM_SED);
            let schedules = draw_schedules(&layered(&h)?, spec.m, &mut rng)?;
            Ensemble::sed(code, &h, &schedules, config)
        }
        Method::Ned => Ensemble::ned(code, &h, spec.m, spec.effective_sigma2_ned(), config),
        Method::Sbp => Ensemble::sbp(code, &h, spec.m, config),
        Method::MlOracle => Err(Error::config("method", "ml-oracle is not a BP ensemble")),
    }
}
