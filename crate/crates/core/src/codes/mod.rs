//! The built-in codes, their alternative parity-check bases, QC lifting and
//! the alist exchange format.

mod alist;
mod field;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use alist::{load_alist, save_alist};
pub use field::BinaryExtField;

use crate::error::{Error, Result};
use crate::gf2::{self, BinaryMatrix, BitVector};

/// Registry names accepted by [`load_code`].
pub const CODE_NAMES: [&str; 3] = ["simplex63", "pg273", "5g132"];

/// Seed for the 82-row subset of the PG circulant used as the default matrix.
pub const PG_H_SEED: u64 = 0x5047_2731_9100_0082;
/// Seed for the "random minimum-weight checks" simplex matrix.
pub const RANDOM_MINWEIGHT_SEED: u64 = 0x5349_4d50_4c45_5836;

const GF64_MODULUS: u32 = 0b100_0011; // x^6 + x + 1
const GF4096_MODULUS: u32 = 0x1053; // x^12 + x^6 + x^4 + x + 1

pub(crate) const FIVEG_ALIST: &str = include_str!("../../assets/5g_132_66.alist");
const FIVEG_LIFTING: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Cyclic,
    QuasiCyclic { z: usize },
    Unstructured,
}

#[derive(Debug, Clone)]
pub struct Code {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub h_default: BinaryMatrix,
    pub generator: BinaryMatrix,
    pub structure: Structure,
}

impl Code {
    fn from_parity_check(name: &str, h_default: BinaryMatrix, structure: Structure) -> Result<Self> {
        let generator = gf2::nullspace_basis(&h_default);
        Ok(Self {
            name: name.to_string(),
            n: h_default.cols(),
            k: generator.rows(),
            h_default,
            generator,
            structure,
        })
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Encodes a `k`-bit message with the generator matrix.
    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        self.generator.left_mul(message)
    }
}

/// Low-weight dual codewords available for building parity-check matrices.
#[derive(Debug, Clone)]
pub struct CheckPool {
    pub checks: Vec<BitVector>,
    pub min_weight: usize,
}

impl CheckPool {
    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }
}

/// The (63,6) simplex code with columns ordered as powers of a primitive
/// element of GF(64), which makes it cyclic.
///
/// The default matrix is the reduced row echelon form of the (63,57) Hamming
/// generator. The pool holds all weight-3 Hamming codewords.
pub fn build_simplex_63() -> (Code, CheckPool) {
    let field = BinaryExtField::new(6, GF64_MODULUS).expect("x^6+x+1 is primitive");
    let powers = field.powers_of_generator();
    let n = powers.len();

    // 6×63 Hamming parity-check matrix = simplex generator
    let hamming_h = BinaryMatrix::from_rows(
        (0..6)
            .map(|bit| BitVector::from_support(n, (0..n).filter(|&i| powers[i] >> bit & 1 == 1)))
            .collect(),
    )
    .expect("non-empty");
    let hamming_g = gf2::nullspace_basis(&hamming_h);
    let (h_sys, _) = gf2::rref(&hamming_g);

    let mut log = vec![usize::MAX; 64];
    for (i, &p) in powers.iter().enumerate() {
        log[p as usize] = i;
    }
    let mut checks = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let k = log[(powers[i] ^ powers[j]) as usize];
            if k > j {
                checks.push(BitVector::from_support(n, [i, j, k]));
            }
        }
    }

    let code = Code {
        name: "simplex63".into(),
        n,
        k: 6,
        h_default: h_sys,
        generator: hamming_h,
        structure: Structure::Cyclic,
    };
    (code, CheckPool { checks, min_weight: 3 })
}

/// Singer perfect difference set modulo 273: exponents `i` whose power
/// `α^i ∈ GF(2^12)` has zero trace down to GF(16).
pub fn pg_difference_set() -> Result<Vec<usize>> {
    let field = BinaryExtField::new(12, GF4096_MODULUS)?;
    let trace = |b: u32| b ^ field.pow(b, 16) ^ field.pow(b, 256);
    let powers = field.powers_of_generator();
    let v = 273;
    let set: Vec<usize> = (0..v).filter(|&i| trace(powers[i]) == 0).collect();
    if set.len() != 17 {
        return Err(Error::ConstructionFailure(format!(
            "difference set has {} elements, expected 17",
            set.len()
        )));
    }
    let mut seen = vec![0u8; v];
    for &a in &set {
        for &b in &set {
            if a != b {
                seen[(a + v - b) % v] += 1;
            }
        }
    }
    if seen[1..].iter().any(|&c| c != 1) {
        return Err(Error::ConstructionFailure(
            "differences do not cover every nonzero residue exactly once".into(),
        ));
    }
    Ok(set)
}

/// The cyclic (273,191) projective-geometry LDPC code.
///
/// The pool holds all 273 cyclic shifts of the difference-set incidence
/// vector; the default matrix is a seeded full-rank 82-row subset.
pub fn build_pg_273() -> Result<(Code, CheckPool)> {
    let n = 273;
    let set = pg_difference_set()?;
    let checks: Vec<BitVector> = (0..n)
        .map(|shift| BitVector::from_support(n, set.iter().map(|&d| (d + shift) % n)))
        .collect();
    let pool_rank = gf2::rank_of_rows(&checks);
    if pool_rank != 82 {
        return Err(Error::ConstructionFailure(format!(
            "circulant rank {pool_rank}, expected 82"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PG_H_SEED);
    let rows = gf2::select_full_rank_rows(&checks, pool_rank, &mut rng)?;
    let h = BinaryMatrix::from_rows(rows.iter().map(|&r| checks[r].clone()).collect())?;
    let code = Code::from_parity_check("pg273", h, Structure::Cyclic)?;
    Ok((
        code,
        CheckPool {
            checks,
            min_weight: set.len(),
        },
    ))
}

/// The (132,66) quasi-cyclic code with lifting size 11, read from the shipped
/// alist asset.
pub fn build_5g_132() -> Result<Code> {
    let h = load_alist(FIVEG_ALIST)?;
    let code = Code::from_parity_check("5g132", h, Structure::QuasiCyclic { z: FIVEG_LIFTING })?;
    if code.k != 66 {
        return Err(Error::ConstructionFailure(format!(
            "5g132 asset has dimension {}, expected 66",
            code.k
        )));
    }
    Ok(code)
}

/// Lifts a base matrix of shift values. `-1` is the all-zero block and
/// `s ≥ 0` the identity cyclically shifted right by `s`.
pub fn qc_expand(base: &[Vec<i64>], z: usize) -> Result<BinaryMatrix> {
    if z == 0 {
        return Err(Error::ShiftOutOfRange { shift: 0, z });
    }
    let base_cols = base.first().map(Vec::len).unwrap_or(0);
    if base.iter().any(|r| r.len() != base_cols) {
        return Err(Error::DimensionMismatch {
            what: "base matrix row length",
            expected: base_cols,
            found: base.iter().map(Vec::len).find(|&l| l != base_cols).unwrap_or(0),
        });
    }
    let mut h = BinaryMatrix::zeros(base.len() * z, base_cols * z)?;
    for (br, row) in base.iter().enumerate() {
        for (bc, &s) in row.iter().enumerate() {
            if s == -1 {
                continue;
            }
            if s < -1 || s >= z as i64 {
                return Err(Error::ShiftOutOfRange { shift: s, z });
            }
            for i in 0..z {
                h.set(br * z + i, bc * z + (i + s as usize) % z, true);
            }
        }
    }
    Ok(h)
}

/// Removes the listed rows, which must be strictly increasing and in range.
pub fn break_qc_symmetry(h: &BinaryMatrix, delete_rows: &[usize]) -> Result<BinaryMatrix> {
    for (i, &r) in delete_rows.iter().enumerate() {
        if r >= h.rows() {
            return Err(Error::IndexOutOfRange {
                index: r,
                bound: h.rows(),
            });
        }
        if i > 0 && r <= delete_rows[i - 1] {
            return Err(Error::IndexOutOfRange {
                index: r,
                bound: delete_rows[i - 1] + 1,
            });
        }
    }
    let keep: Vec<usize> = (0..h.rows())
        .filter(|r| delete_rows.binary_search(r).is_err())
        .collect();
    h.select_rows(&keep)
}

/// Draws `count` distinct full-rank `m_checks × n` matrices from the pool.
pub fn mbbp_bases<R: Rng + ?Sized>(
    pool: &CheckPool,
    m_checks: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<BinaryMatrix>> {
    let max_attempts = 64 * count.max(1);
    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(count);
    for _ in 0..max_attempts {
        if chosen.len() == count {
            break;
        }
        let rows = gf2::select_full_rank_rows(&pool.checks, m_checks, rng)?;
        if !chosen.contains(&rows) {
            chosen.push(rows);
        }
    }
    if chosen.len() < count {
        return Err(Error::PoolTooSmall { requested: count });
    }
    chosen
        .iter()
        .map(|rows| BinaryMatrix::from_rows(rows.iter().map(|&r| pool.checks[r].clone()).collect()))
        .collect()
}

/// Which parity-check matrix a decoder runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HVariant {
    #[default]
    Default,
    /// Reduced row echelon form of the default matrix.
    Systematic,
    /// A seeded full-rank selection of minimum-weight checks from the pool.
    RandomMinWeight,
}

impl std::str::FromStr for HVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Self::Default),
            "systematic" => Ok(Self::Systematic),
            "random-minweight" => Ok(Self::RandomMinWeight),
            other => Err(Error::config(
                "h-variant",
                format!("unknown variant `{other}` (default, systematic, random-minweight)"),
            )),
        }
    }
}

/// A code together with its optional check pool.
#[derive(Debug, Clone)]
pub struct CodeBundle {
    pub code: Code,
    pub pool: Option<CheckPool>,
}

impl CodeBundle {
    pub fn parity_check(&self, variant: HVariant) -> Result<BinaryMatrix> {
        match variant {
            HVariant::Default => Ok(self.code.h_default.clone()),
            HVariant::Systematic => {
                let (reduced, pivots) = gf2::rref(&self.code.h_default);
                reduced.select_rows(&(0..pivots.len()).collect::<Vec<_>>())
            }
            HVariant::RandomMinWeight => {
                let pool = self.pool.as_ref().ok_or_else(|| {
                    Error::config(
                        "h-variant",
                        format!("code {} has no minimum-weight check pool", self.code.name),
                    )
                })?;
                let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_MINWEIGHT_SEED);
                let m = self.code.n - self.code.k;
                Ok(mbbp_bases(pool, m, 1, &mut rng)?.remove(0))
            }
        }
    }
}

pub fn load_code(name: &str) -> Result<CodeBundle> {
    match name {
        "simplex63" => {
            let (code, pool) = build_simplex_63();
            Ok(CodeBundle { code, pool: Some(pool) })
        }
        "pg273" => {
            let (code, pool) = build_pg_273()?;
            Ok(CodeBundle { code, pool: Some(pool) })
        }
        "5g132" => Ok(CodeBundle {
            code: build_5g_132()?,
            pool: None,
        }),
        other => Err(Error::config(
            "code",
            format!("unknown code `{other}` (expected one of {})", CODE_NAMES.join(", ")),
        )),
    }
}
