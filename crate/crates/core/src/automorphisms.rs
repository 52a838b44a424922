//! Coordinate permutations and the automorphism groups of cyclic and
//! quasi-cyclic codes.
//!
//! A permutation acts by scatter: applying `p` to `v` sends the entry at
//! position `i` to position `p.image(i)`.

use rand::Rng;

use crate::bp::{BpDecoder, TannerGraph};
use crate::codes::{Code, Structure};
use crate::error::{Error, Result};
use crate::gf2::{self, BinaryMatrix, BitVector};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// Builds a permutation from its image list, checking bijectivity.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut hit = vec![false; n];
        for &m in &map {
            if m >= n {
                return Err(Error::IndexOutOfRange { index: m, bound: n });
            }
            if std::mem::replace(&mut hit[m], true) {
                return Err(Error::ConstructionFailure(format!("image {m} appears twice")));
            }
        }
        Ok(Self { map })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch {
                what: "permutation length",
                expected: self.n(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Blockwise cyclic shift by `d` inside each block of `z` positions.
pub fn qc_perm(n: usize, z: usize, d: usize) -> Result<Permutation> {
    if z == 0 || !n.is_multiple_of(z) {
        return Err(Error::ConstructionFailure(format!(
            "lifting size {z} does not divide length {n}"
        )));
    }
    if d >= z {
        return Err(Error::InvalidShift { shift: d, order: z });
    }
    let map = (0..n).map(|i| if i % z + d >= z { i + d - z } else { i + d }).collect();
    Ok(Permutation { map })
}

/// Global cyclic shift by `d`.
pub fn s0_perm(n: usize, d: usize) -> Result<Permutation> {
    qc_perm(n, n, d)
}

/// Multiplicative order of 2 modulo an odd `n`.
pub fn s1_order(n: usize) -> Result<usize> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenLength(n));
    }
    if n == 1 {
        return Ok(1);
    }
    let mut x = 2 % n;
    let mut k = 1;
    while x != 1 {
        x = x * 2 % n;
        k += 1;
    }
    Ok(k)
}

/// Index scaling `j ↦ j·2^d mod n`.
pub fn s1_perm(n: usize, d: usize) -> Result<Permutation> {
    let order = s1_order(n)?;
    if d > order {
        return Err(Error::InvalidShift { shift: d, order });
    }
    let mut factor = 1;
    for _ in 0..d {
        factor = factor * 2 % n;
    }
    let map = (0..n).map(|j| j * factor % n).collect();
    Ok(Permutation { map })
}

/// All cyclic shifts `d = 0..n`.
pub fn s0_group(n: usize) -> Vec<Permutation> {
    (0..n).map(|d| s0_perm(n, d).expect("shift in range")).collect()
}

/// All doublings `d = 0..s1_order(n)`.
pub fn s1_group(n: usize) -> Result<Vec<Permutation>> {
    (0..s1_order(n)?).map(|d| s1_perm(n, d)).collect()
}

/// All blockwise shifts `d = 0..z`.
pub fn qc_group(n: usize, z: usize) -> Result<Vec<Permutation>> {
    (0..z).map(|d| qc_perm(n, z, d)).collect()
}

/// The shift group that matches a code's structure, if any.
pub fn structural_group(code: &Code) -> Option<Vec<Permutation>> {
    match code.structure {
        Structure::Cyclic => Some(s0_group(code.n)),
        Structure::QuasiCyclic { z } => qc_group(code.n, z).ok(),
        Structure::Unstructured => None,
    }
}

pub fn apply<T: Clone>(p: &Permutation, v: &[T]) -> Result<Vec<T>> {
    p.check_len(v.len())?;
    let mut out = v.to_vec();
    for (i, x) in v.iter().enumerate() {
        out[p.map[i]] = x.clone();
    }
    Ok(out)
}

pub fn apply_bits(p: &Permutation, v: &BitVector) -> Result<BitVector> {
    p.check_len(v.len())?;
    Ok(BitVector::from_support(v.len(), v.iter_ones().map(|i| p.map[i])))
}

pub fn inverse(p: &Permutation) -> Permutation {
    let mut map = vec![0; p.n()];
    for (i, &m) in p.map.iter().enumerate() {
        map[m] = i;
    }
    Permutation { map }
}

/// `q` first, then `p`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation> {
    p.check_len(q.n())?;
    Ok(Permutation {
        map: q.map.iter().map(|&j| p.map[j]).collect(),
    })
}

/// Exact test: every permuted generator row must satisfy the code's default
/// parity checks. Linearity makes this sufficient.
pub fn is_automorphism(p: &Permutation, code: &Code) -> bool {
    if p.n() != code.n {
        return false;
    }
    code.generator.row_vectors().iter().all(|g| {
        let moved = apply_bits(p, g).expect("lengths match");
        gf2::is_codeword(&code.h_default, &moved).unwrap_or(false)
    })
}

/// Spot-checks `samples` random codewords before the exact test, which
/// rejects most non-automorphisms after a few matrix products.
pub fn is_automorphism_sampled<R: Rng + ?Sized>(p: &Permutation, code: &Code, samples: usize, rng: &mut R) -> bool {
    if p.n() != code.n {
        return false;
    }
    for _ in 0..samples {
        let msg = BitVector::from_support(code.k, (0..code.k).filter(|_| rng.random::<bool>()));
        let c = code.encode(&msg).expect("message length is k");
        let moved = apply_bits(p, &c).expect("lengths match");
        if !gf2::is_codeword(&code.h_default, &moved).unwrap_or(false) {
            return false;
        }
    }
    is_automorphism(p, code)
}

/// Matrix whose column `i` is column `p.image(i)` of `h`.
///
/// Decoding `L` with the result is the same as decoding `apply(p, L)` with
/// `h` and mapping the candidate back through `inverse(p)`.
pub fn permute_columns(h: &BinaryMatrix, p: &Permutation) -> Result<BinaryMatrix> {
    p.check_len(h.cols())?;
    let rows = h
        .row_vectors()
        .iter()
        .map(|row| BitVector::from_support(h.cols(), (0..h.cols()).filter(|&i| row.get(p.map[i]))))
        .collect();
    BinaryMatrix::from_rows(rows)
}

/// All distinct cyclic shifts of `row`, as the rows of a circulant matrix.
pub fn cyclic_orbit(row: &BitVector) -> Result<BinaryMatrix> {
    let n = row.len();
    let mut rows: Vec<BitVector> = Vec::new();
    for d in 0..n {
        let shifted = apply_bits(&s0_perm(n, d)?, row)?;
        if !rows.contains(&shifted) {
            rows.push(shifted);
        }
    }
    BinaryMatrix::from_rows(rows)
}

/// True when flooding BP commutes with `p` on input `l`: decoding
/// `apply(p, l)` and mapping the result back through `inverse(p)` yields the
/// same candidate, validity and iteration count as decoding `l` directly.
pub fn bp_commutes(graph: &TannerGraph, p: &Permutation, l: &[f64], max_iter: usize) -> Result<bool> {
    let direct = BpDecoder::new(graph).decode_flooding(l, max_iter)?;
    let moved = BpDecoder::new(graph).decode_flooding(&apply(p, l)?, max_iter)?;
    let back = apply_bits(&inverse(p), &moved.candidate)?;
    Ok(back == direct.candidate && moved.valid == direct.valid && moved.iterations_used == direct.iterations_used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn qc_examples() {
        let p = qc_perm(22, 11, 3).unwrap();
        assert_eq!(p.image(9), 1);
        assert_eq!(p.image(12), 15);
        assert!(qc_perm(22, 11, 0).unwrap().is_identity());
        assert!(matches!(qc_perm(22, 11, 11), Err(Error::InvalidShift { .. })));
        assert!(qc_perm(23, 11, 1).is_err());
    }

    #[test]
    fn s0_examples() {
        let p = s0_perm(63, 1).unwrap();
        assert_eq!(p.image(62), 0);
        assert_eq!(p.image(0), 1);
        let v: Vec<usize> = (0..63).collect();
        let rotated = apply(&p, &v).unwrap();
        assert_eq!(rotated[0], 62);
        assert_eq!(&rotated[1..], &v[..62]);
    }

    #[test]
    fn s1_examples() {
        assert_eq!(s1_order(63).unwrap(), 6);
        assert_eq!(s1_order(273).unwrap(), 12);
        assert_eq!(s1_perm(63, 1).unwrap().image(5), 10);
        assert!(s1_perm(63, 6).unwrap().is_identity());
        assert!(matches!(s1_order(64), Err(Error::EvenLength(64))));
        assert!(s1_perm(63, 7).is_err());
    }

    #[test]
    fn s1_order_is_minimal() {
        for n in (3..400).step_by(2) {
            let k = s1_order(n).unwrap();
            let mut x = 1usize;
            for step in 1..=k {
                x = x * 2 % n;
                assert_eq!(x == 1, step == k, "n={n} step={step}");
            }
        }
    }

    #[test]
    fn inverse_and_identity() {
        let id = Permutation::identity(5);
        assert_eq!(inverse(&id), id);
        for d in 0..63 {
            assert_eq!(inverse(&s0_perm(63, d).unwrap()), s0_perm(63, (63 - d) % 63).unwrap());
        }
    }

    #[test]
    fn constructor_rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn length_mismatch_rejected() {
        let p = Permutation::identity(4);
        assert!(matches!(apply(&p, &[1, 2, 3]), Err(Error::DimensionMismatch { .. })));
        assert!(compose(&p, &Permutation::identity(3)).is_err());
    }

    fn closed_under_composition_and_inverse(group: &[Permutation]) {
        let n = group[0].n();
        assert!(group.contains(&Permutation::identity(n)));
        for p in group {
            assert!(group.contains(&inverse(p)));
            for q in group {
                assert!(group.contains(&compose(p, q).unwrap()));
            }
        }
    }

    #[test]
    fn generated_sets_are_groups() {
        closed_under_composition_and_inverse(&s0_group(63));
        closed_under_composition_and_inverse(&s1_group(63).unwrap());
        closed_under_composition_and_inverse(&s1_group(273).unwrap());
        closed_under_composition_and_inverse(&qc_group(132, 11).unwrap());
        assert_eq!(s1_group(273).unwrap().len(), 12);
    }

    #[test]
    fn s0_group_law() {
        for (a, b) in [(0, 0), (5, 60), (62, 62), (17, 3)] {
            let lhs = compose(&s0_perm(63, a).unwrap(), &s0_perm(63, b).unwrap()).unwrap();
            assert_eq!(lhs, s0_perm(63, (a + b) % 63).unwrap());
        }
    }

    #[test]
    fn orbit_of_a_circulant_row() {
        let row = BitVector::from_bits(&[1, 1, 0, 1, 0, 0, 0]);
        let c = cyclic_orbit(&row).unwrap();
        assert_eq!(c.rows(), 7);
        assert_eq!(c.row(1).to_bits(), vec![0, 1, 1, 0, 1, 0, 0]);
        let periodic = BitVector::from_bits(&[1, 0, 1, 0]);
        assert_eq!(cyclic_orbit(&periodic).unwrap().rows(), 2);
    }

    #[test]
    fn permute_columns_matches_definition() {
        let h = BinaryMatrix::from_dense(&[vec![1, 1, 0, 0], vec![0, 1, 0, 1]]).unwrap();
        let p = Permutation::new(vec![1, 2, 3, 0]).unwrap();
        let hp = permute_columns(&h, &p).unwrap();
        assert_eq!(hp.to_dense(), vec![vec![1, 0, 0, 1], vec![1, 0, 1, 0]]);
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|map| Permutation::new(map).unwrap())
    }

    proptest! {
        #[test]
        fn apply_inverse_round_trips(p in arb_perm(20), v in prop::collection::vec(any::<i32>(), 20)) {
            let there = apply(&inverse(&p), &v).unwrap();
            prop_assert_eq!(apply(&p, &there).unwrap(), v);
        }

        #[test]
        fn compose_applies_right_operand_first(
            p in arb_perm(16),
            q in arb_perm(16),
            v in prop::collection::vec(any::<u8>(), 16),
        ) {
            let pq = compose(&p, &q).unwrap();
            let stepwise = apply(&p, &apply(&q, &v).unwrap()).unwrap();
            prop_assert_eq!(apply(&pq, &v).unwrap(), stepwise);
            prop_assert!(compose(&p, &inverse(&p)).unwrap().is_identity());
        }

        #[test]
        fn apply_bits_agrees_with_generic_apply(p in arb_perm(70), bits in prop::collection::vec(0u8..2, 70)) {
            let bv = BitVector::from_bits(&bits);
            prop_assert_eq!(apply_bits(&p, &bv).unwrap().to_bits(), apply(&p, &bits).unwrap());
        }
    }
}
