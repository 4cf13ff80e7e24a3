//! Bit-packed GF(2) vectors and matrices.
//!
//! Bits are stored LSB-first in `u64` words: bit `i` lives in word `i / 64`
//! at position `i % 64`. All indices in this module are 0-based; position `i`
//! here is position `i + 1` in the 1-based numbering used for flip indices
//! and single-flip syndromes (`s_1 ... s_n`).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    len: usize,
    words: Vec<u64>,
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        BitWord {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Unit vector with only bit `i` set.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut w = Self::zeros(len);
        w.set(i, true);
        w
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        BitWord { len, words }
    }

    /// Builds a word from raw packed words. Bits past `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::dim(format!(
                "{} words cannot hold exactly {} bits",
                words.len(),
                len
            )));
        }
        let tail = len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Ok(BitWord { len, words })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Elementwise XOR; lengths must agree.
    pub fn xor(&self, other: &BitWord) -> Result<BitWord> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitWord) -> Result<()> {
        if self.len != other.len {
            return Err(Error::dim(format!(
                "xor of words with lengths {} and {}",
                self.len, other.len
            )));
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
        Ok(())
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitWord) -> Result<bool> {
        if self.len != other.len {
            return Err(Error::dim(format!(
                "dot product of words with lengths {} and {}",
                self.len, other.len
            )));
        }
        let acc = self
            .words
            .iter()
            .zip(&other.words)
            .fold(0u64, |acc, (a, b)| acc ^ (a & b));
        Ok(acc.count_ones() & 1 == 1)
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Hex string, most significant nibble first, where the MSB of the first
    /// nibble is bit 0. The tail is zero-padded to a whole nibble.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4);
        let mut s = String::with_capacity(nibbles);
        for nb in 0..nibbles {
            let mut v = 0u8;
            for j in 0..4 {
                let i = nb * 4 + j;
                if i < self.len && self.get(i) {
                    v |= 8 >> j;
                }
            }
            s.push(char::from_digit(v as u32, 16).unwrap().to_ascii_uppercase());
        }
        s
    }

    /// Inverse of [`BitWord::to_hex`]; padding bits must be zero.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let hex = hex.trim();
        if hex.len() != len.div_ceil(4) {
            return Err(Error::dim(format!(
                "hex string of {} digits for {} bits",
                hex.len(),
                len
            )));
        }
        let mut w = Self::zeros(len);
        for (nb, c) in hex.chars().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::InvalidArgument(format!("bad hex digit {c:?}")))?;
            for j in 0..4 {
                if v & (8 >> j) != 0 {
                    let i = nb * 4 + j;
                    if i >= len {
                        return Err(Error::InvalidArgument(
                            "nonzero padding bit in hex word".into(),
                        ));
                    }
                    w.set(i, true);
                }
            }
        }
        Ok(w)
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitWord {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; whitespace and `_` are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() || c == '_' => {}
                c => return Err(Error::InvalidArgument(format!("bad bit character {c:?}"))),
            }
        }
        Ok(BitWord::from_bits(bits))
    }
}

/// Serialized as its bit string, position 1 first.
impl serde::Serialize for BitWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for BitWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<BitWord>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Gf2Matrix {
            cols,
            rows: vec![BitWord::zeros(cols); rows],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from explicit rows. With no rows, `cols` is zero; use
    /// [`Gf2Matrix::zeros`] for an empty matrix of known width.
    pub fn from_rows(rows: Vec<BitWord>) -> Result<Self> {
        let cols = rows.first().map_or(0, BitWord::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::dim(format!(
                "row {bad} has length {}, expected {cols}",
                rows[bad].len()
            )));
        }
        Ok(Gf2Matrix { cols, rows })
    }

    /// Convenience constructor from `0`/`1` strings.
    pub fn from_str_rows(rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.parse::<BitWord>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitWord {
        &self.rows[i]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &BitWord> {
        self.rows.iter()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    pub fn column(&self, c: usize) -> BitWord {
        BitWord::from_bits(self.rows.iter().map(|r| r.get(c)))
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        if self.cols != other.rows() {
            return Err(Error::dim(format!(
                "product of {}x{} and {}x{}",
                self.rows(),
                self.cols,
                other.rows(),
                other.cols
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| other.left_mul_unchecked(r))
            .collect();
        Ok(Gf2Matrix {
            cols: other.cols,
            rows,
        })
    }

    /// Row vector times matrix: `v · self`.
    pub fn left_mul(&self, v: &BitWord) -> Result<BitWord> {
        if v.len() != self.rows() {
            return Err(Error::dim(format!(
                "row vector of length {} times {}x{} matrix",
                v.len(),
                self.rows(),
                self.cols
            )));
        }
        Ok(self.left_mul_unchecked(v))
    }

    fn left_mul_unchecked(&self, v: &BitWord) -> BitWord {
        let mut out = BitWord::zeros(self.cols);
        for i in v.ones() {
            for (a, b) in out.words.iter_mut().zip(&self.rows[i].words) {
                *a ^= *b;
            }
        }
        out
    }

    /// Matrix times column vector: `self · vᵀ`.
    pub fn right_mul(&self, v: &BitWord) -> Result<BitWord> {
        if v.len() != self.cols {
            return Err(Error::dim(format!(
                "{}x{} matrix times vector of length {}",
                self.rows(),
                self.cols,
                v.len()
            )));
        }
        Ok(BitWord::from_bits(
            self.rows.iter().map(|r| r.dot(v).expect("lengths checked")),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitWord::is_zero)
    }

    /// Reduced row echelon form. Returns the reduced matrix, the pivot column
    /// of each nonzero row, and the row operations applied (`ops · self = rref`).
    pub fn rref(&self) -> (Gf2Matrix, Vec<usize>, Gf2Matrix) {
        let mut m = self.clone();
        let mut ops = Gf2Matrix::identity(self.rows());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == m.rows() {
                break;
            }
            let Some(p) = (r..m.rows()).find(|&i| m.get(i, c)) else {
                continue;
            };
            m.rows.swap(r, p);
            ops.rows.swap(r, p);
            for i in 0..m.rows() {
                if i != r && m.get(i, c) {
                    let (src, dst) = pick_two(&mut m.rows, r, i);
                    dst.xor_assign(src).expect("same width");
                    let (src, dst) = pick_two(&mut ops.rows, r, i);
                    dst.xor_assign(src).expect("same width");
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots, ops)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right nullspace `{v : self · vᵀ = 0}`, one basis vector per
    /// row of the result.
    pub fn nullspace(&self) -> Gf2Matrix {
        let (r, pivots, _) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitWord::zeros(self.cols);
            v.set(f, true);
            for (row, &p) in pivots.iter().enumerate() {
                if r.get(row, f) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        if basis.is_empty() {
            Gf2Matrix::zeros(0, self.cols)
        } else {
            Gf2Matrix {
                cols: self.cols,
                rows: basis,
            }
        }
    }
}

fn pick_two(rows: &mut [BitWord], src: usize, dst: usize) -> (&BitWord, &mut BitWord) {
    debug_assert_ne!(src, dst);
    if src < dst {
        let (a, b) = rows.split_at_mut(dst);
        (&a[src], &mut b[0])
    } else {
        let (a, b) = rows.split_at_mut(src);
        (&b[0], &mut a[dst])
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// `H · vᵀ` over GF(2).
pub fn syndrome(h: &Gf2Matrix, v: &BitWord) -> Result<BitWord> {
    h.right_mul(v)
}

/// Elementwise XOR of two equal-length words.
pub fn xor(a: &BitWord, b: &BitWord) -> Result<BitWord> {
    a.xor(b)
}

/// Syndromes of all single-bit error patterns; entry `i` is column `i` of `h`.
pub fn single_flip_syndromes(h: &Gf2Matrix) -> Vec<BitWord> {
    (0..h.cols()).map(|c| h.column(c)).collect()
}

/// `u · G`.
pub fn encode(g: &Gf2Matrix, u: &BitWord) -> Result<BitWord> {
    g.left_mul(u)
}

/// An `n×k` matrix `M` with `G · M = I_k`, so that `(u·G)·M = u`.
///
/// Built by Gauss-Jordan elimination: if `A · G` is in reduced row echelon
/// form with pivot columns `p_1 < ... < p_k`, row `p_j` of `M` is row `j` of `A`.
pub fn right_inverse(g: &Gf2Matrix) -> Result<Gf2Matrix> {
    let k = g.rows();
    let (_, pivots, ops) = g.rref();
    if pivots.len() != k {
        return Err(Error::RankDeficient {
            rank: pivots.len(),
            expected: k,
        });
    }
    let mut m = Gf2Matrix::zeros(g.cols(), k);
    for (j, &p) in pivots.iter().enumerate() {
        m.rows[p] = ops.rows[j].clone();
    }
    Ok(m)
}

/// Column syndromes of a parity-check matrix packed contiguously, for the
/// XOR-combination fast path.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    stride: usize,
    len: usize,
    data: Vec<u64>,
}

impl SyndromeTable {
    pub fn new(h: &Gf2Matrix) -> Self {
        let stride = words_for(h.rows()).max(1);
        let mut data = vec![0u64; stride * h.cols()];
        for (r, row) in h.row_iter().enumerate() {
            for c in row.ones() {
                data[c * stride + r / WORD_BITS] |= 1 << (r % WORD_BITS);
            }
        }
        SyndromeTable {
            stride,
            len: h.rows(),
            data,
        }
    }

    /// Words per syndrome.
    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Number of syndrome bits (`n - k`).
    #[inline]
    pub fn syndrome_bits(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn columns(&self) -> usize {
        self.data.len() / self.stride
    }

    #[inline]
    pub fn column(&self, c: usize) -> &[u64] {
        &self.data[c * self.stride..(c + 1) * self.stride]
    }

    /// Syndrome of `v` by XOR-accumulating the columns at its set bits.
    pub fn syndrome_of(&self, v: &BitWord, out: &mut [u64]) {
        debug_assert_eq!(v.len(), self.columns());
        out.fill(0);
        for c in v.ones() {
            for (o, s) in out.iter_mut().zip(self.column(c)) {
                *o ^= *s;
            }
        }
    }

    pub fn to_bitword(&self, words: &[u64]) -> BitWord {
        BitWord::from_words(self.len, words[..words_for(self.len)].to_vec())
            .expect("stride covers syndrome")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hamming_h() -> Gf2Matrix {
        // column c (0-based) is the binary expansion of c + 1, LSB in row 0
        Gf2Matrix::from_str_rows(&["1010101", "0110011", "0001111"]).unwrap()
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Gf2Matrix {
        Gf2Matrix::from_rows(
            (0..rows)
                .map(|_| BitWord::from_bits((0..cols).map(|_| rng.random::<bool>())))
                .collect(),
        )
        .unwrap()
    }

    // Schoolbook H·vᵀ without packing, used as an independent oracle.
    fn naive_syndrome(h: &Gf2Matrix, v: &BitWord) -> Vec<bool> {
        (0..h.rows())
            .map(|r| {
                let mut acc = 0u8;
                for c in 0..h.cols() {
                    acc ^= (h.get(r, c) as u8) & (v.get(c) as u8);
                }
                acc == 1
            })
            .collect()
    }

    #[test]
    fn syndrome_of_zero_is_zero() {
        let h = hamming_h();
        assert!(syndrome(&h, &BitWord::zeros(7)).unwrap().is_zero());
    }

    #[test]
    fn syndrome_of_unit_is_column() {
        let h = hamming_h();
        for i in 0..7 {
            assert_eq!(syndrome(&h, &BitWord::unit(7, i)).unwrap(), h.column(i));
        }
    }

    #[test]
    fn syndrome_of_codeword_plus_unit() {
        let h = hamming_h();
        // 1110000 is a codeword: columns 1, 2, 3 XOR to zero.
        let c: BitWord = "1110000".parse().unwrap();
        assert!(syndrome(&h, &c).unwrap().is_zero());
        let mut v = c.clone();
        v.flip(2);
        let s = syndrome(&h, &v).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), naive_syndrome(&h, &v));
        assert_eq!(s, h.column(2));
    }

    #[test]
    fn syndrome_dimension_mismatch() {
        assert!(matches!(
            syndrome(&hamming_h(), &BitWord::zeros(8)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn xor_examples() {
        let a: BitWord = "1010".parse().unwrap();
        let b: BitWord = "0110".parse().unwrap();
        assert_eq!(xor(&a, &b).unwrap().to_string(), "1100");
        assert!(xor(&a, &a).unwrap().is_zero());
        assert_eq!(xor(&a, &BitWord::zeros(4)).unwrap(), a);
        assert!(xor(&a, &BitWord::zeros(5)).is_err());
    }

    #[test]
    fn single_flips_are_columns() {
        let h = hamming_h();
        let s = single_flip_syndromes(&h);
        assert_eq!(s.len(), 7);
        for (i, si) in s.iter().enumerate() {
            assert_eq!(*si, h.column(i));
        }
        let id = Gf2Matrix::identity(5);
        for (i, si) in single_flip_syndromes(&id).iter().enumerate() {
            assert_eq!(*si, BitWord::unit(5, i));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_matrix(&mut rng, 4, 8);
        for (i, si) in single_flip_syndromes(&h).iter().enumerate() {
            assert_eq!(*si, syndrome(&h, &BitWord::unit(8, i)).unwrap());
        }
    }

    #[test]
    fn right_inverse_systematic() {
        let g = Gf2Matrix::from_str_rows(&["1000110", "0100101", "0010011", "0001111"]).unwrap();
        let m = right_inverse(&g).unwrap();
        let mut expected = Gf2Matrix::zeros(7, 4);
        for i in 0..4 {
            expected.set(i, i, true);
        }
        assert_eq!(m, expected);
        assert_eq!(right_inverse(&Gf2Matrix::identity(6)).unwrap(), Gf2Matrix::identity(6));
    }

    // Gauss-Jordan oracle: solve G·x_j = e_j column by column over all 2^n x.
    #[test]
    fn right_inverse_random_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tested = 0;
        while tested < 20 {
            let g = random_matrix(&mut rng, 4, 8);
            if g.rank() < 4 {
                assert!(matches!(right_inverse(&g), Err(Error::RankDeficient { .. })));
                continue;
            }
            let m = right_inverse(&g).unwrap();
            assert_eq!(g.mul(&m).unwrap(), Gf2Matrix::identity(4));
            for j in 0..4 {
                let col = m.column(j);
                let e = g.right_mul(&col).unwrap();
                assert_eq!(e, BitWord::unit(4, j));
            }
            tested += 1;
        }
    }

    #[test]
    fn right_inverse_rank_deficient() {
        let g = Gf2Matrix::from_str_rows(&["1100", "1100"]).unwrap();
        assert!(matches!(
            right_inverse(&g),
            Err(Error::RankDeficient { rank: 1, expected: 2 })
        ));
    }

    #[test]
    fn encode_examples() {
        let g = Gf2Matrix::from_str_rows(&["1000110", "0100101", "0010011", "0001111"]).unwrap();
        assert!(encode(&g, &BitWord::zeros(4)).unwrap().is_zero());
        let u: BitWord = "1011".parse().unwrap();
        let c = encode(&g, &u).unwrap();
        assert_eq!(c.to_string(), "1011010");
        assert!(encode(&g, &BitWord::zeros(3)).is_err());
    }

    #[test]
    fn hex_round_trip() {
        let w: BitWord = "1000100101".parse().unwrap();
        assert_eq!(w.to_hex(), "894");
        assert_eq!(BitWord::from_hex("894", 10).unwrap(), w);
        assert!(BitWord::from_hex("895", 10).is_err());
    }

    #[test]
    fn nullspace_annihilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = random_matrix(&mut rng, 5, 12);
            let ns = g.nullspace();
            assert_eq!(ns.rows(), 12 - g.rank());
            assert!(g.mul(&ns.transpose()).unwrap().is_zero());
            assert_eq!(ns.rank(), ns.rows());
        }
    }

    #[test]
    fn table_matches_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_matrix(&mut rng, 70, 90);
        let t = SyndromeTable::new(&h);
        assert_eq!(t.stride(), 2);
        for c in 0..90 {
            assert_eq!(t.to_bitword(t.column(c)), h.column(c));
        }
        let v = BitWord::from_bits((0..90).map(|_| rng.random::<bool>()));
        let mut out = vec![0; 2];
        t.syndrome_of(&v, &mut out);
        assert_eq!(t.to_bitword(&out), syndrome(&h, &v).unwrap());
    }

    fn arb_word(len: usize) -> impl Strategy<Value = BitWord> {
        proptest::collection::vec(any::<bool>(), len).prop_map(BitWord::from_bits)
    }

    proptest! {
        #[test]
        fn syndrome_is_linear(seed in any::<u64>(), v in arb_word(77), w in arb_word(77)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_matrix(&mut rng, 13, 77);
            let lhs = syndrome(&h, &v.xor(&w).unwrap()).unwrap();
            let rhs = syndrome(&h, &v).unwrap().xor(&syndrome(&h, &w).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn packed_matches_schoolbook(seed in any::<u64>(), v in arb_word(130)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_matrix(&mut rng, 9, 130);
            let s = syndrome(&h, &v).unwrap();
            prop_assert_eq!(s.iter().collect::<Vec<_>>(), naive_syndrome(&h, &v));
        }

        #[test]
        fn right_inverse_recovers_message(seed in any::<u64>(), u in arb_word(6)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_matrix(&mut rng, 6, 14);
            prop_assume!(g.rank() == 6);
            let m = right_inverse(&g).unwrap();
            let c = encode(&g, &u).unwrap();
            prop_assert_eq!(m.left_mul(&c).unwrap(), u);
        }
    }
}
