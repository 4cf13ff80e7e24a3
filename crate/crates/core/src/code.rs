//! Linear block codes: generic containers and the constructions used for
//! benchmarking (5G CRC-aided polar, random systematic, Hamming(7,4)).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::{right_inverse, BitWord, Gf2Matrix};

/// An `(n, k)` binary linear code with parity-check matrix `h`, generator `g`
/// and right inverse `ginv` (`g · ginv = I_k`).
#[derive(Clone, Debug)]
pub struct LinearCode {
    name: String,
    h: Gf2Matrix,
    g: Gf2Matrix,
    ginv: Gf2Matrix,
}

impl LinearCode {
    /// Validates `G·Hᵀ = 0`, `rank(G) = k`, `rank(H) = n - k` and derives `G⁻¹`.
    pub fn new(name: impl Into<String>, g: Gf2Matrix, h: Gf2Matrix) -> Result<Self> {
        let n = g.cols();
        if h.cols() != n {
            return Err(Error::dim(format!(
                "generator has {n} columns, parity-check matrix has {}",
                h.cols()
            )));
        }
        let k = g.rows();
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("invalid dimensions n={n}, k={k}")));
        }
        let ginv = right_inverse(&g)?;
        let h_rank = h.rank();
        if h_rank != n - k || h.rows() != n - k {
            return Err(Error::RankDeficient {
                rank: h_rank,
                expected: n - k,
            });
        }
        if !g.mul(&h.transpose())?.is_zero() {
            return Err(Error::InvalidArgument(
                "generator rows violate the parity checks".into(),
            ));
        }
        Ok(LinearCode {
            name: name.into(),
            h,
            g,
            ginv,
        })
    }

    pub fn from_generator(name: impl Into<String>, g: Gf2Matrix) -> Result<Self> {
        let h = derive_parity_from_generator(&g)?;
        Self::new(name, g, h)
    }

    /// Builds the code defined by `h`. Linearly dependent rows of `h` are
    /// dropped (replaced by a row-reduced basis) so that `rank(H) = n - k`.
    pub fn from_parity_check(name: impl Into<String>, h: Gf2Matrix) -> Result<Self> {
        let g = h.nullspace();
        if g.rows() == 0 {
            return Err(Error::InvalidArgument(
                "parity-check matrix has full column rank; code is empty".into(),
            ));
        }
        let rank = h.rank();
        let h = if rank == h.rows() {
            h
        } else {
            let (r, _, _) = h.rref();
            Gf2Matrix::from_rows(r.row_iter().take(rank).cloned().collect())?
        };
        Self::new(name, g, h)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.g.cols()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.g.rows()
    }

    pub fn h(&self) -> &Gf2Matrix {
        &self.h
    }

    pub fn g(&self) -> &Gf2Matrix {
        &self.g
    }

    pub fn ginv(&self) -> &Gf2Matrix {
        &self.ginv
    }

    pub fn encode(&self, u: &BitWord) -> Result<BitWord> {
        self.g.left_mul(u)
    }

    /// Message recovered from a codeword, `c · G⁻¹`.
    pub fn extract(&self, c: &BitWord) -> Result<BitWord> {
        self.ginv.left_mul(c)
    }

    pub fn is_codeword(&self, v: &BitWord) -> Result<bool> {
        Ok(self.h.right_mul(v)?.is_zero())
    }
}

/// Nullspace basis `H` of a full-rank generator: `G·Hᵀ = 0`, `rank(H) = n - k`.
pub fn derive_parity_from_generator(g: &Gf2Matrix) -> Result<Gf2Matrix> {
    let rank = g.rank();
    if rank != g.rows() {
        return Err(Error::RankDeficient {
            rank,
            expected: g.rows(),
        });
    }
    Ok(g.nullspace())
}

/// Systematic random code `G = [I_k | P]`, `H = [Pᵀ | I_{n-k}]`, deterministic
/// in `seed`.
pub fn build_random_linear(n: usize, k: usize, seed: u64) -> Result<LinearCode> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "random code needs 0 < k < n, got n={n}, k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = n - k;
    let mut g = Gf2Matrix::zeros(k, n);
    let mut h = Gf2Matrix::zeros(r, n);
    for i in 0..k {
        g.set(i, i, true);
        for j in 0..r {
            if rng.random::<bool>() {
                g.set(i, k + j, true);
                h.set(j, i, true);
            }
        }
    }
    for j in 0..r {
        h.set(j, k + j, true);
    }
    LinearCode::new(format!("random({n},{k},seed={seed})"), g, h)
}

/// The (7,4) Hamming code whose parity-check column `c` is the binary
/// expansion of `c + 1` (LSB in the first row).
pub fn hamming_7_4() -> LinearCode {
    let h = Gf2Matrix::from_str_rows(&["1010101", "0110011", "0001111"]).expect("static matrix");
    LinearCode::from_parity_check("hamming(7,4)", h).expect("static code")
}

/// Construction data for a CRC-aided polar code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaPolarSpec {
    /// Block length, a power of two.
    pub n: usize,
    /// Message bits (CRC excluded).
    pub k: usize,
    pub crc_len: usize,
    /// CRC generator including the `D^crc_len` term; bit `i` is the coefficient of `D^i`.
    pub crc_poly: u64,
    /// Frozen bit-channel indices (0-based).
    pub frozen_set: Vec<usize>,
}

/// Reliability sequence and CRC-11 generator shipped with the crate.
pub const NR_POLAR_FIXTURE: &str = include_str!("../fixtures/nr_polar.txt");

/// Parsed 5G NR polar construction fixture.
#[derive(Clone, Debug)]
pub struct PolarFixture {
    pub version: u32,
    pub crc_poly: u64,
    /// Bit-channel indices of the length-`len()` mother code, least reliable first.
    pub reliability: Vec<usize>,
}

impl PolarFixture {
    pub fn builtin() -> Self {
        Self::parse(NR_POLAR_FIXTURE).expect("bundled fixture parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut crc_poly = None;
        let mut expected = None;
        let mut reliability = Vec::new();
        let mut last_line = 0;
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            last_line = ln;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let head = fields.next().unwrap();
            match head {
                "format" => {
                    if fields.next() != Some("nr-polar") {
                        return Err(Error::parse(ln, 8, "expected format nr-polar"));
                    }
                    let v = fields
                        .next()
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| Error::parse(ln, 17, "missing format version"))?;
                    version = Some(v);
                }
                "crc_poly" => {
                    let v = fields.next().unwrap_or("");
                    let v = u64::from_str_radix(v.trim_start_matches("0x"), 16)
                        .map_err(|e| Error::parse(ln, 10, format!("bad crc_poly: {e}")))?;
                    crc_poly = Some(v);
                }
                "reliability" => {
                    let v: usize = fields
                        .next()
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| Error::parse(ln, 13, "missing reliability length"))?;
                    expected = Some(v);
                }
                _ => {
                    if expected.is_none() {
                        return Err(Error::parse(ln, 1, format!("unexpected token {head:?}")));
                    }
                    let mut col = 1;
                    for tok in line.split(' ') {
                        if !tok.is_empty() {
                            let v = tok.parse::<usize>().map_err(|e| {
                                Error::parse(ln, col, format!("bad index {tok:?}: {e}"))
                            })?;
                            reliability.push(v);
                        }
                        col += tok.len() + 1;
                    }
                }
            }
        }
        let version = version.ok_or_else(|| Error::parse(last_line, 1, "missing format line"))?;
        let crc_poly = crc_poly.ok_or_else(|| Error::parse(last_line, 1, "missing crc_poly"))?;
        let expected = expected.ok_or_else(|| Error::parse(last_line, 1, "missing reliability"))?;
        if reliability.len() != expected {
            return Err(Error::parse(
                last_line,
                1,
                format!("reliability has {} entries, expected {expected}", reliability.len()),
            ));
        }
        let mut seen = vec![false; expected];
        for &r in &reliability {
            if r >= expected || std::mem::replace(&mut seen[r], true) {
                return Err(Error::parse(last_line, 1, "reliability is not a permutation"));
            }
        }
        Ok(PolarFixture {
            version,
            crc_poly,
            reliability,
        })
    }

    /// Reliability order restricted to a mother code of length `n`.
    pub fn sequence_for(&self, n: usize) -> Vec<usize> {
        self.reliability.iter().copied().filter(|&i| i < n).collect()
    }

    pub fn crc_len(&self) -> usize {
        63 - self.crc_poly.leading_zeros() as usize
    }
}

impl CaPolarSpec {
    /// 5G NR construction: the `n - k - crc_len` least reliable channels of
    /// the bundled reliability sequence are frozen; CRC-11 is appended.
    pub fn nr5g(n: usize, k: usize) -> Result<Self> {
        let fx = PolarFixture::builtin();
        let crc_len = fx.crc_len();
        if !n.is_power_of_two() || n > fx.reliability.len() {
            return Err(Error::InvalidArgument(format!(
                "block length {n} must be a power of two no larger than {}",
                fx.reliability.len()
            )));
        }
        if k == 0 || k + crc_len > n {
            return Err(Error::InvalidArgument(format!(
                "k={k} plus {crc_len} CRC bits does not fit in n={n}"
            )));
        }
        let frozen_set = fx.sequence_for(n)[..n - k - crc_len].to_vec();
        Ok(CaPolarSpec {
            n,
            k,
            crc_len,
            crc_poly: fx.crc_poly,
            frozen_set,
        })
    }

    /// Information set in ascending index order.
    pub fn info_set(&self) -> Vec<usize> {
        let mut frozen = vec![false; self.n];
        for &f in &self.frozen_set {
            frozen[f] = true;
        }
        (0..self.n).filter(|&i| !frozen[i]).collect()
    }

    fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("n={} is not a power of two", self.n)));
        }
        if self.k == 0 || self.k + self.crc_len > self.n {
            return Err(Error::InvalidArgument(format!(
                "k={} plus {} CRC bits does not fit in n={}",
                self.k, self.crc_len, self.n
            )));
        }
        if self.crc_len > 0 && (self.crc_poly >> self.crc_len) != 1 {
            return Err(Error::InvalidArgument(format!(
                "crc_poly {:#x} is not of degree {}",
                self.crc_poly, self.crc_len
            )));
        }
        if self.frozen_set.len() != self.n - self.k - self.crc_len {
            return Err(Error::InvalidArgument(format!(
                "{} frozen indices, expected {}",
                self.frozen_set.len(),
                self.n - self.k - self.crc_len
            )));
        }
        let mut seen = vec![false; self.n];
        for &f in &self.frozen_set {
            if f >= self.n || std::mem::replace(&mut seen[f], true) {
                return Err(Error::InvalidArgument(format!("bad frozen index {f}")));
            }
        }
        Ok(())
    }
}

/// CRC of `bits` (first bit = highest degree), zero initial state, returned
/// as `crc_len` bits, highest degree first.
pub fn crc_bits(bits: &[bool], poly: u64, crc_len: usize) -> Vec<bool> {
    if crc_len == 0 {
        return Vec::new();
    }
    let top = 1u64 << (crc_len - 1);
    let mask = (1u64 << crc_len) - 1;
    let mut reg = 0u64;
    for &b in bits {
        let fb = ((reg & top) != 0) ^ b;
        reg = (reg << 1) & mask;
        if fb {
            reg ^= poly & mask;
        }
    }
    (0..crc_len).rev().map(|i| (reg >> i) & 1 == 1).collect()
}

/// In-place polar transform `x = v · F^{⊗m}` with `F = [[1,0],[1,1]]`.
pub fn polar_transform(v: &mut [bool]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut s = 1;
    while s < n {
        for j in 0..n {
            if j & s == 0 {
                v[j] ^= v[j + s];
            }
        }
        s <<= 1;
    }
}

/// Effective generator of a CRC-aided polar code: row `i` is the encoding of
/// the `i`-th unit message (CRC is linear with zero initial state).
pub fn build_ca_polar(spec: &CaPolarSpec) -> Result<LinearCode> {
    spec.validate()?;
    let info = spec.info_set();
    let mut rows = Vec::with_capacity(spec.k);
    for i in 0..spec.k {
        let mut msg = vec![false; spec.k];
        msg[i] = true;
        let mut data = msg.clone();
        data.extend(crc_bits(&msg, spec.crc_poly, spec.crc_len));
        let mut v = vec![false; spec.n];
        for (&pos, &b) in info.iter().zip(&data) {
            v[pos] = b;
        }
        polar_transform(&mut v);
        rows.push(BitWord::from_bits(v));
    }
    let g = Gf2Matrix::from_rows(rows)?;
    let name = format!("ca-polar({},{}+{})", spec.n, spec.k, spec.crc_len);
    LinearCode::from_generator(name, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::syndrome;

    fn all_messages(k: usize) -> impl Iterator<Item = BitWord> {
        (0u64..1 << k).map(move |m| BitWord::from_bits((0..k).map(|i| (m >> i) & 1 == 1)))
    }

    // Codebook equality by enumeration: every encoded message passes H and the
    // number of distinct vectors passing H equals 2^k.
    fn check_codebook(code: &LinearCode) {
        let n = code.n();
        assert!(n <= 20);
        let mut from_g: Vec<BitWord> = all_messages(code.k())
            .map(|u| code.encode(&u).unwrap())
            .collect();
        from_g.sort_by_key(|w| w.words().to_vec());
        from_g.dedup();
        assert_eq!(from_g.len(), 1 << code.k());
        let mut from_h = Vec::new();
        for v in 0u64..1 << n {
            let w = BitWord::from_bits((0..n).map(|i| (v >> i) & 1 == 1));
            if code.is_codeword(&w).unwrap() {
                from_h.push(w);
            }
        }
        from_h.sort_by_key(|w| w.words().to_vec());
        assert_eq!(from_g, from_h);
    }

    #[test]
    fn random_code_is_deterministic() {
        let a = build_random_linear(8, 4, 1).unwrap();
        let b = build_random_linear(8, 4, 1).unwrap();
        assert_eq!(a.g(), b.g());
        assert_eq!(a.h(), b.h());
        for seed in 0..5 {
            let c = build_random_linear(8, 4, seed).unwrap();
            assert!(c.g().mul(&c.h().transpose()).unwrap().is_zero());
        }
        assert!(build_random_linear(8, 8, 1).is_err());
        assert!(build_random_linear(8, 0, 1).is_err());
    }

    #[test]
    fn random_16_8_codebook() {
        let code = build_random_linear(16, 8, 7).unwrap();
        for u in all_messages(8) {
            assert!(syndrome(code.h(), &code.encode(&u).unwrap()).unwrap().is_zero());
        }
        check_codebook(&code);
    }

    #[test]
    fn hamming_codebook_and_parity() {
        let code = hamming_7_4();
        assert_eq!((code.n(), code.k()), (7, 4));
        check_codebook(&code);
        let u: BitWord = "1011".parse().unwrap();
        let c = code.encode(&u).unwrap();
        assert!(code.is_codeword(&c).unwrap());
        assert_eq!(code.extract(&c).unwrap(), u);
    }

    #[test]
    fn systematic_duality() {
        let g = Gf2Matrix::from_str_rows(&["1000110", "0100101", "0010011", "0001111"]).unwrap();
        let h = derive_parity_from_generator(&g).unwrap();
        // [I | P] -> [Pᵀ | I]
        let expected = Gf2Matrix::from_str_rows(&["1101100", "1011010", "0111001"]).unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn hamming_generator_gives_same_row_space() {
        let std_h = Gf2Matrix::from_str_rows(&["1010101", "0110011", "0001111"]).unwrap();
        let code = LinearCode::from_parity_check("h", std_h.clone()).unwrap();
        let derived = derive_parity_from_generator(code.g()).unwrap();
        assert_eq!(derived.rref().0, std_h.rref().0);
    }

    #[test]
    fn derive_rejects_rank_deficient() {
        let g = Gf2Matrix::from_str_rows(&["1100", "1100"]).unwrap();
        assert!(matches!(
            derive_parity_from_generator(&g),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn redundant_parity_rows_are_dropped() {
        let h = Gf2Matrix::from_str_rows(&["1010101", "0110011", "0001111", "1101001"]).unwrap();
        let code = LinearCode::from_parity_check("dup", h).unwrap();
        assert_eq!((code.n(), code.k(), code.h().rows()), (7, 4, 3));
    }

    #[test]
    fn polar_transform_n4() {
        // rows of F⊗F: 1000, 1100, 1010, 1111
        let expected = ["1000", "1100", "1010", "1111"];
        for (i, e) in expected.iter().enumerate() {
            let mut v = vec![false; 4];
            v[i] = true;
            polar_transform(&mut v);
            assert_eq!(BitWord::from_bits(v).to_string(), *e);
        }
    }

    #[test]
    fn toy_polar_code() {
        let spec = CaPolarSpec {
            n: 4,
            k: 1,
            crc_len: 0,
            crc_poly: 0,
            frozen_set: vec![0, 1, 2],
        };
        let code = build_ca_polar(&spec).unwrap();
        assert_eq!(code.g().row(0).to_string(), "1111");
        assert_eq!(code.h().rows(), 3);
        check_codebook(&code);
    }

    #[test]
    fn crc11_known_values() {
        let poly = 0xE21;
        assert_eq!(crc_bits(&[false; 20], poly, 11), vec![false; 11]);
        // a single 1 followed by nothing: remainder of D^11 mod g = g - D^11
        let r = crc_bits(&[true], poly, 11);
        let expect: Vec<bool> = (0..11).rev().map(|i| (0x621u64 >> i) & 1 == 1).collect();
        assert_eq!(r, expect);
        // appending the CRC yields a zero remainder
        let msg: Vec<bool> = (0..37).map(|i| (i * 7 + 3) % 5 < 2).collect();
        let mut full = msg.clone();
        full.extend(crc_bits(&msg, poly, 11));
        assert_eq!(crc_bits(&full, poly, 11), vec![false; 11]);
    }

    #[test]
    fn nr_fixture_parses() {
        let fx = PolarFixture::builtin();
        assert_eq!(fx.version, 1);
        assert_eq!(fx.crc_len(), 11);
        assert_eq!(fx.reliability.len(), 1024);
        let q128 = fx.sequence_for(128);
        assert_eq!(q128.len(), 128);
        assert_eq!(&q128[..12], &[0, 1, 2, 4, 8, 16, 32, 3, 5, 64, 9, 6]);
        assert_eq!(*q128.last().unwrap(), 127);
    }

    #[test]
    fn fixture_errors() {
        assert!(matches!(PolarFixture::parse("format nr-polar 1\ncrc_poly 0xE21\nreliability 4\n0 1 x 3\n"),
            Err(Error::Parse { line: 4, column: 5, .. })));
        assert!(PolarFixture::parse("format nr-polar 1\ncrc_poly 0xE21\nreliability 4\n0 1 1 3\n").is_err());
        assert!(PolarFixture::parse("format nr-polar 1\ncrc_poly 0xE21\nreliability 4\n0 1 2\n").is_err());
    }

    #[test]
    fn ca_polar_128() {
        let spec = CaPolarSpec::nr5g(128, 105).unwrap();
        assert_eq!(spec.frozen_set.len(), 12);
        let code = build_ca_polar(&spec).unwrap();
        assert_eq!((code.n(), code.k(), code.h().rows()), (128, 105, 23));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let info = spec.info_set();
        for _ in 0..100 {
            let u = BitWord::from_bits((0..105).map(|_| rng.random::<bool>()));
            let c = code.encode(&u).unwrap();
            assert!(syndrome(code.h(), &c).unwrap().is_zero());
            assert_eq!(code.extract(&c).unwrap(), u);
            // undo the polar transform (it is an involution) and check the CRC
            let mut v: Vec<bool> = c.iter().collect();
            polar_transform(&mut v);
            for &f in &spec.frozen_set {
                assert!(!v[f]);
            }
            let data: Vec<bool> = info.iter().map(|&i| v[i]).collect();
            assert_eq!(&data[..105], &u.iter().collect::<Vec<_>>()[..]);
            assert_eq!(crc_bits(&data[..105], spec.crc_poly, 11), &data[105..]);
        }
    }

    #[test]
    fn ca_polar_rejects_bad_specs() {
        assert!(CaPolarSpec::nr5g(100, 50).is_err());
        assert!(CaPolarSpec::nr5g(128, 120).is_err());
        let mut spec = CaPolarSpec::nr5g(64, 40).unwrap();
        spec.frozen_set.pop();
        assert!(build_ca_polar(&spec).is_err());
    }
}
