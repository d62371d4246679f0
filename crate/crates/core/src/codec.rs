//! GF(2^w) arithmetic and Vandermonde multicast coding.
//!
//! A message symbol is a bit string chunked into `w`-bit field elements
//! (zero-padded at the end). A sender transmits `n2` combinations of `n1`
//! symbols, row `i` weighting symbol `j` by `alpha_j^i`. A receiver that
//! already knows `n1 - n2` of the symbols strips them out and inverts the
//! square Vandermonde submatrix over the rest.

use std::collections::BTreeMap;

use bitvec::prelude::*;

use crate::error::{Error, Result};

pub type Bits = BitVec<u8, Msb0>;

/// Binary extension field with log/antilog multiplication tables.
#[derive(Clone, Debug)]
pub struct Field {
    w: u32,
    order: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl Field {
    /// Supported widths are 8 (polynomial `x^8+x^4+x^3+x^2+1`) and 16
    /// (`x^16+x^12+x^3+x+1`); `x` generates the multiplicative group in both.
    pub fn new(w: u32) -> Result<Self> {
        let poly: u32 = match w {
            8 => 0x11D,
            16 => 0x1100B,
            _ => return Err(Error::InvalidParams(format!("unsupported field width w = {w} (use 8 or 16)"))),
        };
        let size = 1u32 << w;
        let order = size - 1;
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; size as usize];
        let mut x = 1u32;
        for i in 0..order {
            exp[i as usize] = x;
            log[x as usize] = i;
            x <<= 1;
            if x & size != 0 {
                x ^= poly;
            }
        }
        assert_eq!(x, 1, "generator order must be 2^w - 1");
        for i in order..2 * order {
            exp[i as usize] = exp[(i - order) as usize];
        }
        Ok(Self { w, order, exp, log })
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn size(&self) -> u64 {
        1u64 << self.w
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.exp[((self.order - self.log[a as usize]) % self.order) as usize])
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as u64 * e) % self.order as u64;
        self.exp[l as usize]
    }

    /// The `i`-th power of the generator.
    pub fn generator_power(&self, i: usize) -> u32 {
        self.exp[i % self.order as usize]
    }

    /// `n` distinct nonzero coefficients, generator powers `g^0 .. g^(n-1)`.
    pub fn alphas(&self, n: usize) -> Result<Vec<u32>> {
        if n as u64 >= self.size() {
            return Err(Error::FieldTooSmall { needed: n, w: self.w });
        }
        Ok((0..n).map(|i| self.generator_power(i)).collect())
    }
}

/// A message symbol as field elements plus its unpadded bit length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolVector {
    pub elems: Vec<u32>,
    pub bit_len: usize,
}

impl SymbolVector {
    pub fn from_bits(bits: &BitSlice<u8, Msb0>, w: u32) -> Self {
        let w = w as usize;
        let elems = bits
            .chunks(w)
            .map(|c| {
                let v = c.iter().fold(0u32, |acc, b| (acc << 1) | *b as u32);
                v << (w - c.len())
            })
            .collect();
        Self { elems, bit_len: bits.len() }
    }

    pub fn to_bits(&self, w: u32) -> Bits {
        let mut out = Bits::with_capacity(self.elems.len() * w as usize);
        for &e in &self.elems {
            for i in (0..w).rev() {
                out.push((e >> i) & 1 == 1);
            }
        }
        out.truncate(self.bit_len);
        out
    }

    /// Zero bits appended to reach a whole number of field elements.
    pub fn padding_bits(&self, w: u32) -> usize {
        self.elems.len() * w as usize - self.bit_len
    }

    fn zero_like(&self) -> Self {
        Self { elems: vec![0; self.elems.len()], bit_len: self.bit_len }
    }

    /// `self += c * other`, component-wise.
    fn axpy(&mut self, field: &Field, c: u32, other: &Self) {
        if c == 0 {
            return;
        }
        for (a, &b) in self.elems.iter_mut().zip(&other.elems) {
            *a ^= field.mul(c, b);
        }
    }

    fn scale(&mut self, field: &Field, c: u32) {
        for a in &mut self.elems {
            *a = field.mul(c, *a);
        }
    }
}

fn check_alphas(field: &Field, alphas: &[u32]) -> Result<()> {
    if alphas.len() as u64 >= field.size() {
        return Err(Error::FieldTooSmall { needed: alphas.len(), w: field.w });
    }
    let mut seen = std::collections::BTreeSet::new();
    for &a in alphas {
        if a as u64 >= field.size() {
            return Err(Error::InvalidParams(format!("coefficient {a} outside GF(2^{})", field.w)));
        }
        if !seen.insert(a) {
            return Err(Error::DuplicateCoefficient(a));
        }
    }
    Ok(())
}

/// Row `i` of the output is `sum_j alphas[j]^i * symbols[j]`, `i < n2`.
pub fn encode_vandermonde(
    field: &Field,
    symbols: &[SymbolVector],
    n2: usize,
    alphas: &[u32],
) -> Result<Vec<SymbolVector>> {
    let n1 = symbols.len();
    if alphas.len() != n1 {
        return Err(Error::CountMismatch { expected: n1, got: alphas.len() });
    }
    if n2 > n1 {
        return Err(Error::InvalidParams(format!("n2 = {n2} exceeds n1 = {n1}")));
    }
    check_alphas(field, alphas)?;
    if let Some(first) = symbols.first() {
        if symbols.iter().any(|s| s.elems.len() != first.elems.len() || s.bit_len != first.bit_len) {
            return Err(Error::InvalidParams("symbols in one encoding must have equal length".into()));
        }
    }
    Ok((0..n2)
        .map(|i| {
            let mut row = symbols[0].zero_like();
            for (s, &a) in symbols.iter().zip(alphas) {
                row.axpy(field, field.pow(a, i as u64), s);
            }
            row
        })
        .collect())
}

/// Recovers all `n1 = alphas.len()` symbols from `n2` coded rows and the
/// `n1 - n2` symbols the receiver already knows.
pub fn decode_vandermonde(
    field: &Field,
    coded: &[SymbolVector],
    alphas: &[u32],
    known: &BTreeMap<usize, SymbolVector>,
) -> Result<Vec<SymbolVector>> {
    let n1 = alphas.len();
    check_alphas(field, alphas)?;
    if let Some(&bad) = known.keys().find(|&&j| j >= n1) {
        return Err(Error::InvalidParams(format!("known index {bad} outside 0..{n1}")));
    }
    let unknown: Vec<usize> = (0..n1).filter(|j| !known.contains_key(j)).collect();
    if unknown.is_empty() {
        return Ok((0..n1).map(|j| known[&j].clone()).collect());
    }
    if unknown.len() != coded.len() {
        return Err(Error::CountMismatch { expected: unknown.len(), got: coded.len() });
    }
    let n2 = coded.len();
    // strip known contributions
    let mut rhs: Vec<SymbolVector> = coded.to_vec();
    for (i, row) in rhs.iter_mut().enumerate() {
        for (&j, s) in known {
            row.axpy(field, field.pow(alphas[j], i as u64), s);
        }
    }
    // Gauss-Jordan on the n2 x n2 system A x = rhs, A[i][c] = alphas[unknown[c]]^i
    let mut a: Vec<Vec<u32>> =
        (0..n2).map(|i| unknown.iter().map(|&j| field.pow(alphas[j], i as u64)).collect()).collect();
    for col in 0..n2 {
        let pivot = (col..n2).find(|&r| a[r][col] != 0).ok_or(Error::SingularMatrix)?;
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = field.inv(a[col][col]).expect("pivot is nonzero");
        for x in a[col].iter_mut() {
            *x = field.mul(inv, *x);
        }
        rhs[col].scale(field, inv);
        for r in 0..n2 {
            if r != col && a[r][col] != 0 {
                let f = a[r][col];
                let pivot = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot) {
                    *x ^= field.mul(f, *p);
                }
                let pivot_row = rhs[col].clone();
                rhs[r].axpy(field, f, &pivot_row);
            }
        }
    }
    let mut solved = unknown.iter().copied().zip(rhs).collect::<BTreeMap<_, _>>();
    Ok((0..n1).map(|j| known.get(&j).cloned().unwrap_or_else(|| solved.remove(&j).expect("solved"))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn sym(field: &Field, words: &[u32]) -> SymbolVector {
        SymbolVector { elems: words.to_vec(), bit_len: words.len() * field.w() as usize }
    }

    #[test]
    fn gf256_axioms() {
        let f = Field::new(8).unwrap();
        for a in 1..256u32 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.mul(a, 0), 0);
        }
        assert_eq!(f.inv(0), None);
        for a in (0..256u32).step_by(7) {
            for b in (0..256u32).step_by(5) {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in (0..256u32).step_by(11) {
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
                }
            }
        }
        // x * x^7 wraps through the reduction polynomial
        assert_eq!(f.mul(2, 0x80), 0x1D);
    }

    #[test]
    fn gf65536_inverses_sampled() {
        let f = Field::new(16).unwrap();
        for a in (1..65536u32).step_by(97) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert!(Field::new(12).is_err());
    }

    #[test]
    fn alphas_distinct_and_bounded() {
        let f = Field::new(8).unwrap();
        let a = f.alphas(255).unwrap();
        assert_eq!(a.iter().unique().count(), 255);
        assert!(matches!(f.alphas(256), Err(Error::FieldTooSmall { needed: 256, w: 8 })));
    }

    #[test]
    fn single_row_is_identity_or_xor() {
        let f = Field::new(16).unwrap();
        let s0 = sym(&f, &[0x1234, 0xBEEF]);
        let s1 = sym(&f, &[0x0F0F, 0x0001]);
        let out = encode_vandermonde(&f, std::slice::from_ref(&s0), 1, &[1]).unwrap();
        assert_eq!(out, vec![s0.clone()]);
        let out = encode_vandermonde(&f, &[s0.clone(), s1.clone()], 1, &f.alphas(2).unwrap()).unwrap();
        assert_eq!(out[0].elems, vec![0x1234 ^ 0x0F0F, 0xBEEF ^ 0x0001]);
        let known = BTreeMap::from([(0, s0.clone())]);
        let dec = decode_vandermonde(&f, &out, &f.alphas(2).unwrap(), &known).unwrap();
        assert_eq!(dec, vec![s0, s1]);
    }

    #[test]
    fn all_known_needs_no_rows() {
        let f = Field::new(8).unwrap();
        let s = vec![sym(&f, &[1]), sym(&f, &[2])];
        let known = BTreeMap::from([(0, s[0].clone()), (1, s[1].clone())]);
        assert_eq!(decode_vandermonde(&f, &[], &f.alphas(2).unwrap(), &known).unwrap(), s);
    }

    #[test]
    fn encode_rejects_bad_inputs() {
        let f = Field::new(8).unwrap();
        let s = vec![sym(&f, &[1]), sym(&f, &[2])];
        assert!(matches!(encode_vandermonde(&f, &s, 1, &[3, 3]), Err(Error::DuplicateCoefficient(3))));
        assert!(matches!(encode_vandermonde(&f, &s, 1, &[3]), Err(Error::CountMismatch { .. })));
        assert!(encode_vandermonde(&f, &s, 3, &[1, 2]).is_err());
        let coded = encode_vandermonde(&f, &s, 1, &[1, 2]).unwrap();
        assert!(matches!(
            decode_vandermonde(&f, &coded, &[1, 2], &BTreeMap::new()),
            Err(Error::CountMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn vandermonde_submatrices_invertible() {
        let f = Field::new(16).unwrap();
        for n1 in 1..=8usize {
            let alphas = f.alphas(n1).unwrap();
            for n2 in 1..=n1 {
                for cols in (0..n1).combinations(n2) {
                    let basis: Vec<SymbolVector> = (0..n1).map(|j| sym(&f, &[j as u32 + 1])).collect();
                    let coded = encode_vandermonde(&f, &basis, n2, &alphas).unwrap();
                    let known: BTreeMap<_, _> =
                        (0..n1).filter(|j| !cols.contains(j)).map(|j| (j, basis[j].clone())).collect();
                    assert_eq!(decode_vandermonde(&f, &coded, &alphas, &known).unwrap(), basis);
                }
            }
        }
    }

    #[test]
    fn bit_round_trip_with_padding() {
        let bits: Bits = bitvec![u8, Msb0; 1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 1];
        let s = SymbolVector::from_bits(&bits, 8);
        assert_eq!(s.elems, vec![0b1011_0011, 0b1010_0000]);
        assert_eq!(s.padding_bits(8), 5);
        assert_eq!(s.to_bits(8), bits);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip(
            n1 in 1usize..=8,
            n2_frac in 0.0f64..1.0,
            len in 1usize..40,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let f = Field::new(16).unwrap();
            let n2 = 1 + ((n2_frac * n1 as f64) as usize).min(n1 - 1);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let symbols: Vec<SymbolVector> = (0..n1)
                .map(|_| {
                    let bits: Bits = (0..len).map(|_| rng.gen::<bool>()).collect();
                    SymbolVector::from_bits(&bits, 16)
                })
                .collect();
            let mut idx: Vec<usize> = (0..n1).collect();
            for i in (1..n1).rev() {
                idx.swap(i, rng.gen_range(0..=i));
            }
            let known: BTreeMap<_, _> = idx[n2..].iter().map(|&j| (j, symbols[j].clone())).collect();
            let alphas = f.alphas(n1).unwrap();
            let coded = encode_vandermonde(&f, &symbols, n2, &alphas).unwrap();
            let decoded = decode_vandermonde(&f, &coded, &alphas, &known).unwrap();
            prop_assert_eq!(&decoded, &symbols);
            for (d, s) in decoded.iter().zip(&symbols) {
                prop_assert_eq!(d.to_bits(16), s.to_bits(16));
            }
        }
    }
}
