//! Bit-level arithmetic on big-endian bit strings.
//!
//! A [`BitString`] is a sequence of bits with the most significant bit first
//! (index 1 in the usual paper notation is `bits[0]` here). Parsing preserves
//! the written length — `0100` keeps its leading zero, which matters when a
//! string is an indexed operand — while every arithmetic operation returns a
//! *canonical* result: no leading zeros, with zero itself the empty string.
//! Equality and hashing are structural, so `00` and `0` are different states;
//! algorithms converge to canonical values because their targets are computed
//! by these operations.

use std::cmp::Ordering;

use thiserror::Error;

/// Errors from bitstring parsing and the arithmetic helpers.
#[derive(Debug, Error)]
pub enum ArithError {
    /// Input contained something other than '0' or '1'.
    #[error("invalid bit character {0:?}")]
    ParseBit(char),
    /// Input was empty where at least one bit is required.
    #[error("empty bit string")]
    Empty,
    /// Modulo by zero.
    #[error("modulus is zero")]
    ZeroModulus,
    /// A structural length requirement was not met.
    #[error("bad operand length: {0}")]
    BadLength(String),
    /// The modulus is too large for the requested representation.
    #[error("modulus needs {bits} bits, limit is {limit}")]
    ModulusTooLarge { bits: usize, limit: usize },
}

/// Big-endian bit sequence; see the module docs for the canonical-form rules.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    /// The canonical zero (empty string).
    pub fn zero() -> Self {
        BitString { bits: Vec::new() }
    }

    /// The canonical one.
    pub fn one() -> Self {
        BitString { bits: vec![1] }
    }

    /// Parses `"0101"`-style input, preserving its length.
    pub fn parse(s: &str) -> Result<Self, ArithError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => return Err(ArithError::ParseBit(other)),
            }
        }
        Ok(BitString { bits })
    }

    /// Builds from raw bits (each 0 or 1), preserving length.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        BitString { bits }
    }

    /// Canonical representation of an integer value.
    pub fn from_value(mut v: u128) -> Self {
        let mut rev = Vec::new();
        while v > 0 {
            rev.push((v & 1) as u8);
            v >>= 1;
        }
        rev.reverse();
        BitString { bits: rev }
    }

    /// Number of bits (including leading zeros).
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// True if the value is zero (any length).
    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    /// The bits, most significant first.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Strips leading zeros (canonical form).
    pub fn canon(&self) -> Self {
        let first_one = self.bits.iter().position(|&b| b == 1);
        match first_one {
            Some(k) => BitString { bits: self.bits[k..].to_vec() },
            None => BitString::zero(),
        }
    }

    /// Integer value, if it fits in a u128.
    pub fn value(&self) -> Option<u128> {
        let c = self.canon();
        if c.len() > 128 {
            return None;
        }
        let mut v: u128 = 0;
        for &b in &c.bits {
            v = (v << 1) | u128::from(b);
        }
        Some(v)
    }

    /// Appends one bit at the least significant end (preserves length + 1).
    pub fn append(&self, b: u8) -> Self {
        debug_assert!(b <= 1);
        let mut bits = self.bits.clone();
        bits.push(b);
        BitString { bits }
    }

    /// Appends `k` zeros at the least significant end (multiply by 2^k);
    /// canonical in, canonical out.
    pub fn lshift(&self, k: usize) -> Self {
        let c = self.canon();
        if c.is_empty() {
            return c;
        }
        let mut bits = c.bits;
        bits.extend(std::iter::repeat(0).take(k));
        BitString { bits }
    }

    /// Deletes the `k` least significant bits.
    pub fn rshift(&self, k: usize) -> Self {
        let keep = self.bits.len().saturating_sub(k);
        BitString { bits: self.bits[..keep].to_vec() }
    }

    /// The `h` least significant bits, zero-padded on the left to length `h`.
    pub fn low_bits(&self, h: usize) -> Self {
        let n = self.bits.len();
        let mut bits = vec![0u8; h.saturating_sub(n)];
        bits.extend_from_slice(&self.bits[n.saturating_sub(h)..]);
        BitString { bits }
    }

    /// Everything above the `h` least significant bits (may be empty).
    pub fn high_above(&self, h: usize) -> Self {
        let keep = self.bits.len().saturating_sub(h);
        BitString { bits: self.bits[..keep].to_vec() }
    }

    /// Left-pads with zeros to length `len` (no-op if already that long).
    pub fn pad_to(&self, len: usize) -> Self {
        if self.bits.len() >= len {
            return self.clone();
        }
        let mut bits = vec![0u8; len - self.bits.len()];
        bits.extend_from_slice(&self.bits);
        BitString { bits }
    }

    /// Numeric comparison (lengths immaterial).
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let a = self.canon();
        let b = other.canon();
        a.len().cmp(&b.len()).then_with(|| a.bits.cmp(&b.bits))
    }

    /// Sum; canonical.
    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (&self.bits, &other.bits);
        let n = a.len().max(b.len()) + 1;
        let mut out = vec![0u8; n];
        let mut carry = 0u8;
        for k in 0..n {
            let x = if k < a.len() { a[a.len() - 1 - k] } else { 0 };
            let y = if k < b.len() { b[b.len() - 1 - k] } else { 0 };
            let s = x + y + carry;
            out[n - 1 - k] = s & 1;
            carry = s >> 1;
        }
        BitString { bits: out }.canon()
    }

    /// Difference, saturating at zero; canonical.
    pub fn saturating_sub(&self, other: &Self) -> Self {
        if self.cmp_value(other) != Ordering::Greater {
            if self.cmp_value(other) == Ordering::Equal {
                return BitString::zero();
            }
            return BitString::zero();
        }
        let (a, b) = (&self.bits, &other.bits);
        let n = a.len();
        let mut out = vec![0u8; n];
        let mut borrow = 0i8;
        for k in 0..n {
            let x = a[n - 1 - k] as i8;
            let y = if k < b.len() { b[b.len() - 1 - k] as i8 } else { 0 };
            let mut d = x - y - borrow;
            if d < 0 {
                d += 2;
                borrow = 1;
            } else {
                borrow = 0;
            }
            out[n - 1 - k] = d as u8;
        }
        BitString { bits: out }.canon()
    }

    /// Product via shift-and-add; canonical.
    pub fn mul(&self, other: &Self) -> Self {
        let mut acc = BitString::zero();
        let b = other.canon();
        let blen = b.len();
        for (k, &bit) in b.bits.iter().enumerate() {
            if bit == 1 {
                acc = acc.add(&self.lshift(blen - 1 - k));
            }
        }
        acc
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("0");
        }
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl serde::Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

/// `n mod m` by standard long division: scan `n` from the most significant
/// bit, appending one bit at a time to the running remainder and subtracting
/// `m` whenever the remainder reaches it.
pub fn division_modulo(n: &BitString, m: &BitString) -> Result<BitString, ArithError> {
    if m.is_zero() {
        return Err(ArithError::ZeroModulus);
    }
    let mut ans = BitString::zero();
    for &b in n.bits() {
        ans = ans.append(b).canon();
        // After one append the remainder is < 2m, so one subtraction settles it.
        if ans.cmp_value(m) != Ordering::Less {
            ans = ans.saturating_sub(m);
        }
    }
    Ok(ans)
}
