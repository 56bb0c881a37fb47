//! Exact Laurent polynomials in one variable `A` with integer coefficients.
//!
//! Coefficients are `i128`; every arithmetic operation is overflow-checked and
//! panics on overflow, the same contract as debug-mode integer arithmetic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Sparse Laurent polynomial `Σ c_k A^k`. Zero coefficients are never stored,
/// so structural equality is polynomial equality.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, i128>,
}

fn checked_add(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect("Laurent coefficient overflow")
}

fn checked_mul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("Laurent coefficient overflow")
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// `coeff · A^exp`
    pub fn monomial(coeff: i128, exp: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, coeff);
        p
    }

    /// The loop value `δ = −A² − A⁻²`.
    pub fn delta() -> Self {
        Self::from_terms([(2, -1), (-2, -1)])
    }

    /// `−A³` raised to an arbitrary integer power.
    pub fn minus_a_cubed_pow(k: i32) -> Self {
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        Self::monomial(sign, 3 * k)
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, i128)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: i32, coeff: i128) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(exp).or_insert(0);
        *entry = checked_add(*entry, coeff);
        if *entry == 0 {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: i32) -> i128 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, i128)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    /// Multiply by `A^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|(&e, &c)| (e + k, c)).collect(),
        }
    }

    pub fn scale(&self, s: i128) -> Self {
        if s == 0 {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&e, &c)| (e, checked_mul(c, s)))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Substitute `A → A⁻¹` (mirror image for the bracket).
    pub fn invert_variable(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&e, &c)| (-e, c)).collect(),
        }
    }

    /// Render in the variable `t = A⁻⁴`. Exponents that are not multiples of
    /// four are printed as fractions, e.g. `t^(1/2)`.
    pub fn to_jones_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        // t-exponent is -e/4, so descending A order is ascending t order
        let mut out = String::new();
        for (i, (e, c)) in self.terms().rev().enumerate() {
            let (num, den) = reduce(-e, 4);
            let mono = match (num, den) {
                (0, _) => String::new(),
                (1, 1) => "t".to_string(),
                (n, 1) => format!("t^{n}"),
                (n, d) => format!("t^({n}/{d})"),
            };
            push_term(&mut out, i == 0, c, &mono);
        }
        out
    }
}

fn reduce(num: i32, den: i32) -> (i32, i32) {
    fn gcd(a: i32, b: i32) -> i32 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

fn push_term(out: &mut String, first: bool, c: i128, mono: &str) {
    let mag = c.unsigned_abs();
    if first {
        if c < 0 {
            out.push('-');
        }
    } else if c < 0 {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    if mono.is_empty() {
        out.push_str(&mag.to_string());
    } else {
        if mag != 1 {
            out.push_str(&mag.to_string());
        }
        out.push_str(mono);
    }
}

impl fmt::Display for LaurentPoly {
    /// Canonical text form, descending exponents: `-A^4 - A^-4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms().rev().enumerate() {
            let mono = match e {
                0 => String::new(),
                1 => "A".to_string(),
                e => format!("A^{e}"),
            };
            push_term(&mut out, i == 0, c, &mono);
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

impl FromStr for LaurentPoly {
    type Err = Error;

    /// Parses the canonical text form (and any reordering of it).
    fn from_str(s: &str) -> Result<Self, Error> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" {
            return Ok(Self::zero());
        }
        if compact.is_empty() {
            return Err(Error::parse(0, "empty polynomial"));
        }
        let bytes = compact.as_bytes();
        let mut p = Self::zero();
        let mut i = 0;
        while i < bytes.len() {
            let start = i;
            let mut sign = 1i128;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -1;
                }
                i += 1;
            } else if start != 0 {
                return Err(Error::parse(i, "expected '+' or '-'"));
            }
            let num_start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coeff: i128 = if i > num_start {
                compact[num_start..i]
                    .parse()
                    .map_err(|_| Error::parse(num_start, "bad coefficient"))?
            } else {
                1
            };
            let mut exp = 0i32;
            if i < bytes.len() && bytes[i] == b'A' {
                i += 1;
                exp = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let e_start = i;
                    if i < bytes.len() && bytes[i] == b'-' {
                        i += 1;
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    exp = compact[e_start..i]
                        .parse()
                        .map_err(|_| Error::parse(e_start, "bad exponent"))?;
                }
            } else if i == num_start {
                return Err(Error::parse(i, "expected coefficient or 'A'"));
            }
            p.add_term(exp, sign * coeff);
        }
        Ok(p)
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.terms.len()))?;
        for (e, c) in self.terms().rev() {
            map.serialize_entry(&e.to_string(), &c)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<String, i128> = BTreeMap::deserialize(deserializer)?;
        let mut p = LaurentPoly::zero();
        for (k, c) in raw {
            let e: i32 = k.parse().map_err(serde::de::Error::custom)?;
            p.add_term(e, c);
        }
        Ok(p)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in rhs.terms() {
            self.add_term(e, c);
        }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(-1)
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(-1)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(e, -c);
        }
        out
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(e1 + e2, checked_mul(c1, c2));
            }
        }
        out
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl std::iter::Sum for LaurentPoly {
    fn sum<I: Iterator<Item = LaurentPoly>>(iter: I) -> Self {
        let mut acc = LaurentPoly::zero();
        for p in iter {
            acc += &p;
        }
        acc
    }
}
