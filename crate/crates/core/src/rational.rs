//! Exact rational scalars and vectors, plus rational enclosures of square
//! roots and of `1/e`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// A rational vector; its length is the ambient dimension.
pub type VecQ = Vec<Rational>;

/// Default relative width (in bits) of square-root enclosures.
pub const DEFAULT_SQRT_BITS: u32 = 60;

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn vecq(v: &[i64]) -> VecQ {
    v.iter().map(|&x| qi(x)).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut s = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn norm2(a: &[Rational]) -> Rational {
    dot(a, a)
}

pub fn norm1(a: &[Rational]) -> Rational {
    a.iter().fold(Rational::zero(), |s, x| s + x.abs())
}

pub fn scale(a: &[Rational], s: &Rational) -> VecQ {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> VecQ {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> VecQ {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn neg(a: &[Rational]) -> VecQ {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back to a shifted division for values outside the direct range.
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn vec_to_f64(a: &[Rational]) -> Vec<f64> {
    a.iter().map(to_f64).collect()
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Round `x` to the nearest multiple of `2^-bits`.
pub fn round_dyadic(x: f64, bits: u32) -> Rational {
    let scaled = (x * 2f64.powi(bits as i32)).round();
    Rational::new(
        BigInt::from(scaled as i128),
        BigInt::one() << bits as usize,
    )
}

/// Scale a nonzero rational vector to the primitive integer vector on the
/// same ray.
pub fn primitive(a: &[Rational]) -> VecQ {
    let mut l = BigInt::one();
    for x in a {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = a.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return a.to_vec();
    }
    ints.into_iter()
        .map(|x| Rational::from_integer(x / &g))
        .collect()
}

pub fn pow(x: &Rational, e: u32) -> Rational {
    num_traits::pow::pow(x.clone(), e as usize)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Closed rational interval `[lo, hi]` bracketing a real number.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn exact(x: Rational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        to_f64(&self.lo) <= x && x <= to_f64(&self.hi)
    }

    /// Sum of enclosures of nonnegative quantities scaled by nonnegative weights.
    pub fn weighted_sum<'a>(items: impl IntoIterator<Item = (&'a Rational, &'a Enclosure)>) -> Self {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (w, e) in items {
            debug_assert!(!w.is_negative());
            lo += w * &e.lo;
            hi += w * &e.hi;
        }
        Self { lo, hi }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        debug_assert!(!s.is_negative());
        Self { lo: &self.lo * s, hi: &self.hi * s }
    }

    pub fn pow(&self, e: u32) -> Self {
        debug_assert!(!self.lo.is_negative());
        Self { lo: pow(&self.lo, e), hi: pow(&self.hi, e) }
    }
}

fn is_perfect_square(x: &BigInt) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.sqrt();
    if &r * &r == *x {
        Some(r)
    } else {
        None
    }
}

/// Rational enclosure of `sqrt(x)` for `x >= 0` with relative width at most
/// `2^-bits`. Exact when `x` is the square of a rational.
pub fn sqrt_enclosure(x: &Rational, bits: u32) -> Enclosure {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return Enclosure::exact(Rational::zero());
    }
    if let (Some(a), Some(b)) = (is_perfect_square(x.numer()), is_perfect_square(x.denom())) {
        return Enclosure::exact(Rational::new(a, b));
    }
    // sqrt(p/q) = sqrt(p q) / q. Scale p q by 4^k so the integer square root
    // carries enough significant bits.
    let pq = x.numer() * x.denom();
    let have = pq.bits() / 2;
    let k = (bits as u64 + 2).saturating_sub(have) as usize;
    let scaled = &pq << (2 * k);
    let r = scaled.sqrt();
    let den = x.denom() << k;
    let lo = Rational::new(r.clone(), den.clone());
    let hi = Rational::new(r + BigInt::one(), den);
    Enclosure { lo, hi }
}

/// Rational upper bound on Euler's number from the truncated factorial
/// series with tail bound `1/(N!·N)`.
pub fn e_upper() -> Rational {
    const N: u32 = 30;
    let mut s = Rational::zero();
    for k in 0..=N {
        s += Rational::new(BigInt::one(), factorial(k));
    }
    s + Rational::new(BigInt::one(), factorial(N) * BigInt::from(N))
}

/// Largest multiple of `2^-k` not exceeding `x`, with `k` chosen so that the
/// truncation loses at most a `2^-slack_bits` fraction of `x` (`x > 0`).
pub fn dyadic_floor_relative(x: &Rational, slack_bits: u32) -> Rational {
    assert!(x.is_positive());
    // log2 lower estimate of x
    let lg = x.numer().bits() as i64 - x.denom().bits() as i64 - 1;
    let k = (slack_bits as i64 + 1 - lg).max(0) as usize;
    let scaled = x * Rational::from_integer(BigInt::one() << k);
    Rational::new(scaled.floor().to_integer(), BigInt::one() << k)
}

pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rational::new(n, d))
    } else if s.contains('.') || s.contains('e') || s.contains('E') {
        Err(format!("decimal literals are not exact rationals: {s:?}"))
    } else {
        BigInt::from_str(s)
            .map(Rational::from_integer)
            .map_err(|e| format!("bad integer {s:?}: {e}"))
    }
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serde adapter: rationals as `"p/q"` strings; integers are accepted on input.
pub mod serde_q {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Str(String),
        Int(i64),
        Big(serde_json::Number),
    }

    fn decode(raw: Raw) -> std::result::Result<Rational, String> {
        match raw {
            Raw::Str(s) => parse_rational(&s),
            Raw::Int(i) => Ok(qi(i)),
            Raw::Big(n) => {
                if n.is_f64() {
                    Err(format!("non-integer number {n}; use a \"p/q\" string"))
                } else {
                    parse_rational(&n.to_string())
                }
            }
        }
    }

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        decode(Raw::deserialize(d)?).map_err(serde::de::Error::custom)
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(
            x: &Option<Rational>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_str(&format_rational(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<Rational>, D::Error> {
            let raw: Option<Raw> = Option::deserialize(d)?;
            raw.map(decode).transpose().map_err(serde::de::Error::custom)
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            let strs: Vec<String> = v.iter().map(format_rational).collect();
            strs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<VecQ, D::Error> {
            let raw: Vec<Raw> = Vec::deserialize(d)?;
            raw.into_iter()
                .map(decode)
                .collect::<std::result::Result<_, _>>()
                .map_err(serde::de::Error::custom)
        }
    }

    pub mod mat {
        use super::*;

        pub fn serialize<S: Serializer>(
            v: &[VecQ],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let strs: Vec<Vec<String>> = v
                .iter()
                .map(|row| row.iter().map(format_rational).collect())
                .collect();
            strs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<VecQ>, D::Error> {
            let raw: Vec<Vec<Raw>> = Vec::deserialize(d)?;
            raw.into_iter()
                .map(|row| row.into_iter().map(decode).collect::<std::result::Result<VecQ, _>>())
                .collect::<std::result::Result<_, _>>()
                .map_err(serde::de::Error::custom)
        }
    }
}

/// Wrapper that serializes a rational as a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QStr(pub Rational);

impl Serialize for QStr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_q::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for QStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        serde_q::deserialize(d).map(QStr)
    }
}

pub(crate) fn check_dim(v: &[Rational], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(())
}
