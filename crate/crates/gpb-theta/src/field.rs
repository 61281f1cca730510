//! Exact coefficient fields: arbitrary-precision rationals and prime fields.
//!
//! Every computation in this crate happens over one of these two fields.
//! There is no floating point anywhere; zero tests are exact, which is what
//! makes the theorem-level checks meaningful.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Which field a computation runs over, in serialized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    Rationals { characteristic: u64 },
    PrimeField { characteristic: u64 },
}

impl FieldSpec {
    pub fn rationals() -> Self {
        FieldSpec::Rationals { characteristic: 0 }
    }

    pub fn prime(p: u64) -> Self {
        FieldSpec::PrimeField { characteristic: p }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Rationals { .. } => 0,
            FieldSpec::PrimeField { characteristic } => *characteristic,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse field element {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("element belongs to a different field")]
    FieldMismatch,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map(|sq| sq <= n).unwrap_or(false) {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An exact field. Implementations carry whatever runtime data the field
/// needs (the modulus, for prime fields); elements are plain values and all
/// arithmetic goes through the field object.
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + PartialEq + Eq + fmt::Debug + Send + Sync + 'static;

    fn spec(&self) -> FieldSpec;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn from_i64(&self, n: i64) -> Self::Elem;

    /// Canonical text form: `"n"` or `"n/d"` over the rationals, the residue
    /// as a decimal integer over a prime field.
    fn elem_to_string(&self, a: &Self::Elem) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem, FieldError>;

    /// JSON form reused across the whole CLI schema: strings over the
    /// rationals, plain numbers over prime fields.
    fn elem_to_json(&self, a: &Self::Elem) -> serde_json::Value;
    fn elem_from_json(&self, v: &serde_json::Value) -> Result<Self::Elem, FieldError>;

    /// An exact square root when one exists in the field.
    fn sqrt_elem(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, FieldError> {
        self.inv(b)
            .map(|binv| self.mul(a, &binv))
            .ok_or(FieldError::DivisionByZero)
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }
}

/// The field of arbitrary-precision rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn spec(&self) -> FieldSpec {
        FieldSpec::rationals()
    }

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn elem_to_string(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }

    fn parse_elem(&self, s: &str) -> Result<BigRational, FieldError> {
        let parse_int = |t: &str| -> Result<BigInt, FieldError> {
            t.trim().parse::<BigInt>().map_err(|e| FieldError::Parse {
                text: s.to_string(),
                reason: e.to_string(),
            })
        };
        match s.split_once('/') {
            None => Ok(BigRational::from_integer(parse_int(s)?)),
            Some((n, d)) => {
                let den = parse_int(d)?;
                if den.is_zero() {
                    return Err(FieldError::Parse {
                        text: s.to_string(),
                        reason: "zero denominator".into(),
                    });
                }
                Ok(BigRational::new(parse_int(n)?, den))
            }
        }
    }

    fn elem_to_json(&self, a: &BigRational) -> serde_json::Value {
        serde_json::Value::String(self.elem_to_string(a))
    }

    fn elem_from_json(&self, v: &serde_json::Value) -> Result<BigRational, FieldError> {
        match v {
            serde_json::Value::String(s) => self.parse_elem(s),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(self.from_i64(i))
                } else {
                    Err(FieldError::Parse {
                        text: n.to_string(),
                        reason: "not an integer".into(),
                    })
                }
            }
            other => Err(FieldError::Parse {
                text: other.to_string(),
                reason: "expected string or integer".into(),
            }),
        }
    }

    fn sqrt_elem(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_negative() {
            return None;
        }
        let n = a.numer();
        let d = a.denom();
        let sn = n.sqrt();
        let sd = d.sqrt();
        if &(&sn * &sn) == n && &(&sd * &sd) == d {
            Some(BigRational::new(sn, sd))
        } else {
            None
        }
    }
}

/// The prime field F_p, elements stored as canonical residues in `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(PrimeField { p })
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn reduce_i128(&self, n: i128) -> u64 {
        let p = self.p as i128;
        (((n % p) + p) % p) as u64
    }

    /// Residues are multiplied through u128 so any prime below 2^63 is safe.
    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn powmod(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mulmod(acc, base);
            }
            base = self.mulmod(base, base);
            exp >>= 1;
        }
        acc
    }

    /// A square root of `a` mod p if one exists (Tonelli–Shanks).
    pub fn sqrt(&self, a: u64) -> Option<u64> {
        let p = self.p;
        let a = a % p;
        if a == 0 {
            return Some(0);
        }
        if p == 2 {
            return Some(a);
        }
        if self.powmod(a, (p - 1) / 2) != 1 {
            return None;
        }
        if p % 4 == 3 {
            return Some(self.powmod(a, (p + 1) / 4));
        }
        // Tonelli–Shanks for p ≡ 1 (mod 4).
        let mut q = p - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while self.powmod(z, (p - 1) / 2) != p - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = self.powmod(z, q);
        let mut t = self.powmod(a, q);
        let mut r = self.powmod(a, (q + 1) / 2);
        while t != 1 {
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mulmod(t2, t2);
                i += 1;
            }
            let b = self.powmod(c, 1u64 << (m - i - 1));
            m = i;
            c = self.mulmod(b, b);
            t = self.mulmod(t, c);
            r = self.mulmod(r, b);
        }
        Some(r)
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn spec(&self) -> FieldSpec {
        FieldSpec::prime(self.p)
    }

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.p
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mulmod(*a, *b)
    }

    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.powmod(*a, self.p - 2))
        }
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn from_i64(&self, n: i64) -> u64 {
        self.reduce_i128(n as i128)
    }

    fn elem_to_string(&self, a: &u64) -> String {
        a.to_string()
    }

    fn parse_elem(&self, s: &str) -> Result<u64, FieldError> {
        let n = s.trim().parse::<i128>().map_err(|e| FieldError::Parse {
            text: s.to_string(),
            reason: e.to_string(),
        })?;
        Ok(self.reduce_i128(n))
    }

    fn elem_to_json(&self, a: &u64) -> serde_json::Value {
        serde_json::Value::Number((*a).into())
    }

    fn elem_from_json(&self, v: &serde_json::Value) -> Result<u64, FieldError> {
        match v {
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(|i| self.from_i64(i))
                .ok_or_else(|| FieldError::Parse {
                    text: n.to_string(),
                    reason: "not an integer".into(),
                }),
            serde_json::Value::String(s) => self.parse_elem(s),
            other => Err(FieldError::Parse {
                text: other.to_string(),
                reason: "expected number".into(),
            }),
        }
    }

    fn sqrt_elem(&self, a: &u64) -> Option<u64> {
        self.sqrt(*a)
    }
}
