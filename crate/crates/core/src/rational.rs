//! Exact rational scalars and the handful of helpers the rest of the crate
//! needs on top of `num_rational::BigRational`: powers of two, the `"p/q"`
//! text form, sound square-root brackets, and exact comparisons against
//! powers of two whose exponents are too large to materialize.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The scalar type of the whole library.
pub type Rat = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `2^e` for any signed exponent.
pub fn pow2(e: i64) -> Rat {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rat::from_integer(p)
    } else {
        Rat::new(BigInt::one(), p)
    }
}

pub fn pow4(e: i64) -> Rat {
    pow2(2 * e)
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// `"p/q"` in lowest terms; integers print without a denominator.
pub fn fmt_rat(x: &Rat) -> String {
    x.to_string()
}

pub fn sup_norm(s: &[Rat]) -> Rat {
    s.iter().map(|v| v.abs()).max().unwrap_or_else(Rat::zero)
}

pub fn norm_sq(s: &[Rat]) -> Rat {
    s.iter().fold(Rat::zero(), |acc, v| acc + v * v)
}

fn bits(n: &BigInt) -> i64 {
    n.bits() as i64
}

/// Exact test of `x <= 2^e`; never builds `2^e` when the answer follows
/// from bit lengths alone.
pub fn le_pow2(x: &Rat, e: i64) -> bool {
    if !x.is_positive() {
        return true;
    }
    let (p, q) = (x.numer(), x.denom());
    let d = bits(p) - bits(q);
    if e > d {
        return true;
    }
    if e < d {
        return false;
    }
    // e == d: compare p against q * 2^e exactly
    if e >= 0 {
        p <= &(q << e as u64)
    } else {
        &(p << e.unsigned_abs()) <= q
    }
}

/// Least integer `e` with `x <= 2^e`, for `x > 0`.
pub fn ceil_log2(x: &Rat) -> i64 {
    assert!(x.is_positive(), "ceil_log2 of a non-positive rational");
    let d = bits(x.numer()) - bits(x.denom());
    if le_pow2(x, d) {
        d
    } else {
        d + 1
    }
}

/// Least integer `e` with `x <= 4^e`, for `x > 0`.
pub fn ceil_log4(x: &Rat) -> i64 {
    let e2 = ceil_log2(x);
    // 4^e = 2^(2e) >= x  iff  2e >= e2
    e2.div_euclid(2) + i64::from(e2.rem_euclid(2) != 0)
}

fn is_square(n: &BigInt) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Exact square root when `x` is the square of a rational.
pub fn exact_sqrt(x: &Rat) -> Option<Rat> {
    let p = is_square(x.numer())?;
    let q = is_square(x.denom())?;
    Some(Rat::new(p, q))
}

/// Rational bracket `(lo, hi)` with `lo^2 <= x <= hi^2` and `hi - lo <= 2^-k`.
/// Perfect squares come back as a degenerate bracket.
pub fn sqrt_bounds(x: &Rat, k: u32) -> Result<(Rat, Rat)> {
    if x.is_negative() {
        return Err(Error::Domain(format!("sqrt of negative rational {x}")));
    }
    if let Some(r) = exact_sqrt(x) {
        return Ok((r.clone(), r));
    }
    // floor(sqrt(x * 4^k)) / 2^k
    let scaled = (x.numer() << (2 * k as u64)) / x.denom();
    let lo_int = scaled.sqrt();
    let scale = BigInt::one() << k as u64;
    let lo = Rat::new(lo_int.clone(), scale.clone());
    let hi = Rat::new(lo_int + 1, scale);
    Ok((lo, hi))
}

pub fn sqrt_upper(x: &Rat, k: u32) -> Rat {
    sqrt_bounds(x, k).map(|b| b.1).unwrap_or_else(|_| Rat::zero())
}

pub fn sqrt_lower(x: &Rat, k: u32) -> Rat {
    sqrt_bounds(x, k).map(|b| b.0).unwrap_or_else(|_| Rat::zero())
}

/// Precision schedule used when deciding strict inequalities between sums
/// of square roots.
pub const SQRT_PRECISIONS: [u32; 6] = [16, 32, 64, 128, 256, 512];

/// Certifies `sum sqrt(lhs_i) < sum sqrt(rhs_j)` by refining brackets until
/// the upper sum on the left drops below the lower sum on the right.
/// Returns the precision that decided it, or `None` when no schedule step
/// separates the two sides (which is the case for exact equality).
pub fn certify_root_sum_lt(lhs: &[Rat], rhs: &[Rat]) -> Option<u32> {
    if lhs.iter().chain(rhs).all(|t| exact_sqrt(t).is_some()) {
        let l: Rat = lhs.iter().map(|t| exact_sqrt(t).unwrap()).sum();
        let r: Rat = rhs.iter().map(|t| exact_sqrt(t).unwrap()).sum();
        return (l < r).then_some(0);
    }
    for &k in &SQRT_PRECISIONS {
        let l: Rat = lhs.iter().map(|t| sqrt_upper(t, k)).sum();
        let r: Rat = rhs.iter().map(|t| sqrt_lower(t, k)).sum();
        if l < r {
            return Some(k);
        }
    }
    None
}

/// Sign of `a - b` for two values of the form `m * 2^e` without expanding
/// the powers.
pub fn cmp_scaled(a: &Rat, ea: i64, b: &Rat, eb: i64) -> Ordering {
    match (a.signum().cmp(&b.signum()), a.is_zero() && b.is_zero()) {
        (_, true) => Ordering::Equal,
        (Ordering::Equal, _) => {
            if a.is_negative() {
                return cmp_scaled(&-b, eb, &-a, ea);
            }
            // a * 2^ea  vs  b * 2^eb  <=>  a / b  vs  2^(eb - ea)
            let ratio = a / b;
            let e = eb - ea;
            if le_pow2(&ratio, e) {
                if ratio == pow2_if_small(e) {
                    Ordering::Equal
                } else {
                    Ordering::Less
                }
            } else {
                Ordering::Greater
            }
        }
        (o, _) => o,
    }
}

fn pow2_if_small(e: i64) -> Rat {
    if e.unsigned_abs() < 1 << 20 {
        pow2(e)
    } else {
        // a ratio of small rationals cannot equal a power this large
        Rat::zero()
    }
}
