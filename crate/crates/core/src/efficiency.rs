//! Efficiency `E(P) = n! / (2^c * e(P))` and the integer thresholds the
//! searches compare against.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::CoreError;

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

fn pow2(k: usize) -> BigUint {
    BigUint::one() << k
}

fn saturate(x: &BigUint) -> u128 {
    x.to_u128().unwrap_or(u128::MAX)
}

/// Exact nonnegative rational `E_thr - E_tot`.
#[derive(Clone, PartialEq, Eq)]
pub struct Bandwidth {
    num: BigUint,
    den: BigUint,
}

impl Bandwidth {
    pub fn zero() -> Self {
        Bandwidth {
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    pub fn new(num: u64, den: u64) -> Result<Self, CoreError> {
        if den == 0 {
            return Err(CoreError::InvalidBandwidth("zero denominator"));
        }
        Ok(Bandwidth {
            num: BigUint::from(num),
            den: BigUint::from(den),
        })
    }

    pub fn from_ratio(num: BigUint, den: BigUint) -> Result<Self, CoreError> {
        if den.is_zero() {
            return Err(CoreError::InvalidBandwidth("zero denominator"));
        }
        Ok(Bandwidth { num, den })
    }

    /// `E_tot + self` for `n` elements and `budget` comparisons, as an
    /// unreduced fraction.
    pub fn threshold_ratio(&self, n: usize, budget: usize) -> (BigUint, BigUint) {
        let num = factorial(n) * &self.den + &self.num * pow2(budget);
        (num, &self.den * pow2(budget))
    }

    /// Inverse of [`Bandwidth::threshold_ratio`].
    pub fn from_threshold_ratio(n: usize, budget: usize, num: &BigUint, den: &BigUint) -> Result<Self, CoreError> {
        let tot = factorial(n) * den;
        let scaled = num * pow2(budget);
        if den.is_zero() || scaled < tot {
            return Err(CoreError::InvalidBandwidth("threshold below E_tot"));
        }
        Ok(Bandwidth {
            num: scaled - tot,
            den: den * pow2(budget),
        })
    }

    /// Equality as rationals.
    pub fn same_value(&self, other: &Bandwidth) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_f64(&self.num, &self.den)
    }
}

impl fmt::Debug for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn parse_digits(s: &str) -> Option<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigUint::parse_bytes(s.as_bytes(), 10)
}

/// Accepts `a/b` or a plain decimal such as `0.05`.
impl FromStr for Bandwidth {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num = parse_digits(a.trim()).ok_or(CoreError::ParseBandwidth)?;
            let den = parse_digits(b.trim()).ok_or(CoreError::ParseBandwidth)?;
            if den.is_zero() {
                return Err(CoreError::InvalidBandwidth("zero denominator"));
            }
            return Ok(Bandwidth { num, den });
        }
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return Err(CoreError::ParseBandwidth);
        }
        let mut digits = alloc::string::String::from(if int.is_empty() { "0" } else { int });
        digits.push_str(frac);
        let num = parse_digits(&digits).ok_or(CoreError::ParseBandwidth)?;
        let den = (0..frac.len()).fold(BigUint::one(), |acc, _| acc * 10u32);
        Ok(Bandwidth { num, den })
    }
}

fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    // Shift both into f64 range before dividing.
    let shift = num.bits().max(den.bits()).saturating_sub(1000) as usize;
    let a = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}

/// Exact efficiency `n! / (2^c * e)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Efficiency {
    num: BigUint,
    den: BigUint,
}

impl Efficiency {
    pub fn of(n: usize, c: usize, extensions: u128) -> Self {
        assert!(extensions > 0, "a poset has at least one linear extension");
        Efficiency {
            num: factorial(n),
            den: pow2(c) * BigUint::from(extensions),
        }
    }

    /// `n! / 2^budget`, the efficiency of a total order reached with the
    /// whole budget.
    pub fn total_order(n: usize, budget: usize) -> Self {
        Efficiency::of(n, budget, 1)
    }

    pub fn to_f64(&self) -> f64 {
        ratio_f64(&self.num, &self.den)
    }
}

impl PartialOrd for Efficiency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Efficiency {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Debug for Efficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.to_f64())
    }
}

/// Per-level extension-count bounds for a search of `n` elements in
/// `budget` comparisons with a bandwidth per level.
///
/// `E(P at c) <= E_thr(c)` holds iff `e(P) >= min_extensions(c)`, and a
/// poset with `e(P) > max_extensions(c)` cannot be sorted in the remaining
/// comparisons.
#[derive(Clone, Debug)]
pub struct Thresholds {
    n: usize,
    budget: usize,
    schedule: Vec<Bandwidth>,
    min_e: Vec<u128>,
}

impl Thresholds {
    pub fn new(n: usize, budget: usize, bandwidth: Bandwidth) -> Result<Self, CoreError> {
        let schedule = (0..=budget).map(|_| bandwidth.clone()).collect();
        Self::scheduled(n, budget, schedule)
    }

    /// One bandwidth per level `0..=budget`. The schedule must not decrease
    /// with the level, otherwise a sortable poset below the threshold could
    /// have both children above it.
    pub fn scheduled(n: usize, budget: usize, schedule: Vec<Bandwidth>) -> Result<Self, CoreError> {
        if schedule.len() != budget + 1 {
            return Err(CoreError::InvalidBandwidth("schedule needs one entry per level"));
        }
        let nf = factorial(n);
        let mut min_e = Vec::with_capacity(budget + 1);
        for (c, bw) in schedule.iter().enumerate() {
            let Bandwidth { num, den } = bw;
            // E_thr < 2 E_tot  <=>  num/den < n!/2^C
            if num * pow2(budget) >= &nf * den {
                return Err(CoreError::InvalidBandwidth(
                    "requires E_tot <= E_thr < 2 * E_tot",
                ));
            }
            if c > 0 {
                let prev = &schedule[c - 1];
                if &prev.num * den > num * &prev.den {
                    return Err(CoreError::InvalidBandwidth(
                        "bandwidth must not decrease with the level",
                    ));
                }
            }
            let scaled = &nf * den;
            let divisor = &scaled + num * pow2(budget);
            let x = &scaled << (budget - c);
            let q = (&x + &divisor - 1u32) / &divisor;
            min_e.push(saturate(&q));
        }
        Ok(Thresholds {
            n,
            budget,
            schedule,
            min_e,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Bandwidth of level 0.
    pub fn bandwidth(&self) -> &Bandwidth {
        &self.schedule[0]
    }

    pub fn bandwidth_at(&self, level: usize) -> &Bandwidth {
        &self.schedule[level]
    }

    /// Smallest `e` with `E(P at level) <= E_thr(level)`.
    #[inline]
    pub fn min_extensions(&self, level: usize) -> u128 {
        self.min_e[level]
    }

    /// Largest `e` a poset at `level` may have and still be sortable.
    #[inline]
    pub fn max_extensions(&self, level: usize) -> u128 {
        let r = self.budget - level;
        if r >= 128 {
            u128::MAX
        } else {
            1u128 << r
        }
    }

    #[inline]
    pub fn prunable(&self, extensions: u128, level: usize) -> bool {
        extensions > self.max_extensions(level)
    }

    #[inline]
    pub fn within_threshold(&self, extensions: u128, level: usize) -> bool {
        extensions >= self.min_e[level]
    }

    pub fn e_tot(&self) -> Efficiency {
        Efficiency::total_order(self.n, self.budget)
    }

    pub fn e_thr_f64(&self, level: usize) -> f64 {
        self.e_tot().to_f64() + self.schedule[level].to_f64()
    }
}
