use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{CoreError, Result};

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a.max(1)
}

/// A rational number kept in lowest terms with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "RationalRepr", into = "RationalRepr")]
pub struct Rational {
    num: i64,
    den: i64,
}

/// Accepts either a bare integer or a `[num, den]` pair in configuration files.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Int(i64),
    Pair(i64, i64),
}

impl From<RationalRepr> for Rational {
    fn from(r: RationalRepr) -> Self {
        match r {
            RationalRepr::Int(n) => Rational::new(n, 1),
            RationalRepr::Pair(n, d) => Rational::new(n, d),
        }
    }
}

impl From<Rational> for RationalRepr {
    fn from(r: Rational) -> Self {
        if r.den == 1 {
            RationalRepr::Int(r.num)
        } else {
            RationalRepr::Pair(r.num, r.den)
        }
    }
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational denominator must be nonzero");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den);
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn integer(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn sub_int(&self, k: i64) -> Self {
        Rational::new(self.num - k * self.den, self.den)
    }

    fn cmp_exact(&self, other: &Rational) -> std::cmp::Ordering {
        // Denominators are positive so cross multiplication preserves order.
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A compact interval `[q1, q2]` with exactly representable rational endpoints.
/// The derived order (lexicographic in the normalized endpoints) only serves
/// map keys; containment queries go through [`RationalInterval::contains`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalInterval {
    pub q1: Rational,
    pub q2: Rational,
}

impl RationalInterval {
    pub fn new(q1: Rational, q2: Rational) -> Result<Self> {
        if q1.cmp_exact(&q2) != std::cmp::Ordering::Less {
            return Err(CoreError::InvalidInterval(format!(
                "need q1 < q2, got [{q1}, {q2}]"
            )));
        }
        Ok(RationalInterval { q1, q2 })
    }

    /// `[a, b]` with integer endpoints.
    pub fn integers(a: i64, b: i64) -> Self {
        RationalInterval::new(Rational::integer(a), Rational::integer(b))
            .expect("integer interval endpoints must satisfy a < b")
    }

    pub fn start(&self) -> f64 {
        self.q1.to_f64()
    }

    pub fn end(&self) -> f64 {
        self.q2.to_f64()
    }

    pub fn length(&self) -> f64 {
        self.end() - self.start()
    }

    /// The interval translated left by one time unit, `I - 1`; exact on the endpoints.
    pub fn shift_back_one(&self) -> Self {
        RationalInterval {
            q1: self.q1.sub_int(1),
            q2: self.q2.sub_int(1),
        }
    }

    pub fn contains(&self, other: &RationalInterval) -> bool {
        self.q1.cmp_exact(&other.q1) != std::cmp::Ordering::Greater
            && other.q2.cmp_exact(&self.q2) != std::cmp::Ordering::Greater
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.q1, self.q2)
    }
}
