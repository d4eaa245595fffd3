//! Exact rational input values.
//!
//! Alphabet values stay exact rationals from config parsing through logical
//! evaluation, so positive-set membership never depends on float rounding.
//! Conversion to `f64` happens once, at the model boundary.

use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;
use num::{ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// One exact input value. Displays as `p` or `p/q` (`-1/3`, never `-0.333`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(Ratio<i64>);

impl Value {
    /// Panics if `denom` is zero.
    pub fn new(numer: i64, denom: i64) -> Self {
        Value(Ratio::new(numer, denom))
    }

    pub fn integer(n: i64) -> Self {
        Value(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Value(Ratio::zero())
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().expect("i64 ratio converts to f64")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Accepts integers (`-1`), fractions (`-1/3`), and exact decimals (`0.25`).
impl FromStr for Value {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((numer, denom)) = s.split_once('/') {
            let n: i64 = numer.trim().parse().map_err(|_| bad(s))?;
            let d: i64 = denom.trim().parse().map_err(|_| bad(s))?;
            if d == 0 {
                return Err(format!("zero denominator in value '{s}'"));
            }
            return Ok(Value::new(n, d));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad(s));
            }
            let negative = int.trim_start().starts_with('-');
            let whole: i64 = if int == "-" || int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad(s))?
            };
            let digits: i64 = frac.parse().map_err(|_| bad(s))?;
            let scale = 10i64
                .checked_pow(frac.len() as u32)
                .ok_or_else(|| bad(s))?;
            let frac_part = Ratio::new(digits, scale);
            let whole = Ratio::from_integer(whole);
            return Ok(Value(if negative { whole - frac_part } else { whole + frac_part }));
        }
        let n: i64 = s.parse().map_err(|_| bad(s))?;
        Ok(Value::integer(n))
    }
}

fn bad(s: &str) -> String {
    format!("cannot parse value '{s}' (expected an integer, p/q, or a decimal)")
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl de::Visitor<'_> for ValueVisitor {
            type Value = Value;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational value string like \"-1/3\" or an integer")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Value, E> {
                s.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, n: i64) -> Result<Value, E> {
                Ok(Value::integer(n))
            }

            fn visit_u64<E: de::Error>(self, n: u64) -> Result<Value, E> {
                i64::try_from(n)
                    .map(Value::integer)
                    .map_err(|_| E::custom("integer value out of range"))
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}
