use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Serialize, Serializer};

/// A single cell.
///
/// `Value` carries two notions of equality:
///
/// * **identity** (`PartialEq`/`Eq`/`Hash`/`Ord`): used for row dedup, content
///   hashing and distinct-value sets. `Null == Null`, and an integral `Float`
///   is the same value as the matching `Integer`.
/// * **comparison** ([`Value::compare`]): used by row predicates. Anything
///   involving `Null`, or a numeric against a text, is incomparable.
///
/// Floats held in a `Value` are always finite; constructors that could
/// produce a non-finite float yield `Null` instead.
#[derive(Debug, Clone)]
pub enum Value {
    Integer(i64),
    Float(f64),
    Text(String),
    Null,
}

impl Value {
    /// Builds a float value, mapping non-finite results to `Null`.
    pub fn float(f: f64) -> Value {
        if f.is_finite() {
            Value::Float(f)
        } else {
            Value::Null
        }
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Integer(_) | Value::Float(_))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Integer(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    /// Predicate-level ordering. `None` means the comparison is false for
    /// every comparison operator.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (a, b) if a.is_numeric() && b.is_numeric() => Some(numeric_cmp(a, b)),
            _ => None,
        }
    }

    /// Parses one CSV cell: an empty cell is `Null`, then `i64`, then a
    /// finite `f64`, otherwise `None` (the cell is not numeric).
    pub fn parse_numeric(cell: &str) -> Option<Value> {
        let cell = cell.trim();
        if let Ok(i) = cell.parse::<i64>() {
            return Some(Value::Integer(i));
        }
        match cell.parse::<f64>() {
            Ok(f) if f.is_finite() && looks_decimal(cell) => Some(Value::Float(f)),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Integer(_) | Value::Float(_) => 1,
            Value::Text(_) => 2,
        }
    }

    /// Integral floats inside the `i64` range collapse to their integer.
    pub(crate) fn canonical_int(&self) -> Option<i64> {
        match self {
            Value::Integer(i) => Some(*i),
            Value::Float(f) => float_as_exact_i64(*f),
            _ => None,
        }
    }
}

// `f64::from_str` also accepts "inf", "NaN" and friends; CSV cells only count
// as numeric when they are written with digits.
fn looks_decimal(cell: &str) -> bool {
    cell.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'))
        && cell.bytes().any(|b| b.is_ascii_digit())
}

fn float_as_exact_i64(f: f64) -> Option<i64> {
    // 2^63 is exactly representable; anything >= it does not fit.
    const LIMIT: f64 = 9_223_372_036_854_775_808.0;
    if f.fract() == 0.0 && (-LIMIT..LIMIT).contains(&f) {
        Some(f as i64)
    } else {
        None
    }
}

fn int_float_cmp(i: i64, f: f64) -> Ordering {
    if f.is_nan() {
        return Ordering::Less;
    }
    const LIMIT: f64 = 9_223_372_036_854_775_808.0;
    if f >= LIMIT {
        return Ordering::Less;
    }
    if f < -LIMIT {
        return Ordering::Greater;
    }
    let trunc = f.trunc();
    match i.cmp(&(trunc as i64)) {
        Ordering::Equal => 0.0f64.partial_cmp(&(f - trunc)).unwrap_or(Ordering::Equal),
        other => other,
    }
}

fn numeric_cmp(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Integer(x), Value::Integer(y)) => x.cmp(y),
        (Value::Integer(x), Value::Float(y)) => int_float_cmp(*x, *y),
        (Value::Float(x), Value::Integer(y)) => int_float_cmp(*y, *x).reverse(),
        (Value::Float(x), Value::Float(y)) => x.total_cmp(y),
        _ => unreachable!("numeric_cmp on non-numeric values"),
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Null, Value::Null) => Ordering::Equal,
            (a, b) if a.is_numeric() && b.is_numeric() => {
                // -0.0 and 0.0 are the same value
                match (a.canonical_int(), b.canonical_int()) {
                    (Some(x), Some(y)) => x.cmp(&y),
                    _ => numeric_cmp(a, b),
                }
            }
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Null => state.write_u8(0),
            Value::Text(s) => {
                state.write_u8(2);
                s.hash(state);
            }
            num => match num.canonical_int() {
                Some(i) => {
                    state.write_u8(1);
                    i.hash(state);
                }
                None => {
                    state.write_u8(3);
                    num.as_f64().unwrap_or_default().to_bits().hash(state);
                }
            },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Integer(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
            Value::Null => Ok(()),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Integer(i) => serializer.serialize_i64(*i),
            Value::Float(x) => serializer.serialize_f64(*x),
            Value::Text(s) => serializer.serialize_str(s),
            Value::Null => serializer.serialize_none(),
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Integer(i)
    }
}

impl From<f64> for Value {
    fn from(f: f64) -> Self {
        Value::float(f)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::hash_map::DefaultHasher;

    fn hash_of(v: &Value) -> u64 {
        let mut h = DefaultHasher::new();
        v.hash(&mut h);
        h.finish()
    }

    #[test]
    fn integral_float_is_the_same_value_as_integer() {
        assert_eq!(Value::Float(2.0), Value::Integer(2));
        assert_eq!(hash_of(&Value::Float(2.0)), hash_of(&Value::Integer(2)));
        assert_eq!(Value::Float(-0.0), Value::Float(0.0));
        assert_eq!(hash_of(&Value::Float(-0.0)), hash_of(&Value::Integer(0)));
        assert_ne!(Value::Float(2.5), Value::Integer(2));
    }

    #[test]
    fn large_integers_compare_exactly() {
        let big = (1i64 << 53) + 1;
        assert_ne!(Value::Integer(big), Value::Float((1u64 << 53) as f64));
        assert_eq!(Value::Integer(big).compare(&Value::Float((1u64 << 53) as f64)), Some(Ordering::Greater));
    }

    #[test]
    fn null_and_cross_type_comparisons_are_incomparable() {
        assert_eq!(Value::Null.compare(&Value::Null), None);
        assert_eq!(Value::Integer(1).compare(&Value::Null), None);
        assert_eq!(Value::Integer(1).compare(&Value::text("1")), None);
        assert_eq!(Value::Integer(1).compare(&Value::Float(2.5)), Some(Ordering::Less));
        assert_eq!(Value::text("a").compare(&Value::text("b")), Some(Ordering::Less));
    }

    #[test]
    fn numeric_cell_parsing() {
        assert_eq!(Value::parse_numeric("1"), Some(Value::Integer(1)));
        assert!(matches!(Value::parse_numeric("2.5"), Some(Value::Float(f)) if f == 2.5));
        assert!(matches!(Value::parse_numeric("1e3"), Some(Value::Float(_))));
        assert_eq!(Value::parse_numeric("NaN"), None);
        assert_eq!(Value::parse_numeric("inf"), None);
        assert_eq!(Value::parse_numeric("abc"), None);
        assert_eq!(Value::parse_numeric("2023-01-02"), None);
    }

    #[test]
    fn non_finite_floats_become_null() {
        assert!(Value::float(f64::INFINITY).is_null());
        assert!(Value::float(f64::NAN).is_null());
    }
}
