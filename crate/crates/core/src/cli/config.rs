//! Field-by-field validation of JSON run configs.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

/// Reads typed fields from a config object and records a diagnostic for
/// every missing, malformed, or unknown field.
pub struct Fields<'a> {
    obj: &'a Map<String, Value>,
    seen: BTreeSet<&'static str>,
    pub diags: Vec<Diagnostic>,
}

impl<'a> Fields<'a> {
    pub fn new(obj: &'a Map<String, Value>) -> Self {
        Self {
            obj,
            seen: BTreeSet::new(),
            diags: Vec::new(),
        }
    }

    pub fn error(&mut self, field: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn get(&mut self, name: &'static str, required: bool) -> Option<&'a Value> {
        self.seen.insert(name);
        match self.obj.get(name) {
            Some(Value::Null) | None => {
                if required {
                    self.error(name, "required field is missing");
                }
                None
            }
            Some(v) => Some(v),
        }
    }

    fn number(&mut self, name: &'static str, v: &Value) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.error(name, format!("expected a finite number, got {v}"));
                None
            }
        }
    }

    pub fn f64_req(&mut self, name: &'static str, positive: bool) -> Option<f64> {
        let v = self.get(name, true)?;
        let x = self.number(name, v)?;
        if positive && !(x > 0.0) {
            self.error(name, format!("must be positive, got {x}"));
            return None;
        }
        Some(x)
    }

    pub fn f64_opt(&mut self, name: &'static str, positive: bool) -> Option<f64> {
        let v = self.get(name, false)?;
        let x = self.number(name, v)?;
        if positive && !(x > 0.0) {
            self.error(name, format!("must be positive, got {x}"));
            return None;
        }
        Some(x)
    }

    fn integer(&mut self, name: &'static str, v: &Value, min: u64) -> Option<u64> {
        match v.as_u64() {
            Some(x) if x >= min => Some(x),
            Some(x) => {
                self.error(name, format!("must be at least {min}, got {x}"));
                None
            }
            None => {
                self.error(name, format!("expected a non-negative integer, got {v}"));
                None
            }
        }
    }

    pub fn u64_req(&mut self, name: &'static str, min: u64) -> Option<u64> {
        let v = self.get(name, true)?;
        self.integer(name, v, min)
    }

    pub fn u64_opt(&mut self, name: &'static str, min: u64) -> Option<u64> {
        let v = self.get(name, false)?;
        self.integer(name, v, min)
    }

    pub fn bool_opt(&mut self, name: &'static str) -> Option<bool> {
        let v = self.get(name, false)?;
        match v.as_bool() {
            Some(b) => Some(b),
            None => {
                self.error(name, format!("expected a boolean, got {v}"));
                None
            }
        }
    }

    fn complex_of(&mut self, name: &str, v: &Value) -> Option<Complex64> {
        match parse_complex(v) {
            Some(z) => Some(z),
            None => {
                self.error(name, format!("expected a number or [re, im], got {v}"));
                None
            }
        }
    }

    pub fn complex_req(&mut self, name: &'static str) -> Option<Complex64> {
        let v = self.get(name, true)?;
        self.complex_of(name, v)
    }

    pub fn complex_vec_opt(&mut self, name: &'static str) -> Option<Vec<Complex64>> {
        let v = self.get(name, false)?;
        let Some(items) = v.as_array() else {
            self.error(name, "expected an array of numbers or [re, im] pairs");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            out.push(self.complex_of(&format!("{name}[{i}]"), item)?);
        }
        Some(out)
    }

    pub fn rational_req(&mut self, name: &'static str) -> Option<BigRational> {
        let v = self.get(name, true)?;
        self.rational_of(name, v)
    }

    fn rational_of(&mut self, name: &str, v: &Value) -> Option<BigRational> {
        match parse_rational(v) {
            Some(r) => Some(r),
            None => {
                self.error(name, format!("expected a number or a \"p/q\" string, got {v}"));
                None
            }
        }
    }

    pub fn rational_vec_opt(&mut self, name: &'static str) -> Option<Vec<BigRational>> {
        let v = self.get(name, false)?;
        let Some(items) = v.as_array() else {
            self.error(name, "expected an array");
            return None;
        };
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            out.push(self.rational_of(&format!("{name}[{i}]"), item)?);
        }
        Some(out)
    }

    /// Raw value for fields with their own schema.
    pub fn raw_req(&mut self, name: &'static str) -> Option<&'a Value> {
        self.get(name, true)
    }

    pub fn raw_opt(&mut self, name: &'static str) -> Option<&'a Value> {
        self.get(name, false)
    }

    /// Flags keys that no accessor asked for and returns all diagnostics.
    pub fn finish(mut self) -> Vec<Diagnostic> {
        let extra: Vec<String> = self
            .obj
            .keys()
            .filter(|k| !self.seen.contains(k.as_str()))
            .cloned()
            .collect();
        for k in extra {
            self.error(&k, "unknown field for this command");
        }
        self.diags
    }
}

pub fn parse_complex(v: &Value) -> Option<Complex64> {
    if let Some(x) = v.as_f64() {
        return Some(Complex64::new(x, 0.0));
    }
    let a = v.as_array()?;
    if a.len() != 2 {
        return None;
    }
    Some(Complex64::new(a[0].as_f64()?, a[1].as_f64()?))
}

/// Integers, decimal numbers (taken at their exact binary value), and
/// strings `"p"` or `"p/q"`.
pub fn parse_rational(v: &Value) -> Option<BigRational> {
    if let Some(i) = v.as_i64() {
        return Some(BigRational::from_integer(i.into()));
    }
    if let Some(x) = v.as_f64() {
        return BigRational::from_float(x);
    }
    let s = v.as_str()?.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse::<BigInt>().ok()?, b.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if den == BigInt::from(0) {
        return None;
    }
    Some(BigRational::new(num, den))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Entries with real and imaginary parts uniform in `[-scale, scale)`,
/// drawn from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn random_complex_vec(seed: u64, n: usize, scale: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn diagnostics_cover_missing_bad_and_unknown() {
        let v = json!({"dt": -1.0, "bogus": 3, "z": [1, 2]});
        let obj = v.as_object().unwrap();
        let mut f = Fields::new(obj);
        assert_eq!(f.u64_req("n", 1), None);
        assert_eq!(f.f64_req("dt", true), None);
        assert_eq!(f.complex_req("z"), Some(Complex64::new(1.0, 2.0)));
        let d = f.finish();
        let fields: Vec<&str> = d.iter().map(|d| d.field.as_str()).collect();
        assert_eq!(fields, vec!["n", "dt", "bogus"]);
    }

    #[test]
    fn rationals() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(parse_rational(&json!("8/3")), Some(r(8, 3)));
        assert_eq!(parse_rational(&json!(" -1 / 2 ")), Some(r(-1, 2)));
        assert_eq!(parse_rational(&json!(6)), Some(r(6, 1)));
        assert_eq!(parse_rational(&json!(0.5)), Some(r(1, 2)));
        assert_eq!(parse_rational(&json!("1/0")), None);
        assert_eq!(parse_rational(&json!("x")), None);
    }

    #[test]
    fn random_vectors_are_seeded() {
        assert_eq!(random_complex_vec(3, 4, 1.0), random_complex_vec(3, 4, 1.0));
        assert_ne!(random_complex_vec(3, 4, 1.0), random_complex_vec(4, 4, 1.0));
        assert!(random_complex_vec(9, 50, 0.5).iter().all(|z| z.re.abs() <= 0.5 && z.im.abs() <= 0.5));
    }
}
