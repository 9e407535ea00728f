//! Numeric text format shared by every persisted artifact: 9 significant digits.

use crate::scalar::Scalar;

pub fn fmt_num<T: Scalar>(v: T) -> String {
    format!("{:.8e}", v.to_f64_lossy())
}

pub fn parse_num<T: Scalar>(s: &str) -> Option<T> {
    let v: f64 = s.trim().parse().ok()?;
    T::from_f64(v)
}
