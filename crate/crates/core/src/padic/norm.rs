use std::fmt;
use std::ops::Mul;

use serde::{Serialize, Serializer};

/// A p-adic absolute value on the discrete scale `{0} ∪ {p^e}`.
///
/// Variant order gives the total order directly: `Zero` sits below every
/// power, and powers compare by exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NormValue {
    Zero,
    Pow(i64),
}

impl NormValue {
    pub const ONE: NormValue = NormValue::Pow(0);

    /// `log_p` of the norm; `None` for zero.
    pub fn log(self) -> Option<i64> {
        match self {
            NormValue::Zero => None,
            NormValue::Pow(e) => Some(e),
        }
    }

    pub fn powi(self, k: u32) -> NormValue {
        match self {
            NormValue::Zero if k == 0 => NormValue::ONE,
            NormValue::Zero => NormValue::Zero,
            NormValue::Pow(e) => NormValue::Pow(e * i64::from(k)),
        }
    }

    pub fn is_zero(self) -> bool {
        self == NormValue::Zero
    }

    /// Renders the norm for a concrete prime, e.g. `5^-2`.
    pub fn render(self, p: u32) -> String {
        match self {
            NormValue::Zero => "0".to_string(),
            NormValue::Pow(0) => "1".to_string(),
            NormValue::Pow(e) => format!("{p}^{e}"),
        }
    }
}

impl Mul for NormValue {
    type Output = NormValue;

    // Norms multiply by adding exponents.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: NormValue) -> NormValue {
        match (self, rhs) {
            (NormValue::Pow(a), NormValue::Pow(b)) => NormValue::Pow(a + b),
            _ => NormValue::Zero,
        }
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Zero => f.write_str("0"),
            NormValue::Pow(e) => write!(f, "p^{e}"),
        }
    }
}

/// Serialized as the exponent, `null` for zero.
impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.log() {
            Some(e) => serializer.serialize_i64(e),
            None => serializer.serialize_none(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_below_every_power() {
        assert!(NormValue::Zero < NormValue::Pow(-1000));
        assert!(NormValue::Pow(-3) < NormValue::Pow(2));
        assert_eq!(NormValue::Pow(4).max(NormValue::Pow(-1)), NormValue::Pow(4));
    }

    #[test]
    fn multiplication_adds_exponents() {
        assert_eq!(NormValue::Pow(-2) * NormValue::Pow(3), NormValue::Pow(1));
        assert_eq!(NormValue::Pow(7) * NormValue::Zero, NormValue::Zero);
        assert_eq!(NormValue::Pow(2).powi(3), NormValue::Pow(6));
    }
}
