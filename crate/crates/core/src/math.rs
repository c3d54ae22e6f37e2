//! Float helpers routed through `libm` so the crate builds without `std`.

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `ln(n!)` via the log-gamma function.
#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Logarithm base used for the idf term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LogBase {
    #[default]
    #[cfg_attr(feature = "serde", serde(rename = "e"))]
    E,
    #[cfg_attr(feature = "serde", serde(rename = "2"))]
    Two,
    #[cfg_attr(feature = "serde", serde(rename = "10"))]
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => libm::log(x),
            LogBase::Two => libm::log2(x),
            LogBase::Ten => libm::log10(x),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }
}

impl core::str::FromStr for LogBase {
    type Err = crate::features::FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            "10" => Ok(LogBase::Ten),
            other => Err(crate::features::FeatureError::UnknownOption(other.into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_small_values() {
        assert!((ln_factorial(0) - 0.0).abs() < 1e-12);
        assert!((ln_factorial(1) - 0.0).abs() < 1e-12);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn bases() {
        assert!((LogBase::Two.log(8.0) - 3.0).abs() < 1e-12);
        assert!((LogBase::Ten.log(1000.0) - 3.0).abs() < 1e-12);
        assert!((LogBase::E.log(core::f64::consts::E) - 1.0).abs() < 1e-12);
    }
}
