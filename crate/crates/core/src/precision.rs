use crate::error::{Error, Result};

/// Working precision for archimedean balls (bits) and p-adic expansions (digits).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    pub arch_bits: u32,
    pub padic_digits: u32,
}

impl PrecisionContext {
    pub fn new(arch_bits: u32, padic_digits: u32) -> Result<Self> {
        if arch_bits < 64 {
            return Err(Error::Invalid("arch_bits must be at least 64".into()));
        }
        if padic_digits < 1 {
            return Err(Error::Invalid("padic_digits must be at least 1".into()));
        }
        Ok(PrecisionContext {
            arch_bits,
            padic_digits,
        })
    }

    pub fn doubled(&self) -> Self {
        PrecisionContext {
            arch_bits: self.arch_bits.saturating_mul(2),
            padic_digits: self.padic_digits.saturating_mul(2),
        }
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            arch_bits: 128,
            padic_digits: 30,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(PrecisionContext::new(32, 10).is_err());
        assert!(PrecisionContext::new(64, 0).is_err());
        assert_eq!(PrecisionContext::new(64, 1).unwrap().doubled().arch_bits, 128);
    }
}
