//! Recompression policy: period, locality threshold and trigger selection.

use std::fmt;

use crate::error::EngineError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyParams {
    /// Recompression period in updates.
    pub m: u64,
    /// Locality threshold.
    pub tau: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self { m: 32, tau: 0.30 }
    }
}

impl PolicyParams {
    pub fn new(m: u64, tau: f64) -> Result<Self, EngineError> {
        if m == 0 {
            return Err(EngineError::Policy("period m must be at least 1".into()));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(EngineError::Policy(format!(
                "tau must lie in (0, 1), got {tau}"
            )));
        }
        Ok(Self { m, tau })
    }
}

/// Why a recompression happened.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Trigger {
    Init,
    Periodic,
    Locality,
    Validity,
}

impl Trigger {
    pub fn label(self) -> &'static str {
        match self {
            Trigger::Init => "init",
            Trigger::Periodic => "periodic",
            Trigger::Locality => "locality",
            Trigger::Validity => "validity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Init, Self::Periodic, Self::Locality, Self::Validity]
            .into_iter()
            .find(|t| t.label() == s)
    }
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Affected critical cells over all critical cells, guarded against an empty
/// critical complex.
pub fn locality_ratio(affected_critical: usize, critical_total: usize) -> f64 {
    affected_critical as f64 / critical_total.max(1) as f64
}

/// Decides whether update `t` recompresses. Triggers are checked in the order
/// periodic, locality, validity; the first that fires names the event.
pub fn should_recompress(
    policy: &PolicyParams,
    t: u64,
    rho: f64,
    gate_valid: bool,
) -> Option<Trigger> {
    if t.is_multiple_of(policy.m) {
        Some(Trigger::Periodic)
    } else if rho >= policy.tau {
        Some(Trigger::Locality)
    } else if !gate_valid {
        Some(Trigger::Validity)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(locality_ratio(3, 10), 0.3);
        assert_eq!(locality_ratio(0, 17), 0.0);
        assert_eq!(locality_ratio(0, 0), 0.0);
        assert_eq!(locality_ratio(4, 4), 1.0);
    }

    #[test]
    fn triggers() {
        let p = PolicyParams::default();
        assert_eq!(
            should_recompress(&p, 32, 0.0, true),
            Some(Trigger::Periodic)
        );
        assert_eq!(should_recompress(&p, 5, 0.29, true), None);
        assert_eq!(
            should_recompress(&p, 5, 0.30, true),
            Some(Trigger::Locality)
        );
        assert_eq!(
            should_recompress(&p, 5, 0.0, false),
            Some(Trigger::Validity)
        );
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PolicyParams::new(0, 0.3).is_err());
        assert!(PolicyParams::new(4, 0.0).is_err());
        assert!(PolicyParams::new(4, 1.0).is_err());
        assert!(PolicyParams::new(4, 0.99).is_ok());
    }

    #[test]
    fn labels_roundtrip() {
        for t in [
            Trigger::Init,
            Trigger::Periodic,
            Trigger::Locality,
            Trigger::Validity,
        ] {
            assert_eq!(Trigger::parse(t.label()), Some(t));
        }
    }
}
