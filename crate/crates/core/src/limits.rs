//! Cooperative resource limits checked inside exploration loops.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct Limits {
    deadline: Option<Instant>,
    max_states: Option<usize>,
}

impl Limits {
    pub fn none() -> Self {
        Limits::default()
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.deadline = Some(Instant::now() + timeout);
        self
    }

    pub fn with_max_states(mut self, max: usize) -> Self {
        self.max_states = Some(max);
        self
    }

    /// Fails once the deadline has passed.
    pub fn check(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }

    /// Deadline check plus a bound on generated states.
    pub fn check_states(&self, count: usize) -> Result<()> {
        if let Some(max) = self.max_states {
            if count > max {
                return Err(Error::StateLimit(max));
            }
        }
        self.check()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_trip() {
        assert!(Limits::none().check_states(usize::MAX).is_ok());
        assert_eq!(
            Limits::none().with_max_states(3).check_states(4),
            Err(Error::StateLimit(3))
        );
        let l = Limits::none().with_timeout(Duration::ZERO);
        assert_eq!(l.check(), Err(Error::Timeout));
    }
}
