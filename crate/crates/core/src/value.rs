//! Finite- and infinite-word value functions.

use std::fmt;
use std::str::FromStr;

use crate::error::ValueError;
use crate::weight::{ExtValue, Weight};

/// Aggregators over infinite weight sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InfiniteValueFn {
    Inf,
    Sup,
    LimInf,
    LimSup,
    LimInfAvg,
    LimSupAvg,
}

impl InfiniteValueFn {
    pub const ALL: [InfiniteValueFn; 6] = [
        InfiniteValueFn::Inf,
        InfiniteValueFn::Sup,
        InfiniteValueFn::LimInf,
        InfiniteValueFn::LimSup,
        InfiniteValueFn::LimInfAvg,
        InfiniteValueFn::LimSupAvg,
    ];

    pub fn is_prefix_independent(self) -> bool {
        !matches!(self, InfiniteValueFn::Inf | InfiniteValueFn::Sup)
    }

    /// Inf, Sup, LimInf or LimSup.
    pub fn is_extremal(self) -> bool {
        !self.is_limit_average()
    }

    pub fn is_limit_average(self) -> bool {
        matches!(
            self,
            InfiniteValueFn::LimInfAvg | InfiniteValueFn::LimSupAvg
        )
    }

    /// Sup and LimSup pick a large element; Inf and LimInf a small one.
    pub fn is_sup_like(self) -> bool {
        matches!(self, InfiniteValueFn::Sup | InfiniteValueFn::LimSup)
    }

    pub fn name(self) -> &'static str {
        match self {
            InfiniteValueFn::Inf => "Inf",
            InfiniteValueFn::Sup => "Sup",
            InfiniteValueFn::LimInf => "LimInf",
            InfiniteValueFn::LimSup => "LimSup",
            InfiniteValueFn::LimInfAvg => "LimInfAvg",
            InfiniteValueFn::LimSupAvg => "LimSupAvg",
        }
    }
}

impl fmt::Display for InfiniteValueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown value function `{0}`")]
pub struct UnknownValueFn(pub String);

impl FromStr for InfiniteValueFn {
    type Err = UnknownValueFn;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InfiniteValueFn::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownValueFn(s.to_string()))
    }
}

/// Aggregators over finite weight sequences (child value functions).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiniteValueFn {
    Min,
    Max,
    SumPlus,
    SumMinus,
    SumB(Weight),
}

/// Value-function kind without the bound, used for routing tables and CLI tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiniteKind {
    Min,
    Max,
    SumPlus,
    SumMinus,
    SumB,
}

impl FiniteKind {
    pub const ALL: [FiniteKind; 5] = [
        FiniteKind::Min,
        FiniteKind::Max,
        FiniteKind::SumB,
        FiniteKind::SumPlus,
        FiniteKind::SumMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FiniteKind::Min => "Min",
            FiniteKind::Max => "Max",
            FiniteKind::SumPlus => "Sum+",
            FiniteKind::SumMinus => "Sum-",
            FiniteKind::SumB => "SumB",
        }
    }
}

impl fmt::Display for FiniteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FiniteKind {
    type Err = UnknownValueFn;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FiniteKind::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| UnknownValueFn(s.to_string()))
    }
}

impl FiniteValueFn {
    /// `SumB` with a validated non-negative bound.
    pub fn sum_b(bound: Weight) -> Result<Self, ValueError> {
        if bound.is_negative() {
            return Err(ValueError::NegativeBound);
        }
        Ok(FiniteValueFn::SumB(bound))
    }

    pub fn kind(&self) -> FiniteKind {
        match self {
            FiniteValueFn::Min => FiniteKind::Min,
            FiniteValueFn::Max => FiniteKind::Max,
            FiniteValueFn::SumPlus => FiniteKind::SumPlus,
            FiniteValueFn::SumMinus => FiniteKind::SumMinus,
            FiniteValueFn::SumB(_) => FiniteKind::SumB,
        }
    }

    pub fn bound(&self) -> Option<&Weight> {
        match self {
            FiniteValueFn::SumB(b) => Some(b),
            _ => None,
        }
    }

    /// Min, Max and SumB have finitely many possible values on a finite automaton.
    pub fn has_finite_range(&self) -> bool {
        !matches!(self, FiniteValueFn::SumPlus | FiniteValueFn::SumMinus)
    }

    pub fn start(&self) -> Accumulator {
        Accumulator::Empty
    }

    /// Extends a running aggregate by one weight.
    pub fn step(&self, acc: &Accumulator, w: &Weight) -> Accumulator {
        use Accumulator::*;
        match (self, acc) {
            (_, Crossed(b)) => Crossed(b.clone()),
            (FiniteValueFn::Min, Empty) | (FiniteValueFn::Max, Empty) => Running(w.clone()),
            (FiniteValueFn::Min, Running(m)) => Running(std::cmp::min(m, w).clone()),
            (FiniteValueFn::Max, Running(m)) => Running(std::cmp::max(m, w).clone()),
            (FiniteValueFn::SumPlus, Empty) => Running(w.abs()),
            (FiniteValueFn::SumPlus, Running(s)) => Running(s + &w.abs()),
            (FiniteValueFn::SumMinus, Empty) => Running(-w.abs()),
            (FiniteValueFn::SumMinus, Running(s)) => Running(s - &w.abs()),
            (FiniteValueFn::SumB(b), Empty) => clamp_sum(w.clone(), b),
            (FiniteValueFn::SumB(b), Running(s)) => clamp_sum(s + w, b),
        }
    }

    /// Value of the aggregate; `None` before the first weight.
    pub fn finish(&self, acc: &Accumulator) -> Option<Weight> {
        match acc {
            Accumulator::Empty => None,
            Accumulator::Running(v) | Accumulator::Crossed(v) => Some(v.clone()),
        }
    }
}

fn clamp_sum(s: Weight, b: &Weight) -> Accumulator {
    if &s > b {
        Accumulator::Crossed(b.clone())
    } else if s < -b {
        Accumulator::Crossed(-b)
    } else {
        Accumulator::Running(s)
    }
}

impl fmt::Display for FiniteValueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiniteValueFn::SumB(b) => write!(f, "SumB({b})"),
            other => f.write_str(other.kind().name()),
        }
    }
}

/// Running state of a finite aggregate. `Crossed` is absorbing (Sum^B hit a bound).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Accumulator {
    Empty,
    Running(Weight),
    Crossed(Weight),
}

/// Applies a finite-word value function to a nonempty sequence.
pub fn eval_finite(g: &FiniteValueFn, xs: &[Weight]) -> Result<Weight, ValueError> {
    let first = xs.first().ok_or(ValueError::EmptySequence)?;
    Ok(match g {
        FiniteValueFn::Min => xs.iter().min().unwrap_or(first).clone(),
        FiniteValueFn::Max => xs.iter().max().unwrap_or(first).clone(),
        FiniteValueFn::SumPlus => xs.iter().map(Weight::abs).sum(),
        FiniteValueFn::SumMinus => -xs.iter().map(Weight::abs).sum::<Weight>(),
        FiniteValueFn::SumB(b) => {
            let mut sum = Weight::zero();
            for x in xs {
                sum += x;
                if &sum > b {
                    return Ok(b.clone());
                }
                if sum < -b {
                    return Ok(-b);
                }
            }
            sum
        }
    })
}

/// The ultimately periodic sequence `stem · loop^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicSeq {
    pub stem: Vec<Weight>,
    pub cycle: Vec<Weight>,
}

impl PeriodicSeq {
    /// Returns `None` for an empty loop.
    pub fn new(stem: Vec<Weight>, cycle: Vec<Weight>) -> Option<Self> {
        if cycle.is_empty() {
            None
        } else {
            Some(PeriodicSeq { stem, cycle })
        }
    }

    fn cycle_mean(&self) -> Weight {
        let n = Weight::from_int(self.cycle.len() as i64);
        self.cycle.iter().cloned().sum::<Weight>() / n
    }
}

/// Exact value of an infinite-word value function on `stem · loop^ω`.
pub fn eval_lasso(f: InfiniteValueFn, s: &PeriodicSeq) -> ExtValue {
    let all = || s.stem.iter().chain(&s.cycle);
    let v = match f {
        InfiniteValueFn::Inf => all().min(),
        InfiniteValueFn::Sup => all().max(),
        InfiniteValueFn::LimInf => s.cycle.iter().min(),
        InfiniteValueFn::LimSup => s.cycle.iter().max(),
        InfiniteValueFn::LimInfAvg | InfiniteValueFn::LimSupAvg => {
            return ExtValue::Finite(s.cycle_mean())
        }
    };
    ExtValue::Finite(v.expect("loop is nonempty").clone())
}

/// Finite-prefix approximation of `f` over the values returned so far: Sup/LimSup as
/// maximum, Inf/LimInf as minimum, the averages as arithmetic mean.
pub fn running_aggregate(f: InfiniteValueFn, values: &[Weight]) -> Result<Weight, ValueError> {
    if values.is_empty() {
        return Err(ValueError::EmptySequence);
    }
    Ok(match f {
        InfiniteValueFn::Sup | InfiniteValueFn::LimSup => values.iter().max().unwrap().clone(),
        InfiniteValueFn::Inf | InfiniteValueFn::LimInf => values.iter().min().unwrap().clone(),
        InfiniteValueFn::LimInfAvg | InfiniteValueFn::LimSupAvg => {
            values.iter().cloned().sum::<Weight>() / Weight::from_int(values.len() as i64)
        }
    })
}
