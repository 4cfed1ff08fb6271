//! Threshold emptiness and universality for nested automata: picks a flattening for
//! the `(f, g)` pair and hands the result to the QA procedures.

use std::fmt;
use std::time::{Duration, Instant};

use crate::decide::{qa_emptiness_ext, qa_universality_ext, Universality};
use crate::error::{Error, Result};
use crate::flatten::{
    childsum_unbounded, clip_child_sums, default_multiplicity_cap, determinize_alphabet_extension,
    eliminate_silent, flatten_extremal_threshold, flatten_regular, map_child_weights,
    multiset_flatten, recurrent_childsum_bound, synchronize_children, CompressedQa, SilentQa,
};
use crate::lasso::Lasso;
use crate::limits::Limits;
use crate::nested::NestedAutomaton;
use crate::value::{FiniteValueFn, InfiniteValueFn};
use crate::weight::Weight;

#[derive(Clone, Debug)]
pub struct DecisionOptions {
    /// Restrict silent-transition elimination to accepting SCCs.
    pub silent_scc_opt: bool,
    /// Per-state instance cap of the multiset construction; defaults to the number of
    /// ultimate-child states.
    pub multiplicity_cap: Option<usize>,
    pub limits: Limits,
}

impl Default for DecisionOptions {
    fn default() -> Self {
        DecisionOptions {
            silent_scc_opt: true,
            multiplicity_cap: None,
            limits: Limits::none(),
        }
    }
}

/// How a query is reduced to a plain quantitative automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Outcome bits against the threshold, then emptiness at `1`.
    Threshold,
    /// Guess-and-verify flattening for finite-range `g`.
    Regular,
    /// Clip `Sum+`/`Sum-` to `SumB`, then [`Route::Regular`].
    Clip,
    /// Unboundedness check; if bounded, clip at the largest recurring child sum.
    Unbounded,
    /// Alphabet extension, synchronization and the multiset construction.
    Multiset,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Threshold => "threshold",
            Route::Regular => "regular",
            Route::Clip => "clip",
            Route::Unbounded => "unbounded",
            Route::Multiset => "multiset",
        })
    }
}

pub fn emptiness_route(f: InfiniteValueFn, g: &FiniteValueFn) -> Result<Route> {
    use FiniteValueFn::*;
    Ok(match (f.is_extremal(), g) {
        (true, SumB(_)) => Route::Regular,
        (true, _) => Route::Threshold,
        (false, Min | Max | SumB(_)) => Route::Regular,
        (false, SumMinus) => Route::Multiset,
        (false, SumPlus) if f == InfiniteValueFn::LimSupAvg => Route::Unbounded,
        (false, SumPlus) => {
            return Err(Error::Unsupported(
                "(LimInfAvg, Sum+) emptiness is open".into(),
            ))
        }
    })
}

pub fn universality_route(f: InfiniteValueFn, g: &FiniteValueFn) -> Result<Route> {
    if f.is_limit_average() {
        return Err(Error::Undecidable(format!(
            "universality of NQAs with {} parents is undecidable",
            f.name()
        )));
    }
    Ok(if g.has_finite_range() {
        Route::Regular
    } else {
        Route::Clip
    })
}

/// Sizes and timings of one decision.
#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub route: Option<Route>,
    pub flattened_states: usize,
    pub flattened_transitions: usize,
    pub qa_states: usize,
    pub qa_transitions: usize,
    pub phases: Vec<(&'static str, Duration)>,
}

impl Stats {
    fn time<T>(&mut self, name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.phases.push((name, start.elapsed()));
        out
    }

    fn record(&mut self, flat: &SilentQa, qa: &CompressedQa) {
        self.flattened_states = flat.num_states();
        self.flattened_transitions = flat.num_transitions();
        self.qa_states = qa.automaton.num_states();
        self.qa_transitions = qa.automaton.num_transitions();
    }
}

#[derive(Clone, Debug)]
pub struct EmptinessReport {
    /// Some word has value `>= lambda`.
    pub nonempty: bool,
    pub witness: Option<Lasso>,
    pub stats: Stats,
}

#[derive(Clone, Debug)]
pub struct UniversalityReport {
    /// Every word has value `>= lambda`.
    pub universal: bool,
    pub counterexample: Option<Lasso>,
    pub stats: Stats,
}

/// Does some word reach value `>= lambda`?
pub fn nqa_emptiness(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    lambda: &Weight,
    opts: &DecisionOptions,
) -> Result<EmptinessReport> {
    let route = emptiness_route(f, g)?;
    let mut stats = Stats {
        route: Some(route),
        ..Stats::default()
    };
    let limits = &opts.limits;
    let (nonempty, witness) = match route {
        Route::Threshold => {
            let flat = stats.time("flatten", || {
                flatten_extremal_threshold(n, f, g, lambda, limits)
            })?;
            let qa = stats.time("silent", || eliminate_silent(&flat, f, opts.silent_scc_opt))?;
            stats.record(&flat, &qa);
            stats.time("decide", || {
                qa_emptiness_ext(&qa.automaton, f, &Weight::one())
            })?
        }
        Route::Regular | Route::Clip => regular_emptiness(n, f, g, lambda, opts, &mut stats)?,
        Route::Unbounded => {
            let (unbounded, lambda_star) =
                stats.time("unbounded", || childsum_unbounded(n, f, g, limits))?;
            if unbounded {
                (true, None)
            } else {
                let bound = stats.time("bound", || {
                    recurrent_childsum_bound(n, &lambda_star, limits)
                })?;
                let n2 = map_child_weights(n, Weight::abs)?;
                let g2 = FiniteValueFn::sum_b(bound)?;
                regular_emptiness(&n2, f, &g2, lambda, opts, &mut stats)?
            }
        }
        Route::Multiset => {
            let ext = stats.time("extend", || determinize_alphabet_extension(n))?;
            let sync = synchronize_children(&ext.nqa)?;
            let cap = opts
                .multiplicity_cap
                .unwrap_or_else(|| default_multiplicity_cap(&sync));
            let flat = stats.time("flatten", || multiset_flatten(&sync, f, g, cap, limits))?;
            let qa = stats.time("silent", || eliminate_silent(&flat, f, opts.silent_scc_opt))?;
            stats.record(&flat, &qa);
            let (ne, w) = stats.time("decide", || qa_emptiness_ext(&qa.automaton, f, lambda))?;
            let project =
                |v: Vec<usize>| v.into_iter().map(|b| ext.projection[b]).collect::<Vec<_>>();
            let w = w
                .map(|l| qa.expand(&l))
                .and_then(|l| Lasso::new(project(l.stem), project(l.cycle)));
            (ne, w)
        }
    };
    Ok(EmptinessReport {
        nonempty,
        witness,
        stats,
    })
}

fn regular_emptiness(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    lambda: &Weight,
    opts: &DecisionOptions,
    stats: &mut Stats,
) -> Result<(bool, Option<Lasso>)> {
    let flat = stats.time("flatten", || flatten_regular(n, g, &opts.limits))?;
    let qa = stats.time("silent", || eliminate_silent(&flat, f, opts.silent_scc_opt))?;
    stats.record(&flat, &qa);
    let (ne, w) = stats.time("decide", || qa_emptiness_ext(&qa.automaton, f, lambda))?;
    Ok((ne, w.map(|l| qa.expand(&l))))
}

/// Do all words reach value `>= lambda`?
pub fn nqa_universality(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    lambda: &Weight,
    opts: &DecisionOptions,
) -> Result<UniversalityReport> {
    let route = universality_route(f, g)?;
    let mut stats = Stats {
        route: Some(route),
        ..Stats::default()
    };
    let clipped;
    let (n, g) = if route == Route::Clip {
        clipped = clip_child_sums(n, g, lambda)?;
        (&clipped.0, &clipped.1)
    } else {
        (n, g)
    };
    let flat = stats.time("flatten", || flatten_regular(n, g, &opts.limits))?;
    let qa = stats.time("silent", || eliminate_silent(&flat, f, opts.silent_scc_opt))?;
    stats.record(&flat, &qa);
    let u = stats.time("decide", || {
        qa_universality_ext(&qa.automaton, f, lambda, &opts.limits)
    })?;
    let (universal, counterexample) = match u {
        Universality::Universal => (true, None),
        Universality::Counterexample(l) => (false, Some(l)),
    };
    Ok(UniversalityReport {
        universal,
        counterexample,
        stats,
    })
}

/// The silent QA produced on the emptiness route of `(f, g)`; the multiset route yields
/// one over the extended alphabet.
pub fn flatten_for(
    n: &NestedAutomaton,
    f: InfiniteValueFn,
    g: &FiniteValueFn,
    lambda: &Weight,
    opts: &DecisionOptions,
) -> Result<SilentQa> {
    let limits = &opts.limits;
    match emptiness_route(f, g)? {
        Route::Threshold => flatten_extremal_threshold(n, f, g, lambda, limits),
        Route::Regular | Route::Clip => flatten_regular(n, g, limits),
        Route::Unbounded => {
            let (_, lambda_star) = childsum_unbounded(n, f, g, limits)?;
            let bound = recurrent_childsum_bound(n, &lambda_star, limits)?;
            flatten_regular(
                &map_child_weights(n, Weight::abs)?,
                &FiniteValueFn::sum_b(bound)?,
                limits,
            )
        }
        Route::Multiset => {
            let sync = synchronize_children(&determinize_alphabet_extension(n)?.nqa)?;
            let cap = opts
                .multiplicity_cap
                .unwrap_or_else(|| default_multiplicity_cap(&sync));
            multiset_flatten(&sync, f, g, cap, limits)
        }
    }
}
