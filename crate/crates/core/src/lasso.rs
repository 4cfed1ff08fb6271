use std::fmt;

use crate::automaton::Letter;
use crate::error::AutomatonError;

/// The ultimately periodic word `stem · cycle^ω` over letter indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lasso {
    pub stem: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl Lasso {
    /// Returns `None` when the loop is empty.
    pub fn new(stem: Vec<Letter>, cycle: Vec<Letter>) -> Option<Self> {
        if cycle.is_empty() {
            None
        } else {
            Some(Lasso { stem, cycle })
        }
    }

    /// Letter at position `t` (0-based) of the infinite word.
    pub fn letter_at(&self, t: usize) -> Letter {
        if t < self.stem.len() {
            self.stem[t]
        } else {
            self.cycle[(t - self.stem.len()) % self.cycle.len()]
        }
    }

    /// Canonical position in the finite lasso graph: stem positions are themselves,
    /// loop positions are folded modulo the loop length.
    pub fn position(&self, t: usize) -> usize {
        if t < self.stem.len() {
            t
        } else {
            self.stem.len() + (t - self.stem.len()) % self.cycle.len()
        }
    }

    pub fn num_positions(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    /// Successor of a canonical position.
    pub fn next_position(&self, p: usize) -> usize {
        if p + 1 < self.num_positions() {
            p + 1
        } else {
            self.stem.len()
        }
    }

    pub fn len(&self) -> usize {
        self.num_positions()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Parses two space-separated letter lists against an alphabet.
    pub fn parse(alphabet: &[String], stem: &str, cycle: &str) -> Result<Self, AutomatonError> {
        let lookup = |tok: &str| {
            alphabet
                .iter()
                .position(|l| l == tok)
                .ok_or_else(|| AutomatonError::UnknownLetter(tok.to_string()))
        };
        let stem = stem
            .split_whitespace()
            .map(lookup)
            .collect::<Result<Vec<_>, _>>()?;
        let cycle = cycle
            .split_whitespace()
            .map(lookup)
            .collect::<Result<Vec<_>, _>>()?;
        Lasso::new(stem, cycle).ok_or_else(|| AutomatonError::UnknownLetter("<empty loop>".into()))
    }

    pub fn display<'a>(&'a self, alphabet: &'a [String]) -> LassoDisplay<'a> {
        LassoDisplay {
            lasso: self,
            alphabet,
        }
    }

    pub fn stem_names(&self, alphabet: &[String]) -> String {
        join(&self.stem, alphabet)
    }

    pub fn cycle_names(&self, alphabet: &[String]) -> String {
        join(&self.cycle, alphabet)
    }
}

fn join(letters: &[Letter], alphabet: &[String]) -> String {
    letters
        .iter()
        .map(|&a| alphabet[a].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

pub struct LassoDisplay<'a> {
    lasso: &'a Lasso,
    alphabet: &'a [String],
}

impl fmt::Display for LassoDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stem: {}\nloop: {}",
            self.lasso.stem_names(self.alphabet),
            self.lasso.cycle_names(self.alphabet)
        )
    }
}

/// All lassos with `1 <= |stem| + |loop| <= max_len` over `k` letters, in
/// length-lexicographic order of `(total length, stem length, stem, loop)`.
pub fn enumerate_lassos(k: usize, max_len: usize) -> impl Iterator<Item = Lasso> {
    (1..=max_len).flat_map(move |total| {
        (0..total).flat_map(move |stem_len| {
            words(k, stem_len).flat_map(move |stem| {
                words(k, total - stem_len).map(move |cycle| Lasso {
                    stem: stem.clone(),
                    cycle,
                })
            })
        })
    })
}

/// All words of length `n` over `k` letters in lexicographic order.
pub fn words(k: usize, n: usize) -> impl Iterator<Item = Vec<Letter>> {
    let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    (0..count).map(move |mut idx| {
        let mut w = vec![0; n];
        for slot in w.iter_mut().rev() {
            *slot = (idx % k as u128) as usize;
            idx /= k as u128;
        }
        w
    })
}
