//! Plain-text formats.
//!
//! A QA is a list of lines `letter : weight, source -> target`; the source of the first
//! transition is initial. An optional `final: q1 q2 ...` line lists accepting states,
//! otherwise every state accepts. An NQA has one `@PARENT` block whose weights are child
//! labels (`0` silent) and blocks `@CHILD 1` .. `@CHILD k`. A `#` at the start of a line
//! or after whitespace starts a comment.

use std::collections::HashMap;
use std::fmt::{self, Debug};

use crate::automaton::{Automaton, AutomatonBuilder};
use crate::error::{AutomatonError, ParseWeightError};
use crate::flatten::FlatWeight;
use crate::nested::{validate_nqa, Label, NestedAutomaton, Severity};
use crate::weight::{ExtValue, Weight};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Transition payloads that have a textual token.
pub trait WeightToken: Clone + Ord + Debug + Sized {
    fn parse_token(s: &str) -> Result<Self, String>;
    fn render(&self) -> String;
}

impl WeightToken for Weight {
    fn parse_token(s: &str) -> Result<Self, String> {
        s.parse::<Weight>().map_err(|e| match e {
            ParseWeightError::ZeroDenominator => "zero denominator".to_string(),
            other => other.to_string(),
        })
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

impl WeightToken for Label {
    fn parse_token(s: &str) -> Result<Self, String> {
        s.parse::<u32>()
            .map(Label)
            .map_err(|_| format!("malformed child label `{s}`"))
    }

    fn render(&self) -> String {
        self.0.to_string()
    }
}

impl WeightToken for FlatWeight {
    fn parse_token(s: &str) -> Result<Self, String> {
        match s.strip_prefix('_') {
            Some("") => Ok(FlatWeight::Silent),
            Some(rest) => Weight::parse_token(rest).map(FlatWeight::Carry),
            None => ExtValue::parse_token(s).map(FlatWeight::Value),
        }
    }

    fn render(&self) -> String {
        match self {
            FlatWeight::Silent => "_".into(),
            FlatWeight::Carry(w) => format!("_{w}"),
            FlatWeight::Value(v) => v.render(),
        }
    }
}

impl WeightToken for ExtValue {
    fn parse_token(s: &str) -> Result<Self, String> {
        match s {
            "inf" | "+inf" => Ok(ExtValue::PosInf),
            "-inf" => Ok(ExtValue::NegInf),
            _ => Weight::parse_token(s).map(ExtValue::Finite),
        }
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

struct RawTransition {
    line: usize,
    letter: String,
    weight: (String, usize),
    source: String,
    target: String,
}

#[derive(Default)]
struct Block {
    header_line: usize,
    transitions: Vec<RawTransition>,
    finals: Option<Vec<(String, usize, usize)>>,
}

/// Strips a comment: `#` at line start or after whitespace.
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

/// Trimmed slice of `s[start..end]` with its 1-based column.
fn piece(line: &str, start: usize, end: usize) -> (&str, usize) {
    let raw = &line[start..end];
    let lead = raw.len() - raw.trim_start().len();
    (raw.trim(), start + lead + 1)
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && !s.contains(|c: char| c.is_whitespace() || c == ',' || c == ':')
        && !s.contains("->")
        && !s.starts_with('#')
        && !s.starts_with('@')
}

fn parse_transition(line: &str, no: usize) -> Result<RawTransition, ParseError> {
    let colon = line
        .find(':')
        .ok_or_else(|| ParseError::at(no, 1, "expected `letter : weight, source -> target`"))?;
    let (letter, lcol) = piece(line, 0, colon);
    if !valid_name(letter) {
        return Err(ParseError::at(
            no,
            lcol,
            format!("invalid letter `{letter}`"),
        ));
    }
    let comma = line[colon..]
        .find(',')
        .map(|i| i + colon)
        .ok_or_else(|| ParseError::at(no, colon + 2, "expected `,` after the weight"))?;
    let (weight, wcol) = piece(line, colon + 1, comma);
    if weight.is_empty() {
        return Err(ParseError::at(no, wcol, "missing weight"));
    }
    let arrow = line[comma..]
        .find("->")
        .map(|i| i + comma)
        .ok_or_else(|| ParseError::at(no, comma + 2, "expected `->`"))?;
    let (source, scol) = piece(line, comma + 1, arrow);
    let (target, tcol) = piece(line, arrow + 2, line.len());
    if !valid_name(source) {
        return Err(ParseError::at(
            no,
            scol,
            format!("invalid state name `{source}`"),
        ));
    }
    if !valid_name(target) {
        return Err(ParseError::at(
            no,
            tcol,
            format!("invalid state name `{target}`"),
        ));
    }
    Ok(RawTransition {
        line: no,
        letter: letter.to_string(),
        weight: (weight.to_string(), wcol),
        source: source.to_string(),
        target: target.to_string(),
    })
}

/// `final:` directive, if `line` is one.
fn parse_final(line: &str) -> Option<Vec<(String, usize)>> {
    let t = line.trim_start();
    let rest = t.strip_prefix("final")?;
    let rest_trim = rest.trim_start();
    let body = rest_trim.strip_prefix(':')?;
    if body.contains("->") {
        return None;
    }
    let offset = line.len() - body.len();
    let mut out = Vec::new();
    let mut pos = 0;
    for tok in body.split_whitespace() {
        let i = body[pos..].find(tok).unwrap() + pos;
        out.push((tok.to_string(), offset + i + 1));
        pos = i + tok.len();
    }
    Some(out)
}

enum Header {
    Parent,
    Child(usize),
}

fn parse_header(line: &str, no: usize) -> Result<Option<Header>, ParseError> {
    let t = line.trim();
    if !t.starts_with('@') {
        return Ok(None);
    }
    let col = line.len() - line.trim_start().len() + 1;
    let mut toks = t.split_whitespace();
    match toks.next() {
        Some("@PARENT") if toks.next().is_none() => Ok(Some(Header::Parent)),
        Some("@CHILD") => {
            let idx = toks
                .next()
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| {
                    ParseError::at(no, col, "expected `@CHILD <index>` with index >= 1")
                })?;
            if toks.next().is_some() {
                return Err(ParseError::at(no, col, "trailing tokens after child index"));
            }
            Ok(Some(Header::Child(idx)))
        }
        _ => Err(ParseError::at(
            no,
            col,
            format!("unknown block marker `{t}`"),
        )),
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n').enumerate().map(|(i, l)| {
        let l = l.strip_suffix('\r').unwrap_or(l);
        (i + 1, strip_comment(l))
    })
}

fn read_line_into(block: &mut Block, line: &str, no: usize) -> Result<(), ParseError> {
    if let Some(names) = parse_final(line) {
        let list = block.finals.get_or_insert_with(Vec::new);
        list.extend(names.into_iter().map(|(n, c)| (n, no, c)));
        return Ok(());
    }
    block.transitions.push(parse_transition(line, no)?);
    Ok(())
}

fn build_block<W: WeightToken>(
    block: &Block,
    alphabet: &[String],
    what: &str,
) -> Result<Automaton<W>, ParseError> {
    let first = block.transitions.first().ok_or_else(|| {
        ParseError::at(
            block.header_line.max(1),
            1,
            format!("{what} has no transitions"),
        )
    })?;
    let mut b = AutomatonBuilder::new(alphabet);
    b.initial(&first.source);
    for t in &block.transitions {
        let w = W::parse_token(&t.weight.0).map_err(|m| ParseError::at(t.line, t.weight.1, m))?;
        b.transition(&t.source, &t.letter, &t.target, w)
            .map_err(|e| ParseError::at(t.line, 1, e.to_string()))?;
    }
    if let Some(finals) = &block.finals {
        b.no_finals();
        for (name, line, col) in finals {
            b.final_state(name).map_err(|e| match e {
                AutomatonError::UnknownState(s) => ParseError::at(
                    *line,
                    *col,
                    format!("unknown state `{s}` in final directive"),
                ),
                other => ParseError::at(*line, *col, other.to_string()),
            })?;
        }
    }
    b.build()
        .map_err(|e| ParseError::at(first.line, 1, e.to_string()))
}

fn alphabet_of<'a>(blocks: impl Iterator<Item = &'a Block>) -> Vec<String> {
    let mut alphabet: Vec<String> = Vec::new();
    for b in blocks {
        for t in &b.transitions {
            if !alphabet.contains(&t.letter) {
                alphabet.push(t.letter.clone());
            }
        }
    }
    alphabet
}

/// Parses a QA whose weights are given by `W`'s token syntax.
pub fn parse_automaton<W: WeightToken>(text: &str) -> Result<Automaton<W>, ParseError> {
    let mut block = Block::default();
    for (no, line) in lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        if parse_header(line, no)?.is_some() {
            return Err(ParseError::at(
                no,
                1,
                "block markers are only allowed in NQA files",
            ));
        }
        read_line_into(&mut block, line, no)?;
    }
    if block.transitions.is_empty() {
        return Err(ParseError::at(1, 1, "empty file: no transitions"));
    }
    let alphabet = alphabet_of(std::iter::once(&block));
    build_block(&block, &alphabet, "automaton")
}

pub fn parse_qa(text: &str) -> Result<Automaton<Weight>, ParseError> {
    parse_automaton(text)
}

pub fn parse_nqa(text: &str) -> Result<NestedAutomaton, ParseError> {
    let mut parent: Option<Block> = None;
    let mut children: HashMap<usize, Block> = HashMap::new();
    // None before any marker; Some(0) parent; Some(i) child i
    let mut current: Option<usize> = None;
    for (no, line) in lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        match parse_header(line, no)? {
            Some(Header::Parent) => {
                if parent.is_some() {
                    return Err(ParseError::at(no, 1, "duplicate @PARENT block"));
                }
                parent = Some(Block {
                    header_line: no,
                    ..Block::default()
                });
                current = Some(0);
            }
            Some(Header::Child(i)) => {
                if children.contains_key(&i) {
                    return Err(ParseError::at(no, 1, format!("duplicate child index {i}")));
                }
                children.insert(
                    i,
                    Block {
                        header_line: no,
                        ..Block::default()
                    },
                );
                current = Some(i);
            }
            None => {
                let block = match current {
                    None => {
                        return Err(ParseError::at(
                            no,
                            1,
                            "missing @PARENT block marker before transitions",
                        ))
                    }
                    Some(0) => parent.as_mut().unwrap(),
                    Some(i) => children.get_mut(&i).unwrap(),
                };
                read_line_into(block, line, no)?;
            }
        }
    }
    let parent = parent.ok_or_else(|| ParseError::at(1, 1, "missing @PARENT block"))?;
    let k = children.len();
    if k == 0 {
        return Err(ParseError::at(parent.header_line, 1, "no @CHILD block"));
    }
    for i in 1..=k {
        if !children.contains_key(&i) {
            let max = *children.keys().max().unwrap();
            let line = children[&max].header_line;
            return Err(ParseError::at(
                line,
                1,
                format!("child indices must be 1..{k} without gaps; {i} is missing"),
            ));
        }
    }
    for t in &parent.transitions {
        if let Ok(Label(l)) = Label::parse_token(&t.weight.0) {
            if l as usize > k {
                return Err(ParseError::at(
                    t.line,
                    t.weight.1,
                    format!("label {l} references nonexistent child (k = {k})"),
                ));
            }
        }
    }
    let ordered: Vec<&Block> = std::iter::once(&parent)
        .chain((1..=k).map(|i| &children[&i]))
        .collect();
    let alphabet = alphabet_of(ordered.iter().copied());
    let p: Automaton<Label> = build_block(&parent, &alphabet, "@PARENT block")?;
    let mut cs = Vec::with_capacity(k);
    for i in 1..=k {
        cs.push(build_block::<Weight>(
            &children[&i],
            &alphabet,
            &format!("@CHILD {i} block"),
        )?);
    }
    let n = NestedAutomaton::new(p, cs)
        .map_err(|e| ParseError::at(parent.header_line, 1, e.to_string()))?;
    if let Some(d) = validate_nqa(&n)
        .into_iter()
        .find(|d| d.severity == Severity::Error)
    {
        return Err(ParseError::at(parent.header_line, 1, d.message));
    }
    Ok(n)
}

/// State names to print: the stored ones when they are distinct and well-formed,
/// otherwise `q0, q1, ...`.
fn printable_names<W>(a: &Automaton<W>) -> Vec<String> {
    let names = a.state_names();
    let mut seen = std::collections::HashSet::new();
    if names
        .iter()
        .all(|n| valid_name(n) && seen.insert(n.as_str()))
    {
        names.to_vec()
    } else {
        (0..names.len()).map(|i| format!("q{i}")).collect()
    }
}

struct Body<'a, W>(&'a Automaton<W>);

impl<W: WeightToken> fmt::Display for Body<'_, W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0;
        let names = printable_names(a);
        // transitions are sorted by source and the initial state is 0
        for t in a.transitions() {
            writeln!(
                f,
                "{} : {}, {} -> {}",
                a.letter_name(t.letter),
                t.weight.render(),
                names[t.source],
                names[t.target]
            )?;
        }
        if !a.all_final() {
            let fin: Vec<&str> = (0..a.num_states())
                .filter(|&q| a.is_final(q))
                .map(|q| names[q].as_str())
                .collect();
            if fin.is_empty() {
                writeln!(f, "final:")?;
            } else {
                writeln!(f, "final: {}", fin.join(" "))?;
            }
        }
        Ok(())
    }
}

pub fn serialize_automaton<W: WeightToken>(a: &Automaton<W>) -> String {
    Body(a).to_string()
}

pub fn serialize_qa(a: &Automaton<Weight>) -> String {
    serialize_automaton(a)
}

pub fn serialize_nqa(n: &NestedAutomaton) -> String {
    let mut out = String::from("@PARENT\n");
    out.push_str(&serialize_automaton(n.parent()));
    for (i, c) in n.children().iter().enumerate() {
        out.push_str(&format!("@CHILD {}\n", i + 1));
        out.push_str(&serialize_automaton(c.base()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_loop() {
        let a = parse_qa("a : 1, q -> q").unwrap();
        assert_eq!(a.num_states(), 1);
        assert!(a.is_final(0));
        assert_eq!(a.transitions()[0].weight, Weight::from_int(1));
        assert_eq!(serialize_qa(&a), "a : 1, q -> q\n");
    }

    #[test]
    fn final_directive() {
        let a = parse_qa("a : 1, q -> p\nb : 2, p -> q\nfinal: p").unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(a.state_name(a.initial()), "q");
        assert!(!a.is_final(a.state_index("q").unwrap()));
        assert!(a.is_final(a.state_index("p").unwrap()));
        let text = serialize_qa(&a);
        assert_eq!(text, "a : 1, q -> p\nb : 2, p -> q\nfinal: p\n");
        let b = parse_qa(&text).unwrap();
        assert_eq!(b.transitions(), a.transitions());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_qa("a : 1/0, q -> q").unwrap_err();
        assert_eq!((e.line, e.column), (1, 5));
        assert!(e.message.contains("zero denominator"));
        let e = parse_qa("# c\na : 1, q -> q\nfinal: z").unwrap_err();
        assert_eq!((e.line, e.column), (3, 8));
        assert!(parse_qa("").unwrap_err().message.contains("empty"));
        let e = parse_qa("a : 1 q -> q").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_qa("a : 1, q q").unwrap_err();
        assert!(e.message.contains("->"));
    }

    #[test]
    fn comments_crlf_and_hash_letters() {
        let a = parse_qa("# header\r\na#0 : -3/2, q -> q # loop\r\n\r\n").unwrap();
        assert_eq!(a.alphabet(), ["a#0"]);
        assert_eq!(a.transitions()[0].weight, Weight::ratio(-3, 2).unwrap());
    }

    #[test]
    fn nqa_blocks() {
        let text = "@PARENT\nr : 1, q0 -> q1\nr : 0, q1 -> q1\no : 0, q0 -> q0\no : 0, q1 -> q0\n@CHILD 1\nr : 2, c -> d\no : 1, c -> c\nfinal: d\n";
        let n = parse_nqa(text).unwrap();
        assert_eq!(n.num_children(), 1);
        let t = n.parent().successors(0, 0).next().unwrap();
        assert_eq!(t.weight, Label(1));
        let again = parse_nqa(&serialize_nqa(&n)).unwrap();
        assert_eq!(again.parent().transitions(), n.parent().transitions());
        assert_eq!(
            again.child(0).base().transitions(),
            n.child(0).base().transitions()
        );
    }

    #[test]
    fn nqa_errors() {
        let e = parse_nqa("@PARENT\na : 2, q -> q\n@CHILD 1\na : 1, c -> d\nfinal: d").unwrap_err();
        assert!(e.message.contains("nonexistent child"), "{e}");
        assert_eq!(e.line, 2);
        assert!(parse_nqa("a : 1, q -> q")
            .unwrap_err()
            .message
            .contains("@PARENT"));
        let e =
            parse_nqa("@PARENT\na : 1, q -> q\n@CHILD 1\na : 1, c -> d\n@CHILD 1\na : 1, c -> d")
                .unwrap_err();
        assert!(e.message.contains("duplicate child"));
        let e = parse_nqa("@PARENT\na : 1, q -> q\n@CHILD 2\na : 1, c -> d").unwrap_err();
        assert!(e.message.contains("missing"));
        // incomplete parent is rejected like the validator does
        let e = parse_nqa("@PARENT\na : 1, q -> q\n@CHILD 1\nb : 1, c -> d\nfinal: d").unwrap_err();
        assert!(e.message.contains("incomplete"), "{e}");
    }

    #[test]
    fn unsafe_names_are_renamed() {
        let a: Automaton<Weight> = Automaton::from_parts(
            vec!["a".into()],
            vec!["x y".into()],
            0,
            vec![crate::automaton::Transition {
                source: 0,
                letter: 0,
                target: 0,
                weight: Weight::one(),
            }],
            vec![true],
        )
        .unwrap();
        assert_eq!(serialize_qa(&a), "a : 1, q0 -> q0\n");
    }
}
