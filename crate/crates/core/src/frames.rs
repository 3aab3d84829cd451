//! Rules, justification frames, frame validation and complementation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::facts::{Fact, FactSpace};

/// Default cap on the number of bodies generated by [`complementation`].
pub const DEFAULT_BODY_CAP: u64 = 1_000_000;

/// `head <- body`. Bodies are sets; ordering is head first, then body.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Fact,
    pub body: BTreeSet<Fact>,
}

impl Rule {
    /// Builds a rule, rejecting logical heads and empty bodies.
    pub fn new<I: IntoIterator<Item = Fact>>(head: Fact, body: I) -> Result<Rule> {
        let body: BTreeSet<Fact> = body.into_iter().collect();
        if head.is_logical() {
            return Err(Error::Contract(format!("rule head `{head}` is a logical fact")));
        }
        if body.is_empty() {
            return Err(Error::Contract(format!("rule for `{head}` has an empty body")));
        }
        Ok(Rule { head, body })
    }

    /// Parses `head <- b1, b2` (a trailing `.` is accepted).
    pub fn parse(text: &str) -> Result<Rule> {
        let text = text.trim().trim_end_matches('.');
        let (head, body) = text
            .split_once("<-")
            .ok_or_else(|| Error::Contract(format!("`{text}` is not of the form `head <- body`")))?;
        let head = Fact::parse(head)?;
        let body = body
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Fact::parse)
            .collect::<Result<Vec<_>>>()?;
        Rule::new(head, body)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <-", self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A justification frame: fact space, defined facts and rules.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Frame {
    pub space: FactSpace,
    pub defined: BTreeSet<Fact>,
    pub rules: BTreeSet<Rule>,
}

impl Frame {
    pub fn new(space: FactSpace, defined: BTreeSet<Fact>, rules: BTreeSet<Rule>) -> Frame {
        Frame {
            space,
            defined,
            rules,
        }
    }

    /// Frame whose defined facts are the rule heads and their complements,
    /// over the space spanned by every fact mentioned.
    pub fn from_rules<I: IntoIterator<Item = Rule>>(rules: I) -> Frame {
        let rules: BTreeSet<Rule> = rules.into_iter().collect();
        let mut defined = BTreeSet::new();
        for r in &rules {
            defined.insert(r.head);
            defined.insert(r.head.complement());
        }
        let space = FactSpace::spanned_by(rules.iter().flat_map(|r| std::iter::once(&r.head).chain(&r.body)));
        Frame::new(space, defined, rules)
    }

    pub fn is_defined(&self, x: Fact) -> bool {
        self.defined.contains(&x)
    }

    pub fn is_open(&self, x: Fact) -> bool {
        !self.defined.contains(&x)
    }

    pub fn rules_for(&self, x: Fact) -> impl Iterator<Item = &Rule> + '_ {
        // Rules sort by head first, so the rules for `x` form a contiguous range.
        let lo = Rule {
            head: x,
            body: BTreeSet::new(),
        };
        self.rules.range(lo..).take_while(move |r| r.head == x)
    }

    /// The cases of `x`: every body of a rule with head `x`.
    pub fn cases(&self, x: Fact) -> Result<Vec<&BTreeSet<Fact>>> {
        if !self.is_defined(x) {
            return Err(Error::Contract(format!("`{x}` is open and has no cases")));
        }
        Ok(self.rules_for(x).map(|r| &r.body).collect())
    }

    /// Open facts of the space, logical constants included.
    pub fn opens(&self) -> Vec<Fact> {
        self.space
            .facts()
            .into_iter()
            .filter(|f| !self.defined.contains(f))
            .collect()
    }

    /// True when the rules for every negative defined fact are exactly the
    /// complementation of the rules for its positive counterpart.
    pub fn is_complementary(&self) -> bool {
        self.defined.iter().filter(|x| !x.is_negated()).all(|&x| {
            let pos: BTreeSet<Rule> = self.rules_for(x).cloned().collect();
            match complementation(&pos, DEFAULT_BODY_CAP) {
                Ok(all) => {
                    let expected: BTreeSet<&BTreeSet<Fact>> = all
                        .iter()
                        .filter(|r| r.head == x.complement())
                        .map(|r| &r.body)
                        .collect();
                    let actual: BTreeSet<&BTreeSet<Fact>> =
                        self.rules_for(x.complement()).map(|r| &r.body).collect();
                    expected == actual
                }
                Err(_) => false,
            }
        })
    }
}

/// A single violation of the frame invariants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FrameViolation {
    LogicalDefined(Fact),
    OutsideSpace(Fact),
    UnpairedDefined(Fact),
    MissingRule(Fact),
    EmptyBody(Rule),
    HeadNotDefined(Rule),
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameViolation::LogicalDefined(x) => write!(f, "logical fact `{x}` is listed as defined"),
            FrameViolation::OutsideSpace(x) => write!(f, "`{x}` is not in the fact space"),
            FrameViolation::UnpairedDefined(x) => {
                write!(f, "`{x}` is defined but its complement `{}` is not", x.complement())
            }
            FrameViolation::MissingRule(x) => write!(f, "defined fact `{x}` has no rule"),
            FrameViolation::EmptyBody(r) => write!(f, "rule for `{}` has an empty body", r.head),
            FrameViolation::HeadNotDefined(r) => write!(f, "head of `{r}` is not a defined fact"),
        }
    }
}

/// Checks every frame invariant; an empty result means the frame is valid.
pub fn validate_frame(frame: &Frame) -> Vec<FrameViolation> {
    let mut out = Vec::new();
    for &x in &frame.defined {
        if x.is_logical() {
            out.push(FrameViolation::LogicalDefined(x));
            continue;
        }
        if !frame.space.contains(x) {
            out.push(FrameViolation::OutsideSpace(x));
        }
        if !frame.defined.contains(&x.complement()) {
            out.push(FrameViolation::UnpairedDefined(x));
        }
        if frame.rules_for(x).next().is_none() {
            out.push(FrameViolation::MissingRule(x));
        }
    }
    for r in &frame.rules {
        if r.body.is_empty() {
            out.push(FrameViolation::EmptyBody(r.clone()));
        }
        if r.head.is_logical() || !frame.defined.contains(&r.head) {
            out.push(FrameViolation::HeadNotDefined(r.clone()));
        }
        for &b in &r.body {
            if !frame.space.contains(b) {
                out.push(FrameViolation::OutsideSpace(b));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Adds, for every head `x` of `rules`, one rule `~x <- ~im(s)` per selection
/// function `s` choosing one body element from each rule of `x`.
///
/// Equal bodies are merged; no subsumption is applied. `cap` bounds the total
/// number of partial bodies generated.
pub fn complementation(rules: &BTreeSet<Rule>, cap: u64) -> Result<BTreeSet<Rule>> {
    let mut by_head: BTreeMap<Fact, Vec<&BTreeSet<Fact>>> = BTreeMap::new();
    for r in rules {
        if r.body.is_empty() {
            return Err(Error::Contract(format!("rule for `{}` has an empty body", r.head)));
        }
        by_head.entry(r.head).or_default().push(&r.body);
    }
    if let Some(x) = by_head.keys().find(|x| by_head.contains_key(&x.complement())) {
        return Err(Error::Contract(format!(
            "complementation input mixes heads `{x}` and `{}`",
            x.complement()
        )));
    }
    let mut out = rules.clone();
    let mut generated: u64 = 0;
    for (&head, bodies) in &by_head {
        let mut partial: BTreeSet<BTreeSet<Fact>> = BTreeSet::from([BTreeSet::new()]);
        for body in bodies {
            let mut next = BTreeSet::new();
            for s in &partial {
                for &y in body.iter() {
                    generated += 1;
                    if generated > cap {
                        return Err(Error::cap("complementation bodies", cap, format!("complementing `{head}`")));
                    }
                    let mut t = s.clone();
                    t.insert(y.complement());
                    next.insert(t);
                }
            }
            partial = next;
        }
        for body in partial {
            out.insert(Rule {
                head: head.complement(),
                body,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rules(text: &str) -> BTreeSet<Rule> {
        text.split(';').map(|r| Rule::parse(r).unwrap()).collect()
    }

    fn f(s: &str) -> Fact {
        Fact::parse(s).unwrap()
    }

    fn example1() -> Frame {
        Frame::from_rules(rules("p <- ~q, r; q <- q; ~p <- q; ~p <- ~r; ~q <- ~q"))
    }

    #[test]
    fn example1_is_valid() {
        let frame = example1();
        assert!(validate_frame(&frame).is_empty());
        assert!(frame.is_complementary());
        assert_eq!(frame.opens().len(), 5);
    }

    #[test]
    fn missing_rule_is_reported() {
        let mut frame = example1();
        frame.rules.retain(|r| r.head != f("p"));
        assert_eq!(validate_frame(&frame), vec![FrameViolation::MissingRule(f("p"))]);
    }

    #[test]
    fn unpaired_defined_is_reported() {
        let mut frame = example1();
        frame.defined.insert(f("r"));
        let v = validate_frame(&frame);
        assert!(v.contains(&FrameViolation::UnpairedDefined(f("r"))));
        assert!(v.contains(&FrameViolation::MissingRule(f("r"))));
    }

    #[test]
    fn empty_body_is_reported() {
        let mut frame = example1();
        frame.rules.insert(Rule {
            head: f("q"),
            body: BTreeSet::new(),
        });
        assert!(validate_frame(&frame).iter().any(|v| matches!(v, FrameViolation::EmptyBody(_))));
        assert!(Rule::parse("p <- .").is_err());
        assert!(Rule::new(Fact::TRUE, [f("p")]).is_err());
    }

    #[test]
    fn complementation_examples() {
        let out = complementation(&rules("p <- ~q, r"), DEFAULT_BODY_CAP).unwrap();
        assert_eq!(out, rules("p <- ~q, r; ~p <- q; ~p <- ~r"));

        let out = complementation(&rules("q <- q"), DEFAULT_BODY_CAP).unwrap();
        assert_eq!(out, rules("q <- q; ~q <- ~q"));

        let out = complementation(&rules("~p <- q; ~p <- ~r"), DEFAULT_BODY_CAP).unwrap();
        assert_eq!(out, rules("~p <- q; ~p <- ~r; p <- ~q, r"));
    }

    #[test]
    fn complementation_keeps_supersets() {
        // Three rules for the aggregate atom yield four distinct bodies,
        // one of which is a superset of the others.
        let input = rules("a <- p, q; a <- s, q; a <- p, s");
        let out = complementation(&input, DEFAULT_BODY_CAP).unwrap();
        let neg: BTreeSet<Rule> = out.iter().filter(|r| r.head == f("~a")).cloned().collect();
        assert_eq!(neg, rules("~a <- ~p, ~s; ~a <- ~p, ~q; ~a <- ~q, ~s; ~a <- ~p, ~q, ~s"));
    }

    #[test]
    fn complementation_errors() {
        assert!(complementation(&rules("p <- q; ~p <- r"), DEFAULT_BODY_CAP).is_err());
        let big = rules("p <- a, b, c; p <- d, e, g; p <- h, i, j");
        assert!(matches!(complementation(&big, 5), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn cases_examples() {
        let frame = example1();
        let cases: BTreeSet<BTreeSet<Fact>> = frame.cases(f("~p")).unwrap().into_iter().cloned().collect();
        assert_eq!(cases, BTreeSet::from([BTreeSet::from([f("q")]), BTreeSet::from([f("~r")])]));
        assert_eq!(frame.cases(f("q")).unwrap().len(), 1);
        assert!(frame.cases(f("r")).is_err());
    }

    fn arb_singleton_frame() -> impl Strategy<Value = BTreeSet<Rule>> {
        let names = ["a", "b", "c", "d"];
        proptest::collection::vec((0usize..3, 0usize..4, any::<bool>()), 1..6).prop_map(move |items| {
            items
                .into_iter()
                .map(|(h, b, neg)| {
                    let body = Fact::atom(names[b]).unwrap();
                    let body = if neg { body.complement() } else { body };
                    Rule::new(Fact::atom(names[h]).unwrap(), [body]).unwrap()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn singleton_bodies_complement_involutively(input in arb_singleton_frame()) {
            let once = complementation(&input, DEFAULT_BODY_CAP).unwrap();
            let negatives: BTreeSet<Rule> = once.iter().filter(|r| r.head.is_negated()).cloned().collect();
            let twice = complementation(&negatives, DEFAULT_BODY_CAP).unwrap();
            let positives: BTreeSet<Rule> = twice.iter().filter(|r| !r.head.is_negated()).cloned().collect();
            prop_assert_eq!(positives, input);
        }

        #[test]
        fn complemented_frames_validate(input in arb_singleton_frame()) {
            let frame = Frame::from_rules(complementation(&input, DEFAULT_BODY_CAP).unwrap());
            prop_assert!(validate_frame(&frame).is_empty());
            prop_assert!(frame.is_complementary());
            for &x in &frame.defined {
                prop_assert!(!frame.cases(x).unwrap().is_empty());
            }
        }
    }
}
