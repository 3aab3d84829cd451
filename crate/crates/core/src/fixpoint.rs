//! Propositional nested least and greatest fixpoint definitions.
//!
//! A definition is solved directly by Kleene iteration of its operator, or
//! translated into a nested justification system (WF for least, CWF for
//! greatest definitions) whose unique model gives the same answer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use crate::branches::EvalKind;
use crate::error::{Error, Result};
use crate::facts::{Fact, Interpretation, Name, Truth, RESERVED};
use crate::frames::{complementation, Rule};
use crate::justify::{Caps, Semantics};
use crate::nested::{merge, NestedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Least,
    Greatest,
}

impl Polarity {
    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::Least => "lfp",
            Polarity::Greatest => "gfp",
        }
    }

    pub fn evaluation(self) -> EvalKind {
        match self {
            Polarity::Least => EvalKind::Wf,
            Polarity::Greatest => EvalKind::Cwf,
        }
    }
}

/// A propositional formula; negation applies to atoms only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Const(bool),
    Atom(Name),
    Not(Name),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    fn atoms(&self, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(a) | Formula::Not(a) => {
                out.insert(*a);
            }
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.atoms(out)),
        }
    }

    fn negated_atoms(&self, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Not(a) => {
                out.insert(*a);
            }
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.negated_atoms(out)),
            _ => {}
        }
    }

    pub fn eval(&self, value: &dyn Fn(Name) -> Result<bool>) -> Result<bool> {
        Ok(match self {
            Formula::Const(b) => *b,
            Formula::Atom(a) => value(*a)?,
            Formula::Not(a) => !value(*a)?,
            Formula::And(xs) => {
                for x in xs {
                    if !x.eval(value)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(xs) => {
                for x in xs {
                    if x.eval(value)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    fn rename(&self, map: &BTreeMap<Name, Name>) -> Formula {
        let r = |a: &Name| *map.get(a).unwrap_or(a);
        match self {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Atom(a) => Formula::Atom(r(a)),
            Formula::Not(a) => Formula::Not(r(a)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| x.rename(map)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| x.rename(map)).collect()),
        }
    }

    /// Disjunctive normal form as a list of literal sets.
    fn dnf(&self, cap: u64) -> Result<Vec<BTreeSet<Fact>>> {
        let lit = |a: Name, negated: bool| Fact::Atom { name: a, negated };
        Ok(match self {
            Formula::Const(true) => vec![BTreeSet::from([Fact::TRUE])],
            Formula::Const(false) => vec![BTreeSet::from([Fact::FALSE])],
            Formula::Atom(a) => vec![BTreeSet::from([lit(*a, false)])],
            Formula::Not(a) => vec![BTreeSet::from([lit(*a, true)])],
            Formula::Or(xs) => {
                let mut out = Vec::new();
                for x in xs {
                    out.extend(x.dnf(cap)?);
                }
                out.into_iter().unique().collect()
            }
            Formula::And(xs) => {
                let mut acc = vec![BTreeSet::new()];
                for x in xs {
                    let parts = x.dnf(cap)?;
                    if (acc.len() as u64).saturating_mul(parts.len() as u64) > cap {
                        return Err(Error::cap("bodies", cap, "distributing a conjunction"));
                    }
                    acc = acc
                        .iter()
                        .cartesian_product(&parts)
                        .map(|(a, b)| a.union(b).copied().collect())
                        .unique()
                        .collect();
                }
                acc
            }
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(true) => f.write_str("true"),
            Formula::Const(false) => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(xs) => write!(f, "({})", xs.iter().join(" & ")),
            Formula::Or(xs) => write!(f, "({})", xs.iter().join(" | ")),
        }
    }
}

/// A two-valued assignment to atoms.
pub type Assignment = BTreeMap<Name, bool>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixpointDefinition {
    pub polarity: Polarity,
    pub rules: BTreeMap<Name, Formula>,
    pub children: Vec<FixpointDefinition>,
}

impl FixpointDefinition {
    /// Builds a definition, rejecting a head defined twice at this level.
    pub fn new<I: IntoIterator<Item = (Name, Formula)>>(
        polarity: Polarity,
        rules: I,
        children: Vec<FixpointDefinition>,
    ) -> Result<FixpointDefinition> {
        let mut map = BTreeMap::new();
        for (h, phi) in rules {
            if map.insert(h, phi).is_some() {
                return Err(Error::Contract(format!("`{h}` has two definitions")));
            }
        }
        Ok(FixpointDefinition {
            polarity,
            rules: map,
            children,
        })
    }

    pub fn local(&self) -> BTreeSet<Name> {
        self.rules.keys().copied().collect()
    }

    pub fn defined(&self) -> BTreeSet<Name> {
        let mut out = self.local();
        for c in &self.children {
            out.extend(c.defined());
        }
        out
    }

    fn mentioned(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for (h, phi) in &self.rules {
            out.insert(*h);
            phi.atoms(&mut out);
        }
        for c in &self.children {
            out.extend(c.mentioned());
        }
        out
    }

    pub fn opens(&self) -> BTreeSet<Name> {
        let defined = self.defined();
        self.mentioned().into_iter().filter(|a| !defined.contains(a)).collect()
    }

    pub fn atoms(&self) -> BTreeSet<Name> {
        self.mentioned()
    }

    /// Every violated well-formedness condition.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let opens = self.opens();
        self.check(&opens, &mut out);
        out
    }

    fn check(&self, top_opens: &BTreeSet<Name>, out: &mut Vec<String>) {
        let local = self.local();
        for (i, c) in self.children.iter().enumerate() {
            let cd = c.defined();
            for a in cd.intersection(&local) {
                out.push(format!("`{a}` is defined locally and in a nested definition"));
            }
            for d in &self.children[i + 1..] {
                for a in cd.intersection(&d.defined()) {
                    out.push(format!("`{a}` is defined in two nested definitions"));
                }
            }
            let here = self.opens();
            for a in c.opens() {
                if !here.contains(&a) && !local.contains(&a) {
                    out.push(format!("`{a}` is open in a nested definition but neither open nor local here"));
                }
            }
        }
        let mut negated = BTreeSet::new();
        for phi in self.rules.values() {
            phi.negated_atoms(&mut negated);
        }
        for a in negated.iter().filter(|a| !top_opens.contains(a)) {
            out.push(format!("`{a}` is defined but occurs negated"));
        }
        for c in &self.children {
            c.check(top_opens, out);
        }
    }

    /// Renames atoms called `t`, `f` or `u`; returns the renamed definition
    /// and the map from original to new names.
    pub fn rename_reserved(&self) -> (FixpointDefinition, BTreeMap<Name, Name>) {
        let used = self.mentioned();
        let mut map = BTreeMap::new();
        for a in used.iter().filter(|a| RESERVED.contains(&a.as_str())) {
            let mut alias = format!("{a}_");
            while used.iter().any(|u| u.as_str() == alias) {
                alias.push('_');
            }
            map.insert(*a, Name::intern(&alias));
        }
        (self.renamed(&map), map)
    }

    fn renamed(&self, map: &BTreeMap<Name, Name>) -> FixpointDefinition {
        FixpointDefinition {
            polarity: self.polarity,
            rules: self
                .rules
                .iter()
                .map(|(h, phi)| (*map.get(h).unwrap_or(h), phi.rename(map)))
                .collect(),
            children: self.children.iter().map(|c| c.renamed(map)).collect(),
        }
    }
}

impl fmt::Display for FixpointDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{", self.polarity.keyword())?;
        for (h, phi) in &self.rules {
            write!(f, " {h} <- {phi}.")?;
        }
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str(" }")
    }
}

fn lookup<'a>(maps: &'a [&'a Assignment]) -> impl Fn(Name) -> Result<bool> + 'a {
    move |a| {
        maps.iter()
            .find_map(|m| m.get(&a).copied())
            .ok_or_else(|| Error::Contract(format!("no value for `{a}`")))
    }
}

/// One application of the operator: children are solved under the current
/// values, then every local formula is evaluated once.
pub fn gamma_step(d: &FixpointDefinition, opens: &Assignment, current: &Assignment) -> Result<Assignment> {
    for a in d.opens() {
        if !opens.contains_key(&a) {
            return Err(Error::Contract(format!("open atom `{a}` has no value")));
        }
    }
    let defined = d.defined();
    if let Some(a) = defined.iter().find(|a| !current.contains_key(a)) {
        return Err(Error::Contract(format!("defined atom `{a}` has no value")));
    }
    let local: Assignment = current.iter().filter(|(a, _)| d.rules.contains_key(a)).map(|(a, v)| (*a, *v)).collect();
    let mut k = Assignment::new();
    for c in &d.children {
        let mut child_opens = Assignment::new();
        let maps = [opens, &local];
        let value = lookup(&maps);
        for a in c.opens() {
            child_opens.insert(a, value(a)?);
        }
        k.extend(solve_direct(c, &child_opens)?);
    }
    let maps = [opens, &k, &local];
    let value = lookup(&maps);
    let mut out = k.clone();
    for (h, phi) in &d.rules {
        out.insert(*h, phi.eval(&value)?);
    }
    Ok(out)
}

/// Least or greatest fixpoint of the operator, by iteration from the bottom
/// or top of the lattice.
pub fn solve_direct(d: &FixpointDefinition, opens: &Assignment) -> Result<Assignment> {
    let start = d.polarity == Polarity::Greatest;
    let mut current: Assignment = d.defined().into_iter().map(|a| (a, start)).collect();
    loop {
        let next = gamma_step(d, opens, &current)?;
        if next == current {
            return Ok(current);
        }
        current = next;
    }
}

/// Rules `head <- B`, one per disjunct of the disjunctive normal form.
pub fn decompose_formula(head: Name, phi: &Formula, defined: &BTreeSet<Name>, caps: &Caps) -> Result<BTreeSet<Rule>> {
    let mut negated = BTreeSet::new();
    phi.negated_atoms(&mut negated);
    if let Some(a) = negated.iter().find(|a| defined.contains(a)) {
        return Err(Error::Contract(format!("defined atom `{a}` occurs negated in the definition of `{head}`")));
    }
    phi.dnf(caps.bodies)?
        .into_iter()
        .map(|body| Rule::new(Fact::positive(head), body))
        .collect()
}

/// The nested justification system of a definition. Atoms named like a
/// logical constant are renamed first; see [`translate_with_aliases`].
pub fn translate_to_nested(d: &FixpointDefinition, caps: &Caps) -> Result<NestedSystem> {
    Ok(translate_with_aliases(d, caps)?.0)
}

/// Translation plus the map from renamed atoms to their aliases.
pub fn translate_with_aliases(d: &FixpointDefinition, caps: &Caps) -> Result<(NestedSystem, BTreeMap<Name, Name>)> {
    let problems = d.validate();
    if !problems.is_empty() {
        return Err(Error::Invalid {
            what: "fixpoint definition",
            violations: problems,
        });
    }
    let (d, aliases) = d.rename_reserved();
    Ok((translate(&d, &d.defined(), caps)?, aliases))
}

fn translate(d: &FixpointDefinition, defined: &BTreeSet<Name>, caps: &Caps) -> Result<NestedSystem> {
    let mut positive = BTreeSet::new();
    for (h, phi) in &d.rules {
        positive.extend(decompose_formula(*h, phi, defined, caps)?);
    }
    let rules = complementation(&positive, caps.bodies)?;
    let children = d
        .children
        .iter()
        .map(|c| translate(c, defined, caps))
        .collect::<Result<Vec<_>>>()?;
    NestedSystem::new(d.polarity.evaluation(), rules, children)
}

/// Solves through the merged translation: every defined atom gets its
/// supported value given the open values.
pub fn solve_via_translation(d: &FixpointDefinition, opens: &Assignment, caps: &Caps) -> Result<Assignment> {
    let (ns, aliases) = translate_with_aliases(d, caps)?;
    let alias = |a: Name| *aliases.get(&a).unwrap_or(&a);
    let sem = Semantics::new(&merge(&ns)?, caps)?;
    let interp = Interpretation::from_pairs(
        opens
            .iter()
            .map(|(a, v)| (alias(*a), if *v { Truth::True } else { Truth::False })),
    );
    let mut out = Assignment::new();
    for a in d.defined() {
        match sem.supported_value(Fact::positive(alias(a)), &interp)? {
            Truth::True => out.insert(a, true),
            Truth::False => out.insert(a, false),
            Truth::Unknown => return Err(Error::Contract(format!("translation leaves `{a}` unknown"))),
        };
    }
    Ok(out)
}

pub fn format_assignment(a: &Assignment) -> String {
    a.iter().map(|(k, v)| format!("{k}={}", if *v { "t" } else { "f" })).join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::intern(s)
    }

    fn atom(s: &str) -> Formula {
        Formula::Atom(n(s))
    }

    /// The nested example with an inner greatest definition; its atom `t` is
    /// written `t2` here.
    fn example() -> FixpointDefinition {
        let inner = FixpointDefinition::new(
            Polarity::Greatest,
            [
                (n("r"), atom("p")),
                (n("s"), Formula::Or(vec![atom("t2"), atom("q")])),
                (n("t2"), atom("s")),
            ],
            vec![],
        )
        .unwrap();
        FixpointDefinition::new(
            Polarity::Least,
            [
                (n("p"), Formula::Or(vec![atom("q"), atom("r")])),
                (n("q"), atom("p")),
                (n("u"), atom("s")),
            ],
            vec![inner],
        )
        .unwrap()
    }

    fn assignment(pairs: &[(&str, bool)]) -> Assignment {
        pairs.iter().map(|(a, v)| (n(a), *v)).collect()
    }

    #[test]
    fn example_first_step() {
        let d = example();
        let bottom: Assignment = d.defined().into_iter().map(|a| (a, false)).collect();
        let step = gamma_step(&d, &Assignment::new(), &bottom).unwrap();
        assert_eq!(
            step,
            assignment(&[("r", false), ("s", true), ("t2", true), ("p", false), ("q", false), ("u", true)])
        );
    }

    #[test]
    fn example_solves_directly_and_by_translation() {
        let d = example();
        let expected = assignment(&[("s", true), ("t2", true), ("u", true), ("p", false), ("q", false), ("r", false)]);
        assert_eq!(solve_direct(&d, &Assignment::new()).unwrap(), expected);
        assert_eq!(solve_via_translation(&d, &Assignment::new(), &Caps::default()).unwrap(), expected);
    }

    #[test]
    fn identity_definitions() {
        for (pol, v) in [(Polarity::Least, false), (Polarity::Greatest, true)] {
            let d = FixpointDefinition::new(pol, [(n("p"), atom("p"))], vec![]).unwrap();
            assert_eq!(solve_direct(&d, &Assignment::new()).unwrap(), assignment(&[("p", v)]));
        }
        let d = FixpointDefinition::new(Polarity::Least, [(n("p"), Formula::Const(true))], vec![]).unwrap();
        let any = assignment(&[("p", false)]);
        assert_eq!(gamma_step(&d, &Assignment::new(), &any).unwrap(), assignment(&[("p", true)]));
    }

    #[test]
    fn decomposition() {
        let caps = Caps::default();
        let defined = BTreeSet::from([n("h"), n("p")]);
        let phi = Formula::Or(vec![Formula::And(vec![atom("a"), atom("b")]), atom("c")]);
        let rules: Vec<String> = decompose_formula(n("h"), &phi, &defined, &caps)
            .unwrap()
            .iter()
            .map(|r| r.to_string())
            .collect();
        assert_eq!(rules, vec!["h <- a, b", "h <- c"]);
        let bad = Formula::Not(n("p"));
        assert!(decompose_formula(n("h"), &bad, &defined, &caps).is_err());
        let neg = Formula::And(vec![Formula::Not(n("a")), atom("p")]);
        let rules = decompose_formula(n("h"), &neg, &defined, &caps).unwrap();
        assert_eq!(rules.iter().next().unwrap().to_string(), "h <- ~a, p");
    }

    #[test]
    fn reserved_names_get_aliases() {
        let d = FixpointDefinition::new(
            Polarity::Greatest,
            [(n("s"), atom("t")), (n("t"), atom("s"))],
            vec![],
        )
        .unwrap();
        let (renamed, map) = d.rename_reserved();
        assert_eq!(map[&n("t")], n("t_"));
        let ns = translate_to_nested(&d, &Caps::default()).unwrap();
        assert!(ns.local.contains(&Fact::positive(n("t_"))));
        assert_eq!(
            solve_direct(&renamed, &Assignment::new()).unwrap(),
            assignment(&[("s", true), ("t_", true)])
        );
    }

    #[test]
    fn translation_shape() {
        let ns = translate_to_nested(&example(), &Caps::default()).unwrap();
        assert_eq!(ns.evaluation, EvalKind::Wf);
        assert_eq!(ns.children[0].evaluation, EvalKind::Cwf);
        let top: Vec<String> = ns.rules.iter().map(|r| r.to_string()).collect();
        assert!(top.contains(&"p <- q".to_string()) && top.contains(&"p <- r".to_string()));
        assert!(top.contains(&"~p <- ~q, ~r".to_string()));
    }

    #[test]
    fn negation_on_defined_atom_is_rejected() {
        let d = FixpointDefinition::new(Polarity::Least, [(n("p"), Formula::Not(n("q"))), (n("q"), atom("a"))], vec![])
            .unwrap();
        assert!(!d.validate().is_empty());
    }

    #[test]
    fn opens_flow_into_both_solvers() {
        let d = FixpointDefinition::new(
            Polarity::Least,
            [
                (n("p"), Formula::Or(vec![atom("a"), atom("q")])),
                (n("q"), Formula::And(vec![atom("p"), Formula::Not(n("b"))])),
            ],
            vec![],
        )
        .unwrap();
        for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
            let o = assignment(&[("a", a), ("b", b)]);
            assert_eq!(
                solve_direct(&d, &o).unwrap(),
                solve_via_translation(&d, &o, &Caps::default()).unwrap()
            );
        }
    }
}
