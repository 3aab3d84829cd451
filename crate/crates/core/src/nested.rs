//! Nested justification systems and the transforms between nested and flat
//! systems: flattening, unfolding, compression and merging, together with the
//! shrink/expand correspondence between merged and compressed justifications.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::branches::{EvalKind, Evaluation, LocalityContext};
use crate::error::{Error, Result};
use crate::facts::{Fact, FactSpace, Interpretation, Truth};
use crate::frames::{validate_frame, Frame, Rule};
use crate::justify::{branch_values, value_sets, Caps, Child, JNode, Justification, Semantics, System};

/// A tree of justification systems.
///
/// `local` holds the facts defined by `rules`; `defined` adds everything
/// defined by descendants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedSystem {
    pub space: FactSpace,
    pub defined: BTreeSet<Fact>,
    pub local: BTreeSet<Fact>,
    pub rules: BTreeSet<Rule>,
    pub evaluation: EvalKind,
    pub children: Vec<NestedSystem>,
}

impl NestedSystem {
    /// Builds the tuple without checking it: local facts are the rule heads
    /// and their complements, the space is spanned by every fact used.
    pub fn assemble<I: IntoIterator<Item = Rule>>(
        evaluation: EvalKind,
        rules: I,
        children: Vec<NestedSystem>,
    ) -> NestedSystem {
        let rules: BTreeSet<Rule> = rules.into_iter().collect();
        let local: BTreeSet<Fact> = rules.iter().flat_map(|r| [r.head, r.head.complement()]).collect();
        let mut defined = local.clone();
        let mut space = FactSpace::spanned_by(rules.iter().flat_map(|r| std::iter::once(&r.head).chain(&r.body)));
        for c in &children {
            defined.extend(c.defined.iter().copied());
            space = space.union(&c.space);
        }
        NestedSystem {
            space,
            defined,
            local,
            rules,
            evaluation,
            children,
        }
    }

    /// Assembles and validates.
    pub fn new<I: IntoIterator<Item = Rule>>(
        evaluation: EvalKind,
        rules: I,
        children: Vec<NestedSystem>,
    ) -> Result<NestedSystem> {
        let ns = NestedSystem::assemble(evaluation, rules, children);
        let report = validate_nested(&ns);
        if !report.violations.is_empty() {
            return Err(Error::Invalid {
                what: "nested system",
                violations: report.violations.iter().map(|v| v.to_string()).collect(),
            });
        }
        Ok(ns)
    }

    /// A single-node system.
    pub fn leaf(system: &System) -> Result<NestedSystem> {
        let kind = system
            .evaluation
            .kind()
            .ok_or_else(|| Error::Contract("a merged system cannot be wrapped as a leaf".into()))?;
        NestedSystem::new(kind, system.frame.rules.iter().cloned(), Vec::new())
    }

    /// The local frame `<F, F_dl, R>`.
    pub fn local_frame(&self) -> Frame {
        Frame::new(self.space.clone(), self.local.clone(), self.rules.clone())
    }

    pub fn opens(&self) -> BTreeSet<Fact> {
        self.space.facts().into_iter().filter(|x| !self.defined.contains(x)).collect()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(NestedSystem::depth).max().unwrap_or(0)
    }

    /// Nodes in preorder; the index of a node is its id.
    pub fn preorder(&self) -> Vec<&NestedSystem> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.preorder());
        }
        out
    }

    /// This node and all descendants use parametric evaluations.
    pub fn is_parametric(&self) -> bool {
        self.preorder().iter().all(|n| n.evaluation.is_parametric())
    }

    pub fn is_compressible(&self) -> bool {
        self.children.iter().all(NestedSystem::is_parametric)
    }

    pub fn all_rules(&self) -> BTreeSet<Rule> {
        self.preorder().iter().flat_map(|n| n.rules.iter().cloned()).collect()
    }

    /// Atoms of the space, in order.
    pub fn atoms(&self) -> Vec<crate::facts::Name> {
        self.space.atoms().iter().copied().collect()
    }
}

/// One violated clause of the nesting conditions, at a preorder node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseViolation {
    pub node: usize,
    pub clause: u8,
    pub message: String,
}

impl fmt::Display for ClauseViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}: clause {}: {}", self.node, self.clause, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressibilityReport {
    pub compressible: bool,
    /// Descendant nodes (preorder ids) with a non-parametric evaluation.
    pub offending_nodes: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedReport {
    pub violations: Vec<ClauseViolation>,
    pub compressibility: CompressibilityReport,
}

impl NestedReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_nested(ns: &NestedSystem) -> NestedReport {
    let mut violations = Vec::new();
    let mut next = 0;
    check_node(ns, &mut next, &mut violations);
    let offending_nodes = ns
        .preorder()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, n)| !n.evaluation.is_parametric())
        .map(|(i, n)| (i, format!("evaluation {} is not parametric", n.evaluation)))
        .collect::<Vec<_>>();
    NestedReport {
        violations,
        compressibility: CompressibilityReport {
            compressible: offending_nodes.is_empty(),
            offending_nodes,
        },
    }
}

fn check_node(ns: &NestedSystem, next: &mut usize, out: &mut Vec<ClauseViolation>) {
    let node = *next;
    *next += 1;
    let mut push = |clause: u8, message: String| out.push(ClauseViolation { node, clause, message });

    for v in validate_frame(&ns.local_frame()) {
        push(1, v.to_string());
    }

    let mut union = ns.local.clone();
    for (i, c) in ns.children.iter().enumerate() {
        for &x in c.defined.intersection(&ns.local) {
            push(3, format!("`{x}` is defined both locally and in child {i}"));
        }
        for (j, d) in ns.children.iter().enumerate().skip(i + 1) {
            for &x in c.defined.intersection(&d.defined) {
                push(3, format!("`{x}` is defined in children {i} and {j}"));
            }
        }
        union.extend(c.defined.iter().copied());
    }
    if union != ns.defined {
        push(3, "defined facts differ from the local facts plus the children's".into());
    }

    let local_space = FactSpace::spanned_by(ns.rules.iter().flat_map(|r| std::iter::once(&r.head).chain(&r.body)));
    let spanned = ns.children.iter().fold(local_space, |s, c| s.union(&c.space));
    if spanned != ns.space {
        push(4, "fact space is not the union of the component spaces".into());
    }

    let opens = ns.opens();
    for (i, c) in ns.children.iter().enumerate() {
        for x in c.opens() {
            if !opens.contains(&x) && !ns.local.contains(&x) {
                push(5, format!("`{x}` is open in child {i} but neither open nor local here"));
            }
        }
        for (j, d) in ns.children.iter().enumerate() {
            if i != j {
                for &x in c.defined.iter().filter(|&&x| d.space.contains(x)) {
                    push(5, format!("`{x}` is defined in child {i} and used in child {j}"));
                }
            }
        }
    }

    // Clause 2: every child is itself a nested system.
    for c in &ns.children {
        check_node(c, next, out);
    }
}

// ---------------------------------------------------------------------------
// Flattening and unfolding

/// A flattened system with, for every produced rule, the first justification
/// whose branch values gave its body.
#[derive(Debug, Clone)]
pub struct Flattening {
    pub system: System,
    pub witnesses: BTreeMap<Rule, Justification>,
}

pub fn flatten(system: &System, caps: &Caps) -> Result<Flattening> {
    if !system.is_parametric() {
        return Err(Error::Contract(format!(
            "flattening needs a parametric evaluation, got {}",
            system.evaluation
        )));
    }
    let facts: Vec<Fact> = system.frame.defined.iter().copied().collect();
    let per_fact = facts
        .par_iter()
        .map(|&x| value_sets(system, x, caps.justifications, true).map(|sets| (x, sets)))
        .collect::<Result<Vec<_>>>()?;
    let mut witnesses = BTreeMap::new();
    for (x, sets) in per_fact {
        for (values, j) in sets {
            let rule = Rule::new(x, values)?;
            witnesses.entry(rule).or_insert_with(|| j.expect("witness requested"));
        }
    }
    let rules = witnesses.keys().cloned().collect();
    let frame = Frame::new(system.frame.space.clone(), system.frame.defined.clone(), rules);
    Ok(Flattening {
        system: System {
            frame,
            evaluation: system.evaluation.clone(),
        },
        witnesses,
    })
}

type Unfolded = (Rule, Vec<(Fact, Rule)>);

/// Unfoldings of `rule` paired with the choice function that produced them;
/// the first choice wins for equal results.
fn unfold_with_choices(
    rule: &Rule,
    lower: &BTreeMap<Fact, Vec<&Rule>>,
    x: &BTreeSet<Fact>,
    cap: u64,
) -> Result<Vec<Unfolded>> {
    let hits: Vec<Fact> = rule.body.iter().copied().filter(|y| x.contains(y)).collect();
    let mut options = Vec::with_capacity(hits.len());
    for &y in &hits {
        match lower.get(&y) {
            Some(rs) if !rs.is_empty() => options.push(rs),
            _ => {
                return Err(Error::Contract(format!(
                    "cannot unfold `{rule}`: `{y}` has no rule in the lower system"
                )))
            }
        }
    }
    let total = options.iter().try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64));
    if total.is_none_or(|t| t > cap) {
        return Err(Error::cap("bodies", cap, format!("unfolding `{rule}`")));
    }
    let kept: BTreeSet<Fact> = rule.body.iter().copied().filter(|y| !x.contains(y)).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut pick = vec![0usize; hits.len()];
    loop {
        let mut body = kept.clone();
        let mut choices = Vec::with_capacity(hits.len());
        for (k, &y) in hits.iter().enumerate() {
            let r = options[k][pick[k]];
            body.extend(r.body.iter().copied());
            choices.push((y, r.clone()));
        }
        let unfolded = Rule::new(rule.head, body)?;
        if seen.insert(unfolded.clone()) {
            out.push((unfolded, choices));
        }
        // Odometer over the choice functions, last position fastest.
        let mut k = hits.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < options[k].len() {
                break;
            }
            pick[k] = 0;
        }
    }
}

fn by_head(rules: &BTreeSet<Rule>) -> BTreeMap<Fact, Vec<&Rule>> {
    let mut out: BTreeMap<Fact, Vec<&Rule>> = BTreeMap::new();
    for r in rules {
        out.entry(r.head).or_default().push(r);
    }
    out
}

/// One rule per choice of a lower rule for every body element in `x`.
pub fn unfold_rule(rule: &Rule, lower: &BTreeSet<Rule>, x: &BTreeSet<Fact>, caps: &Caps) -> Result<BTreeSet<Rule>> {
    Ok(unfold_with_choices(rule, &by_head(lower), x, caps.bodies)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

pub fn unfold(x: &BTreeSet<Fact>, lower: &BTreeSet<Rule>, rules: &BTreeSet<Rule>, caps: &Caps) -> Result<BTreeSet<Rule>> {
    let lower = by_head(lower);
    let mut out = BTreeSet::new();
    for r in rules {
        out.extend(unfold_with_choices(r, &lower, x, caps.bodies)?.into_iter().map(|(r, _)| r));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Compression

/// Where a rule of a compression comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// A rule of the system itself with nothing to unfold.
    Original,
    /// A flattened rule of the compression of child `child`, with the
    /// justification in that compression that produced it.
    Flattened { child: usize, witness: Justification },
    /// Unfolding of a local rule, choosing a flattened rule per child fact.
    Unfolded { source: Rule, choices: Vec<(Fact, Rule)> },
}

#[derive(Debug, Clone)]
pub struct Compression {
    pub system: System,
    pub provenance: BTreeMap<Rule, Provenance>,
    pub children: Vec<Compression>,
    /// Facts defined by the local rules of the compressed node.
    pub local: BTreeSet<Fact>,
}

impl Compression {
    /// Provenance lines for a rule, innermost source last.
    pub fn explain_rule(&self, rule: &Rule) -> Vec<String> {
        match self.provenance.get(rule) {
            None => vec![format!("{rule}: not in this compression")],
            Some(Provenance::Original) => vec![format!("{rule}: original rule")],
            Some(Provenance::Flattened { child, witness }) => {
                let used: BTreeSet<String> = witness.nodes.iter().map(|n| n.rule.to_string()).collect();
                vec![format!(
                    "{rule}: flattened from child {child}, justification using {}",
                    used.into_iter().collect::<Vec<_>>().join("; ")
                )]
            }
            Some(Provenance::Unfolded { source, choices }) => {
                let mut out = vec![format!("{rule}: unfolded from {source}")];
                for (y, r) in choices {
                    out.push(format!("  {y} replaced by the body of {r}"));
                    out.extend(self.explain_rule(r).into_iter().map(|l| format!("    {l}")));
                }
                out
            }
        }
    }
}

pub fn compress(ns: &NestedSystem, caps: &Caps) -> Result<Compression> {
    let report = validate_nested(ns);
    if !report.compressibility.compressible {
        let why: Vec<String> = report
            .compressibility
            .offending_nodes
            .iter()
            .map(|(n, m)| format!("node {n}: {m}"))
            .collect();
        return Err(Error::Contract(format!("system is not compressible ({})", why.join("; "))));
    }
    let children = ns
        .children
        .iter()
        .map(|c| compress(c, caps))
        .collect::<Result<Vec<_>>>()?;
    let mut provenance = BTreeMap::new();
    let mut lower = BTreeSet::new();
    for (i, c) in children.iter().enumerate() {
        let flat = flatten(&c.system, caps)?;
        for (rule, witness) in flat.witnesses {
            lower.insert(rule.clone());
            provenance.insert(rule, Provenance::Flattened { child: i, witness });
        }
    }
    let x: BTreeSet<Fact> = ns.defined.difference(&ns.local).copied().collect();
    let lower_by_head = by_head(&lower);
    for r in &ns.rules {
        if r.body.is_disjoint(&x) {
            provenance.entry(r.clone()).or_insert(Provenance::Original);
            continue;
        }
        for (unfolded, choices) in unfold_with_choices(r, &lower_by_head, &x, caps.bodies)? {
            provenance.entry(unfolded).or_insert(Provenance::Unfolded {
                source: r.clone(),
                choices,
            });
        }
    }
    let frame = Frame::new(ns.space.clone(), ns.defined.clone(), provenance.keys().cloned().collect());
    Ok(Compression {
        system: System::new(frame, ns.evaluation.into())?,
        provenance,
        children,
        local: ns.local.clone(),
    })
}

// ---------------------------------------------------------------------------
// Merging

/// The locality context of a nesting tree, nodes numbered in preorder.
pub fn locality_context(ns: &NestedSystem) -> Result<LocalityContext> {
    let mut system_of = BTreeMap::new();
    let mut evals = Vec::new();
    let mut parents = Vec::new();
    fn walk(
        ns: &NestedSystem,
        parent: Option<usize>,
        system_of: &mut BTreeMap<Fact, usize>,
        evals: &mut Vec<EvalKind>,
        parents: &mut Vec<Option<usize>>,
    ) {
        let id = evals.len();
        evals.push(ns.evaluation);
        parents.push(parent);
        for &x in &ns.local {
            system_of.insert(x, id);
        }
        for c in &ns.children {
            walk(c, Some(id), system_of, evals, parents);
        }
    }
    walk(ns, None, &mut system_of, &mut evals, &mut parents);
    LocalityContext::new(system_of, evals, parents)
}

/// All rules of the tree under the merged evaluation. A single node with a
/// parametric evaluation keeps it, since the merged one equals it there.
/// SP and ST do not: the merge sends every finite branch to its last element.
pub fn merge(ns: &NestedSystem) -> Result<System> {
    let report = validate_nested(ns);
    if !report.is_valid() {
        return Err(Error::Invalid {
            what: "nested system",
            violations: report.violations.iter().map(|v| v.to_string()).collect(),
        });
    }
    let frame = Frame::new(ns.space.clone(), ns.defined.clone(), ns.all_rules());
    if ns.children.is_empty() && ns.evaluation.is_parametric() {
        return System::new(frame, ns.evaluation.into());
    }
    System::new(frame, Evaluation::Merge(Arc::new(locality_context(ns)?)))
}

// ---------------------------------------------------------------------------
// Shrink and expand

/// The part of `j` below node `k` whose facts satisfy `inside`; edges leaving
/// it become leaves. Also returns, per leaving fact, the first node it led to.
fn region(j: &Justification, k: usize, inside: impl Fn(Fact) -> bool) -> (Justification, Vec<(Fact, usize)>) {
    let mut order = vec![k];
    let mut index = HashMap::from([(k, 0usize)]);
    let mut exits = Vec::new();
    let mut nodes = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let n = &j.nodes[order[i]];
        let mut children = Vec::with_capacity(n.children.len());
        for c in &n.children {
            children.push(match *c {
                Child::Node(t) if inside(j.nodes[t].fact) => {
                    let id = *index.entry(t).or_insert_with(|| {
                        order.push(t);
                        order.len() - 1
                    });
                    Child::Node(id)
                }
                Child::Node(t) => {
                    exits.push((j.nodes[t].fact, t));
                    Child::Open(j.nodes[t].fact)
                }
                open => open,
            });
        }
        nodes.push(JNode {
            fact: n.fact,
            memory: 0,
            rule: n.rule.clone(),
            children,
        });
        i += 1;
    }
    (Justification { nodes }, exits)
}

/// Maps a justification of the merged system to one of the compression by
/// collapsing every maximal child-level part into its branch values.
pub fn shrink(ns: &NestedSystem, j: &Justification) -> Result<Justification> {
    if j.nodes.is_empty() {
        return Err(Error::Contract("empty justification".into()));
    }
    let evals = ns
        .children
        .iter()
        .map(|c| merge(c).map(|s| s.evaluation))
        .collect::<Result<Vec<_>>>()?;
    let child_of = |x: Fact| ns.children.iter().position(|c| c.defined.contains(&x));

    let mut out: Vec<JNode> = Vec::new();
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut queue: Vec<usize> = vec![0];
    index.insert(0, 0);
    out.push(placeholder(j.nodes[0].fact));
    let mut qi = 0;
    while qi < queue.len() {
        let at = queue[qi];
        let n = &j.nodes[at];
        let mut body = BTreeSet::new();
        let mut exits: BTreeMap<Fact, usize> = BTreeMap::new();
        let absorb = |k: usize, i: usize, body: &mut BTreeSet<Fact>, exits: &mut BTreeMap<Fact, usize>| -> Result<()> {
            let (w, ex) = region(j, k, |x| ns.children[i].defined.contains(&x));
            body.extend(branch_values(&w, &evals[i])?);
            for (y, t) in ex {
                exits.entry(y).or_insert(t);
            }
            Ok(())
        };
        match child_of(n.fact) {
            Some(i) => absorb(at, i, &mut body, &mut exits)?,
            None => {
                for (&a, c) in n.rule.body.iter().zip(&n.children) {
                    match (*c, child_of(a)) {
                        (Child::Node(k), Some(i)) => absorb(k, i, &mut body, &mut exits)?,
                        (Child::Node(k), None) => {
                            body.insert(a);
                            exits.entry(a).or_insert(k);
                        }
                        (Child::Open(y), _) => {
                            body.insert(y);
                        }
                    }
                }
            }
        }
        let rule = Rule::new(n.fact, body)?;
        let mut children = Vec::with_capacity(rule.body.len());
        for &y in &rule.body {
            if ns.local.contains(&y) {
                let t = *exits
                    .get(&y)
                    .ok_or_else(|| Error::Contract(format!("value `{y}` of `{}` has no node to continue at", n.fact)))?;
                let id = *index.entry(t).or_insert_with(|| {
                    queue.push(t);
                    out.push(placeholder(j.nodes[t].fact));
                    out.len() - 1
                });
                children.push(Child::Node(id));
            } else {
                children.push(Child::Open(y));
            }
        }
        let slot = index[&at];
        out[slot].rule = rule;
        out[slot].children = children;
        qi += 1;
    }
    Ok(Justification { nodes: out })
}

fn placeholder(fact: Fact) -> JNode {
    JNode {
        fact,
        memory: 0,
        rule: Rule {
            head: fact,
            body: BTreeSet::new(),
        },
        children: Vec::new(),
    }
}

/// Maps a justification of the compression to one of the merged system by
/// pasting the child justifications recorded in the provenance.
pub fn expand(comp: &Compression, j: &Justification) -> Result<Justification> {
    j.check(&comp.system.frame)?;
    let mut out: Vec<JNode> = j
        .nodes
        .iter()
        .map(|n| JNode {
            fact: n.fact,
            memory: 0,
            rule: n.rule.clone(),
            children: n.children.clone(),
        })
        .collect();
    for (i, n) in j.nodes.iter().enumerate() {
        let target = |y: Fact| -> Child {
            let pos = n.rule.body.iter().position(|&b| b == y).expect("value occurs in the body");
            n.children[pos]
        };
        match comp.provenance.get(&n.rule) {
            None => return Err(Error::Contract(format!("no provenance recorded for `{}`", n.rule))),
            Some(Provenance::Original) => {}
            Some(Provenance::Flattened { child, witness }) => {
                let sub = expand(&comp.children[*child], witness)?;
                paste(&mut out, &sub, Some(i), &comp.local, &target);
            }
            Some(Provenance::Unfolded { source, choices }) => {
                let mut children = Vec::with_capacity(source.body.len());
                for &a in &source.body {
                    match choices.iter().find(|(y, _)| *y == a) {
                        Some((_, flat)) => {
                            let Some(Provenance::Flattened { child, witness }) = comp.provenance.get(flat) else {
                                return Err(Error::Contract(format!("chosen rule `{flat}` is not a flattened rule")));
                            };
                            let sub = expand(&comp.children[*child], witness)?;
                            children.push(Child::Node(paste(&mut out, &sub, None, &comp.local, &target)));
                        }
                        None => children.push(target(a)),
                    }
                }
                out[i].rule = source.clone();
                out[i].children = children;
            }
        }
    }
    Ok(Justification { nodes: out }.pruned())
}

/// Appends a copy of `sub` (its root optionally placed in `slot`), sending
/// leaves labelled with `local` facts to `target`. Returns the root id.
fn paste(
    out: &mut Vec<JNode>,
    sub: &Justification,
    slot: Option<usize>,
    local: &BTreeSet<Fact>,
    target: &dyn Fn(Fact) -> Child,
) -> usize {
    let base = out.len();
    let id = |k: usize| -> usize {
        match (k, slot) {
            (0, Some(s)) => s,
            (k, Some(_)) => base + k - 1,
            (k, None) => base + k,
        }
    };
    let mut fresh = Vec::new();
    for (k, n) in sub.nodes.iter().enumerate() {
        let node = JNode {
            fact: n.fact,
            memory: 0,
            rule: n.rule.clone(),
            children: n
                .children
                .iter()
                .map(|c| match *c {
                    Child::Node(t) => Child::Node(id(t)),
                    Child::Open(y) if local.contains(&y) => target(y),
                    open => open,
                })
                .collect(),
        };
        match slot {
            Some(s) if k == 0 => out[s] = node,
            _ => fresh.push(node),
        }
    }
    out.extend(fresh);
    id(0)
}

// ---------------------------------------------------------------------------
// Equivalence of compression and merge

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive,
    /// `samples` draws with replacement; repeated draws are checked once.
    Random { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub fact: Fact,
    pub interpretation: Interpretation,
    pub compress: Truth,
    pub merge: Truth,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    /// Every evaluation maps finite branches to their last element and
    /// infinite ones to logical facts.
    pub within_hypothesis: bool,
    pub interpretations: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Compares supported values of the compression and the merge.
pub fn check_equivalence(ns: &NestedSystem, sampling: Sampling, caps: &Caps) -> Result<EquivalenceReport> {
    let within_hypothesis = ns.preorder().iter().all(|n| n.evaluation.is_parametric());
    let comp = compress(ns, caps)?;
    let merged = merge(ns)?;
    let sc = Semantics::new(&comp.system, caps)?;
    let sm = Semantics::new(&merged, caps)?;
    let atoms = ns.atoms();
    let interps: Vec<Interpretation> = match sampling {
        Sampling::Exhaustive => {
            let total = Interpretation::count(atoms.len(), false);
            if total > caps.interpretations {
                return Err(Error::cap("interpretations", caps.interpretations, "exhaustive equivalence check"));
            }
            (0..total).map(|c| Interpretation::decode(&atoms, false, c)).collect()
        }
        Sampling::Random { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let total = Interpretation::count(atoms.len(), false);
            let codes: BTreeSet<u64> = (0..samples).map(|_| rng.gen_range(0..total)).collect();
            codes.into_iter().map(|c| Interpretation::decode(&atoms, false, c)).collect()
        }
    };
    let facts: Vec<Fact> = ns.defined.iter().copied().collect();
    let found = interps
        .par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for &x in &facts {
                let (a, b) = (sc.supported_value(x, i)?, sm.supported_value(x, i)?);
                if a != b {
                    out.push(Counterexample {
                        fact: x,
                        interpretation: i.clone(),
                        compress: a,
                        merge: b,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport {
        within_hypothesis,
        interpretations: interps.len() as u64,
        counterexamples: found.into_iter().flatten().collect(),
    })
}
