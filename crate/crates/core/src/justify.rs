//! Justifications, branch values, supported values and models.
//!
//! A justification is stored as a finite rooted graph whose unravelling is the
//! tree-like justification. Enumeration produces memoryless justifications:
//! one rule per reachable state, where a state is a fact plus whatever the
//! evaluation needs to remember about the path from the root: under ST
//! whether a sign switch has been seen, under a merge with SP or ST systems
//! the progress of every such system's projected branch.

use std::cell::RefCell;
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;

use crate::branches::{cycle_value, is_parametric, Branch, EvalKind, Evaluation, LocalityContext};
use crate::error::{Error, Result};
use crate::facts::{sign_of, truth_max, truth_min, Fact, Interpretation, Name, Sign, Truth};
use crate::frames::{validate_frame, Frame, Rule};

/// Resource limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Justifications enumerated per defined fact.
    pub justifications: u64,
    /// Interpretations visited by a model search.
    pub interpretations: u64,
    /// Bodies generated by complementation and unfolding.
    pub bodies: u64,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            justifications: 1_000_000,
            interpretations: 531_441,
            bodies: 1_000_000,
        }
    }
}

/// A justification frame together with its branch evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub frame: Frame,
    pub evaluation: Evaluation,
}

impl System {
    /// Validates the frame and, for merge evaluations, that every defined
    /// fact is placed in the nesting tree.
    pub fn new(frame: Frame, evaluation: Evaluation) -> Result<System> {
        let violations = validate_frame(&frame);
        if !violations.is_empty() {
            return Err(Error::Invalid {
                what: "frame",
                violations: violations.iter().map(|v| v.to_string()).collect(),
            });
        }
        if let Evaluation::Merge(ctx) = &evaluation {
            if let Some(x) = frame.defined.iter().find(|&&x| ctx.system_of(x).is_none()) {
                return Err(Error::Contract(format!("`{x}` has no system in the merge context")));
            }
        }
        Ok(System { frame, evaluation })
    }

    pub fn is_parametric(&self) -> bool {
        is_parametric(&self.evaluation)
    }

    /// Atoms of the fact space, in order.
    pub fn atoms(&self) -> Vec<Name> {
        self.frame.space.atoms().iter().copied().collect()
    }
}

/// Target of a body element in a justification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Child {
    Node(usize),
    Open(Fact),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JNode {
    pub fact: Fact,
    /// Search memory of the state this node stands for; 0 at the root. Under
    /// ST it is 1 once a sign switch occurred.
    pub memory: u32,
    pub rule: Rule,
    /// One entry per body element, in body order.
    pub children: Vec<Child>,
}

/// A finite rooted justification graph; the root is node 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Justification {
    pub nodes: Vec<JNode>,
}

impl Justification {
    pub fn root(&self) -> Fact {
        self.nodes[0].fact
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Checks local completeness against `frame`.
    pub fn check(&self, frame: &Frame) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Contract("empty justification".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.rule.head != n.fact {
                return Err(Error::Contract(format!("node {i} labelled `{}` uses rule `{}`", n.fact, n.rule)));
            }
            if !frame.rules.contains(&n.rule) {
                return Err(Error::Contract(format!("rule `{}` is not in the frame", n.rule)));
            }
            self.check_children(i)?;
            for (&b, c) in n.rule.body.iter().zip(&n.children) {
                if let Child::Open(y) = c {
                    if frame.is_defined(*y) || *y != b {
                        return Err(Error::Contract(format!("leaf `{y}` under `{}` is not an open body fact", n.fact)));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_children(&self, i: usize) -> Result<()> {
        let n = &self.nodes[i];
        if n.children.len() != n.rule.body.len() {
            return Err(Error::Contract(format!("node {i} has {} children for a body of {}", n.children.len(), n.rule.body.len())));
        }
        for (&b, c) in n.rule.body.iter().zip(&n.children) {
            match *c {
                Child::Node(k) if k >= self.nodes.len() => {
                    return Err(Error::Contract(format!("node {i} points at missing node {k}")))
                }
                Child::Node(k) if self.nodes[k].fact != b => {
                    return Err(Error::Contract(format!("node {i}: child for `{b}` is labelled `{}`", self.nodes[k].fact)))
                }
                Child::Open(y) if y != b => {
                    return Err(Error::Contract(format!("node {i}: leaf `{y}` for body element `{b}`")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Equality of the unravelled trees.
    pub fn same_tree(&self, other: &Justification) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((a, b)) = stack.pop() {
            if !seen.insert((a, b)) {
                continue;
            }
            let (na, nb) = (&self.nodes[a], &other.nodes[b]);
            if na.fact != nb.fact || na.rule != nb.rule || na.children.len() != nb.children.len() {
                return false;
            }
            for (ca, cb) in na.children.iter().zip(&nb.children) {
                match (ca, cb) {
                    (Child::Open(x), Child::Open(y)) if x == y => {}
                    (Child::Node(x), Child::Node(y)) => stack.push((*x, *y)),
                    _ => return false,
                }
            }
        }
        true
    }

    /// Drops nodes unreachable from the root and renumbers the rest.
    pub fn pruned(&self) -> Justification {
        let mut order = vec![0usize];
        let mut index = HashMap::from([(0usize, 0usize)]);
        let mut i = 0;
        while i < order.len() {
            for c in &self.nodes[order[i]].children {
                if let Child::Node(k) = *c {
                    if let Entry::Vacant(e) = index.entry(k) {
                        e.insert(order.len());
                        order.push(k);
                    }
                }
            }
            i += 1;
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let n = &self.nodes[old];
                JNode {
                    fact: n.fact,
                    memory: n.memory,
                    rule: n.rule.clone(),
                    children: n
                        .children
                        .iter()
                        .map(|c| match *c {
                            Child::Node(k) => Child::Node(index[&k]),
                            open => open,
                        })
                        .collect(),
                }
            })
            .collect();
        Justification { nodes }
    }

    /// Representative branches: every path from the root that stops at an
    /// open leaf or at the first repeated node.
    pub fn branches(&self, limit: usize) -> Vec<Branch> {
        let mut out = Vec::new();
        let mut path = vec![0usize];
        self.walk(&mut path, &mut out, limit);
        out.sort();
        out.dedup();
        out
    }

    fn walk(&self, path: &mut Vec<usize>, out: &mut Vec<Branch>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        let cur = *path.last().unwrap();
        for c in &self.nodes[cur].children {
            match *c {
                Child::Open(y) => {
                    let mut facts: Vec<Fact> = path.iter().map(|&i| self.nodes[i].fact).collect();
                    facts.push(y);
                    out.push(Branch::Finite(facts));
                }
                Child::Node(k) => {
                    if let Some(j) = path.iter().position(|&i| i == k) {
                        let facts: Vec<Fact> = path.iter().map(|&i| self.nodes[i].fact).collect();
                        out.push(Branch::lasso(facts[..j].to_vec(), facts[j..].to_vec()));
                    } else {
                        path.push(k);
                        self.walk(path, out, limit);
                        path.pop();
                    }
                }
            }
        }
    }

    /// Graphviz rendering with a legend listing the branch values.
    pub fn to_dot(&self, values: &BTreeSet<Fact>) -> String {
        let mut s = String::from("digraph justification {\n  rankdir=TB;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if i == 0 { "doublecircle" } else { "ellipse" };
            let mark = if n.memory == 0 { String::new() } else { format!("[{}]", n.memory) };
            let _ = writeln!(s, "  n{i} [label=\"{}{mark}\", shape={shape}];", n.fact);
        }
        let mut leaves = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            for c in &n.children {
                match *c {
                    Child::Node(k) => {
                        let _ = writeln!(s, "  n{i} -> n{k};");
                    }
                    Child::Open(y) => {
                        let next = leaves.len();
                        let id = *leaves.entry(y).or_insert(next);
                        let _ = writeln!(s, "  n{i} -> o{id};");
                    }
                }
            }
        }
        for (y, id) in &leaves {
            let _ = writeln!(s, "  o{id} [label=\"{y}\", shape=box];");
        }
        let vals: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "  legend [label=\"branch values: {{{}}}\", shape=note];", vals.join(", "));
        s.push_str("}\n");
        s
    }

    /// Indented text rendering, one line per node.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let kids: Vec<String> = n
                .children
                .iter()
                .map(|c| match *c {
                    Child::Node(k) => format!("#{k}"),
                    Child::Open(y) => y.to_string(),
                })
                .collect();
            let mark = if n.memory == 0 { String::new() } else { format!(" [{}]", n.memory) };
            let _ = writeln!(s, "#{i} {}{mark}: {}   -> [{}]", n.fact, n.rule, kids.join(", "));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Enumeration

type State = (Fact, u32);
type Emit<'e> = dyn FnMut(&[State], &[&Rule]) -> Result<()> + 'e;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Every reachable state receives a rule.
    Full,
    /// States that cannot influence the branch values are cut off as leaves.
    ValueOnly,
}

/// Progress of one SP or ST system along the projection of a branch onto
/// its local facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Track {
    Start,
    Seen(Sign),
    Done(Fact),
}

impl Track {
    fn step(self, kind: EvalKind, y: Fact) -> Track {
        match self {
            Track::Start => Track::Seen(sign_of(y)),
            Track::Seen(s) if kind == EvalKind::Sp || sign_of(y) != s => Track::Done(y),
            other => other,
        }
    }
}

/// Memory for merges: one track per SP/ST system, interned to small ids.
struct Tracker<'a> {
    ctx: &'a LocalityContext,
    systems: Vec<(usize, EvalKind)>,
    ids: RefCell<HashMap<Vec<Track>, u32>>,
    tracks: RefCell<Vec<Vec<Track>>>,
}

impl<'a> Tracker<'a> {
    fn new(ctx: &'a LocalityContext) -> Option<Tracker<'a>> {
        let systems: Vec<(usize, EvalKind)> = (0..ctx.node_count())
            .map(|n| (n, ctx.evaluation_of(n)))
            .filter(|(_, k)| matches!(k, EvalKind::Sp | EvalKind::St))
            .collect();
        (!systems.is_empty()).then(|| Tracker {
            ctx,
            systems,
            ids: RefCell::new(HashMap::new()),
            tracks: RefCell::new(Vec::new()),
        })
    }

    fn intern(&self, t: Vec<Track>) -> u32 {
        let mut ids = self.ids.borrow_mut();
        if let Some(&id) = ids.get(&t) {
            return id;
        }
        let mut tracks = self.tracks.borrow_mut();
        let id = tracks.len() as u32;
        tracks.push(t.clone());
        ids.insert(t, id);
        id
    }

    fn after(&self, memory: Option<u32>, y: Fact) -> u32 {
        let mut t = match memory {
            Some(m) => self.tracks.borrow()[m as usize].clone(),
            None => vec![Track::Start; self.systems.len()],
        };
        let home = self.ctx.system_of(y);
        for (slot, &(n, kind)) in t.iter_mut().zip(&self.systems) {
            if home == Some(n) {
                *slot = slot.step(kind, y);
            }
        }
        self.intern(t)
    }
}

struct Search<'a> {
    rules: HashMap<Fact, Vec<&'a Rule>>,
    frame: &'a Frame,
    kind: Option<EvalKind>,
    root_sign: Sign,
    mode: Mode,
    tracker: Option<Tracker<'a>>,
}

impl<'a> Search<'a> {
    fn new(system: &'a System, root: Fact, mode: Mode) -> Result<Search<'a>> {
        if !system.frame.is_defined(root) {
            return Err(Error::Contract(format!("`{root}` is open and has no justifications")));
        }
        let mut rules: HashMap<Fact, Vec<&Rule>> = HashMap::new();
        for r in &system.frame.rules {
            rules.entry(r.head).or_default().push(r);
        }
        if mode == Mode::ValueOnly {
            // Swapping a rule for one with a smaller body only removes paths
            // from the graph, so larger bodies never give a minimal value set.
            for rs in rules.values_mut() {
                let all = rs.clone();
                rs.retain(|r| !all.iter().any(|o| o.body.len() < r.body.len() && o.body.is_subset(&r.body)));
            }
        }
        Ok(Search {
            rules,
            frame: &system.frame,
            kind: system.evaluation.kind(),
            root_sign: sign_of(root),
            mode,
            tracker: system.evaluation.context().and_then(Tracker::new),
        })
    }

    fn start(&self, root: Fact) -> State {
        match &self.tracker {
            Some(t) => (root, t.after(None, root)),
            None => (root, 0),
        }
    }

    /// State reached through body element `y`, or `None` for a leaf.
    fn succ(&self, (_, memory): State, y: Fact) -> Option<State> {
        if !self.frame.is_defined(y) {
            return None;
        }
        if let Some(t) = &self.tracker {
            return Some((y, t.after(Some(memory), y)));
        }
        match (self.kind, self.mode) {
            (Some(EvalKind::Sp), Mode::ValueOnly) => None,
            (Some(EvalKind::St), mode) => {
                let s = memory == 1 || sign_of(y) != self.root_sign;
                if s && mode == Mode::ValueOnly {
                    None
                } else {
                    Some((y, s as u32))
                }
            }
            _ => Some((y, 0)),
        }
    }

    /// Calls `emit` once per distinct assignment of rules to reachable states.
    fn run(&self, root: Fact, cap: u64, emit: &mut Emit<'_>) -> Result<u64> {
        let first = self.start(root);
        let mut walk = Walk {
            order: vec![first],
            index: HashMap::from([(first, 0)]),
            choice: Vec::new(),
            count: 0,
        };
        self.go(&mut walk, cap, root, emit)?;
        Ok(walk.count)
    }

    fn go(
        &self,
        w: &mut Walk<'a>,
        cap: u64,
        root: Fact,
        emit: &mut Emit<'_>,
    ) -> Result<()> {
        let pos = w.choice.len();
        if pos == w.order.len() {
            w.count += 1;
            if w.count > cap {
                return Err(Error::cap("justifications", cap, format!("enumerating justifications of `{root}`")));
            }
            return emit(&w.order, &w.choice);
        }
        let state = w.order[pos];
        let rules = self
            .rules
            .get(&state.0)
            .ok_or_else(|| Error::Contract(format!("defined fact `{}` has no rule", state.0)))?;
        for &r in rules {
            w.choice.push(r);
            let before = w.order.len();
            for &y in &r.body {
                if let Some(t) = self.succ(state, y) {
                    if !w.index.contains_key(&t) {
                        w.index.insert(t, w.order.len());
                        w.order.push(t);
                    }
                }
            }
            self.go(w, cap, root, emit)?;
            for t in w.order.drain(before..) {
                w.index.remove(&t);
            }
            w.choice.pop();
        }
        Ok(())
    }

    fn graph(&self, order: &[State], choice: &[&Rule]) -> Graph {
        let index: HashMap<State, usize> = order.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let nodes = order
            .iter()
            .zip(choice)
            .map(|(&s, r)| GNode {
                fact: s.0,
                succ: r
                    .body
                    .iter()
                    .map(|&y| match self.succ(s, y) {
                        Some(t) => Target::Node(index[&t]),
                        None => Target::Leaf(y),
                    })
                    .collect(),
            })
            .collect();
        Graph { nodes }
    }

    fn justification(&self, order: &[State], choice: &[&Rule]) -> Justification {
        let index: HashMap<State, usize> = order.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let nodes = order
            .iter()
            .zip(choice)
            .map(|(&s, r)| JNode {
                fact: s.0,
                memory: s.1,
                rule: (*r).clone(),
                children: r
                    .body
                    .iter()
                    .map(|&y| match self.succ(s, y) {
                        Some(t) => Child::Node(index[&t]),
                        None => Child::Open(y),
                    })
                    .collect(),
            })
            .collect();
        Justification { nodes }
    }
}

struct Walk<'a> {
    order: Vec<State>,
    index: HashMap<State, usize>,
    choice: Vec<&'a Rule>,
    count: u64,
}

/// Every memoryless justification of `x`.
pub fn enumerate_justifications(system: &System, x: Fact, cap: u64) -> Result<Vec<Justification>> {
    let search = Search::new(system, x, Mode::Full)?;
    let mut out = Vec::new();
    search.run(x, cap, &mut |order, choice| {
        out.push(search.justification(order, choice));
        Ok(())
    })?;
    Ok(out)
}

/// Distinct branch-value sets of the justifications of `x`, each with the
/// first justification producing it when `witness` is set (full mode only
/// makes sense for parametric evaluations, where both modes agree).
pub(crate) fn value_sets(
    system: &System,
    x: Fact,
    cap: u64,
    witness: bool,
) -> Result<Vec<(BTreeSet<Fact>, Option<Justification>)>> {
    let mode = if witness { Mode::Full } else { Mode::ValueOnly };
    let search = Search::new(system, x, mode)?;
    let mut seen: HashMap<BTreeSet<Fact>, usize> = HashMap::new();
    let mut out = Vec::new();
    search.run(x, cap, &mut |order, choice| {
        let g = search.graph(order, choice);
        let values = g.values(&system.evaluation, sign_of(x))?;
        if !seen.contains_key(&values) {
            seen.insert(values.clone(), out.len());
            let j = witness.then(|| search.justification(order, choice));
            out.push((values, j));
        }
        Ok(())
    })?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Branch values

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Node(usize),
    Leaf(Fact),
}

#[derive(Debug, Clone)]
struct GNode {
    fact: Fact,
    succ: Vec<Target>,
}

/// Evaluation graph: like a justification but without rules, and with
/// ST-switched successors already cut into leaves.
#[derive(Debug, Clone)]
struct Graph {
    nodes: Vec<GNode>,
}

impl Graph {
    /// Under ST the first opposite-sign node on a path ends the branch, so
    /// edges into such nodes become leaves.
    fn from_justification(j: &Justification, be: &Evaluation) -> Graph {
        let st = matches!(be, Evaluation::St);
        let root_sign = sign_of(j.root());
        let nodes = j
            .nodes
            .iter()
            .map(|n| GNode {
                fact: n.fact,
                succ: n
                    .children
                    .iter()
                    .map(|c| match *c {
                        Child::Node(k) if st && sign_of(j.nodes[k].fact) != root_sign => Target::Leaf(j.nodes[k].fact),
                        Child::Node(k) => Target::Node(k),
                        Child::Open(y) => Target::Leaf(y),
                    })
                    .collect(),
            })
            .collect();
        Graph { nodes }
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for t in &self.nodes[i].succ {
                if let Target::Node(k) = *t {
                    if !seen[k] {
                        seen[k] = true;
                        stack.push(k);
                    }
                }
            }
        }
        seen
    }

    fn edges(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes[i].succ.iter().filter_map(|t| match *t {
            Target::Node(k) => Some(k),
            Target::Leaf(_) => None,
        })
    }

    /// Nontrivial strongly connected components of the subgraph induced by
    /// the nodes satisfying `keep`.
    fn cycles(&self, keep: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
        nontrivial_sccs(self.nodes.len(), |i| self.edges(i).collect(), keep)
    }

    fn values(&self, be: &Evaluation, root_sign: Sign) -> Result<BTreeSet<Fact>> {
        let reach = self.reachable();
        let mut out = BTreeSet::new();
        if matches!(be, Evaluation::Sp) {
            for t in &self.nodes[0].succ {
                out.insert(match *t {
                    Target::Node(k) => self.nodes[k].fact,
                    Target::Leaf(y) => y,
                });
            }
            return Ok(out);
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if reach[i] {
                for t in &n.succ {
                    if let Target::Leaf(y) = *t {
                        out.insert(y);
                    }
                }
            }
        }
        let neg = |i: usize| self.nodes[i].fact.is_negated();
        match be {
            Evaluation::Sp => unreachable!(),
            Evaluation::Kk => {
                if !self.cycles(|i| reach[i]).is_empty() {
                    out.insert(Fact::UNKNOWN);
                }
            }
            Evaluation::Wf | Evaluation::Cwf => {
                let kind = be.kind().unwrap();
                if !self.cycles(|i| reach[i] && neg(i)).is_empty() {
                    out.insert(cycle_value(kind, false, true));
                }
                if !self.cycles(|i| reach[i] && !neg(i)).is_empty() {
                    out.insert(cycle_value(kind, true, false));
                }
                for c in self.cycles(|i| reach[i]) {
                    if c.iter().any(|&i| neg(i)) && c.iter().any(|&i| !neg(i)) {
                        out.insert(Fact::UNKNOWN);
                    }
                }
            }
            Evaluation::St => {
                // Every reachable node shares the root sign; any cycle is a
                // switch-free infinite branch.
                if !self.cycles(|i| reach[i]).is_empty() {
                    let pos = root_sign == Sign::Positive;
                    out.insert(cycle_value(EvalKind::Wf, pos, !pos));
                }
            }
            Evaluation::Merge(ctx) => self.merge_cycle_values(ctx, &reach, &mut out)?,
        }
        Ok(out)
    }

    fn merge_cycle_values(&self, ctx: &LocalityContext, reach: &[bool], out: &mut BTreeSet<Fact>) -> Result<()> {
        let node_of = self
            .nodes
            .iter()
            .map(|n| {
                ctx.system_of(n.fact)
                    .ok_or_else(|| Error::Contract(format!("`{}` is not defined in the nesting tree", n.fact)))
            })
            .collect::<Result<Vec<usize>>>()?;
        for top in 0..ctx.node_count() {
            let inside = |i: usize| reach[i] && ctx.is_ancestor_or_self(top, node_of[i]);
            let local = |i: usize| node_of[i] == top;
            let neg = |i: usize| self.nodes[i].fact.is_negated();
            let kind = ctx.evaluation_of(top);
            match kind {
                EvalKind::Kk => {
                    if self.cycles(inside).iter().any(|c| c.iter().any(|&i| local(i))) {
                        out.insert(Fact::UNKNOWN);
                    }
                }
                EvalKind::Wf | EvalKind::Cwf => {
                    let negs = self.cycles(|i| inside(i) && !(local(i) && !neg(i)));
                    if negs.iter().any(|c| c.iter().any(|&i| local(i))) {
                        out.insert(cycle_value(kind, false, true));
                    }
                    let poss = self.cycles(|i| inside(i) && !(local(i) && neg(i)));
                    if poss.iter().any(|c| c.iter().any(|&i| local(i))) {
                        out.insert(cycle_value(kind, true, false));
                    }
                    for c in self.cycles(inside) {
                        if c.iter().any(|&i| local(i) && neg(i)) && c.iter().any(|&i| local(i) && !neg(i)) {
                            out.insert(Fact::UNKNOWN);
                        }
                    }
                }
                EvalKind::Sp | EvalKind::St => self.merge_tracked_values(kind, top, &node_of, reach, ctx, out),
            }
        }
        Ok(())
    }

    /// Infinite branches whose highest system `top` uses SP or ST. The value
    /// depends on the first locally defined facts of the projected branch, so
    /// the graph is explored together with a small tracking automaton.
    fn merge_tracked_values(
        &self,
        kind: EvalKind,
        top: usize,
        node_of: &[usize],
        reach: &[bool],
        ctx: &LocalityContext,
        out: &mut BTreeSet<Fact>,
    ) {
        let step = |a: Track, g: usize| -> Track {
            if node_of[g] != top {
                return a;
            }
            a.step(kind, self.nodes[g].fact)
        };
        if !reach[0] {
            return;
        }
        let start = (0usize, step(Track::Start, 0));
        let mut index: HashMap<(usize, Track), usize> = HashMap::from([(start, 0)]);
        let mut states = vec![start];
        let mut edges: Vec<Vec<usize>> = vec![Vec::new()];
        let mut i = 0;
        while i < states.len() {
            let (g, a) = states[i];
            for k in self.edges(g) {
                let next = (k, step(a, k));
                let id = *index.entry(next).or_insert_with(|| {
                    states.push(next);
                    edges.push(Vec::new());
                    states.len() - 1
                });
                edges[i].push(id);
            }
            i += 1;
        }
        let inside = |p: usize| ctx.is_ancestor_or_self(top, node_of[states[p].0]);
        for c in nontrivial_sccs(states.len(), |p| edges[p].clone(), inside) {
            if !c.iter().any(|&p| node_of[states[p].0] == top) {
                continue;
            }
            match states[c[0]].1 {
                Track::Done(v) => {
                    out.insert(v);
                }
                Track::Seen(s) if kind == EvalKind::St => {
                    let pos = s == Sign::Positive;
                    out.insert(cycle_value(EvalKind::Wf, pos, !pos));
                }
                _ => {}
            }
        }
    }
}

pub(crate) fn nontrivial_sccs(
    n: usize,
    edges: impl Fn(usize) -> Vec<usize>,
    keep: impl Fn(usize) -> bool,
) -> Vec<Vec<usize>> {
    let mut g: DiGraph<usize, ()> = DiGraph::new();
    let mut id = vec![None; n];
    for (i, slot) in id.iter_mut().enumerate() {
        if keep(i) {
            *slot = Some(g.add_node(i));
        }
    }
    let mut self_loop = vec![false; n];
    for i in 0..n {
        let Some(a) = id[i] else { continue };
        for k in edges(i) {
            if let Some(b) = id[k] {
                g.add_edge(a, b, ());
                if k == i {
                    self_loop[i] = true;
                }
            }
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| c.into_iter().map(|ix| g[ix]).collect::<Vec<usize>>())
        .filter(|c| c.len() > 1 || self_loop[c[0]])
        .collect()
}

/// The exact set of images of the branches of `j` starting at its root.
pub fn branch_values(j: &Justification, be: &Evaluation) -> Result<BTreeSet<Fact>> {
    if j.nodes.is_empty() {
        return Err(Error::Contract("empty justification".into()));
    }
    for i in 0..j.nodes.len() {
        j.check_children(i)?;
    }
    Graph::from_justification(j, be).values(be, sign_of(j.root()))
}

/// `min` of `I` over the branch values.
pub fn jval(j: &Justification, be: &Evaluation, interp: &Interpretation) -> Result<Truth> {
    let values = branch_values(j, be)?;
    truth_min(values.iter().map(|&v| interp.value(v)).collect::<Result<Vec<_>>>()?)
}

// ---------------------------------------------------------------------------
// Supported values and models

/// Precomputed justification profiles of a system.
///
/// For every defined fact the distinct branch-value sets of its
/// justifications are kept, minus those that contain another one (they can
/// never give a higher value).
#[derive(Debug, Clone)]
pub struct Semantics {
    atoms: Vec<Name>,
    defined: BTreeSet<Fact>,
    profiles: BTreeMap<Fact, Vec<Vec<Fact>>>,
}

impl Semantics {
    pub fn new(system: &System, caps: &Caps) -> Result<Semantics> {
        let facts: Vec<Fact> = system.frame.defined.iter().copied().collect();
        Semantics::for_facts(system, &facts, caps)
    }

    pub fn for_facts(system: &System, facts: &[Fact], caps: &Caps) -> Result<Semantics> {
        let profiles = facts
            .par_iter()
            .map(|&x| {
                let sets = value_sets(system, x, caps.justifications, false)?;
                Ok((x, minimal_sets(sets.into_iter().map(|(s, _)| s).collect())))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Semantics {
            atoms: system.atoms(),
            defined: system.frame.defined.clone(),
            profiles,
        })
    }

    pub fn atoms(&self) -> &[Name] {
        &self.atoms
    }

    pub fn defined(&self) -> &BTreeSet<Fact> {
        &self.defined
    }

    pub fn profiles(&self, x: Fact) -> Option<&[Vec<Fact>]> {
        self.profiles.get(&x).map(Vec::as_slice)
    }

    /// Open facts any profile depends on, logical facts excluded.
    pub fn depends_only_on_opens(&self) -> bool {
        self.profiles
            .values()
            .flatten()
            .flatten()
            .all(|v| !self.defined.contains(v))
    }

    pub fn supported_value(&self, x: Fact, interp: &Interpretation) -> Result<Truth> {
        if !self.defined.contains(&x) {
            return interp.value(x);
        }
        let profiles = self
            .profiles
            .get(&x)
            .ok_or_else(|| Error::Contract(format!("no profile computed for `{x}`")))?;
        let mut best = Truth::False;
        for p in profiles {
            let mut v = Truth::True;
            for &y in p {
                v = v.min(interp.value(y)?);
                if v <= best {
                    break;
                }
            }
            best = best.max(v);
            if best == Truth::True {
                break;
            }
        }
        Ok(best)
    }

    pub fn is_model(&self, interp: &Interpretation) -> Result<bool> {
        for &x in &self.defined {
            if self.supported_value(x, interp)? != interp.value(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every model over the system's atoms, in enumeration order.
    pub fn models(&self, two_valued_only: bool, cap: u64) -> Result<Vec<Interpretation>> {
        let total = Interpretation::count(self.atoms.len(), two_valued_only);
        if total > cap {
            return Err(Error::cap(
                "interpretations",
                cap,
                format!("enumerating models over {} atoms", self.atoms.len()),
            ));
        }
        let found = (0..total)
            .into_par_iter()
            .map(|code| {
                let i = Interpretation::decode(&self.atoms, two_valued_only, code);
                Ok(self.is_model(&i)?.then_some(i))
            })
            .collect::<Result<Vec<Option<Interpretation>>>>()?;
        Ok(found.into_iter().flatten().collect())
    }

    /// For systems whose values depend only on opens: the model extending
    /// the given open values.
    pub fn model_from_opens(&self, opens: &Interpretation) -> Result<Interpretation> {
        let mut out = opens.clone();
        for &x in self.defined.iter().filter(|x| !x.is_negated()) {
            out.set(x, self.supported_value(x, opens)?)?;
        }
        Ok(out)
    }
}

fn minimal_sets(mut sets: Vec<BTreeSet<Fact>>) -> Vec<Vec<Fact>> {
    sets.sort_by_key(|s| s.len());
    let mut kept: Vec<BTreeSet<Fact>> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    let mut out: Vec<Vec<Fact>> = kept.into_iter().map(|s| s.into_iter().collect()).collect();
    out.sort();
    out
}

/// `SV(x, I)`: `I(x)` for opens, otherwise the best justification value.
pub fn supported_value(system: &System, x: Fact, interp: &Interpretation, caps: &Caps) -> Result<Truth> {
    if !system.frame.is_defined(x) {
        return interp.value(x);
    }
    Semantics::for_facts(system, &[x], caps)?.supported_value(x, interp)
}

pub fn is_model(system: &System, interp: &Interpretation, caps: &Caps) -> Result<bool> {
    if !interp.covers(&system.frame.space) {
        return Err(Error::Contract("interpretation does not cover the fact space".into()));
    }
    Semantics::new(system, caps)?.is_model(interp)
}

pub fn enumerate_models(system: &System, two_valued_only: bool, caps: &Caps) -> Result<Vec<Interpretation>> {
    Semantics::new(system, caps)?.models(two_valued_only, caps.interpretations)
}

/// A justification of `x` with the highest value under `interp`.
///
/// Ties go to fewer nodes, then to the lexicographically smallest list of
/// chosen rules.
pub fn best_justification(
    system: &System,
    x: Fact,
    interp: &Interpretation,
    caps: &Caps,
) -> Result<(Justification, Truth)> {
    let search = Search::new(system, x, Mode::Full)?;
    let mut best: Option<(Truth, usize, Vec<Rule>, Justification)> = None;
    search.run(x, caps.justifications, &mut |order, choice| {
        let j = search.justification(order, choice);
        let v = jval(&j, &system.evaluation, interp)?;
        let better = match &best {
            None => true,
            Some((bv, bn, br, _)) => {
                v > *bv || (v == *bv && (order.len() < *bn || (order.len() == *bn && choice.iter().copied().lt(br.iter()))))
            }
        };
        if better {
            best = Some((v, order.len(), choice.iter().map(|r| (*r).clone()).collect(), j));
        }
        Ok(())
    })?;
    let (v, _, _, j) = best.expect("a defined fact has at least one justification");
    Ok((j, v))
}

/// `SV(~x, I) = ~SV(x, I)` for every defined `x`; returns the violations.
pub fn consistency_violations(
    sem: &Semantics,
    interps: impl Iterator<Item = Interpretation>,
) -> Result<Vec<(Fact, Interpretation, Truth, Truth)>> {
    let mut out = Vec::new();
    for i in interps {
        for &x in sem.defined().iter().filter(|x| !x.is_negated()) {
            let a = sem.supported_value(x, &i)?;
            let b = sem.supported_value(x.complement(), &i)?;
            if b != a.complement() {
                out.push((x, i.clone(), a, b));
            }
        }
    }
    Ok(out)
}

/// Highest and lowest of a set of values; used by reports.
pub fn value_range(values: &[Truth]) -> Result<(Truth, Truth)> {
    Ok((truth_min(values.iter().copied())?, truth_max(values.iter().copied())?))
}
