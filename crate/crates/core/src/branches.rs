//! Branches (finite paths and lassos) and branch evaluations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::facts::{sign_of, Fact, Sign, Truth};

/// A branch of a justification.
///
/// `Finite` ends in an open fact. `Lasso` stands for the infinite branch
/// `prefix · cycle · cycle · …`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Finite(Vec<Fact>),
    Lasso { prefix: Vec<Fact>, cycle: Vec<Fact> },
}

impl Branch {
    pub fn lasso(prefix: Vec<Fact>, cycle: Vec<Fact>) -> Branch {
        Branch::Lasso { prefix, cycle }
    }

    pub fn first(&self) -> Option<Fact> {
        match self {
            Branch::Finite(path) => path.first().copied(),
            Branch::Lasso { prefix, cycle } => prefix.first().or(cycle.first()).copied(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Branch::Finite(_))
    }

    /// The first `n` elements of the (possibly infinite) sequence.
    pub fn take(&self, n: usize) -> Vec<Fact> {
        match self {
            Branch::Finite(path) => path.iter().take(n).copied().collect(),
            Branch::Lasso { prefix, cycle } => {
                prefix.iter().chain(cycle.iter().cycle()).take(n).copied().collect()
            }
        }
    }

    /// Complements every element.
    pub fn complement(&self) -> Branch {
        let c = |v: &Vec<Fact>| v.iter().map(|x| x.complement()).collect::<Vec<_>>();
        match self {
            Branch::Finite(path) => Branch::Finite(c(path)),
            Branch::Lasso { prefix, cycle } => Branch::lasso(c(prefix), c(cycle)),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            Branch::Finite(path) => {
                if path.len() < 2 {
                    return Err(Error::Contract(format!("branch `{self}` is shorter than two elements")));
                }
                if let Some(l) = path[..path.len() - 1].iter().find(|x| x.is_logical()) {
                    return Err(Error::Contract(format!("branch `{self}` passes through open fact `{l}`")));
                }
            }
            Branch::Lasso { prefix, cycle } => {
                if cycle.is_empty() {
                    return Err(Error::Contract("lasso with an empty cycle".into()));
                }
                if let Some(l) = prefix.iter().chain(cycle).find(|x| x.is_logical()) {
                    return Err(Error::Contract(format!("lasso `{self}` contains open fact `{l}`")));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Finite(path) => {
                let parts: Vec<String> = path.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(" -> "))
            }
            Branch::Lasso { prefix, cycle } => {
                for x in prefix {
                    write!(f, "{x} -> ")?;
                }
                let parts: Vec<String> = cycle.iter().map(|x| x.to_string()).collect();
                write!(f, "({})*", parts.join(" -> "))
            }
        }
    }
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Branch {
    type Err = Error;

    /// Parses the trace syntax: `p -> r` or `p -> (~q)*` or `(r -> p)*`.
    fn from_str(s: &str) -> Result<Branch> {
        let s = s.trim();
        if let Some(open) = s.find('(') {
            let close = s
                .rfind(")*")
                .ok_or_else(|| Error::Contract(format!("lasso `{s}` lacks a closing `)*`")))?;
            let head = s[..open].trim().trim_end_matches("->").trim();
            let prefix = split_path(head)?;
            let cycle = split_path(&s[open + 1..close])?;
            let b = Branch::lasso(prefix, cycle);
            b.check()?;
            Ok(b)
        } else {
            let b = Branch::Finite(split_path(s)?);
            b.check()?;
            Ok(b)
        }
    }
}

fn split_path(s: &str) -> Result<Vec<Fact>> {
    s.split("->")
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(Fact::parse)
        .collect()
}

/// The branch evaluations a (nested) system node can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EvalKind {
    Sp,
    Kk,
    Wf,
    Cwf,
    St,
}

impl EvalKind {
    pub const ALL: [EvalKind; 5] = [EvalKind::Sp, EvalKind::Kk, EvalKind::Wf, EvalKind::Cwf, EvalKind::St];

    pub fn keyword(self) -> &'static str {
        match self {
            EvalKind::Sp => "sp",
            EvalKind::Kk => "kk",
            EvalKind::Wf => "wf",
            EvalKind::Cwf => "cwf",
            EvalKind::St => "st",
        }
    }

    pub fn parse(s: &str) -> Option<EvalKind> {
        EvalKind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    /// KK, WF and CWF map every branch to an open fact.
    pub fn is_parametric(self) -> bool {
        matches!(self, EvalKind::Kk | EvalKind::Wf | EvalKind::Cwf)
    }
}

impl fmt::Display for EvalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Where each defined fact of a nested system lives.
///
/// Nodes are numbered in preorder, so node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalityContext {
    system_of: BTreeMap<Fact, usize>,
    evaluation_of: Vec<EvalKind>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

impl LocalityContext {
    pub fn new(
        system_of: BTreeMap<Fact, usize>,
        evaluation_of: Vec<EvalKind>,
        parent: Vec<Option<usize>>,
    ) -> Result<LocalityContext> {
        let n = evaluation_of.len();
        if parent.len() != n || n == 0 {
            return Err(Error::Contract("locality context: node tables disagree in size".into()));
        }
        let roots = parent.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::Contract(format!("locality context has {roots} roots")));
        }
        let mut depth = vec![usize::MAX; n];
        for (start, d) in depth.iter_mut().enumerate() {
            let mut chain = vec![start];
            let mut cur = start;
            while let Some(p) = parent[cur] {
                if p >= n || chain.len() > n {
                    return Err(Error::Contract("locality context parent map is not a tree".into()));
                }
                chain.push(p);
                cur = p;
            }
            *d = chain.len() - 1;
        }
        if let Some((x, &node)) = system_of.iter().find(|(_, &node)| node >= n) {
            return Err(Error::Contract(format!("`{x}` mapped to unknown node {node}")));
        }
        Ok(LocalityContext {
            system_of,
            evaluation_of,
            parent,
            depth,
        })
    }

    /// Context of a single unnested system.
    pub fn single(defined: &BTreeSet<Fact>, eval: EvalKind) -> LocalityContext {
        LocalityContext {
            system_of: defined.iter().map(|&x| (x, 0)).collect(),
            evaluation_of: vec![eval],
            parent: vec![None],
            depth: vec![0],
        }
    }

    pub fn node_count(&self) -> usize {
        self.evaluation_of.len()
    }

    pub fn system_of(&self, x: Fact) -> Option<usize> {
        self.system_of.get(&x).copied()
    }

    pub fn evaluation_of(&self, node: usize) -> EvalKind {
        self.evaluation_of[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    /// True when `a` is `b` or one of its ancestors.
    pub fn is_ancestor_or_self(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.parent[c];
        }
        false
    }

    pub fn local_facts(&self, node: usize) -> BTreeSet<Fact> {
        self.system_of
            .iter()
            .filter(|(_, &n)| n == node)
            .map(|(&x, _)| x)
            .collect()
    }

    pub fn defined(&self) -> impl Iterator<Item = Fact> + '_ {
        self.system_of.keys().copied()
    }

    /// The node whose evaluation decides a lasso with these cycle facts.
    pub fn highest_system(&self, cycle: &[Fact]) -> Result<usize> {
        let nodes = cycle
            .iter()
            .map(|&x| {
                self.system_of(x)
                    .ok_or_else(|| Error::Contract(format!("`{x}` is not defined in the nesting tree")))
            })
            .collect::<Result<Vec<usize>>>()?;
        let top = *nodes
            .iter()
            .min_by_key(|&&n| (self.depth[n], n))
            .ok_or_else(|| Error::Contract("lasso with an empty cycle".into()))?;
        if let Some(&stray) = nodes.iter().find(|&&n| !self.is_ancestor_or_self(top, n)) {
            return Err(Error::Contract(format!(
                "cycle visits nodes {top} and {stray} without a common highest system"
            )));
        }
        Ok(top)
    }
}

/// A branch evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluation {
    Sp,
    Kk,
    Wf,
    Cwf,
    St,
    Merge(Arc<LocalityContext>),
}

impl From<EvalKind> for Evaluation {
    fn from(k: EvalKind) -> Evaluation {
        match k {
            EvalKind::Sp => Evaluation::Sp,
            EvalKind::Kk => Evaluation::Kk,
            EvalKind::Wf => Evaluation::Wf,
            EvalKind::Cwf => Evaluation::Cwf,
            EvalKind::St => Evaluation::St,
        }
    }
}

impl Evaluation {
    pub fn kind(&self) -> Option<EvalKind> {
        match self {
            Evaluation::Sp => Some(EvalKind::Sp),
            Evaluation::Kk => Some(EvalKind::Kk),
            Evaluation::Wf => Some(EvalKind::Wf),
            Evaluation::Cwf => Some(EvalKind::Cwf),
            Evaluation::St => Some(EvalKind::St),
            Evaluation::Merge(_) => None,
        }
    }

    pub fn context(&self) -> Option<&LocalityContext> {
        match self {
            Evaluation::Merge(ctx) => Some(ctx),
            _ => None,
        }
    }
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Some(k) => write!(f, "{k}"),
            None => f.write_str("merge"),
        }
    }
}

/// Value of an infinite branch whose tail has the given sign composition
/// under a well-founded style evaluation.
pub(crate) fn cycle_value(kind: EvalKind, has_pos: bool, has_neg: bool) -> Fact {
    let (all_neg, all_pos) = (has_neg && !has_pos, has_pos && !has_neg);
    let t = match kind {
        EvalKind::Kk => Truth::Unknown,
        EvalKind::Wf | EvalKind::St if all_neg => Truth::True,
        EvalKind::Wf | EvalKind::St if all_pos => Truth::False,
        EvalKind::Cwf if all_pos => Truth::True,
        EvalKind::Cwf if all_neg => Truth::False,
        _ => Truth::Unknown,
    };
    Fact::Logical(t)
}

fn signs(facts: &[Fact]) -> (bool, bool) {
    let has_neg = facts.iter().any(|x| x.is_negated());
    let has_pos = facts.iter().any(|x| !x.is_negated());
    (has_pos, has_neg)
}

/// Image of `b` under `be`.
///
/// `root_sign` only matters for ST and defaults to the sign of the first
/// element.
pub fn evaluate_branch(be: &Evaluation, b: &Branch, root_sign: Option<Sign>) -> Result<Fact> {
    b.check()?;
    match be {
        Evaluation::Merge(ctx) => evaluate_merge(ctx, b),
        other => {
            let kind = other.kind().expect("non-merge evaluation has a kind");
            Ok(evaluate_kind(kind, b, root_sign))
        }
    }
}

fn evaluate_kind(kind: EvalKind, b: &Branch, root_sign: Option<Sign>) -> Fact {
    match (kind, b) {
        (EvalKind::Sp, _) => b.take(2)[1],
        (EvalKind::Kk | EvalKind::Wf | EvalKind::Cwf, Branch::Finite(path)) => *path.last().unwrap(),
        (EvalKind::Kk | EvalKind::Wf | EvalKind::Cwf, Branch::Lasso { cycle, .. }) => {
            let (pos, neg) = signs(cycle);
            cycle_value(kind, pos, neg)
        }
        (EvalKind::St, _) => {
            let root = root_sign.unwrap_or_else(|| sign_of(b.first().unwrap()));
            let scanned: Vec<Fact> = match b {
                Branch::Finite(path) => path[..path.len() - 1].to_vec(),
                Branch::Lasso { prefix, cycle } => prefix.iter().chain(cycle).copied().collect(),
            };
            if let Some(&x) = scanned.iter().find(|&&x| sign_of(x) != root) {
                return x;
            }
            evaluate_kind(EvalKind::Wf, b, None)
        }
    }
}

fn evaluate_merge(ctx: &LocalityContext, b: &Branch) -> Result<Fact> {
    match b {
        Branch::Finite(path) => {
            for &x in &path[..path.len() - 1] {
                if ctx.system_of(x).is_none() {
                    return Err(Error::Contract(format!("`{x}` is not defined in the nesting tree")));
                }
            }
            Ok(*path.last().unwrap())
        }
        Branch::Lasso { prefix, cycle } => {
            if let Some(x) = prefix.iter().find(|&&x| ctx.system_of(x).is_none()) {
                return Err(Error::Contract(format!("`{x}` is not defined in the nesting tree")));
            }
            let top = ctx.highest_system(cycle)?;
            let projected = project_branch(b, &ctx.local_facts(top))?;
            Ok(evaluate_kind(ctx.evaluation_of(top), &projected, None))
        }
    }
}

/// Whether every branch is mapped to an open fact.
///
/// A merge evaluation is reported parametric exactly when every node of its
/// nesting tree uses KK, WF or CWF.
pub fn is_parametric(be: &Evaluation) -> bool {
    match be {
        Evaluation::Merge(ctx) => (0..ctx.node_count()).all(|n| ctx.evaluation_of(n).is_parametric()),
        other => other.kind().is_some_and(EvalKind::is_parametric),
    }
}

/// Removes every element of a lasso not in `keep`.
pub fn project_branch(b: &Branch, keep: &BTreeSet<Fact>) -> Result<Branch> {
    match b {
        Branch::Finite(_) => Err(Error::Contract("only lassos are projected".into())),
        Branch::Lasso { prefix, cycle } => {
            let filter = |v: &Vec<Fact>| v.iter().filter(|x| keep.contains(x)).copied().collect::<Vec<_>>();
            let cycle = filter(cycle);
            if cycle.is_empty() {
                return Err(Error::Contract(format!("projection of `{b}` keeps no cycle element")));
            }
            Ok(Branch::lasso(filter(prefix), cycle))
        }
    }
}
