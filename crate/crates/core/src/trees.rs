//! Unordered rooted trees, the index set of B-series.
//!
//! A [`RootedTree`] stores its children sorted in descending order under the
//! total order "size first, then children lexicographically". Two trees built
//! from permuted child lists are therefore identical values.
//!
//! Bulk computations (elementary weights over thousands of trees) go through
//! [`TreeTable`], an arena where every tree is an index and each tree of size
//! greater than one is split as `left ∘ last`: the tree `left` with one extra
//! child `last` attached to its root.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest tree size that [`enumerate_trees`] and [`TreeTable`] accept.
pub const MAX_TREE_SIZE: usize = 18;

#[derive(Clone)]
pub struct RootedTree {
    children: Vec<Arc<RootedTree>>,
    size: usize,
    height: usize,
}

impl RootedTree {
    /// The single vertex `•`.
    pub fn leaf() -> RootedTree {
        RootedTree {
            children: Vec::new(),
            size: 1,
            height: 1,
        }
    }

    fn from_sorted(children: Vec<Arc<RootedTree>>) -> RootedTree {
        let size = 1 + children.iter().map(|c| c.size).sum::<usize>();
        let height = 1 + children.iter().map(|c| c.height).max().unwrap_or(0);
        RootedTree {
            children,
            size,
            height,
        }
    }

    /// Builds a tree from an arbitrary ordering of children.
    pub fn from_children(children: Vec<RootedTree>) -> RootedTree {
        let mut ch: Vec<Arc<RootedTree>> = children.into_iter().map(Arc::new).collect();
        ch.sort_by(|a, b| b.cmp(a));
        RootedTree::from_sorted(ch)
    }

    pub fn children(&self) -> impl Iterator<Item = &RootedTree> {
        self.children.iter().map(|c| c.as_ref())
    }

    pub fn num_children(&self) -> usize {
        self.children.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// True when no vertex has more than one child.
    pub fn is_bamboo(&self) -> bool {
        self.size == self.height
    }

    /// Nested-bracket form, `[]` for the leaf and `[[][]]` for the cherry.
    pub fn to_brackets(&self) -> String {
        let mut s = String::with_capacity(2 * self.size);
        self.write_brackets(&mut s);
        s
    }

    fn write_brackets(&self, out: &mut String) {
        out.push('[');
        for c in &self.children {
            c.write_brackets(out);
        }
        out.push(']');
    }

    pub fn parse_brackets(s: &str) -> Result<RootedTree> {
        let bytes: Vec<u8> = s.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let (tree, used) = parse_at(&bytes, 0)?;
        if used != bytes.len() {
            return Err(Error::Parse(format!("trailing input in tree {s:?}")));
        }
        Ok(tree)
    }
}

fn parse_at(b: &[u8], mut pos: usize) -> Result<(RootedTree, usize)> {
    if b.get(pos) != Some(&b'[') {
        return Err(Error::Parse(format!("expected '[' at offset {pos}")));
    }
    pos += 1;
    let mut children = Vec::new();
    loop {
        match b.get(pos) {
            Some(b'[') => {
                let (c, next) = parse_at(b, pos)?;
                children.push(c);
                pos = next;
            }
            Some(b']') => return Ok((RootedTree::from_children(children), pos + 1)),
            _ => return Err(Error::Parse(format!("unbalanced tree at offset {pos}"))),
        }
    }
}

impl PartialEq for RootedTree {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RootedTree {}

impl Ord for RootedTree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size
            .cmp(&other.size)
            .then_with(|| self.children.cmp(&other.children))
    }
}

impl PartialOrd for RootedTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for RootedTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.size.hash(state);
        self.children.len().hash(state);
        for c in &self.children {
            c.hash(state);
        }
    }
}

impl fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_brackets())
    }
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_brackets())
    }
}

/// A multiset of trees. The empty forest is the unit `𝟏`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Forest {
    trees: Vec<RootedTree>,
}

impl Forest {
    pub fn empty() -> Forest {
        Forest::default()
    }

    pub fn new(mut trees: Vec<RootedTree>) -> Forest {
        trees.sort_by(|a, b| b.cmp(a));
        Forest { trees }
    }

    pub fn trees(&self) -> &[RootedTree] {
        &self.trees
    }

    pub fn size(&self) -> usize {
        self.trees.iter().map(|t| t.size()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

/// Grafts every tree of the forest onto a new root.
pub fn b_plus(forest: &Forest) -> RootedTree {
    RootedTree::from_children(forest.trees.clone())
}

/// The branchless tree with `h` vertices.
pub fn bamboo(h: usize) -> RootedTree {
    assert!(h >= 1, "bamboo needs at least one vertex");
    let mut t = RootedTree::leaf();
    for _ in 1..h {
        t = RootedTree::from_sorted(vec![Arc::new(t)]);
    }
    t
}

/// Tree factorial, `γ(τ) = |τ| · Π γ(τ_i)`.
pub fn gamma(tree: &RootedTree) -> u64 {
    tree.size() as u64 * tree.children().map(gamma).product::<u64>()
}

/// Symmetry factor, `σ(τ) = Π m_i! σ(τ_i)^{m_i}` over distinct children `τ_i`
/// of multiplicity `m_i`.
pub fn sigma(tree: &RootedTree) -> u64 {
    let mut acc = 1u64;
    let ch = &tree.children;
    let mut i = 0;
    while i < ch.len() {
        let mut j = i;
        while j < ch.len() && ch[j] == ch[i] {
            j += 1;
        }
        let m = (j - i) as u64;
        acc *= (1..=m).product::<u64>() * sigma(&ch[i]).pow(m as u32);
        i = j;
    }
    acc
}

/// All trees with at most `max_size` vertices, by size and then canonical
/// order within a size.
pub fn enumerate_trees(max_size: usize) -> Result<Vec<RootedTree>> {
    let table = TreeTable::new(max_size)?;
    Ok(table.to_trees())
}

/// Index-based store of all trees up to a given size.
#[derive(Debug, Clone)]
pub struct TreeTable {
    max_size: usize,
    children: Vec<Vec<usize>>,
    split: Vec<Option<(usize, usize)>>,
    size: Vec<usize>,
    height: Vec<usize>,
    gamma: Vec<u64>,
    sigma: Vec<u64>,
    size_start: Vec<usize>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl TreeTable {
    pub fn new(max_size: usize) -> Result<TreeTable> {
        if max_size == 0 {
            return Err(Error::InvalidArgument("max tree size must be positive".into()));
        }
        if max_size > MAX_TREE_SIZE {
            return Err(Error::ResourceLimit {
                what: "tree size",
                requested: max_size,
                cap: MAX_TREE_SIZE,
            });
        }
        let mut t = TreeTable {
            max_size,
            children: Vec::new(),
            split: Vec::new(),
            size: Vec::new(),
            height: Vec::new(),
            gamma: Vec::new(),
            sigma: Vec::new(),
            size_start: vec![0, 0],
            lookup: HashMap::new(),
        };
        t.push(Vec::new());
        for n in 2..=max_size {
            t.size_start.push(t.len());
            let mut forests = Vec::new();
            let mut cur = Vec::new();
            t.forests(n - 1, usize::MAX, &mut cur, &mut forests);
            forests.sort();
            for f in forests {
                t.push(f);
            }
        }
        t.size_start.push(t.len());
        Ok(t)
    }

    // Non-increasing id sequences whose sizes sum to `rem`.
    fn forests(&self, rem: usize, max_id: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        let hi = self.len().min(max_id.saturating_add(1));
        for id in (0..hi).rev() {
            if self.size[id] <= rem {
                cur.push(id);
                self.forests(rem - self.size[id], id, cur, out);
                cur.pop();
            }
        }
    }

    fn push(&mut self, children: Vec<usize>) {
        let id = self.len();
        let size = 1 + children.iter().map(|&c| self.size[c]).sum::<usize>();
        let height = 1 + children.iter().map(|&c| self.height[c]).max().unwrap_or(0);
        let gamma = size as u64 * children.iter().map(|&c| self.gamma[c]).product::<u64>();
        let mut sigma = 1u64;
        let mut i = 0;
        while i < children.len() {
            let mut j = i;
            while j < children.len() && children[j] == children[i] {
                j += 1;
            }
            let m = (j - i) as u32;
            sigma *= (1..=m as u64).product::<u64>() * self.sigma[children[i]].pow(m);
            i = j;
        }
        let split = children.split_last().map(|(&last, rest)| {
            let left = self.lookup[rest];
            (left, last)
        });
        self.lookup.insert(children.clone(), id);
        self.children.push(children);
        self.split.push(split);
        self.size.push(size);
        self.height.push(height);
        self.gamma.push(gamma);
        self.sigma.push(sigma);
    }

    /// Number of trees stored.
    pub fn len(&self) -> usize {
        self.size.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Ids of all trees with exactly `n` vertices.
    pub fn ids_of_size(&self, n: usize) -> std::ops::Range<usize> {
        if n == 0 || n > self.max_size {
            return 0..0;
        }
        self.size_start[n]..self.size_start[n + 1]
    }

    /// Ids of all trees with at most `n` vertices.
    pub fn ids_up_to(&self, n: usize) -> std::ops::Range<usize> {
        0..self.size_start[n.min(self.max_size) + 1]
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    /// `(left, last)` with `tree = left ∘ last`, `None` for the leaf.
    pub fn split(&self, id: usize) -> Option<(usize, usize)> {
        self.split[id]
    }

    pub fn size(&self, id: usize) -> usize {
        self.size[id]
    }

    pub fn height(&self, id: usize) -> usize {
        self.height[id]
    }

    pub fn gamma(&self, id: usize) -> u64 {
        self.gamma[id]
    }

    pub fn sigma(&self, id: usize) -> u64 {
        self.sigma[id]
    }

    /// Id of the bamboo with `h` vertices.
    pub fn bamboo_id(&self, h: usize) -> Option<usize> {
        let mut id = 0;
        for _ in 1..h {
            id = *self.lookup.get(&vec![id])?;
        }
        (h >= 1 && h <= self.max_size).then_some(id)
    }

    pub fn id_of(&self, tree: &RootedTree) -> Option<usize> {
        if tree.size() > self.max_size {
            return None;
        }
        let ids: Option<Vec<usize>> = tree.children().map(|c| self.id_of(c)).collect();
        self.lookup.get(&ids?).copied()
    }

    pub fn tree(&self, id: usize) -> RootedTree {
        let mut cache: HashMap<usize, Arc<RootedTree>> = HashMap::new();
        (*self.tree_cached(id, &mut cache)).clone()
    }

    fn tree_cached(&self, id: usize, cache: &mut HashMap<usize, Arc<RootedTree>>) -> Arc<RootedTree> {
        if let Some(t) = cache.get(&id) {
            return t.clone();
        }
        let ch = self.children[id]
            .iter()
            .map(|&c| self.tree_cached(c, cache))
            .collect();
        let t = Arc::new(RootedTree::from_sorted(ch));
        cache.insert(id, t.clone());
        t
    }

    pub fn to_trees(&self) -> Vec<RootedTree> {
        let mut built: Vec<Arc<RootedTree>> = Vec::with_capacity(self.len());
        for id in 0..self.len() {
            let ch = self.children[id].iter().map(|&c| built[c].clone()).collect();
            built.push(Arc::new(RootedTree::from_sorted(ch)));
        }
        built.into_iter().map(|t| (*t).clone()).collect()
    }
}
