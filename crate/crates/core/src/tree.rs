//! Tree decompositions: the leaf-stripped core `T′`, pendant stars, bare
//! paths and caterpillars, and the pendant-star / caterpillar dichotomy.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("degenerate tree on {0} vertices (need at least 3)")]
    Degenerate(usize),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("maximum degree {found} exceeds the limit {limit}")]
    MaxDegree { found: usize, limit: usize },
    #[error("parameter k = {0} must exceed 2")]
    SmallK(usize),
    #[error("no admissible k' for k = {0} (need k' >= 6 with k' = 2 mod 4)")]
    NoKPrime(usize),
    #[error("classification is not the caterpillar case")]
    WrongCase,
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An undirected tree on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    graph: Graph,
    max_degree: usize,
}

impl Tree {
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Tree, TreeError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Tree::from_graph(Graph::from_edges(n, edges)?)
    }

    pub fn from_graph(graph: Graph) -> Result<Tree, TreeError> {
        let n = graph.vertex_count();
        if n == 0 {
            return Err(TreeError::NotATree("empty vertex set".into()));
        }
        if graph.edge_count() != n - 1 {
            return Err(TreeError::NotATree(format!("{} edges on {n} vertices", graph.edge_count())));
        }
        let reached = bfs_order(&graph, 0).len();
        if reached != n {
            return Err(TreeError::NotATree(format!("only {reached} of {n} vertices reachable")));
        }
        let max_degree = graph.max_degree();
        Ok(Tree { graph, max_degree })
    }

    /// `parents[i]` is the parent of vertex `i + 1`; vertex 0 is the root.
    pub fn from_parents(parents: &[usize]) -> Result<Tree, TreeError> {
        let n = parents.len() + 1;
        Tree::from_edges(n, parents.iter().enumerate().map(|(i, &p)| (i + 1, p)))
    }

    /// Parent array rooted at 0, the inverse of [`Tree::from_parents`].
    pub fn to_parents(&self) -> Vec<usize> {
        let parent = self.parents_from(0);
        parent[1..].iter().map(|p| p.expect("non-root vertex has a parent")).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.graph.neighbors(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.graph.degree(v)
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.degree(v) == 1
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.graph.edges()
    }

    /// Parent pointers of the tree rooted at `root`.
    pub fn parents_from(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(u);
                    queue.push_back(w);
                }
            }
        }
        parent
    }
}

/// Breadth-first order of the component of `root`.
pub fn bfs_order(g: &Graph, root: usize) -> Vec<usize> {
    let mut seen = vec![false; g.vertex_count()];
    let mut order = vec![root];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &w in g.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                order.push(w);
            }
        }
    }
    order
}

/// Parses the parent-array format: the vertex count, then `n − 1` parent
/// indices for vertices `1..n`, separated by whitespace.
pub fn parse_parent_array(text: &str) -> Result<Tree, TreeError> {
    let mut nums = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(|s| s.parse::<usize>().map_err(|e| TreeError::NotATree(format!("{s:?}: {e}"))));
    let n = nums.next().ok_or_else(|| TreeError::NotATree("missing vertex count".into()))??;
    let parents: Vec<usize> = nums.collect::<Result<_, _>>()?;
    if n == 0 || parents.len() != n - 1 {
        return Err(TreeError::NotATree(format!("expected {} parents, got {}", n.saturating_sub(1), parents.len())));
    }
    Tree::from_parents(&parents)
}

/// Reads a tree in any of the supported formats: JSON `{"n", "edges"}`,
/// a parent array (first line holds a single number), or an edge list.
pub fn parse_tree(text: &str) -> Result<Tree, TreeError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return Tree::from_graph(crate::graph::parse_graph_json(text)?);
    }
    let first = trimmed.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty());
    match first {
        Some(l) if l.split_whitespace().count() == 1 => parse_parent_array(text),
        _ => Tree::from_graph(crate::graph::parse_edge_list(text, 0)?),
    }
}

pub fn write_parent_array(t: &Tree) -> String {
    let parents: Vec<String> = t.to_parents().iter().map(usize::to_string).collect();
    format!("{}\n{}\n", t.vertex_count(), parents.join(" "))
}

/// `T′ = T − leaves(T)` together with index maps in both directions.
#[derive(Clone, Debug)]
pub struct StrippedTree {
    pub tree: Tree,
    pub to_original: Vec<usize>,
    pub from_original: Vec<Option<usize>>,
}

pub fn strip_leaves(t: &Tree) -> Result<StrippedTree, TreeError> {
    let n = t.vertex_count();
    if n <= 2 {
        return Err(TreeError::Degenerate(n));
    }
    let to_original: Vec<usize> = (0..n).filter(|&v| !t.is_leaf(v)).collect();
    let mut from_original = vec![None; n];
    for (i, &v) in to_original.iter().enumerate() {
        from_original[v] = Some(i);
    }
    let edges = t.edges().filter_map(|(u, v)| Some((from_original[u]?, from_original[v]?)));
    let tree = Tree::from_edges(to_original.len(), edges)?;
    Ok(StrippedTree { tree, to_original, from_original })
}

/// A maximal star centered at a leaf of `T′`. `root` is the center's unique
/// `T′`-neighbor; it is `None` only when `T′` is a single vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendantStar {
    pub center: usize,
    pub root: Option<usize>,
    pub leaves: Vec<usize>,
}

impl PendantStar {
    pub fn validate(&self, t: &Tree) -> Result<(), String> {
        let c = self.center;
        let core: Vec<usize> = t.neighbors(c).iter().copied().filter(|&w| !t.is_leaf(w)).collect();
        if t.is_leaf(c) {
            return Err(format!("center {c} is a leaf of T"));
        }
        if core.len() > 1 {
            return Err(format!("center {c} is not a leaf of T'"));
        }
        if core.first().copied() != self.root {
            return Err(format!("root of star at {c} should be {:?}", core.first()));
        }
        let mut expected: Vec<usize> = t.neighbors(c).iter().copied().filter(|&w| t.is_leaf(w)).collect();
        expected.sort_unstable();
        let mut got = self.leaves.clone();
        got.sort_unstable();
        if got != expected {
            return Err(format!("star at {c} is not maximal or lists non-leaves"));
        }
        Ok(())
    }
}

pub fn find_pendant_stars(t: &Tree) -> Result<Vec<PendantStar>, TreeError> {
    let st = strip_leaves(t)?;
    let core = &st.tree;
    let mut stars = Vec::new();
    for i in 0..core.vertex_count() {
        if core.degree(i) > 1 {
            continue;
        }
        let center = st.to_original[i];
        let root = core.neighbors(i).first().map(|&j| st.to_original[j]);
        let leaves = t.neighbors(center).iter().copied().filter(|&w| t.is_leaf(w)).collect();
        stars.push(PendantStar { center, root, leaves });
    }
    Ok(stars)
}

/// Outcome of the leaves-or-bare-paths dichotomy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarePaths {
    Leaves(Vec<usize>),
    /// Vertex-disjoint bare paths with `k + 1` vertices each.
    Paths(Vec<Vec<usize>>),
}

impl BarePaths {
    pub fn count(&self) -> usize {
        match self {
            BarePaths::Leaves(v) => v.len(),
            BarePaths::Paths(p) => p.len(),
        }
    }
}

/// True when `count ≥ n / (4k)`.
fn meets_bound(count: usize, n: usize, k: usize) -> bool {
    4 * k * count >= n
}

/// Either at least `n/(4k)` leaves or at least `n/(4k)` vertex-disjoint bare
/// paths of length `k`.
pub fn find_bare_paths(t: &Tree, k: usize) -> Result<BarePaths, TreeError> {
    let n = t.vertex_count();
    if n <= 2 {
        return Err(TreeError::Degenerate(n));
    }
    if k <= 2 {
        return Err(TreeError::SmallK(k));
    }
    let leaves = t.leaves();
    if meets_bound(leaves.len(), n, k) {
        return Ok(BarePaths::Leaves(leaves));
    }
    let paths = chop_bare_paths(t, k);
    if !meets_bound(paths.len(), n, k) {
        return Err(TreeError::Internal(format!(
            "found {} bare paths and {} leaves, below n/(4k) for n = {n}, k = {k}",
            paths.len(),
            leaves.len()
        )));
    }
    Ok(BarePaths::Paths(paths))
}

/// Roots the tree at a leaf; every maximal run of degree-2 vertices, together
/// with the vertex just below it, is cut into disjoint `(k + 1)`-vertex
/// segments. Each non-degree-2 vertex sits below at most one run, so segments
/// from different runs are disjoint.
fn chop_bare_paths(t: &Tree, k: usize) -> Vec<Vec<usize>> {
    let n = t.vertex_count();
    let root = (0..n).find(|&v| t.is_leaf(v)).expect("a tree on >= 2 vertices has a leaf");
    let parent = t.parents_from(root);
    let mut paths = Vec::new();
    for start in 0..n {
        if t.degree(start) == 2 || start == root {
            continue;
        }
        let mut run = vec![start];
        let mut cur = parent[start];
        while let Some(v) = cur {
            if t.degree(v) != 2 || v == root {
                break;
            }
            run.push(v);
            cur = parent[v];
        }
        for seg in run.chunks_exact(k + 1) {
            paths.push(seg.to_vec());
        }
    }
    paths
}

/// A bare path of `T′` with the leaves of `T` hanging off its internal
/// vertices. `central_path` runs from `ends.0` to `ends.1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caterpillar {
    pub central_path: Vec<usize>,
    /// `(branch vertex, its leaves)`, in path order.
    pub leaves: Vec<(usize, Vec<usize>)>,
}

impl Caterpillar {
    fn from_path(t: &Tree, path: Vec<usize>) -> Caterpillar {
        let internal = &path[1..path.len() - 1];
        let leaves = internal
            .iter()
            .filter_map(|&v| {
                let ls: Vec<usize> = t.neighbors(v).iter().copied().filter(|&w| t.is_leaf(w)).collect();
                (!ls.is_empty()).then_some((v, ls))
            })
            .collect();
        Caterpillar { central_path: path, leaves }
    }

    pub fn length(&self) -> usize {
        self.central_path.len() - 1
    }

    pub fn ends(&self) -> (usize, usize) {
        (self.central_path[0], *self.central_path.last().expect("nonempty path"))
    }

    pub fn branch_vertices(&self) -> Vec<usize> {
        self.leaves.iter().map(|(b, _)| *b).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.iter().map(|(_, l)| l.len()).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.central_path.iter().copied().chain(self.leaves.iter().flat_map(|(_, l)| l.iter().copied()))
    }

    pub fn validate(&self, t: &Tree) -> Result<(), String> {
        let p = &self.central_path;
        if p.len() < 2 {
            return Err("central path needs two vertices".into());
        }
        for w in p.windows(2) {
            if !t.graph().has_edge(w[0], w[1]) {
                return Err(format!("{}-{} is not a tree edge", w[0], w[1]));
            }
        }
        for &v in p {
            if t.is_leaf(v) {
                return Err(format!("path vertex {v} is a leaf of T"));
            }
        }
        for &v in &p[1..p.len() - 1] {
            let core_deg = t.neighbors(v).iter().filter(|&&w| !t.is_leaf(w)).count();
            if core_deg != 2 {
                return Err(format!("internal vertex {v} has degree {core_deg} in T'"));
            }
        }
        let internal: Vec<usize> = p[1..p.len() - 1].to_vec();
        for (b, ls) in &self.leaves {
            if !internal.contains(b) {
                return Err(format!("branch vertex {b} is not internal"));
            }
            if ls.is_empty() || ls.iter().any(|&l| !t.is_leaf(l) || !t.graph().has_edge(*b, l)) {
                return Err(format!("bad leaf set at {b}"));
            }
        }
        let attached: usize = internal
            .iter()
            .map(|&v| t.neighbors(v).iter().filter(|&&w| t.is_leaf(w)).count())
            .sum();
        if attached != self.leaf_count() {
            return Err("some attached leaves are missing".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    PendantStars,
    Caterpillars,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeClassification {
    pub case_tag: CaseTag,
    pub stars: Vec<PendantStar>,
    pub caterpillars: Vec<Caterpillar>,
    pub k: usize,
    pub delta_max: usize,
}

impl TreeClassification {
    pub fn count(&self) -> usize {
        match self.case_tag {
            CaseTag::PendantStars => self.stars.len(),
            CaseTag::Caterpillars => self.caterpillars.len(),
        }
    }

    /// Type invariants, pairwise disjointness, and the `n/(4kΔ)` bound with
    /// `Δ` the actual maximum degree of `t`.
    pub fn validate(&self, t: &Tree) -> Result<(), String> {
        let n = t.vertex_count();
        let mut used = vec![false; n];
        let mut claim = |v: usize| -> Result<(), String> {
            if std::mem::replace(&mut used[v], true) {
                return Err(format!("vertex {v} in two structures"));
            }
            Ok(())
        };
        for s in &self.stars {
            s.validate(t)?;
            claim(s.center)?;
            for &l in &s.leaves {
                claim(l)?;
            }
        }
        for c in &self.caterpillars {
            c.validate(t)?;
            if c.length() != self.k {
                return Err(format!("caterpillar of length {} instead of {}", c.length(), self.k));
            }
            for v in c.vertices() {
                claim(v)?;
            }
        }
        let delta = t.max_degree().max(1);
        if 4 * self.k * delta * self.count() < n {
            return Err(format!("only {} structures, below n/(4kΔ)", self.count()));
        }
        Ok(())
    }
}

/// Pendant stars when there are at least `n/(4kΔ)` of them, otherwise
/// vertex-disjoint caterpillars of length `k` lifted from bare paths of `T′`.
pub fn classify(t: &Tree, k: usize, delta_max: usize) -> Result<TreeClassification, TreeError> {
    let n = t.vertex_count();
    if n <= 2 {
        return Err(TreeError::Degenerate(n));
    }
    if k <= 2 {
        return Err(TreeError::SmallK(k));
    }
    if t.max_degree() > delta_max {
        return Err(TreeError::MaxDegree { found: t.max_degree(), limit: delta_max });
    }
    let delta = t.max_degree();
    let stars = find_pendant_stars(t)?;
    let st = strip_leaves(t)?;
    if 4 * k * delta * stars.len() >= n || st.tree.vertex_count() <= 2 {
        return Ok(TreeClassification { case_tag: CaseTag::PendantStars, stars, caterpillars: vec![], k, delta_max });
    }
    caterpillars_from_core(t, &st, k, delta_max)
}

/// The caterpillar branch alone, regardless of how many pendant stars `t`
/// has. Fails when the caterpillars fall short of `n/(4kΔ)`.
pub fn classify_caterpillars(t: &Tree, k: usize, delta_max: usize) -> Result<TreeClassification, TreeError> {
    let n = t.vertex_count();
    if n <= 2 {
        return Err(TreeError::Degenerate(n));
    }
    if k <= 2 {
        return Err(TreeError::SmallK(k));
    }
    if t.max_degree() > delta_max {
        return Err(TreeError::MaxDegree { found: t.max_degree(), limit: delta_max });
    }
    caterpillars_from_core(t, &strip_leaves(t)?, k, delta_max)
}

fn caterpillars_from_core(
    t: &Tree,
    st: &StrippedTree,
    k: usize,
    delta_max: usize,
) -> Result<TreeClassification, TreeError> {
    let n = t.vertex_count();
    let delta = t.max_degree();
    let core_paths = if st.tree.vertex_count() > 2 { chop_bare_paths(&st.tree, k) } else { Vec::new() };
    let caterpillars: Vec<Caterpillar> = core_paths
        .into_iter()
        .map(|p| Caterpillar::from_path(t, p.into_iter().map(|i| st.to_original[i]).collect()))
        .collect();
    if 4 * k * delta * caterpillars.len() < n {
        return Err(TreeError::Internal(format!(
            "{} caterpillars of length {k}, below n/(4kΔ) for n = {n}",
            caterpillars.len()
        )));
    }
    Ok(TreeClassification { case_tag: CaseTag::Caterpillars, stars: vec![], caterpillars, k, delta_max })
}

/// Largest `k′ ∈ {⌊k/2⌋, …, ⌊k/2⌋ − 3}` with `k′ ≡ 2 (mod 4)` and `k′ ≥ 6`,
/// so that `k′ − 2` is a positive multiple of 4.
pub fn select_k_prime(k: usize) -> Result<usize, TreeError> {
    let half = k / 2;
    (half.saturating_sub(3)..=half)
        .rev()
        .find(|&c| c >= 6 && c % 4 == 2)
        .ok_or(TreeError::NoKPrime(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case2Subcase {
    /// Every caterpillar has a leaf, and the vertex after its `s`-end is a
    /// branch vertex.
    Leafy,
    /// Bare caterpillars only; no leaves to place.
    Bare,
}

/// Length-`k′` caterpillars trimmed from a Case 2 classification, oriented
/// from the `s`-end to the `w`-end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case2Family {
    pub k_prime: usize,
    pub subcase: Case2Subcase,
    pub caterpillars: Vec<Caterpillar>,
    /// Whether the neighbor of the `s`-end on the central path is a branch vertex.
    pub s_end_branch: Vec<bool>,
}

pub fn extract_caterpillars_case2(
    t: &Tree,
    classification: &TreeClassification,
    k_prime: usize,
) -> Result<Case2Family, TreeError> {
    if classification.case_tag != CaseTag::Caterpillars {
        return Err(TreeError::WrongCase);
    }
    let k = classification.k;
    if !(k_prime >= 6 && k_prime % 4 == 2 && k_prime <= k / 2 && k_prime + 3 >= k / 2) {
        return Err(TreeError::NoKPrime(k));
    }
    let (leafy, bare): (Vec<&Caterpillar>, Vec<&Caterpillar>) =
        classification.caterpillars.iter().partition(|c| !c.leaves.is_empty());
    let subcase = if leafy.len() >= bare.len() { Case2Subcase::Leafy } else { Case2Subcase::Bare };
    let mut caterpillars = Vec::new();
    let mut s_end_branch = Vec::new();
    match subcase {
        Case2Subcase::Leafy => {
            for c in leafy {
                let p = &c.central_path;
                let j = p.iter().position(|v| *v == c.leaves[0].0).expect("branch vertex on path");
                let window: Vec<usize> = if j - 1 + k_prime <= k {
                    p[j - 1..=j - 1 + k_prime].to_vec()
                } else {
                    p[j + 1 - k_prime..=j + 1].iter().rev().copied().collect()
                };
                let trimmed = Caterpillar::from_path(t, window);
                let flag = trimmed.leaves.first().is_some_and(|(b, _)| *b == trimmed.central_path[1]);
                if !flag {
                    return Err(TreeError::Internal("trimmed window lost its branch vertex".into()));
                }
                caterpillars.push(trimmed);
                s_end_branch.push(true);
            }
        }
        Case2Subcase::Bare => {
            for c in bare {
                caterpillars.push(Caterpillar::from_path(t, c.central_path[..=k_prime].to_vec()));
                s_end_branch.push(false);
            }
        }
    }
    Ok(Case2Family { k_prime, subcase, caterpillars, s_end_branch })
}
