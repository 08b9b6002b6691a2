//! Rooted ordered trees and the invertible tree-to-sequence mapping.
//!
//! `flatten` wraps each internal node's children between a `<name,left>`
//! and a `<name,right>` marker and emits leaves verbatim, so the original
//! tree can always be rebuilt from the token sequence. `flatten_bfs` and
//! `flatten_dfs` are the lossy baselines: plain name traversals that can
//! map two different trees to the same sequence.

use rand::Rng;
use thiserror::Error;

/// A rooted ordered tree of named nodes. Child order is significant and
/// preserved by every operation here. A node is a leaf iff it has no
/// children.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AstTree {
    pub name: String,
    pub children: Vec<AstTree>,
}

impl AstTree {
    pub fn leaf(name: impl Into<String>) -> Self {
        AstTree {
            name: name.into(),
            children: Vec::new(),
        }
    }

    pub fn node(name: impl Into<String>, children: Vec<AstTree>) -> Self {
        AstTree {
            name: name.into(),
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Total node count.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(AstTree::size).sum::<usize>()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(AstTree::leaf_count).sum()
        }
    }

    pub fn internal_count(&self) -> usize {
        self.size() - self.leaf_count()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(AstTree::depth)
            .max()
            .unwrap_or(0)
    }

    /// The leaf names in left-to-right order. For trees produced by the
    /// toy parser this is exactly the source token stream.
    pub fn leaf_frontier(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(self.name.as_str());
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }
}

/// What a token in a flattened sequence stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    /// A tree leaf, carrying the leaf text verbatim.
    Leaf,
    /// Opening marker of an internal node.
    NontermLeft,
    /// Closing marker of an internal node.
    NontermRight,
    /// Reserved control token (mode prefix, separator, mask, ...).
    Special,
    /// A natural-language word (comment side).
    Word,
}

/// One surface token tagged by kind. Marker tokens carry the originating
/// node name; leaves carry the leaf text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlatToken {
    pub name: String,
    pub kind: TokenKind,
}

impl FlatToken {
    pub fn leaf(name: impl Into<String>) -> Self {
        FlatToken {
            name: name.into(),
            kind: TokenKind::Leaf,
        }
    }

    pub fn left(name: impl Into<String>) -> Self {
        FlatToken {
            name: name.into(),
            kind: TokenKind::NontermLeft,
        }
    }

    pub fn right(name: impl Into<String>) -> Self {
        FlatToken {
            name: name.into(),
            kind: TokenKind::NontermRight,
        }
    }

    pub fn special(name: impl Into<String>) -> Self {
        FlatToken {
            name: name.into(),
            kind: TokenKind::Special,
        }
    }

    pub fn word(name: impl Into<String>) -> Self {
        FlatToken {
            name: name.into(),
            kind: TokenKind::Word,
        }
    }

    pub fn is_marker(&self) -> bool {
        matches!(self.kind, TokenKind::NontermLeft | TokenKind::NontermRight)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AstError {
    #[error("malformed sequence: {0}")]
    MalformedSequence(String),
    #[error("invalid probability {0}; must lie in [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid bounds: max_depth and max_fanout must be at least 1")]
    InvalidBounds,
}

/// Maps a tree to its token sequence. Leaves emit one `Leaf` token;
/// an internal node emits `NontermLeft(name)`, the flattening of each
/// child in order, then `NontermRight(name)`.
pub fn flatten(root: &AstTree) -> Vec<FlatToken> {
    let mut seq = Vec::with_capacity(root.size() * 2);
    flatten_into(root, &mut seq);
    seq
}

fn flatten_into(node: &AstTree, seq: &mut Vec<FlatToken>) {
    if node.is_leaf() {
        seq.push(FlatToken::leaf(node.name.clone()));
    } else {
        seq.push(FlatToken::left(node.name.clone()));
        for child in &node.children {
            flatten_into(child, seq);
        }
        seq.push(FlatToken::right(node.name.clone()));
    }
}

/// Inverse of [`flatten`]: rebuilds the tree from its token sequence.
/// Only defined on sequences in the image of `flatten`; anything that
/// does not nest properly is rejected rather than repaired.
pub fn reconstruct(seq: &[FlatToken]) -> Result<AstTree, AstError> {
    if seq.is_empty() {
        return Err(AstError::MalformedSequence("empty input".into()));
    }
    // Stack of open nodes; children accumulate until the matching right
    // marker closes them.
    let mut stack: Vec<AstTree> = Vec::new();
    let mut done: Option<AstTree> = None;
    for (i, tok) in seq.iter().enumerate() {
        if done.is_some() {
            return Err(AstError::MalformedSequence(format!(
                "trailing token at position {i}"
            )));
        }
        match tok.kind {
            TokenKind::Leaf => {
                let leaf = AstTree::leaf(tok.name.clone());
                match stack.last_mut() {
                    Some(open) => open.children.push(leaf),
                    None => done = Some(leaf),
                }
            }
            TokenKind::NontermLeft => {
                stack.push(AstTree::node(tok.name.clone(), Vec::new()));
            }
            TokenKind::NontermRight => {
                let open = stack.pop().ok_or_else(|| {
                    AstError::MalformedSequence(format!(
                        "unmatched right marker '{}' at position {i}",
                        tok.name
                    ))
                })?;
                if open.name != tok.name {
                    return Err(AstError::MalformedSequence(format!(
                        "right marker '{}' at position {i} closes node '{}'",
                        tok.name, open.name
                    )));
                }
                if open.children.is_empty() {
                    return Err(AstError::MalformedSequence(format!(
                        "internal node '{}' closed with no children at position {i}",
                        open.name
                    )));
                }
                match stack.last_mut() {
                    Some(parent) => parent.children.push(open),
                    None => done = Some(open),
                }
            }
            TokenKind::Special | TokenKind::Word => {
                return Err(AstError::MalformedSequence(format!(
                    "token of kind {:?} at position {i} is not part of a flattened tree",
                    tok.kind
                )));
            }
        }
    }
    match done {
        Some(tree) if stack.is_empty() => Ok(tree),
        _ => Err(AstError::MalformedSequence(
            "unclosed left marker at end of input".into(),
        )),
    }
}

/// Baseline: node names in level order, no markers. Not injective.
pub fn flatten_bfs(root: &AstTree) -> Vec<FlatToken> {
    let mut seq = Vec::with_capacity(root.size());
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(root);
    while let Some(node) = queue.pop_front() {
        seq.push(FlatToken::leaf(node.name.clone()));
        queue.extend(node.children.iter());
    }
    seq
}

/// Baseline: node names in preorder, no markers. Not injective.
pub fn flatten_dfs(root: &AstTree) -> Vec<FlatToken> {
    let mut seq = Vec::with_capacity(root.size());
    dfs_into(root, &mut seq);
    seq
}

fn dfs_into(node: &AstTree, seq: &mut Vec<FlatToken>) {
    seq.push(FlatToken::leaf(node.name.clone()));
    for child in &node.children {
        dfs_into(child, seq);
    }
}

/// With probability `p` (one draw per call, not per token) removes every
/// marker token from `seq`, leaving only the leaves; otherwise returns
/// `seq` unchanged.
pub fn drop_nonterminals<R: Rng>(
    seq: &[FlatToken],
    p: f64,
    rng: &mut R,
) -> Result<Vec<FlatToken>, AstError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(AstError::InvalidProbability(p));
    }
    let drop = rng.gen::<f64>() < p;
    if drop {
        Ok(seq.iter().filter(|t| !t.is_marker()).cloned().collect())
    } else {
        Ok(seq.to_vec())
    }
}

/// Deterministic random tree generator for test data. Node names are
/// drawn from a small fixed alphabet; depth and fanout bounds are hard.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    max_depth: usize,
    max_fanout: usize,
) -> Result<AstTree, AstError> {
    if max_depth < 1 || max_fanout < 1 {
        return Err(AstError::InvalidBounds);
    }
    Ok(gen_tree(rng, max_depth, max_fanout))
}

const NODE_NAMES: &[&str] = &[
    "module", "stmt", "expr", "call", "block", "args", "id", "num", "op", "term",
];

fn gen_tree<R: Rng>(rng: &mut R, depth_left: usize, max_fanout: usize) -> AstTree {
    let name = NODE_NAMES[rng.gen_range(0..NODE_NAMES.len())];
    // Leaf when out of depth, otherwise leaf with probability 1/3.
    if depth_left == 1 || rng.gen_range(0..3) == 0 {
        return AstTree::leaf(name);
    }
    let fanout = rng.gen_range(1..=max_fanout);
    let children = (0..fanout)
        .map(|_| gen_tree(rng, depth_left - 1, max_fanout))
        .collect();
    AstTree::node(name, children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// The subtree from the motivating example: parameters -> ( data ).
    fn parameters_subtree() -> AstTree {
        AstTree::node(
            "parameters",
            vec![
                AstTree::leaf("("),
                AstTree::leaf("data"),
                AstTree::leaf(")"),
            ],
        )
    }

    #[test]
    fn flatten_wraps_children_in_markers() {
        let seq = flatten(&parameters_subtree());
        assert_eq!(
            seq,
            vec![
                FlatToken::left("parameters"),
                FlatToken::leaf("("),
                FlatToken::leaf("data"),
                FlatToken::leaf(")"),
                FlatToken::right("parameters"),
            ]
        );
    }

    #[test]
    fn flatten_single_leaf() {
        let seq = flatten(&AstTree::leaf("x"));
        assert_eq!(seq, vec![FlatToken::leaf("x")]);
    }

    #[test]
    fn flatten_length_identity_on_random_trees() {
        // Independent oracle: count leaves and internal nodes by direct
        // enumeration, then check |flatten(t)| = leaves + 2*internal.
        fn count(t: &AstTree) -> (usize, usize) {
            if t.is_leaf() {
                (1, 0)
            } else {
                let mut leaves = 0;
                let mut internal = 1;
                for c in &t.children {
                    let (l, i) = count(c);
                    leaves += l;
                    internal += i;
                }
                (leaves, internal)
            }
        }
        let mut r = rng(17);
        for _ in 0..200 {
            let t = random_tree(&mut r, 4, 4).unwrap();
            let (leaves, internal) = count(&t);
            assert_eq!(flatten(&t).len(), leaves + 2 * internal);
        }
    }

    #[test]
    fn reconstruct_single_wrap() {
        let seq = vec![
            FlatToken::left("a"),
            FlatToken::leaf("x"),
            FlatToken::right("a"),
        ];
        let tree = reconstruct(&seq).unwrap();
        assert_eq!(tree, AstTree::node("a", vec![AstTree::leaf("x")]));
    }

    #[test]
    fn reconstruct_inverts_parameters_subtree() {
        let t = parameters_subtree();
        assert_eq!(reconstruct(&flatten(&t)).unwrap(), t);
    }

    #[test]
    fn roundtrip_10000_random_trees() {
        let mut r = rng(7);
        for _ in 0..10_000 {
            let t = random_tree(&mut r, 8, 5).unwrap();
            assert_eq!(reconstruct(&flatten(&t)).unwrap(), t);
        }
    }

    #[test]
    fn reconstruct_rejects_malformed() {
        assert!(matches!(
            reconstruct(&[]),
            Err(AstError::MalformedSequence(_))
        ));
        // Unmatched right marker.
        assert!(reconstruct(&[FlatToken::right("a")]).is_err());
        // Mismatched close name.
        assert!(reconstruct(&[
            FlatToken::left("a"),
            FlatToken::leaf("x"),
            FlatToken::right("b"),
        ])
        .is_err());
        // Trailing tokens after the root closes.
        assert!(reconstruct(&[FlatToken::leaf("x"), FlatToken::leaf("y")]).is_err());
        // Unclosed left marker.
        assert!(reconstruct(&[FlatToken::left("a"), FlatToken::leaf("x")]).is_err());
        // A word token is not part of any flattened tree.
        assert!(reconstruct(&[FlatToken::word("w")]).is_err());
    }

    #[test]
    fn baselines_on_single_leaf() {
        let t = AstTree::leaf("x");
        assert_eq!(flatten_bfs(&t), vec![FlatToken::leaf("x")]);
        assert_eq!(flatten_dfs(&t), vec![FlatToken::leaf("x")]);
    }

    /// Enumerate all rooted ordered trees with exactly 3 nodes over a
    /// 3-name alphabet and exhibit baseline collisions by brute force.
    #[test]
    fn baseline_collisions_exist_among_three_node_trees() {
        let names = ["a", "b", "c"];
        let mut trees = Vec::new();
        for r in names {
            // Shape 1: r(x(y)) — chain.
            for x in names {
                for y in names {
                    trees.push(AstTree::node(
                        r,
                        vec![AstTree::node(x, vec![AstTree::leaf(y)])],
                    ));
                }
            }
            // Shape 2: r(x, y) — two children.
            for x in names {
                for y in names {
                    trees.push(AstTree::node(r, vec![AstTree::leaf(x), AstTree::leaf(y)]));
                }
            }
        }
        let mut dfs_collision = None;
        let mut bfs_collision = None;
        for i in 0..trees.len() {
            for j in (i + 1)..trees.len() {
                if trees[i] == trees[j] {
                    continue;
                }
                if flatten_dfs(&trees[i]) == flatten_dfs(&trees[j]) && dfs_collision.is_none() {
                    dfs_collision = Some((i, j));
                }
                if flatten_bfs(&trees[i]) == flatten_bfs(&trees[j]) && bfs_collision.is_none() {
                    bfs_collision = Some((i, j));
                }
            }
        }
        let (di, dj) = dfs_collision.expect("no DFS collision found");
        let (bi, bj) = bfs_collision.expect("no BFS collision found");
        // The invertible mapping distinguishes every colliding pair.
        assert_ne!(flatten(&trees[di]), flatten(&trees[dj]));
        assert_ne!(flatten(&trees[bi]), flatten(&trees[bj]));
    }

    #[test]
    fn dfs_confuses_chain_with_siblings() {
        let chain = AstTree::node("a", vec![AstTree::node("b", vec![AstTree::leaf("c")])]);
        let siblings = AstTree::node("a", vec![AstTree::leaf("b"), AstTree::leaf("c")]);
        assert_eq!(flatten_dfs(&chain), flatten_dfs(&siblings));
        assert_eq!(flatten_bfs(&chain), flatten_bfs(&siblings));
        assert_ne!(flatten(&chain), flatten(&siblings));
    }

    #[test]
    fn drop_nonterminals_degenerate_probabilities() {
        let seq = flatten(&parameters_subtree());
        let mut r = rng(3);
        let unchanged = drop_nonterminals(&seq, 0.0, &mut r).unwrap();
        assert_eq!(unchanged, seq);
        let dropped = drop_nonterminals(&seq, 1.0, &mut r).unwrap();
        assert_eq!(
            dropped,
            vec![
                FlatToken::leaf("("),
                FlatToken::leaf("data"),
                FlatToken::leaf(")"),
            ]
        );
    }

    #[test]
    fn drop_nonterminals_rejects_bad_probability() {
        let seq = flatten(&parameters_subtree());
        let mut r = rng(3);
        assert!(matches!(
            drop_nonterminals(&seq, -0.1, &mut r),
            Err(AstError::InvalidProbability(_))
        ));
        assert!(drop_nonterminals(&seq, 1.5, &mut r).is_err());
        assert!(drop_nonterminals(&seq, f64::NAN, &mut r).is_err());
    }

    #[test]
    fn drop_nonterminals_frequency_near_half() {
        let seq = flatten(&parameters_subtree());
        let mut r = rng(11);
        let mut drops = 0usize;
        let trials = 10_000;
        for _ in 0..trials {
            let out = drop_nonterminals(&seq, 0.5, &mut r).unwrap();
            if out.len() != seq.len() {
                drops += 1;
            }
        }
        let freq = drops as f64 / trials as f64;
        assert!((0.49..=0.51).contains(&freq), "drop frequency {freq}");
    }

    #[test]
    fn random_tree_depth_one_is_leaf() {
        let mut r = rng(5);
        for _ in 0..50 {
            let t = random_tree(&mut r, 1, 7).unwrap();
            assert!(t.is_leaf());
        }
    }

    #[test]
    fn random_tree_is_deterministic() {
        let a = random_tree(&mut rng(99), 6, 4).unwrap();
        let b = random_tree(&mut rng(99), 6, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_tree_respects_bounds() {
        let mut r = rng(23);
        for _ in 0..1_000 {
            let t = random_tree(&mut r, 8, 5).unwrap();
            assert!(t.depth() <= 8);
            fn max_fanout(t: &AstTree) -> usize {
                t.children
                    .iter()
                    .map(max_fanout)
                    .max()
                    .unwrap_or(0)
                    .max(t.children.len())
            }
            assert!(max_fanout(&t) <= 5);
        }
    }

    #[test]
    fn random_tree_rejects_zero_bounds() {
        let mut r = rng(1);
        assert_eq!(random_tree(&mut r, 0, 3).unwrap_err(), AstError::InvalidBounds);
        assert_eq!(random_tree(&mut r, 3, 0).unwrap_err(), AstError::InvalidBounds);
    }

    // Property tests over arbitrary trees (not just the seeded generator).

    fn arb_tree() -> impl Strategy<Value = AstTree> {
        let leaf = "[a-z]{1,4}".prop_map(AstTree::leaf);
        leaf.prop_recursive(5, 64, 4, |inner| {
            ("[a-z]{1,4}", prop::collection::vec(inner, 1..4))
                .prop_map(|(name, children)| AstTree::node(name, children))
        })
    }

    proptest! {
        #[test]
        fn prop_roundtrip(t in arb_tree()) {
            prop_assert_eq!(reconstruct(&flatten(&t)).unwrap(), t);
        }

        #[test]
        fn prop_marker_balance(t in arb_tree()) {
            let seq = flatten(&t);
            let mut depth: i64 = 0;
            for tok in &seq {
                match tok.kind {
                    TokenKind::NontermLeft => depth += 1,
                    TokenKind::NontermRight => {
                        depth -= 1;
                        prop_assert!(depth >= 0, "prefix with more right than left markers");
                    }
                    _ => {}
                }
            }
            prop_assert_eq!(depth, 0, "unbalanced markers");
        }

        #[test]
        fn prop_first_last_markers_for_internal_root(t in arb_tree()) {
            let seq = flatten(&t);
            if !t.is_leaf() {
                prop_assert_eq!(seq.first().unwrap(), &FlatToken::left(t.name.clone()));
                prop_assert_eq!(seq.last().unwrap(), &FlatToken::right(t.name.clone()));
            }
        }

        #[test]
        fn prop_length_identity(t in arb_tree()) {
            prop_assert_eq!(flatten(&t).len(), t.leaf_count() + 2 * t.internal_count());
        }
    }
}
