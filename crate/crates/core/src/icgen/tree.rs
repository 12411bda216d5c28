//! Random binary control trees.
//!
//! A tree decides which LFSRs are enabled for a given address: the walk
//! starts at the root, enables the node's LFSR, then follows the left child
//! when the node's address bit is set and the right child otherwise. Nodes
//! with a single child pass straight through.
//!
//! Every node's random choices are a hash of `(tree seed, path from root)`
//! rather than positions in a sequential stream. A tree generated with depth
//! `n` is therefore exactly the depth-`n` truncation of the tree the same seed
//! yields at depth `n + 1`, which makes the per-iteration cost monotone in
//! depth.

use rand::seq::SliceRandom;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::splitmix64;

use super::IcError;

pub const MAX_TREE_DEPTH: u32 = 16;

/// Address bits eligible as level controls. Bits below 3 are constant for
/// 8-byte aligned reads, bits above 26 rarely change inside one region.
pub const ADDRESS_BIT_RANGE: std::ops::RangeInclusive<u8> = 3..=26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub lfsr_index: u8,
    pub addr_bit: u8,
    pub left: Option<u16>,
    pub right: Option<u16>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.left.is_none() && self.right.is_none()
    }
}

/// Nodes are stored in preorder; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlTree {
    nodes: Vec<TreeNode>,
    depth: u32,
}

impl ControlTree {
    /// Builds a tree from preorder nodes, checking child links and bounds.
    pub fn from_nodes(nodes: Vec<TreeNode>, lfsr_count: usize) -> Result<Self, IcError> {
        if nodes.is_empty() {
            return Err(IcError::MalformedTree("empty tree"));
        }
        for node in &nodes {
            if usize::from(node.lfsr_index) >= lfsr_count {
                return Err(IcError::MalformedTree("lfsr index out of range"));
            }
            if node.addr_bit >= 64 {
                return Err(IcError::MalformedTree("address bit out of range"));
            }
        }
        // Preorder layout: walking from the root must visit every node exactly
        // once, in index order.
        let mut expected = 0usize;
        let mut stack = vec![0u16];
        let mut depth = 0u32;
        let mut depth_stack = vec![1u32];
        while let Some(id) = stack.pop() {
            let level = depth_stack.pop().expect("paired stacks");
            if usize::from(id) != expected {
                return Err(IcError::MalformedTree("nodes are not in preorder"));
            }
            expected += 1;
            depth = depth.max(level);
            let node = nodes
                .get(usize::from(id))
                .ok_or(IcError::MalformedTree("dangling child"))?;
            for child in [node.right, node.left].into_iter().flatten() {
                stack.push(child);
                depth_stack.push(level + 1);
            }
        }
        if expected != nodes.len() {
            return Err(IcError::MalformedTree("unreachable nodes"));
        }
        Ok(Self { nodes, depth })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Height of the tree in nodes (a single root has depth 1).
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Walks the tree for `address`, calling `enable` with each visited
    /// node's LFSR index. Returns the number of nodes visited.
    pub fn walk(&self, address: u64, mut enable: impl FnMut(u8)) -> u32 {
        let mut id = 0usize;
        let mut visited = 0u32;
        loop {
            let node = &self.nodes[id];
            visited += 1;
            enable(node.lfsr_index);
            let next = match (node.left, node.right) {
                (Some(l), Some(r)) => {
                    if (address >> node.addr_bit) & 1 == 1 {
                        l
                    } else {
                        r
                    }
                }
                (Some(c), None) | (None, Some(c)) => c,
                (None, None) => return visited,
            };
            id = usize::from(next);
        }
    }

    /// Expected nodes visited and expected number of distinct LFSRs enabled
    /// per walk, with every address bit an independent fair coin.
    pub fn walk_expectations(&self) -> (f64, f64) {
        let mut path_len = 0.0;
        let mut enabled = 0.0;
        let mut set = [0u64; 4];
        self.expect_from(0, 1.0, 0, &mut set, &mut path_len, &mut enabled);
        (path_len, enabled)
    }

    fn expect_from(
        &self,
        id: usize,
        prob: f64,
        len: u32,
        set: &mut [u64; 4],
        path_len: &mut f64,
        enabled: &mut f64,
    ) {
        let node = self.nodes[id];
        let (word, bit) = (usize::from(node.lfsr_index / 64), node.lfsr_index % 64);
        let fresh = (set[word] >> bit) & 1 == 0;
        set[word] |= 1 << bit;
        let len = len + 1;
        match (node.left, node.right) {
            (Some(l), Some(r)) => {
                self.expect_from(usize::from(l), prob / 2.0, len, set, path_len, enabled);
                self.expect_from(usize::from(r), prob / 2.0, len, set, path_len, enabled);
            }
            (Some(c), None) | (None, Some(c)) => {
                self.expect_from(usize::from(c), prob, len, set, path_len, enabled);
            }
            (None, None) => {
                *path_len += prob * f64::from(len);
                let count: u32 = set.iter().map(|w| w.count_ones()).sum();
                *enabled += prob * f64::from(count);
            }
        }
        if fresh {
            set[word] &= !(1 << bit);
        }
    }
}

/// Generates a random control tree of depth at most `depth` over
/// `lfsr_count` registers.
///
/// Below the last level a node is a leaf with probability 1/8, has a single
/// (left or right) child with probability 3/8 and two children with
/// probability 1/2. Each level branches on its own distinct address bit.
pub fn gen_control_tree<R: RngCore + ?Sized>(
    depth: u32,
    lfsr_count: usize,
    rng: &mut R,
) -> Result<ControlTree, IcError> {
    if depth == 0 || depth > MAX_TREE_DEPTH {
        return Err(IcError::InvalidParameter("tree depth must be in 1..=16"));
    }
    if lfsr_count == 0 || lfsr_count > 255 {
        return Err(IcError::InvalidParameter("lfsr count must be in 1..=255"));
    }
    let seed = rng.next_u64();
    let mut pool: Vec<u8> = ADDRESS_BIT_RANGE.collect();
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let level_bits = &pool[..depth as usize];

    let mut nodes = Vec::new();
    build(seed, 0, 1, depth, lfsr_count as u64, level_bits, &mut nodes);
    ControlTree::from_nodes(nodes, lfsr_count)
}

fn build(
    seed: u64,
    path: u64,
    level: u32,
    max_depth: u32,
    lfsr_count: u64,
    level_bits: &[u8],
    nodes: &mut Vec<TreeNode>,
) -> u16 {
    let h = splitmix64(seed ^ splitmix64(path ^ (u64::from(level) << 58)));
    let id = nodes.len() as u16;
    let lfsr_index = (((h >> 32) * lfsr_count) >> 32) as u8;
    nodes.push(TreeNode {
        lfsr_index,
        addr_bit: level_bits[(level - 1) as usize],
        left: None,
        right: None,
    });
    if level == max_depth {
        return id;
    }
    let (has_left, has_right) = match h & 7 {
        0 => (false, false),
        1..=3 => ((h >> 3) & 1 == 1, (h >> 3) & 1 == 0),
        _ => (true, true),
    };
    let pos = usize::from(id);
    if has_left {
        let child = build(seed, path << 1 | 1, level + 1, max_depth, lfsr_count, level_bits, nodes);
        nodes[pos].left = Some(child);
    }
    if has_right {
        let child = build(seed, path << 1, level + 1, max_depth, lfsr_count, level_bits, nodes);
        nodes[pos].right = Some(child);
    }
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_single_lfsr() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = gen_control_tree(1, 1, &mut rng).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.root().lfsr_index, 0);
        assert!(t.root().is_leaf());
        assert_eq!(t.walk_expectations(), (1.0, 1.0));
    }

    #[test]
    fn same_seed_same_tree() {
        let a = gen_control_tree(5, 3, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = gen_control_tree(5, 3, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn depth_and_size_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut max_depth = 0;
        for _ in 0..10_000 {
            let t = gen_control_tree(6, 4, &mut rng).unwrap();
            assert!(t.depth() <= 6);
            assert!(t.len() <= 64);
            max_depth = max_depth.max(t.depth());
        }
        assert_eq!(max_depth, 6);
    }

    #[test]
    fn truncation_property() {
        for s in 0..50 {
            let shallow = gen_control_tree(4, 5, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
            let deep = gen_control_tree(5, 5, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
            assert_eq!(shallow.root().lfsr_index, deep.root().lfsr_index);
            assert!(deep.len() >= shallow.len());
        }
    }

    #[test]
    fn distinct_bits_along_paths() {
        let t = gen_control_tree(12, 4, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        fn check(t: &ControlTree, id: usize, seen: &mut Vec<u8>) {
            let n = t.nodes()[id];
            assert!(!seen.contains(&n.addr_bit));
            seen.push(n.addr_bit);
            for c in [n.left, n.right].into_iter().flatten() {
                check(t, usize::from(c), seen);
            }
            seen.pop();
        }
        check(&t, 0, &mut Vec::new());
    }

    #[test]
    fn walk_follows_address_bits() {
        let nodes = vec![
            TreeNode { lfsr_index: 0, addr_bit: 4, left: Some(1), right: Some(2) },
            TreeNode { lfsr_index: 1, addr_bit: 5, left: None, right: None },
            TreeNode { lfsr_index: 2, addr_bit: 5, left: None, right: None },
        ];
        let t = ControlTree::from_nodes(nodes, 3).unwrap();
        let mut seen = Vec::new();
        assert_eq!(t.walk(1 << 4, |i| seen.push(i)), 2);
        assert_eq!(seen, vec![0, 1]);
        seen.clear();
        t.walk(0, |i| seen.push(i));
        assert_eq!(seen, vec![0, 2]);
        assert_eq!(t.walk_expectations(), (2.0, 2.0));
    }

    #[test]
    fn rejects_bad_layouts() {
        let leaf = TreeNode { lfsr_index: 0, addr_bit: 3, left: None, right: None };
        assert!(ControlTree::from_nodes(vec![], 1).is_err());
        assert!(ControlTree::from_nodes(vec![leaf, leaf], 1).is_err());
        let bad = TreeNode { left: Some(5), ..leaf };
        assert!(ControlTree::from_nodes(vec![bad], 1).is_err());
        let cyc = TreeNode { left: Some(0), ..leaf };
        assert!(ControlTree::from_nodes(vec![cyc], 1).is_err());
        assert!(ControlTree::from_nodes(vec![TreeNode { lfsr_index: 2, ..leaf }], 2).is_err());
    }
}
