//! Build-time compacted trie over a sorted key set.
//!
//! The trie exists only to extract names, extents, handles and leaf ranges;
//! the query structures never walk it.

use std::fmt::Write as _;

use crate::bitkey::{fattest, BitString};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrieNode {
    pub name_len: u32,
    pub extent: BitString,
    pub compacted_path: BitString,
    /// Closed range `[lo..hi]` of prefix lengths routing to this node. Empty
    /// (`lo > hi`) only at a root with empty extent.
    pub skip_interval: (u32, u32),
    pub handle: BitString,
    pub left_leaf: usize,
    pub right_leaf: usize,
    pub children: Option<[usize; 2]>,
}

impl TrieNode {
    pub fn name(&self) -> BitString {
        self.extent.prefix(self.name_len)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Compacted binary trie whose leaves, left to right, are the sorted keys.
#[derive(Clone, Debug)]
pub struct CompactedTrie {
    nodes: Vec<TrieNode>,
    width: u32,
    n: usize,
}

pub(crate) fn check_sorted(keys: &[u64], width: u32) -> Result<()> {
    if width == 0 || width > crate::bitkey::MAX_WIDTH {
        return Err(Error::Width(width));
    }
    if keys.is_empty() {
        return Err(Error::Empty);
    }
    for (i, &k) in keys.iter().enumerate() {
        if k & !crate::bitkey::mask(width) != 0 {
            return Err(Error::KeyRange { value: k, width });
        }
        if i > 0 {
            if keys[i - 1] == k {
                return Err(Error::Duplicate(i));
            }
            if keys[i - 1] > k {
                return Err(Error::Unsorted(i));
            }
        }
    }
    Ok(())
}

impl CompactedTrie {
    /// Builds the trie of a strictly increasing, nonempty key list.
    pub fn build(keys: &[u64], width: u32) -> Result<Self> {
        check_sorted(keys, width)?;
        let mut trie = Self {
            nodes: Vec::with_capacity(2 * keys.len() - 1),
            width,
            n: keys.len(),
        };
        trie.build_node(keys, 0, keys.len() - 1, 0, true);
        Ok(trie)
    }

    fn build_node(&mut self, keys: &[u64], lo: usize, hi: usize, name_len: u32, root: bool) -> usize {
        let w = self.width;
        let first = BitString::key_prefix(keys[lo], w, w);
        let extent = if lo == hi {
            first
        } else {
            first.lcp(&BitString::key_prefix(keys[hi], w, w))
        };
        let e = extent.len();
        let skip_interval = if root { (1, e) } else { (name_len, e) };
        let handle_len = if skip_interval.0 > skip_interval.1 {
            0
        } else {
            fattest(skip_interval.0 as u64 - 1, skip_interval.1 as u64) as u32
        };
        let id = self.nodes.len();
        self.nodes.push(TrieNode {
            name_len,
            extent,
            compacted_path: extent.slice(name_len, e).expect("name is a prefix of the extent"),
            skip_interval,
            handle: extent.prefix(handle_len),
            left_leaf: lo,
            right_leaf: hi,
            children: None,
        });
        if lo < hi {
            // first key whose bit right after the extent is 1
            let shift = w - e - 1;
            let split = lo + keys[lo..=hi].partition_point(|k| (k >> shift) & 1 == 0);
            debug_assert!(lo < split && split <= hi);
            let left = self.build_node(keys, lo, split - 1, e + 1, false);
            let right = self.build_node(keys, split, hi, e + 1, false);
            self.nodes[id].children = Some([left, right]);
        }
        id
    }

    pub fn root(&self) -> &TrieNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &TrieNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TrieNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn key_count(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &TrieNode> {
        self.nodes.iter().filter(|n| !n.is_leaf())
    }

    /// `(handle, extent, name length)` for every internal node.
    pub fn internal_extents(&self) -> Vec<(BitString, BitString, u32)> {
        self.internal_nodes()
            .map(|n| (n.handle, n.extent, n.name_len))
            .collect()
    }

    /// Exit node of `x` found by descending from the root.
    pub fn exit_node(&self, x: &BitString) -> usize {
        let mut id = 0;
        loop {
            let node = &self.nodes[id];
            debug_assert!(node.name().is_prefix_of(x));
            match node.children {
                Some(children) if node.extent.is_proper_prefix_of(x) => {
                    id = children[x.bit(node.extent.len()) as usize];
                }
                _ => return id,
            }
        }
    }

    /// DOT-like text rendering, one line per node and edge.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph trie {\n");
        for (id, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "  n{id} [label=\"name={} extent={} skip=[{}..{}] handle={} leaves=[{}..{}]\"];",
                n.name(),
                n.extent,
                n.skip_interval.0,
                n.skip_interval.1,
                n.handle,
                n.left_leaf,
                n.right_leaf
            );
            if let Some([l, r]) = n.children {
                let _ = writeln!(out, "  n{id} -> n{l} [label=\"0\"];");
                let _ = writeln!(out, "  n{id} -> n{r} [label=\"1\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}
