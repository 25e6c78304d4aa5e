//! Hierarchies: rooted trees whose nodes are subsets, each internal node being
//! split into a proper partition of at least two parts, down to singletons.

use std::fmt;

use crate::error::{domain, Error, Result};

use super::partition::{canonical_ground, rgs_successor};

/// Default largest ground set accepted by [`enumerate_hierarchies`].
pub const HIERARCHY_GUARD: usize = 10;

const MAX_GROUND: usize = 16;

/// A node of a hierarchy. Leaves are the singletons; children are ordered by
/// their least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HNode<L> {
    pub set: Vec<L>,
    pub children: Vec<HNode<L>>,
}

impl<L> HNode<L> {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of internal nodes in this subtree.
    pub fn internal_nodes(&self) -> usize {
        if self.is_leaf() {
            0
        } else {
            1 + self.children.iter().map(HNode::internal_nodes).sum::<usize>()
        }
    }

    /// Height counted in internal levels: a leaf has height 0.
    pub fn height(&self) -> usize {
        if self.is_leaf() {
            0
        } else {
            1 + self.children.iter().map(HNode::height).max().unwrap_or(0)
        }
    }
}

impl<L: fmt::Display> fmt::Display for HNode<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf() {
            return write!(f, "{}", self.set[0]);
        }
        write!(f, "{{")?;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// A hierarchy on a finite ground set.
///
/// Hierarchies on the same ground are ordered by [`Hierarchy::split_code`],
/// which is the order the enumerator produces them in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hierarchy<L> {
    root: HNode<L>,
}

impl<L: Ord> Hierarchy<L> {
    /// Preorder concatenation of the restricted growth strings describing how
    /// each internal node splits into its children.
    pub fn split_code(&self) -> Vec<u8> {
        fn rec<L: Ord>(node: &HNode<L>, out: &mut Vec<u8>) {
            if node.is_leaf() {
                return;
            }
            for x in &node.set {
                let b = node
                    .children
                    .iter()
                    .position(|c| c.set.binary_search(x).is_ok())
                    .expect("children cover the node");
                out.push(b as u8);
            }
            for c in &node.children {
                rec(c, out);
            }
        }
        let mut out = Vec::new();
        rec(&self.root, &mut out);
        out
    }
}

impl<L: Ord> PartialOrd for Hierarchy<L> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<L: Ord> Ord for Hierarchy<L> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.root
            .set
            .cmp(&other.root.set)
            .then_with(|| self.split_code().cmp(&other.split_code()))
    }
}

impl<L> Hierarchy<L> {
    pub fn root(&self) -> &HNode<L> {
        &self.root
    }

    pub fn ground(&self) -> &[L] {
        &self.root.set
    }

    /// Order of the hierarchy: the number of nested partition levels.
    pub fn order(&self) -> usize {
        self.root.height()
    }
}

impl<L: fmt::Display> fmt::Display for Hierarchy<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

/// One node with at least three elements (or the root) in the cursor arena.
/// Two-element nodes have a single split and are expanded on decode.
#[derive(Clone, Copy, Debug)]
struct Slot {
    elems: [u8; MAX_GROUND],
    rgs: [u8; MAX_GROUND],
    len: u8,
    parent: u32,
    ordinal: u8,
}

impl Slot {
    fn new(elems: &[u8], parent: u32, ordinal: u8) -> Slot {
        let mut s = Slot {
            elems: [0; MAX_GROUND],
            rgs: [0; MAX_GROUND],
            len: elems.len() as u8,
            parent,
            ordinal,
        };
        s.elems[..elems.len()].copy_from_slice(elems);
        s.rgs[elems.len() - 1] = 1;
        s
    }

    fn block(&self, b: u8, out: &mut [u8; MAX_GROUND]) -> usize {
        let mut k = 0;
        for j in 0..self.len as usize {
            if self.rgs[j] == b {
                out[k] = self.elems[j];
                k += 1;
            }
        }
        k
    }

    fn num_blocks(&self) -> u8 {
        self.rgs[..self.len as usize].iter().copied().max().unwrap_or(0) + 1
    }
}

/// Lazy stream of hierarchies. The cursor keeps the nodes with at least three
/// elements in preorder; the last node that can move to its next split is
/// advanced and everything after it is reset, like an odometer.
#[derive(Clone, Debug)]
pub struct Hierarchies<L> {
    ground: Vec<L>,
    slots: Vec<Slot>,
    started: bool,
    done: bool,
}

const NO_PARENT: u32 = u32::MAX;

impl<L: Clone> Hierarchies<L> {
    fn push_initial(&mut self, elems: &[u8], parent: u32, ordinal: u8) {
        let slot = Slot::new(elems, parent, ordinal);
        let idx = self.slots.len() as u32;
        self.slots.push(slot);
        // The first split is {all but last}, {last}; only the big block recurses.
        if elems.len() - 1 >= 3 {
            self.push_initial(&elems[..elems.len() - 1], idx, 0);
        }
    }

    fn push_children_from(&mut self, idx: usize, first_ordinal: u8) {
        let slot = self.slots[idx];
        let blocks = slot.num_blocks();
        // The largest block has at most len − (blocks − 1) elements.
        if (slot.len as usize) < blocks as usize + 2 {
            return;
        }
        let mut buf = [0u8; MAX_GROUND];
        for b in first_ordinal..blocks {
            let k = slot.block(b, &mut buf);
            if k >= 3 {
                self.push_initial(&buf[..k], idx as u32, b);
            }
        }
    }

    fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let mut i = self.slots.len();
        while i > 0 {
            i -= 1;
            let len = self.slots[i].len as usize;
            // All singletons is the last split of a node.
            if self.slots[i].rgs[len - 1] as usize == len - 1 {
                continue;
            }
            if rgs_successor(&mut self.slots[i].rgs[..len], 2, len) {
                let was_last = i + 1 == self.slots.len();
                self.slots.truncate(i + 1);
                self.push_children_from(i, 0);
                if was_last {
                    // Later branches held no slots, and their blocks are unchanged.
                    return true;
                }
                let mut child = i;
                while self.slots[child].parent != NO_PARENT {
                    let parent = self.slots[child].parent as usize;
                    let next = self.slots[child].ordinal + 1;
                    self.push_children_from(parent, next);
                    child = parent;
                }
                return true;
            }
        }
        self.done = true;
        false
    }

    fn decode_slot(&self, idx: usize, cursor: &mut usize) -> HNode<L> {
        let slot = self.slots[idx];
        let set = slot.elems[..slot.len as usize]
            .iter()
            .map(|&e| self.ground[e as usize].clone())
            .collect();
        let mut children = Vec::new();
        let mut buf = [0u8; MAX_GROUND];
        for b in 0..slot.num_blocks() {
            let k = slot.block(b, &mut buf);
            let child = match k {
                1 => self.leaf(buf[0]),
                2 => HNode {
                    set: vec![self.ground[buf[0] as usize].clone(), self.ground[buf[1] as usize].clone()],
                    children: vec![self.leaf(buf[0]), self.leaf(buf[1])],
                },
                _ => {
                    let next = *cursor;
                    *cursor += 1;
                    self.decode_slot(next, cursor)
                }
            };
            children.push(child);
        }
        HNode { set, children }
    }

    fn leaf(&self, e: u8) -> HNode<L> {
        HNode {
            set: vec![self.ground[e as usize].clone()],
            children: Vec::new(),
        }
    }

    fn decode(&self) -> Hierarchy<L> {
        if self.slots.is_empty() {
            return Hierarchy {
                root: self.leaf(0),
            };
        }
        let mut cursor = 1;
        Hierarchy {
            root: self.decode_slot(0, &mut cursor),
        }
    }
}

impl<L: Clone> Iterator for Hierarchies<L> {
    type Item = Hierarchy<L>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.advance() {
            Some(self.decode())
        } else {
            None
        }
    }

    fn count(mut self) -> usize {
        let mut n = 0;
        while self.advance() {
            n += 1;
        }
        n
    }
}

/// Hierarchies on `ground` under the default size guard.
pub fn enumerate_hierarchies<L: Ord + Clone>(ground: &[L]) -> Result<Hierarchies<L>> {
    enumerate_hierarchies_with_limit(ground, HIERARCHY_GUARD)
}

/// As [`enumerate_hierarchies`] with an explicit guard (at most 16).
pub fn enumerate_hierarchies_with_limit<L: Ord + Clone>(ground: &[L], limit: usize) -> Result<Hierarchies<L>> {
    if ground.is_empty() {
        return domain("hierarchies need a nonempty ground set");
    }
    let limit = limit.min(MAX_GROUND);
    if ground.len() > limit {
        return Err(Error::Capacity {
            what: "hierarchy ground size",
            got: ground.len(),
            limit,
        });
    }
    let ground = canonical_ground(ground)?;
    let mut it = Hierarchies {
        slots: Vec::new(),
        ground,
        started: false,
        done: false,
    };
    if it.ground.len() >= 2 {
        let elems: Vec<u8> = (0..it.ground.len() as u8).collect();
        let root = Slot::new(&elems, NO_PARENT, 0);
        it.slots.push(root);
        if elems.len() - 1 >= 3 {
            it.push_initial(&elems[..elems.len() - 1], 0, 0);
        }
    }
    Ok(it)
}
