//! Ordered binary decision diagrams built one path at a time.
//!
//! The diagrams are not reduced: a node labelled `x_j` has children that are
//! terminals or labelled `x_{j+1}`, so the number of root-to-⊤ paths is the
//! number of models. Arcs start at ⊥ and are only ever redirected away from
//! it.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub type NodeId = u32;

pub const BOTTOM: NodeId = 0;
pub const TOP: NodeId = 1;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Node {
    pub var: u32,
    pub lo: NodeId,
    pub hi: NodeId,
}

impl Node {
    fn child(&self, hi: bool) -> NodeId {
        if hi {
            self.hi
        } else {
            self.lo
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ObddError {
    #[error("arc of node {node} already leads to {existing}, refusing to redirect it to {target}")]
    Corruption {
        node: NodeId,
        existing: NodeId,
        target: NodeId,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObddStore {
    num_vars: usize,
    /// Slots 0 and 1 stand for the terminals.
    nodes: Vec<Node>,
    root: NodeId,
}

impl ObddStore {
    pub fn new(num_vars: usize) -> ObddStore {
        let terminal = Node {
            var: 0,
            lo: BOTTOM,
            hi: BOTTOM,
        };
        ObddStore {
            num_vars,
            nodes: vec![terminal, terminal],
            root: BOTTOM,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Number of branch nodes.
    pub fn size(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn node(&self, id: NodeId) -> Node {
        assert!(id > TOP, "terminals have no node record");
        self.nodes[id as usize]
    }

    pub fn approx_bytes(&self) -> usize {
        self.nodes.len() * std::mem::size_of::<Node>()
    }

    /// Drops every node and points the root back at ⊥.
    pub fn reset(&mut self) {
        self.nodes.truncate(2);
        self.root = BOTTOM;
    }

    fn push(&mut self, var: u32) -> NodeId {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node {
            var,
            lo: BOTTOM,
            hi: BOTTOM,
        });
        id
    }

    fn set_arc(&mut self, node: NodeId, hi: bool, target: NodeId) -> Result<(), ObddError> {
        let n = &mut self.nodes[node as usize];
        let slot = if hi { &mut n.hi } else { &mut n.lo };
        if *slot != BOTTOM && *slot != target {
            return Err(ObddError::Corruption {
                node,
                existing: *slot,
                target,
            });
        }
        *slot = target;
        Ok(())
    }

    /// Adds the path that follows `prefix` (values of `x_1..x_m`, index 0
    /// unused) from the root and ends in `target`. Missing nodes are created
    /// with both arcs at ⊥. Returns the path as (node, arc taken) pairs.
    pub fn extend(&mut self, target: NodeId, prefix: &[bool]) -> Result<Vec<(NodeId, bool)>, ObddError> {
        let m = prefix.len().saturating_sub(1);
        if m == 0 {
            if self.root != BOTTOM && self.root != target {
                return Err(ObddError::Corruption {
                    node: BOTTOM,
                    existing: self.root,
                    target,
                });
            }
            self.root = target;
            return Ok(Vec::new());
        }
        if self.root == BOTTOM {
            self.root = self.push(1);
        }
        let mut path = Vec::with_capacity(m);
        let mut cur = self.root;
        for (j, &bit) in prefix.iter().enumerate().skip(1) {
            debug_assert_eq!(self.nodes[cur as usize].var as usize, j);
            path.push((cur, bit));
            let child = self.nodes[cur as usize].child(bit);
            if j == m {
                self.set_arc(cur, bit, target)?;
            } else if child == BOTTOM {
                let fresh = self.push(j as u32 + 1);
                self.set_arc(cur, bit, fresh)?;
                cur = fresh;
            } else if child == TOP || self.nodes[child as usize].var as usize != j + 1 {
                return Err(ObddError::Corruption {
                    node: cur,
                    existing: child,
                    target: BOTTOM,
                });
            } else {
                cur = child;
            }
        }
        Ok(path)
    }

    /// Number of root-to-⊤ paths below `id`.
    pub fn count_from(&self, id: NodeId) -> BigUint {
        let mut memo: HashMap<NodeId, BigUint> = HashMap::new();
        memo.insert(BOTTOM, BigUint::zero());
        memo.insert(TOP, BigUint::one());
        let mut stack = vec![id];
        while let Some(&v) = stack.last() {
            if memo.contains_key(&v) {
                stack.pop();
                continue;
            }
            let node = self.nodes[v as usize];
            let missing: Vec<NodeId> = [node.lo, node.hi]
                .into_iter()
                .filter(|c| !memo.contains_key(c))
                .collect();
            if missing.is_empty() {
                let total = &memo[&node.lo] + &memo[&node.hi];
                memo.insert(v, total);
                stack.pop();
            } else {
                stack.extend(missing);
            }
        }
        memo.remove(&id).expect("computed")
    }

    /// Number of root-to-⊤ paths, which is the number of models.
    pub fn count(&self) -> BigUint {
        self.count_from(self.root)
    }

    /// Calls `f` with every root-to-⊤ path as a total assignment
    /// (`values[v]` for `v` in `1..=n`).
    pub fn for_each_path(&self, mut f: impl FnMut(&[bool])) {
        let mut values = vec![false; self.num_vars + 1];
        self.walk(self.root, 1, &mut values, &mut f);
    }

    fn walk(&self, id: NodeId, depth: usize, values: &mut Vec<bool>, f: &mut impl FnMut(&[bool])) {
        match id {
            BOTTOM => {}
            TOP => f(values),
            _ => {
                let node = self.nodes[id as usize];
                let v = node.var as usize;
                debug_assert_eq!(v, depth);
                for bit in [false, true] {
                    values[v] = bit;
                    self.walk(node.child(bit), depth + 1, values, f);
                }
                values[v] = false;
            }
        }
    }

    /// Checks the shape invariant: the root is labelled `x_1`, children are ⊥
    /// or labelled one above their parent, and only `x_n` nodes reach ⊤.
    pub fn well_formed(&self) -> bool {
        let root_ok = match self.root {
            BOTTOM => true,
            TOP => self.num_vars == 0,
            r => self.nodes[r as usize].var == 1,
        };
        root_ok
            && self.nodes[2..].iter().all(|n| {
                [n.lo, n.hi].into_iter().all(|c| match c {
                    BOTTOM => true,
                    TOP => n.var as usize == self.num_vars,
                    c => self.nodes[c as usize].var == n.var + 1,
                }) && (n.var as usize) <= self.num_vars
            })
    }

    /// Text form: `obdd <nodes> <vars>`, one `<id> <var> <lo> <hi>` line per
    /// branch node, then `root <id>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "obdd {} {}", self.size(), self.num_vars);
        for (id, n) in self.nodes.iter().enumerate().skip(2) {
            let _ = writeln!(out, "{} {} {} {}", id, n.var, n.lo, n.hi);
        }
        let _ = writeln!(out, "root {}", self.root);
        out
    }

    pub fn load(text: &str) -> Result<ObddStore, ObddError> {
        let err = |line: usize, reason: &str| ObddError::Parse {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (hl, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "obdd" {
            return Err(err(hl, "expected `obdd <nodes> <vars>`"));
        }
        let count: usize = parts[1].parse().map_err(|_| err(hl, "bad node count"))?;
        let num_vars: usize = parts[2].parse().map_err(|_| err(hl, "bad variable count"))?;
        let mut store = ObddStore::new(num_vars);
        let mut raw = Vec::with_capacity(count);
        for k in 0..count {
            let (ln, l) = lines.next().ok_or_else(|| err(hl + k + 1, "missing node line"))?;
            let nums: Vec<u64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| err(ln, "bad number"))?;
            if nums.len() != 4 {
                return Err(err(ln, "expected `<id> <var> <lo> <hi>`"));
            }
            if nums[0] != k as u64 + 2 {
                return Err(err(ln, "node ids must be consecutive from 2"));
            }
            if nums[1] == 0 || nums[1] as usize > num_vars {
                return Err(err(ln, "variable out of range"));
            }
            raw.push((ln, nums));
        }
        let limit = count as u64 + 2;
        for (ln, nums) in raw {
            if nums[2] >= limit || nums[3] >= limit {
                return Err(err(ln, "child refers to an unknown node"));
            }
            store.nodes.push(Node {
                var: nums[1] as u32,
                lo: nums[2] as NodeId,
                hi: nums[3] as NodeId,
            });
        }
        let (rl, footer) = lines.next().ok_or_else(|| err(hl + count + 1, "missing root line"))?;
        let root = footer
            .strip_prefix("root ")
            .and_then(|r| r.trim().parse::<u64>().ok())
            .filter(|&r| r < limit)
            .ok_or_else(|| err(rl, "expected `root <id>`"))?;
        store.root = root as NodeId;
        if let Some((ln, _)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(err(ln, "trailing data"));
        }
        if !store.acyclic() {
            return Err(err(rl, "diagram has a cycle"));
        }
        Ok(store)
    }

    fn acyclic(&self) -> bool {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        for start in 2..self.nodes.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0u8)];
            state[start] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if *next == 2 {
                    state[v] = 2;
                    stack.pop();
                    continue;
                }
                let n = self.nodes[v];
                let c = if *next == 0 { n.lo } else { n.hi } as usize;
                *next += 1;
                if c <= TOP as usize {
                    continue;
                }
                match state[c] {
                    1 => return false,
                    0 => {
                        state[c] = 1;
                        stack.push((c, 0));
                    }
                    _ => {}
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_dump() {
        let mut s = ObddStore::new(1);
        s.extend(TOP, &[false, true]).unwrap();
        assert_eq!(s.dump(), "obdd 1 1\n2 1 0 1\nroot 2\n");
        assert_eq!(ObddStore::load(&s.dump()).unwrap(), s);
    }

    #[test]
    fn empty_diagram() {
        let s = ObddStore::new(4);
        assert_eq!(s.dump(), "obdd 0 4\nroot 0\n");
        assert_eq!(s.count(), BigUint::zero());
        let mut z = ObddStore::new(0);
        z.extend(TOP, &[false]).unwrap();
        assert_eq!(z.count(), BigUint::one());
    }

    #[test]
    fn first_path_is_a_chain() {
        let mut s = ObddStore::new(3);
        let pi = s.extend(TOP, &[false, true, false, true]).unwrap();
        assert_eq!(pi.len(), 3);
        assert_eq!(s.size(), 3);
        assert_eq!(s.count(), BigUint::one());
        assert!(s.well_formed());
    }

    #[test]
    fn shared_prefix_and_join() {
        let mut s = ObddStore::new(2);
        let pi = s.extend(TOP, &[false, false, true]).unwrap();
        let x2 = pi[1].0;
        s.extend(TOP, &[false, false, false]).unwrap();
        // x1 = 1 joins the solved x2 node
        s.extend(x2, &[false, true]).unwrap();
        assert_eq!(s.count(), BigUint::from(4u32));
        assert_eq!(s.size(), 2);
    }

    #[test]
    fn redirecting_an_arc_is_corruption() {
        let mut s = ObddStore::new(2);
        s.extend(TOP, &[false, true, true]).unwrap();
        let e = s.extend(BOTTOM + 2, &[false, true]).unwrap_err();
        assert!(matches!(e, ObddError::Corruption { .. }));
    }

    #[test]
    fn load_errors_carry_lines() {
        assert!(matches!(
            ObddStore::load("obdd 1 1\n2 1 0 7\nroot 2\n"),
            Err(ObddError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            ObddStore::load("obdd 1 1\n2 1 0 1\n"),
            Err(ObddError::Parse { line: 3, .. })
        ));
        assert!(matches!(ObddStore::load("bdd 0 0"), Err(ObddError::Parse { line: 1, .. })));
        assert!(matches!(
            ObddStore::load("obdd 1 1\n2 1 2 1\nroot 2\n"),
            Err(ObddError::Parse { .. })
        ));
    }

    #[test]
    fn unconstrained_chain_counts_all() {
        let mut s = ObddStore::new(3);
        let pi = s.extend(TOP, &[false, false, false, false]).unwrap();
        // make every arc of the chain live
        for (j, &(node, _)) in pi.iter().enumerate().rev() {
            let child = s.node(node).lo;
            let mut prefix = vec![false; j + 2];
            prefix[j + 1] = true;
            s.extend(child, &prefix).unwrap();
        }
        assert_eq!(s.count(), BigUint::from(8u32));
    }
}
