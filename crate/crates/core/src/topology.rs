//! Rooted tree view of a radial case.
//!
//! Buses are addressed by their position in [`NetworkCase::buses`] and branches
//! by their position in [`NetworkCase::branches`]. Every in-service branch is
//! oriented parent→child; `reversed[k]` records that the file lists branch `k`
//! the other way round.

use std::collections::HashMap;

use thiserror::Error;

use crate::case_io::{BusId, NetworkCase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("network not radial: branches {0:?} close a cycle")]
    NotRadial(Vec<(BusId, BusId)>),
    #[error("network disconnected: buses {0:?} unreachable from the slack")]
    Disconnected(Vec<BusId>),
    #[error("slack bus {0} not found")]
    MissingRoot(BusId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialTopology {
    /// Slack bus index.
    pub root: usize,
    pub bus_ids: Vec<BusId>,
    /// `(parent bus, branch)` for every bus except the root.
    pub parent: Vec<Option<(usize, usize)>>,
    /// `(child bus, branch)` sorted by child bus id.
    pub children: Vec<Vec<(usize, usize)>>,
    /// Breadth-first from the root, children in ascending id order.
    pub bfs_order: Vec<usize>,
    pub depth: Vec<usize>,
    /// Per branch, true when the file's from/to is child→parent. Out-of-service
    /// branches stay `false`.
    pub reversed: Vec<bool>,
    /// Per branch, the child bus it feeds (None when out of service).
    pub child_of_branch: Vec<Option<usize>>,
    preorder: Vec<usize>,
    subtree_start: Vec<usize>,
    subtree_end: Vec<usize>,
    index_of: HashMap<BusId, usize>,
}

pub fn build_radial_topology(case: &NetworkCase) -> Result<RadialTopology, TopologyError> {
    let n = case.buses.len();
    let index_of: HashMap<BusId, usize> =
        case.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
    let bus_ids: Vec<BusId> = case.buses.iter().map(|b| b.id).collect();
    let root = *index_of
        .get(&case.slack_bus_id)
        .ok_or(TopologyError::MissingRoot(case.slack_bus_id))?;

    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, br) in case.in_service_branches() {
        let (f, t) = (index_of[&br.from_bus], index_of[&br.to_bus]);
        adjacency[f].push((t, k));
        adjacency[t].push((f, k));
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|&(b, k)| (bus_ids[b], k));
    }

    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut depth = vec![0; n];
    let mut visited = vec![false; n];
    let mut bfs_order = Vec::with_capacity(n);
    let mut cycle_branches = Vec::new();
    let mut closing = vec![false; case.branches.len()];

    visited[root] = true;
    bfs_order.push(root);
    let mut head = 0;
    while head < bfs_order.len() {
        let u = bfs_order[head];
        head += 1;
        for &(v, k) in &adjacency[u] {
            if parent[u].is_some_and(|(_, pk)| pk == k) {
                continue;
            }
            if visited[v] {
                if !closing[k] {
                    closing[k] = true;
                    cycle_branches.push(k);
                }
                continue;
            }
            visited[v] = true;
            parent[v] = Some((u, k));
            depth[v] = depth[u] + 1;
            children[u].push((v, k));
            bfs_order.push(v);
        }
    }

    if !cycle_branches.is_empty() {
        cycle_branches.sort_unstable();
        let pairs = cycle_branches
            .into_iter()
            .map(|k| (case.branches[k].from_bus, case.branches[k].to_bus))
            .collect();
        return Err(TopologyError::NotRadial(pairs));
    }
    if bfs_order.len() < n {
        let mut unreachable: Vec<BusId> =
            (0..n).filter(|&i| !visited[i]).map(|i| bus_ids[i]).collect();
        unreachable.sort_unstable();
        return Err(TopologyError::Disconnected(unreachable));
    }

    let mut reversed = vec![false; case.branches.len()];
    let mut child_of_branch = vec![None; case.branches.len()];
    for (child, p) in parent.iter().enumerate() {
        if let Some((_, k)) = *p {
            reversed[k] = index_of[&case.branches[k].to_bus] != child;
            child_of_branch[k] = Some(child);
        }
    }

    // preorder with subtree intervals: subtree(b) = preorder[start[b]..end[b]]
    let mut preorder = Vec::with_capacity(n);
    let mut subtree_start = vec![0; n];
    let mut subtree_end = vec![0; n];
    let mut stack = vec![(root, false)];
    while let Some((u, done)) = stack.pop() {
        if done {
            subtree_end[u] = preorder.len();
            continue;
        }
        subtree_start[u] = preorder.len();
        preorder.push(u);
        stack.push((u, true));
        for &(c, _) in children[u].iter().rev() {
            stack.push((c, false));
        }
    }

    Ok(RadialTopology {
        root,
        bus_ids,
        parent,
        children,
        bfs_order,
        depth,
        reversed,
        child_of_branch,
        preorder,
        subtree_start,
        subtree_end,
        index_of,
    })
}

impl RadialTopology {
    pub fn bus_count(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn index_of(&self, id: BusId) -> Option<usize> {
        self.index_of.get(&id).copied()
    }

    /// Buses in the subtree rooted at `bus` (itself first, then preorder).
    pub fn subtree_members(&self, bus: usize) -> &[usize] {
        &self.preorder[self.subtree_start[bus]..self.subtree_end[bus]]
    }

    /// Branch feeding `bus`, if it is not the root.
    pub fn feeding_branch(&self, bus: usize) -> Option<usize> {
        self.parent[bus].map(|(_, k)| k)
    }

    /// Branches on the path from the root down to `bus`, root side first.
    pub fn path_branches(&self, bus: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.depth[bus]);
        let mut b = bus;
        while let Some((p, k)) = self.parent[b] {
            path.push(k);
            b = p;
        }
        path.reverse();
        path
    }

    /// Parent-side and child-side bus of branch `k` (None when out of service).
    pub fn endpoints(&self, k: usize) -> Option<(usize, usize)> {
        let child = self.child_of_branch[k]?;
        let (parent, _) = self.parent[child]?;
        Some((parent, child))
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }
}
