//! Small directed-graph toolkit over dense `usize` vertices.

use std::collections::VecDeque;

/// Strongly connected components of a graph given by adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    /// Component index of every vertex.
    pub comp_of: Vec<usize>,
    /// Members of every component, each sorted ascending.
    pub members: Vec<Vec<usize>>,
    /// Whether the component contains an internal edge (size > 1 or a self-loop).
    pub cyclic: Vec<bool>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Iterative Tarjan. Components are numbered in reverse topological order:
/// every edge `u -> v` satisfies `comp_of[u] >= comp_of[v]`.
pub fn tarjan(adj: &[Vec<usize>]) -> Components {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp_of = vec![UNSEEN; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut next = 0usize;
    // (vertex, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let id = members.len();
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp_of[w] = id;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    members.push(comp);
                }
            }
        }
    }

    let mut cyclic = vec![false; members.len()];
    for (c, comp) in members.iter().enumerate() {
        if comp.len() > 1 {
            cyclic[c] = true;
        } else {
            let v = comp[0];
            cyclic[c] = adj[v].contains(&v);
        }
    }
    Components {
        comp_of,
        members,
        cyclic,
    }
}

/// Vertices reachable from `sources` (inclusive).
pub fn forward_reachable(
    adj: &[Vec<usize>],
    sources: impl IntoIterator<Item = usize>,
) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// BFS parent pointers from `source`; `parent[source] == Some(source)`.
pub fn bfs_tree(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut parent = vec![None; adj.len()];
    parent[source] = Some(source);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if parent[w].is_none() {
                parent[w] = Some(v);
                queue.push_back(w);
            }
        }
    }
    parent
}

/// Reverses adjacency lists.
pub fn transpose(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (v, succ) in adj.iter().enumerate() {
        for &w in succ {
            rev[w].push(v);
        }
    }
    rev
}
