//! Small undirected multigraph helpers shared by discovery and the lattice.
//!
//! Graphs here are tiny (a neighborhood or a query graph), given as node
//! count plus `(a, b)` endpoint pairs. Parallel edges are allowed.

/// Marks the edges that lie on at least one simple path between two
/// distinct terminals.
///
/// An edge lies on such a path iff its biconnected block belongs to the
/// minimal subtree of the block-cut tree spanning the terminals.
pub(crate) fn edges_between_terminals(node_count: usize, edges: &[(usize, usize)], terminals: &[usize]) -> Vec<bool> {
    let mut on_path = vec![false; edges.len()];
    if terminals.len() < 2 || edges.is_empty() {
        return on_path;
    }
    let blocks = biconnected_blocks(node_count, edges);

    // Bipartite block-cut forest: vertex v is tree node v, block b is tree
    // node node_count + b.
    let tree_size = node_count + blocks.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); tree_size];
    for (b, block) in blocks.iter().enumerate() {
        let mut vertices: Vec<usize> = block.iter().flat_map(|&e| [edges[e].0, edges[e].1]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        for v in vertices {
            adj[v].push(node_count + b);
            adj[node_count + b].push(v);
        }
    }

    let mut terminal = vec![false; tree_size];
    for &t in terminals {
        terminal[t] = true;
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; tree_size];
    let mut stack: Vec<usize> = (0..tree_size).filter(|&x| degree[x] <= 1 && !terminal[x]).collect();
    while let Some(x) = stack.pop() {
        if removed[x] {
            continue;
        }
        removed[x] = true;
        for &y in &adj[x] {
            if !removed[y] {
                degree[y] -= 1;
                if degree[y] <= 1 && !terminal[y] {
                    stack.push(y);
                }
            }
        }
    }
    for (b, block) in blocks.iter().enumerate() {
        if !removed[node_count + b] {
            for &e in block {
                on_path[e] = true;
            }
        }
    }
    on_path
}

/// Partitions edges into biconnected blocks (iterative Tarjan).
pub(crate) fn biconnected_blocks(node_count: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); node_count];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut disc = vec![usize::MAX; node_count];
    let mut low = vec![0usize; node_count];
    let mut timer = 0;
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut blocks = Vec::new();

    for root in 0..node_count {
        if disc[root] != usize::MAX || adj[root].is_empty() {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        // (node, edge used to enter it, next adjacency position)
        let mut frames: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(frame) = frames.last_mut() {
            let (v, via, pos) = *frame;
            if pos < adj[v].len() {
                frame.2 += 1;
                let (w, e) = adj[v][pos];
                if e == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push(e);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    frames.push((w, e, 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push(e);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] >= disc[parent] {
                        let mut block = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block.push(e);
                            if e == via {
                                break;
                            }
                        }
                        blocks.push(block);
                    }
                }
            }
        }
    }
    blocks
}

/// Minimal union-find.
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false when already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
