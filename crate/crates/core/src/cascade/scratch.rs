use std::cell::RefCell;

use crate::graph::{EdgeId, NodeId, SocialGraph};

/// Per-thread visited marks for breadth-first cascades. Marks are
/// generation-stamped so a new traversal costs nothing to reset.
pub(crate) struct Scratch {
    stamp: Vec<u32>,
    generation: u32,
    queue: Vec<NodeId>,
}

impl Scratch {
    fn new() -> Self {
        Scratch {
            stamp: Vec::new(),
            generation: 0,
            queue: Vec::new(),
        }
    }

    fn begin(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.queue.clear();
    }

    #[inline]
    fn visit(&mut self, v: NodeId) -> bool {
        if self.stamp[v] == self.generation {
            false
        } else {
            self.stamp[v] = self.generation;
            true
        }
    }

    /// Number of nodes reached from `seeds` through edges accepted by `live`,
    /// never entering nodes for which `blocked` holds. Seeds that are blocked
    /// are ignored. Each edge is queried at most once.
    pub(crate) fn cascade_size(
        &mut self,
        graph: &SocialGraph,
        seeds: impl IntoIterator<Item = NodeId>,
        blocked: impl Fn(NodeId) -> bool,
        mut live: impl FnMut(EdgeId) -> bool,
    ) -> usize {
        self.begin(graph.node_count());
        for s in seeds {
            if !blocked(s) && self.visit(s) {
                self.queue.push(s);
            }
        }
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for &e in graph.out_edges(u) {
                let t = graph.edge(e).target;
                if self.stamp[t] == self.generation || blocked(t) {
                    continue;
                }
                if live(e) {
                    self.stamp[t] = self.generation;
                    self.queue.push(t);
                }
            }
        }
        self.queue.len()
    }

    /// Nodes reached by the last [`Scratch::cascade_size`] call.
    pub(crate) fn reached(&self) -> &[NodeId] {
        &self.queue
    }
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::new());
}

/// Runs `f` with this thread's scratch. `f` must not re-enter rayon or call
/// `with_scratch` itself.
pub(crate) fn with_scratch<R>(f: impl FnOnce(&mut Scratch) -> R) -> R {
    SCRATCH.with(|s| f(&mut s.borrow_mut()))
}
