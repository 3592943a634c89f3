//! Boykov–Kolmogorov augmenting-path max-flow on `f64` capacities.
//!
//! After [`Graph::maxflow`], [`Graph::in_source_set`] reports the nodes reachable from
//! the source in the residual graph, i.e. the source side of the minimal minimum cut.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;

#[inline]
fn sister(a: u32) -> u32 {
    a ^ 1
}

pub struct Graph {
    first: Vec<u32>,
    tr_cap: Vec<f64>,
    parent: Vec<u32>,
    ts: Vec<u32>,
    dist: Vec<u32>,
    is_sink: Vec<bool>,
    active: Vec<bool>,
    head: Vec<u32>,
    next: Vec<u32>,
    r_cap: Vec<f64>,
    flow: f64,
    queue: VecDeque<u32>,
    orphans: VecDeque<u32>,
    time: u32,
    solved: bool,
    /// Residuals at or below this count as saturated; rounding would otherwise leave
    /// crumbs that trigger endless tiny augmentations.
    eps: f64,
}

impl Graph {
    pub fn new(nodes: usize, arcs_hint: usize) -> Self {
        Graph {
            first: vec![NONE; nodes],
            tr_cap: vec![0.0; nodes],
            parent: vec![NONE; nodes],
            ts: vec![0; nodes],
            dist: vec![0; nodes],
            is_sink: vec![false; nodes],
            active: vec![false; nodes],
            head: Vec::with_capacity(2 * arcs_hint),
            next: Vec::with_capacity(2 * arcs_hint),
            r_cap: Vec::with_capacity(2 * arcs_hint),
            flow: 0.0,
            queue: VecDeque::new(),
            orphans: VecDeque::new(),
            time: 0,
            solved: false,
            eps: 0.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.first.len()
    }

    pub fn arc_count(&self) -> usize {
        self.head.len()
    }

    /// Edge `i → j` with capacity `cap` and `j → i` with `rev_cap`.
    pub fn add_edge(&mut self, i: usize, j: usize, cap: f64, rev_cap: f64) {
        debug_assert!(cap >= 0.0 && rev_cap >= 0.0);
        let a = self.head.len() as u32;
        self.head.push(j as u32);
        self.next.push(self.first[i]);
        self.r_cap.push(cap);
        self.first[i] = a;
        self.head.push(i as u32);
        self.next.push(self.first[j]);
        self.r_cap.push(rev_cap);
        self.first[j] = a + 1;
    }

    /// Adds terminal capacities `s → i` and `i → t`.
    pub fn add_tweights(&mut self, i: usize, mut cap_source: f64, mut cap_sink: f64) {
        let delta = self.tr_cap[i];
        if delta > 0.0 {
            cap_source += delta;
        } else {
            cap_sink -= delta;
        }
        self.flow += cap_source.min(cap_sink);
        self.tr_cap[i] = cap_source - cap_sink;
    }

    /// Cut value of the last solve, including the constants folded in by `add_tweights`.
    pub fn flow(&self) -> f64 {
        self.flow
    }

    fn set_active(&mut self, i: u32) {
        if !self.active[i as usize] {
            self.active[i as usize] = true;
            self.queue.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.queue.pop_front() {
            self.active[i as usize] = false;
            if self.parent[i as usize] != NONE {
                return Some(i);
            }
        }
        None
    }

    fn set_orphan(&mut self, i: u32) {
        self.parent[i as usize] = ORPHAN;
        self.orphans.push_back(i);
    }

    pub fn maxflow(&mut self) -> Result<f64> {
        let n = self.first.len();
        let scale = self.r_cap.iter().chain(&self.tr_cap).fold(0.0f64, |m, c| m.max(c.abs()));
        self.eps = scale * 1e-12;
        for i in 0..n {
            if self.tr_cap[i].abs() > self.eps {
                self.is_sink[i] = self.tr_cap[i] < 0.0;
                self.parent[i] = TERMINAL;
                self.ts[i] = 0;
                self.dist[i] = 1;
                self.set_active(i as u32);
            } else {
                self.parent[i] = NONE;
            }
        }
        let mut current: Option<u32> = None;
        // generous guard against a cycling solver; each augmentation saturates an arc
        let budget = 64u64 * (n as u64 + self.head.len() as u64 + 16) * 64;
        let mut iterations = 0u64;
        loop {
            iterations += 1;
            if iterations > budget {
                return Err(Error::Solver {
                    nodes: n,
                    arcs: self.head.len(),
                    reason: "iteration budget exhausted".into(),
                });
            }
            let i = match current {
                Some(i) if self.parent[i as usize] != NONE => i,
                _ => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };
            current = None;
            let iu = i as usize;
            let mut found = NONE;
            if !self.is_sink[iu] {
                let mut a = self.first[iu];
                while a != NONE {
                    if self.r_cap[a as usize] > self.eps {
                        let j = self.head[a as usize] as usize;
                        if self.parent[j] == NONE {
                            self.is_sink[j] = false;
                            self.parent[j] = sister(a);
                            self.ts[j] = self.ts[iu];
                            self.dist[j] = self.dist[iu] + 1;
                            self.set_active(j as u32);
                        } else if self.is_sink[j] {
                            found = a;
                            break;
                        } else if self.ts[j] <= self.ts[iu] && self.dist[j] > self.dist[iu] {
                            self.parent[j] = sister(a);
                            self.ts[j] = self.ts[iu];
                            self.dist[j] = self.dist[iu] + 1;
                        }
                    }
                    a = self.next[a as usize];
                }
            } else {
                let mut a = self.first[iu];
                while a != NONE {
                    if self.r_cap[sister(a) as usize] > self.eps {
                        let j = self.head[a as usize] as usize;
                        if self.parent[j] == NONE {
                            self.is_sink[j] = true;
                            self.parent[j] = sister(a);
                            self.ts[j] = self.ts[iu];
                            self.dist[j] = self.dist[iu] + 1;
                            self.set_active(j as u32);
                        } else if !self.is_sink[j] {
                            found = sister(a);
                            break;
                        } else if self.ts[j] <= self.ts[iu] && self.dist[j] > self.dist[iu] {
                            self.parent[j] = sister(a);
                            self.ts[j] = self.ts[iu];
                            self.dist[j] = self.dist[iu] + 1;
                        }
                    }
                    a = self.next[a as usize];
                }
            }
            self.time += 1;
            if found != NONE {
                current = Some(i);
                self.augment(found);
                while let Some(o) = self.orphans.pop_front() {
                    if self.is_sink[o as usize] {
                        self.process_sink_orphan(o);
                    } else {
                        self.process_source_orphan(o);
                    }
                }
            }
        }
        self.solved = true;
        Ok(self.flow)
    }

    fn augment(&mut self, middle: u32) {
        let mut b = self.r_cap[middle as usize];
        let mut i = self.head[sister(middle) as usize] as usize;
        loop {
            let a = self.parent[i];
            if a == TERMINAL {
                break;
            }
            b = b.min(self.r_cap[sister(a) as usize]);
            i = self.head[a as usize] as usize;
        }
        b = b.min(self.tr_cap[i]);
        let mut i = self.head[middle as usize] as usize;
        loop {
            let a = self.parent[i];
            if a == TERMINAL {
                break;
            }
            b = b.min(self.r_cap[a as usize]);
            i = self.head[a as usize] as usize;
        }
        b = b.min(-self.tr_cap[i]);

        self.r_cap[sister(middle) as usize] += b;
        self.r_cap[middle as usize] -= b;
        let mut i = self.head[sister(middle) as usize] as usize;
        loop {
            let a = self.parent[i];
            if a == TERMINAL {
                break;
            }
            self.r_cap[a as usize] += b;
            self.r_cap[sister(a) as usize] -= b;
            if self.r_cap[sister(a) as usize] <= self.eps {
                self.set_orphan(i as u32);
            }
            i = self.head[a as usize] as usize;
        }
        self.tr_cap[i] -= b;
        if self.tr_cap[i] <= self.eps {
            self.set_orphan(i as u32);
        }
        let mut i = self.head[middle as usize] as usize;
        loop {
            let a = self.parent[i];
            if a == TERMINAL {
                break;
            }
            self.r_cap[sister(a) as usize] += b;
            self.r_cap[a as usize] -= b;
            if self.r_cap[a as usize] <= self.eps {
                self.set_orphan(i as u32);
            }
            i = self.head[a as usize] as usize;
        }
        self.tr_cap[i] += b;
        if self.tr_cap[i] >= -self.eps {
            self.set_orphan(i as u32);
        }
        self.flow += b;
    }

    /// Length of the tree path from `j` to its terminal, or `None` if it passes an orphan.
    fn origin_distance(&mut self, mut j: usize) -> Option<u32> {
        let mut d = 0u32;
        loop {
            if self.ts[j] == self.time {
                return Some(d + self.dist[j]);
            }
            let a = self.parent[j];
            d += 1;
            if a == TERMINAL {
                self.ts[j] = self.time;
                self.dist[j] = 1;
                return Some(d);
            }
            if a == ORPHAN || a == NONE {
                return None;
            }
            j = self.head[a as usize] as usize;
        }
    }

    fn mark_path(&mut self, mut j: usize, mut d: u32) {
        while self.ts[j] != self.time {
            self.ts[j] = self.time;
            self.dist[j] = d;
            d -= 1;
            j = self.head[self.parent[j] as usize] as usize;
        }
    }

    fn process_source_orphan(&mut self, i: u32) {
        self.process_orphan(i, false)
    }

    fn process_sink_orphan(&mut self, i: u32) {
        self.process_orphan(i, true)
    }

    fn process_orphan(&mut self, i: u32, sink: bool) {
        let iu = i as usize;
        let mut best_arc = NONE;
        let mut best_d = u32::MAX;
        let mut a0 = self.first[iu];
        while a0 != NONE {
            let cap = if sink { self.r_cap[a0 as usize] } else { self.r_cap[sister(a0) as usize] };
            if cap > self.eps {
                let j = self.head[a0 as usize] as usize;
                if self.is_sink[j] == sink && self.parent[j] != NONE {
                    if let Some(d) = self.origin_distance(j) {
                        if d < best_d {
                            best_arc = a0;
                            best_d = d;
                        }
                        self.mark_path(j, d);
                    }
                }
            }
            a0 = self.next[a0 as usize];
        }
        if best_arc != NONE {
            self.parent[iu] = best_arc;
            self.ts[iu] = self.time;
            self.dist[iu] = best_d + 1;
            return;
        }
        let mut a0 = self.first[iu];
        while a0 != NONE {
            let j = self.head[a0 as usize] as usize;
            if self.is_sink[j] == sink && self.parent[j] != NONE {
                let cap = if sink { self.r_cap[a0 as usize] } else { self.r_cap[sister(a0) as usize] };
                if cap > self.eps {
                    self.set_active(j as u32);
                }
                let a = self.parent[j];
                if a != TERMINAL && a != ORPHAN && self.head[a as usize] == i {
                    self.set_orphan(j as u32);
                }
            }
            a0 = self.next[a0 as usize];
        }
        self.parent[iu] = NONE;
    }

    /// Whether node `i` lies on the source side of the minimal minimum cut.
    pub fn in_source_set(&self, i: usize) -> bool {
        debug_assert!(self.solved);
        self.parent[i] != NONE && !self.is_sink[i]
    }
}
