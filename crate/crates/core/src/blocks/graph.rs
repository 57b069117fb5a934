//! Trivalent pants-decomposition graphs and their admissible colorings.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{BlockError, ColorSystem};

/// A trivalent graph with legs. Every vertex has exactly three incident half-edges:
/// loops count twice, legs once. `free_loops` are closed curves with no vertex (the
/// pants decomposition of the torus).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivalentGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    /// Vertex carrying each boundary leg, in boundary-label order.
    pub legs: Vec<usize>,
    pub free_loops: usize,
}

/// A surface `Σ_{g,n}` with boundary labels and a chosen pants decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub genus: usize,
    pub labels: Vec<u32>,
    pub graph: TrivalentGraph,
}

impl BlockSpec {
    pub fn new(genus: usize, labels: Vec<u32>, graph: TrivalentGraph) -> Result<Self, BlockError> {
        let spec = BlockSpec { genus, labels, graph };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BlockError> {
        let g = &self.graph;
        let n = self.labels.len();
        let bad = |why: &str| Err(BlockError::MalformedGraph(why.to_string()));
        if g.legs.len() != n {
            return bad("leg count differs from label count");
        }
        let mut degree = vec![0usize; g.vertices];
        for &(a, b) in &g.edges {
            if a >= g.vertices || b >= g.vertices {
                return bad("edge endpoint out of range");
            }
            degree[a] += 1;
            degree[b] += 1;
        }
        for &v in &g.legs {
            if v >= g.vertices {
                return bad("leg attached to missing vertex");
            }
            degree[v] += 1;
        }
        if degree.iter().any(|&d| d != 3) {
            return bad("vertex is not trivalent");
        }
        let chi = 2 * self.genus as i64 - 2 + n as i64;
        if g.vertices as i64 != chi {
            return bad("vertex count is not 2g-2+n");
        }
        if g.vertices == 0 {
            // the torus: one decomposition curve and no pants
            if self.genus != 1 || n != 0 || g.free_loops != 1 || !g.edges.is_empty() {
                return bad("a graph without vertices must be the torus");
            }
            return Ok(());
        }
        if g.edges.len() + n != 3 * self.genus + 2 * n - 3 {
            return bad("edge count is not 3g-3+2n");
        }
        if !self.is_connected() {
            return bad("graph is disconnected");
        }
        // first Betti number of the graph equals the genus
        let betti = g.edges.len() as i64 - g.vertices as i64 + 1;
        if g.vertices > 0 && betti != self.genus as i64 {
            return bad("cycle rank differs from the genus");
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let g = &self.graph;
        if g.vertices == 0 {
            return g.free_loops == 1 && g.edges.is_empty();
        }
        if g.free_loops > 0 {
            return false;
        }
        let mut seen = vec![false; g.vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &g.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Clone, Copy, Debug)]
enum Port {
    Leg(usize),
    Half(usize),
}

#[derive(Default)]
struct Builder {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    legs: Vec<Option<usize>>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder { vertices: 0, edges: vec![], legs: vec![None; n] }
    }

    fn vertex(&mut self) -> usize {
        self.vertices += 1;
        self.vertices - 1
    }

    fn attach(&mut self, port: Port, v: usize) {
        match port {
            Port::Leg(i) => self.legs[i] = Some(v),
            Port::Half(w) => self.edges.push((w, v)),
        }
    }

    /// A vertex with a loop; its remaining half-edge is returned.
    fn tadpole(&mut self) -> Port {
        let v = self.vertex();
        self.edges.push((v, v));
        Port::Half(v)
    }

    /// A new vertex absorbing two ports, exposing a third.
    fn merge(&mut self, a: Port, b: Port) -> Port {
        let v = self.vertex();
        self.attach(a, v);
        self.attach(b, v);
        Port::Half(v)
    }

    fn close3(&mut self, a: Port, b: Port, c: Port) {
        let v = self.vertex();
        for p in [a, b, c] {
            self.attach(p, v);
        }
    }

    fn join(&mut self, a: Port, b: Port) -> Result<(), BlockError> {
        match (a, b) {
            (Port::Half(v), Port::Half(w)) => self.edges.push((v, w)),
            (Port::Leg(i), Port::Half(v)) | (Port::Half(v), Port::Leg(i)) => self.legs[i] = Some(v),
            (Port::Leg(_), Port::Leg(_)) => {
                return Err(BlockError::MalformedGraph("annulus has no pants decomposition".into()))
            }
        }
        Ok(())
    }

    fn finish(self) -> TrivalentGraph {
        TrivalentGraph {
            vertices: self.vertices,
            edges: self.edges,
            legs: self.legs.into_iter().map(|v| v.expect("every leg attached")).collect(),
            free_loops: 0,
        }
    }
}

fn torus() -> TrivalentGraph {
    TrivalentGraph { vertices: 0, edges: vec![], legs: vec![], free_loops: 1 }
}

fn check_surface(genus: usize, n: usize) -> Result<(), BlockError> {
    if genus == 0 && n < 3 {
        return Err(BlockError::MalformedGraph(format!(
            "Σ_{{0,{n}}} has no pants decomposition"
        )));
    }
    Ok(())
}

fn items(b: &mut Builder, genus: usize, leg_order: &[usize]) -> Vec<Port> {
    let mut ports: Vec<Port> = (0..genus).map(|_| b.tadpole()).collect();
    ports.extend(leg_order.iter().map(|&i| Port::Leg(i)));
    ports
}

fn close_chain(b: &mut Builder, mut ports: Vec<Port>) -> Result<(), BlockError> {
    match ports.len() {
        2 => b.join(ports[0], ports[1]),
        3 => {
            b.close3(ports[0], ports[1], ports[2]);
            Ok(())
        }
        _ => {
            let first = b.merge(ports[0], ports[1]);
            ports.splice(0..2, [first]);
            close_chain(b, ports)
        }
    }
}

/// Handles as tadpoles followed by the legs in `leg_order`, merged left to right.
pub fn caterpillar_with_order(genus: usize, leg_order: &[usize]) -> Result<TrivalentGraph, BlockError> {
    let n = leg_order.len();
    check_surface(genus, n)?;
    if genus == 1 && n == 0 {
        return Ok(torus());
    }
    let mut b = Builder::new(n);
    let ports = items(&mut b, genus, leg_order);
    close_chain(&mut b, ports)?;
    Ok(b.finish())
}

pub fn caterpillar(genus: usize, n: usize) -> Result<TrivalentGraph, BlockError> {
    caterpillar_with_order(genus, &(0..n).collect::<Vec<_>>())
}

/// Same items as the caterpillar, merged pairwise level by level.
pub fn balanced(genus: usize, n: usize) -> Result<TrivalentGraph, BlockError> {
    check_surface(genus, n)?;
    if genus == 1 && n == 0 {
        return Ok(torus());
    }
    let mut b = Builder::new(n);
    let mut ports = items(&mut b, genus, &(0..n).collect::<Vec<_>>());
    while ports.len() > 3 {
        let mut next = Vec::with_capacity(ports.len().div_ceil(2));
        for pair in ports.chunks(2) {
            if pair.len() == 2 {
                next.push(b.merge(pair[0], pair[1]));
            } else {
                next.push(pair[0]);
            }
        }
        ports = next;
    }
    close_chain(&mut b, ports)?;
    Ok(b.finish())
}

/// One handle realized as a cycle carrying the remaining `g − 1` tadpoles and the legs.
pub fn ring(genus: usize, n: usize) -> Result<TrivalentGraph, BlockError> {
    check_surface(genus, n)?;
    if genus == 0 {
        return Err(BlockError::MalformedGraph("a ring needs genus ≥ 1".into()));
    }
    if genus == 1 && n == 0 {
        return Ok(torus());
    }
    let mut b = Builder::new(n);
    let ports = items(&mut b, genus - 1, &(0..n).collect::<Vec<_>>());
    let cycle: Vec<usize> = ports.iter().map(|_| b.vertex()).collect();
    for (i, &v) in cycle.iter().enumerate() {
        b.attach(ports[i], v);
        let w = cycle[(i + 1) % cycle.len()];
        b.edges.push((v, w));
    }
    Ok(b.finish())
}

/// Genus two, two vertices joined by three edges.
pub fn theta() -> TrivalentGraph {
    TrivalentGraph { vertices: 2, edges: vec![(0, 1), (0, 1), (0, 1)], legs: vec![], free_loops: 0 }
}

/// Several structurally different pants decompositions of `Σ_{g,n}`; at least two
/// entries, though for the smallest surfaces they may coincide.
pub fn standard_graphs(genus: usize, n: usize) -> Result<Vec<TrivalentGraph>, BlockError> {
    let mut out = vec![caterpillar(genus, n)?, balanced(genus, n)?];
    if genus >= 1 {
        out.push(ring(genus, n)?);
    }
    if genus == 2 && n == 0 {
        out.push(theta());
    }
    if n >= 4 {
        // interleave the legs: 0, 2, 4, …, 1, 3, …
        let order: Vec<usize> = (0..n).step_by(2).chain((1..n).step_by(2)).collect();
        out.push(caterpillar_with_order(genus, &order)?);
    }
    Ok(out)
}

/// Number of admissible colorings of the internal edges with legs fixed to the labels.
pub fn count_colorings(spec: &BlockSpec, sys: &ColorSystem) -> Result<u64, BlockError> {
    let plan = Plan::new(spec, sys)?;
    Ok(plan.count())
}

/// Colors that occur on internal edge `edge` in at least one admissible coloring.
pub fn edge_support(spec: &BlockSpec, sys: &ColorSystem, edge: usize) -> Result<BTreeSet<u32>, BlockError> {
    let plan = Plan::new(spec, sys)?;
    if edge >= spec.graph.edges.len() {
        return Err(BlockError::MalformedGraph("no such edge".into()));
    }
    Ok(sys
        .colors
        .iter()
        .copied()
        .filter(|&c| plan.count_with(edge, c) > 0)
        .collect())
}

/// Backtracking plan: edges are assigned in a fixed order and each vertex is checked
/// as soon as its last incident edge is colored.
struct Plan<'a> {
    sys: &'a ColorSystem,
    order: Vec<usize>,
    /// `checks[t]` lists the vertices completed once `order[..=t]` is assigned.
    checks: Vec<Vec<usize>>,
    /// Incident slots per vertex: `Ok(edge)` or `Err(label)` for a leg.
    slots: Vec<Vec<Result<usize, u32>>>,
    free_loops: usize,
    /// Vertices with only legs.
    leg_only: Vec<usize>,
}

impl<'a> Plan<'a> {
    fn new(spec: &BlockSpec, sys: &'a ColorSystem) -> Result<Self, BlockError> {
        spec.validate()?;
        for &l in &spec.labels {
            if !sys.contains(l) {
                return Err(BlockError::NotAColor(l));
            }
        }
        let g = &spec.graph;
        let mut slots: Vec<Vec<Result<usize, u32>>> = vec![vec![]; g.vertices];
        for (e, &(a, b)) in g.edges.iter().enumerate() {
            slots[a].push(Ok(e));
            slots[b].push(Ok(e));
        }
        for (i, &v) in g.legs.iter().enumerate() {
            slots[v].push(Err(spec.labels[i]));
        }
        // greedy order: repeatedly pick the edge that completes the most vertices
        let ne = g.edges.len();
        let mut assigned = vec![false; ne];
        let mut order = Vec::with_capacity(ne);
        let mut checks = Vec::with_capacity(ne);
        let mut done = vec![false; g.vertices];
        let leg_only: Vec<usize> = (0..g.vertices)
            .filter(|&v| slots[v].iter().all(|s| s.is_err()))
            .collect();
        for &v in &leg_only {
            done[v] = true;
        }
        let pending = |v: usize, assigned: &[bool]| {
            slots[v].iter().filter(|s| matches!(s, Ok(e) if !assigned[*e])).count()
        };
        for _ in 0..ne {
            let best = (0..ne)
                .filter(|&e| !assigned[e])
                .min_by_key(|&e| {
                    let (a, b) = g.edges[e];
                    (pending(a, &assigned).min(pending(b, &assigned)), e)
                })
                .unwrap();
            assigned[best] = true;
            order.push(best);
            let mut now = vec![];
            for v in 0..g.vertices {
                if !done[v] && pending(v, &assigned) == 0 {
                    done[v] = true;
                    now.push(v);
                }
            }
            checks.push(now);
        }
        Ok(Plan { sys, order, checks, slots, free_loops: g.free_loops, leg_only })
    }

    fn vertex_ok(&self, v: usize, colors: &[u32]) -> bool {
        let c: Vec<u32> = self.slots[v]
            .iter()
            .map(|s| match s {
                Ok(e) => colors[*e],
                Err(l) => *l,
            })
            .collect();
        self.sys.admissible(c[0], c[1], c[2])
    }

    fn base_factor(&self) -> u64 {
        let dummy: Vec<u32> = vec![];
        if self.leg_only.iter().any(|&v| !self.vertex_ok(v, &dummy)) {
            return 0;
        }
        (self.sys.colors.len() as u64).pow(self.free_loops as u32)
    }

    fn recurse(&self, t: usize, colors: &mut [u32]) -> u64 {
        if t == self.order.len() {
            return 1;
        }
        let e = self.order[t];
        let mut total = 0;
        for &c in &self.sys.colors {
            colors[e] = c;
            if self.checks[t].iter().all(|&v| self.vertex_ok(v, colors)) {
                total += self.recurse(t + 1, colors);
            }
        }
        total
    }

    fn count(&self) -> u64 {
        let base = self.base_factor();
        if base == 0 {
            return 0;
        }
        if self.order.is_empty() {
            return base;
        }
        let ne = self.order.len();
        let first = self.order[0];
        let sum: u64 = self
            .sys
            .colors
            .par_iter()
            .map(|&c| {
                let mut colors = vec![0u32; ne];
                colors[first] = c;
                if self.checks[0].iter().all(|&v| self.vertex_ok(v, &colors)) {
                    self.recurse(1, &mut colors)
                } else {
                    0
                }
            })
            .sum();
        base * sum
    }

    /// Colorings with edge `edge` pinned to `c`.
    fn count_with(&self, edge: usize, c: u32) -> u64 {
        let pinned = ColorSystem { colors: vec![c], ..self.sys.clone() };
        // run the same search with a one-color alphabet on the pinned edge
        let ne = self.order.len();
        let mut colors = vec![0u32; ne];
        self.recurse_pinned(0, &mut colors, edge, &pinned)
    }

    fn recurse_pinned(&self, t: usize, colors: &mut [u32], edge: usize, pinned: &ColorSystem) -> u64 {
        if t == self.order.len() {
            return self.base_factor();
        }
        let e = self.order[t];
        let alphabet = if e == edge { &pinned.colors } else { &self.sys.colors };
        let mut total = 0;
        for &c in alphabet {
            colors[e] = c;
            if self.checks[t].iter().all(|&v| self.vertex_ok(v, colors)) {
                total += self.recurse_pinned(t + 1, colors, edge, pinned);
            }
        }
        total
    }
}
