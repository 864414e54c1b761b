use std::collections::{BTreeMap, VecDeque};

use super::graph::step_from;
use super::{
    cyclic_reduce, endpoint, free_reduce, invert_path, shoelace2, Face, Invertible, LassoWord,
    Letter, Loop, PlanarError, PlanarGraph, Point, Step,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Anticlockwise,
    Clockwise,
}

/// Order in which a vertex's neighbours are explored by the breadth-first
/// spanning tree that carries the lasso tails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TreePolicy {
    pub priority: [Step; 4],
}

impl TreePolicy {
    pub const STANDARD: TreePolicy = TreePolicy {
        priority: [Step::N, Step::E, Step::S, Step::W],
    };
    pub const REVERSED: TreePolicy = TreePolicy {
        priority: [Step::W, Step::S, Step::E, Step::N],
    };
}

impl Default for TreePolicy {
    fn default() -> TreePolicy {
        TreePolicy::STANDARD
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub tail: Vec<Step>,
    pub bulk: Vec<Step>,
    pub face_id: usize,
}

impl Lasso {
    /// `tail · bulk · tail⁻¹` as a loop at the origin.
    pub fn to_loop(&self) -> Loop {
        let mut steps = self.tail.clone();
        steps.extend_from_slice(&self.bulk);
        steps.extend(invert_path(&self.tail));
        Loop::from_steps(steps).expect("lasso is closed")
    }

    pub fn bulk_start(&self) -> Point {
        endpoint((0, 0), &self.tail)
    }

    /// Signed area enclosed by the bulk.
    pub fn signed_area(&self) -> i64 {
        shoelace2(self.bulk_start(), &self.bulk) / 2
    }
}

/// Canonical key of an undirected edge (pointing N or E) and the sign of the
/// given traversal relative to it.
fn edge_key(p: Point, s: Step) -> ((Point, Step), i8) {
    match s {
        Step::N | Step::E => ((p, s), 1),
        Step::S | Step::W => ((step_from(p, s), s.inverse()), -1),
    }
}

/// A lasso basis of the reduced-loop group of a graph, with the data needed
/// to rewrite any loop drawn on the graph in that basis.
#[derive(Clone, Debug)]
pub struct LassoBasis {
    graph: PlanarGraph,
    policy: TreePolicy,
    orientation: Orientation,
    lassos: Vec<Lasso>,
    parent: BTreeMap<Point, (Point, Step)>,
    depth: BTreeMap<Point, usize>,
    /// Index of each non-tree edge.
    cotree: BTreeMap<(Point, Step), usize>,
    /// Each non-tree edge written in the lasso basis.
    edge_words: Vec<LassoWord>,
}

pub fn lasso_basis(graph: &PlanarGraph) -> LassoBasis {
    lasso_basis_with(graph, TreePolicy::STANDARD, Orientation::Anticlockwise)
}

pub fn lasso_basis_with(
    graph: &PlanarGraph,
    policy: TreePolicy,
    orientation: Orientation,
) -> LassoBasis {
    let origin = (0, 0);
    let mut parent = BTreeMap::new();
    let mut depth = BTreeMap::from([(origin, 0usize)]);
    let mut queue = VecDeque::from([origin]);
    while let Some(v) = queue.pop_front() {
        let d = depth[&v];
        for s in policy.priority {
            if !graph.has_edge(v, s) {
                continue;
            }
            let w = step_from(v, s);
            if let std::collections::btree_map::Entry::Vacant(e) = depth.entry(w) {
                e.insert(d + 1);
                parent.insert(w, (v, s));
                queue.push_back(w);
            }
        }
    }

    let mut tree_edges = std::collections::BTreeSet::new();
    for (&w, &(v, s)) in &parent {
        let _ = w;
        tree_edges.insert(edge_key(v, s).0);
    }
    let mut cotree = BTreeMap::new();
    for &(p, s) in graph.half_edges() {
        let (key, sign) = edge_key(p, s);
        if sign == 1 && !tree_edges.contains(&key) {
            let n = cotree.len();
            cotree.insert(key, n);
        }
    }

    let tail_to = |target: Point| -> Vec<Step> {
        let mut path = Vec::new();
        let mut v = target;
        while let Some(&(u, s)) = parent.get(&v) {
            path.push(s);
            v = u;
        }
        path.reverse();
        path
    };

    let lassos: Vec<Lasso> = graph
        .faces()
        .iter()
        .map(|f| {
            let (start, core) = face_core(f);
            let pts: Vec<Point> = core
                .iter()
                .scan(start, |p, &s| {
                    let here = *p;
                    *p = step_from(here, s);
                    Some(here)
                })
                .collect();
            let j = (0..pts.len()).min_by_key(|&i| depth[&pts[i]]).unwrap();
            let mut bulk: Vec<Step> = core[j..].iter().chain(&core[..j]).copied().collect();
            if orientation == Orientation::Clockwise {
                bulk = invert_path(&bulk);
            }
            Lasso {
                tail: tail_to(pts[j]),
                bulk,
                face_id: f.id,
            }
        })
        .collect();

    let mut basis = LassoBasis {
        graph: graph.clone(),
        policy,
        orientation,
        lassos,
        parent,
        depth,
        cotree,
        edge_words: Vec::new(),
    };
    basis.solve_edge_words();
    basis
}

/// Boundary walk of a face with spurs removed, and its start point.
fn face_core(f: &Face) -> (Point, Vec<Step>) {
    let reduced = free_reduce(&f.boundary);
    let (lo, core) = cyclic_reduce(&reduced);
    (endpoint(f.start, &reduced[..lo]), core)
}

impl LassoBasis {
    pub fn graph(&self) -> &PlanarGraph {
        &self.graph
    }

    pub fn lassos(&self) -> &[Lasso] {
        &self.lassos
    }

    pub fn len(&self) -> usize {
        self.lassos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lassos.is_empty()
    }

    pub fn policy(&self) -> TreePolicy {
        self.policy
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn depth(&self, p: Point) -> Option<usize> {
        self.depth.get(&p).copied()
    }

    pub fn tree_parent(&self, p: Point) -> Option<(Point, Step)> {
        self.parent.get(&p).copied()
    }

    /// The loop as a word in the free group on non-tree edges.
    fn cotree_word(&self, steps: &[Step]) -> Result<LassoWord, PlanarError> {
        let mut p = (0, 0);
        let mut letters = Vec::new();
        for &s in steps {
            if !self.graph.has_edge(p, s) {
                return Err(PlanarError::NotOnGraph(p.0, p.1, s));
            }
            let (key, sign) = edge_key(p, s);
            if let Some(&i) = self.cotree.get(&key) {
                letters.push(Letter::new(i, sign));
            }
            p = step_from(p, s);
        }
        Ok(LassoWord::from_letters(free_reduce(&letters)))
    }

    /// Expresses every non-tree edge generator through the lassos. Faces are
    /// processed from the leaves of the dual spanning tree (rooted at the
    /// unbounded face) inwards: a face's lasso contains its parent edge once
    /// and otherwise only edges towards already solved child faces.
    fn solve_edge_words(&mut self) {
        let nf = self.lassos.len();
        let outer = nf;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nf + 1];
        for (&(p, s), &e) in &self.cotree {
            let a = self.graph.left_face(p, s).unwrap_or(outer);
            let b = self
                .graph
                .left_face(step_from(p, s), s.inverse())
                .unwrap_or(outer);
            debug_assert_ne!(a, b, "non-tree edge is not a bridge");
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        let mut parent_edge = vec![usize::MAX; nf + 1];
        let mut seen = vec![false; nf + 1];
        let mut order = Vec::with_capacity(nf);
        let mut queue = VecDeque::from([outer]);
        seen[outer] = true;
        while let Some(f) = queue.pop_front() {
            for &(g, e) in &adj[f] {
                if !seen[g] {
                    seen[g] = true;
                    parent_edge[g] = e;
                    order.push(g);
                    queue.push_back(g);
                }
            }
        }
        debug_assert_eq!(order.len(), nf);

        let mut solved: Vec<Option<LassoWord>> = vec![None; self.cotree.len()];
        for &f in order.iter().rev() {
            let e = parent_edge[f];
            let w = self
                .cotree_word(self.lassos[f].to_loop().steps())
                .expect("lasso lies on graph");
            let pos = w
                .letters
                .iter()
                .position(|l| l.index == e)
                .expect("face lasso crosses its parent edge");
            let express = |letters: &[Letter]| -> LassoWord {
                let mut out = LassoWord::identity();
                for l in letters {
                    let x = solved[l.index].as_ref().expect("child edge solved first");
                    out = out.mul(&if l.exp > 0 { x.clone() } else { x.inverse() });
                }
                out
            };
            let p = express(&w.letters[..pos]);
            let q = express(&w.letters[pos + 1..]);
            let mut g = p.inverse().mul(&LassoWord::generator(f)).mul(&q.inverse());
            if w.letters[pos].exp < 0 {
                g = g.inverse();
            }
            solved[e] = Some(g);
        }
        self.edge_words = solved
            .into_iter()
            .map(|w| w.expect("every non-tree edge is a dual tree edge"))
            .collect();
    }

    /// Rewrites a loop drawn on the graph as a reduced word in the lassos.
    pub fn decompose(&self, l: &Loop) -> Result<LassoWord, PlanarError> {
        let w = self.cotree_word(l.steps())?;
        let mut letters = Vec::new();
        for x in &w.letters {
            let img = &self.edge_words[x.index];
            if x.exp > 0 {
                letters.extend_from_slice(&img.letters);
            } else {
                letters.extend(img.letters.iter().rev().map(|y| y.inverse()));
            }
        }
        Ok(LassoWord::from_letters(free_reduce(&letters)))
    }

    /// Substitutes each lasso by its edge word and reduces.
    pub fn substitute(&self, w: &LassoWord) -> Loop {
        let mut steps = Vec::new();
        for l in &w.letters {
            let lp = self.lassos[l.index].to_loop();
            if l.exp > 0 {
                steps.extend_from_slice(lp.steps());
            } else {
                steps.extend(invert_path(lp.steps()));
            }
        }
        Loop::from_steps(free_reduce(&steps)).expect("product of loops is closed")
    }
}

pub fn decompose(l: &Loop, basis: &LassoBasis) -> Result<LassoWord, PlanarError> {
    basis.decompose(l)
}

/// Winding number of a loop around the centre of the face's representative cell.
pub fn winding(l: &Loop, face: &Face) -> i64 {
    let (cx, cy) = face.cell;
    let mut p = (0, 0);
    let mut w = 0;
    for &s in l.steps() {
        let q = step_from(p, s);
        if p.0 > cx {
            match s {
                Step::N if p.1 == cy => w += 1,
                Step::S if q.1 == cy => w -= 1,
                _ => {}
            }
        }
        p = q;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::super::build_graph;
    use super::*;

    fn l(s: &str) -> Loop {
        Loop::parse(s).unwrap()
    }

    fn basis_of(words: &[&str]) -> LassoBasis {
        let loops: Vec<Loop> = words.iter().map(|w| l(w)).collect();
        lasso_basis(&build_graph(&loops).unwrap())
    }

    #[test]
    fn unit_square_lasso() {
        let b = basis_of(&["NESW"]);
        assert_eq!(b.len(), 1);
        let lasso = &b.lassos()[0];
        assert!(lasso.tail.is_empty());
        assert_eq!(lasso.to_loop().to_string(), "ENWS");
        assert_eq!(lasso.signed_area(), 1);
        assert_eq!(
            b.decompose(&l("ENWS")).unwrap(),
            LassoWord::from_pairs(&[(0, 1)])
        );
        assert_eq!(
            b.decompose(&l("NESW")).unwrap(),
            LassoWord::from_pairs(&[(0, -1)])
        );
    }

    #[test]
    fn two_adjacent_squares() {
        let b = basis_of(&["EENWWS", "ENWS"]);
        assert_eq!(b.len(), 2);
        let mut tails: Vec<usize> = b.lassos().iter().map(|x| x.tail.len()).collect();
        tails.sort();
        assert_eq!(tails, vec![0, 1]);
        for x in b.lassos() {
            assert_eq!(x.signed_area(), 1);
            assert!(x.to_loop().is_reduced());
        }
    }

    #[test]
    fn two_by_two_block() {
        let b = basis_of(&["EENNWWSS", "ENWS", "NNEESSWW", "EENWWS", "NENWSS"]);
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn figure_eight() {
        // anticlockwise around the left cell, then clockwise around the right one
        let fig = l("ENWSENESWW");
        let b = basis_of(&["ENWSENESWW"]);
        let w = b.decompose(&fig).unwrap();
        assert_eq!(b.substitute(&w), fig.reduce());
        let ab = w.abelianize(b.len());
        for f in b.graph().faces() {
            assert_eq!(ab[f.id], winding(&fig, f));
        }
        let mut sorted = ab.clone();
        sorted.sort();
        assert_eq!(sorted, vec![-1, 1]);
    }

    #[test]
    fn winding_examples() {
        let b = basis_of(&["ENWS"]);
        let f = &b.graph().faces()[0];
        assert_eq!(winding(&l("ENWS"), f), 1);
        assert_eq!(winding(&Loop::constant(), f), 0);
        assert_eq!(winding(&l("ENWSENWS"), f), 2);
    }

    #[test]
    fn loop_off_graph() {
        let b = basis_of(&["ENWS"]);
        assert_eq!(
            b.decompose(&l("NESW").concat(&l("WNES"))),
            Err(PlanarError::NotOnGraph(0, 0, Step::W))
        );
    }

    #[test]
    fn round_trip_on_spurred_face() {
        // face with an edge poking into it
        let words = ["EENNWWSS", "ENSW"];
        let b = basis_of(&words);
        for w in words {
            let lp = l(w);
            let d = b.decompose(&lp).unwrap();
            assert_eq!(b.substitute(&d), lp.reduce());
        }
    }

    #[test]
    fn clockwise_orientation() {
        let g = build_graph(&[l("EENWWS"), l("ENWS")]).unwrap();
        let b = lasso_basis_with(&g, TreePolicy::STANDARD, Orientation::Clockwise);
        for x in b.lassos() {
            assert_eq!(x.signed_area(), -1);
        }
        let d = b.decompose(&l("EENWWS")).unwrap();
        assert_eq!(d.abelianize(2), vec![-1, -1]);
    }
}
