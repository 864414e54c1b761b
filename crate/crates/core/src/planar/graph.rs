use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use super::{shoelace2, steps_to_string, Invertible, Loop, PlanarError, Step};

pub type Point = (i64, i64);

pub(crate) fn step_from(p: Point, s: Step) -> Point {
    let (dx, dy) = s.delta();
    (p.0 + dx, p.1 + dy)
}

/// Bounded face of a planar graph. `boundary` is the anticlockwise boundary
/// walk from `start`; it may contain spurs when the face has dangling edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub id: usize,
    pub start: Point,
    pub boundary: Vec<Step>,
    pub area: i64,
    /// Lower-left corner of a unit cell lying inside the face.
    pub cell: Point,
}

#[derive(Clone, Debug)]
pub struct PlanarGraph {
    vertices: BTreeSet<Point>,
    half_edges: BTreeSet<(Point, Step)>,
    faces: Vec<Face>,
    outer: Vec<Step>,
    outer_start: Point,
    /// Face on the left of each half-edge; `None` for the unbounded face.
    left: BTreeMap<(Point, Step), Option<usize>>,
}

/// Builds the graph swept by the given loops and enumerates its faces.
pub fn build_graph(loops: &[Loop]) -> Result<PlanarGraph, PlanarError> {
    if loops.is_empty() {
        return Err(PlanarError::EmptyGraph);
    }
    let mut vertices = BTreeSet::new();
    let mut half_edges = BTreeSet::new();
    vertices.insert((0, 0));
    for l in loops {
        let mut p = (0, 0);
        for &s in l.steps() {
            let q = step_from(p, s);
            half_edges.insert((p, s));
            half_edges.insert((q, s.inverse()));
            vertices.insert(q);
            p = q;
        }
    }
    Ok(PlanarGraph::from_edges(vertices, half_edges))
}

impl PlanarGraph {
    fn from_edges(vertices: BTreeSet<Point>, half_edges: BTreeSet<(Point, Step)>) -> PlanarGraph {
        let mut g = PlanarGraph {
            vertices,
            half_edges,
            faces: Vec::new(),
            outer: Vec::new(),
            outer_start: (0, 0),
            left: BTreeMap::new(),
        };
        g.trace_faces();
        g
    }

    /// Next half-edge along the face on the left: turn as far right as possible.
    fn next_half_edge(&self, p: Point, s: Step) -> (Point, Step) {
        let v = step_from(p, s);
        let back = s.inverse().angle_index();
        for turn in 1..=4 {
            let d = Step::from_angle_index(back + 4 - turn);
            if self.has_edge(v, d) {
                return (v, d);
            }
        }
        unreachable!("vertex reached by an edge has that edge back")
    }

    fn trace_faces(&mut self) {
        let mut seen: BTreeSet<(Point, Step)> = BTreeSet::new();
        let mut cycles: Vec<(Point, Vec<Step>, Vec<(Point, Step)>)> = Vec::new();
        for &h in &self.half_edges {
            if seen.contains(&h) {
                continue;
            }
            let mut cur = h;
            let mut steps = Vec::new();
            let mut members = Vec::new();
            loop {
                seen.insert(cur);
                members.push(cur);
                steps.push(cur.1);
                cur = self.next_half_edge(cur.0, cur.1);
                if cur == h {
                    break;
                }
            }
            cycles.push((h.0, steps, members));
        }
        // exactly one traced cycle bounds the unbounded face: the one with
        // non-positive signed area (a connected graph has no holes)
        let outer_idx = cycles
            .iter()
            .enumerate()
            .min_by_key(|(_, (start, steps, _))| shoelace2(*start, steps))
            .map(|(i, _)| i);
        let mut faces = Vec::new();
        for (i, (start, steps, members)) in cycles.into_iter().enumerate() {
            if Some(i) == outer_idx {
                self.outer_start = start;
                self.outer = steps;
                for m in members {
                    self.left.insert(m, None);
                }
                continue;
            }
            let id = faces.len();
            let area2 = shoelace2(start, &steps);
            debug_assert!(area2 > 0 && area2 % 2 == 0);
            let (p, s) = members[0];
            for m in members {
                self.left.insert(m, Some(id));
            }
            faces.push(Face {
                id,
                start,
                boundary: steps,
                area: area2 / 2,
                cell: left_cell(p, s),
            });
        }
        self.faces = faces;
    }

    pub fn vertices(&self) -> &BTreeSet<Point> {
        &self.vertices
    }

    pub fn half_edges(&self) -> &BTreeSet<(Point, Step)> {
        &self.half_edges
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.half_edges.len() / 2
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn outer_boundary(&self) -> (Point, &[Step]) {
        (self.outer_start, &self.outer)
    }

    pub fn has_vertex(&self, p: Point) -> bool {
        self.vertices.contains(&p)
    }

    pub fn has_edge(&self, p: Point, s: Step) -> bool {
        self.half_edges.contains(&(p, s))
    }

    pub fn left_face(&self, p: Point, s: Step) -> Option<usize> {
        self.left.get(&(p, s)).copied().flatten()
    }

    /// `|V| − |E| + |F_bounded|`, equal to one for connected planar graphs.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    pub fn neighbours(&self, p: Point) -> impl Iterator<Item = Step> + '_ {
        Step::ALL.into_iter().filter(move |&s| self.has_edge(p, s))
    }

    /// Unit cells making up a face, by flood fill from its representative cell.
    pub fn face_cells(&self, id: usize) -> Vec<Point> {
        let start = self.faces[id].cell;
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            // moving between cells crosses the unit segment they share
            let crossings = [
                ((c.0 + 1, c.1), (c.0 + 1, c.1), Step::N),
                ((c.0 - 1, c.1), (c.0, c.1), Step::N),
                ((c.0, c.1 + 1), (c.0, c.1 + 1), Step::E),
                ((c.0, c.1 - 1), (c.0, c.1), Step::E),
            ];
            for (next, p, s) in crossings {
                if !self.has_edge(p, s) && seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Plain-text adjacency list followed by the face list.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "vertices {}", self.vertices.len()).unwrap();
        writeln!(out, "edges {}", self.edge_count()).unwrap();
        for &p in &self.vertices {
            let adj: String = self.neighbours(p).map(|s| s.as_char()).collect();
            writeln!(out, "vertex {} {} adj {}", p.0, p.1, adj).unwrap();
        }
        for f in &self.faces {
            writeln!(
                out,
                "face {} area {} boundary {} start {} {}",
                f.id,
                f.area,
                steps_to_string(&f.boundary),
                f.start.0,
                f.start.1
            )
            .unwrap();
        }
        out
    }
}

/// Lower-left corner of the unit cell to the left of the half-edge.
pub(crate) fn left_cell(p: Point, s: Step) -> Point {
    match s {
        Step::E => (p.0, p.1),
        Step::N => (p.0 - 1, p.1),
        Step::W => (p.0 - 1, p.1 - 1),
        Step::S => (p.0, p.1 - 1),
    }
}
