//! Loop corpora: the default set, corpus files and random loops.

use rand::Rng;

use crate::planar::{build_graph, invert_path, Invertible, Loop, PlanarError, Step};

pub const DEFAULT_CORPUS: [&str; 10] = [
    "ENWS",
    "NESW",
    "EENWWS",
    "NENWSS",
    "ENWSENWS",
    "ENWSWNES",
    "ENWSSWNE",
    "ENWSEENWWS",
    "EENWNWSS",
    "EEENWWWSENWSEENWWS",
];

pub fn default_corpus() -> Vec<Loop> {
    DEFAULT_CORPUS
        .iter()
        .map(|s| Loop::parse(s).expect("corpus loops are closed"))
        .collect()
}

/// One loop word per line; `#` starts a comment, blank lines are skipped.
/// Errors carry the 1-based line number.
pub fn parse_corpus(text: &str) -> Result<Vec<Loop>, (usize, PlanarError)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        out.push(Loop::parse(body).map_err(|e| (i + 1, e))?);
    }
    Ok(out)
}

fn map_steps(l: &Loop, f: impl Fn(Step) -> Step) -> Loop {
    Loop::from_steps(l.steps().iter().map(|&s| f(s)).collect()).expect("image of a loop is closed")
}

/// Reflection in the vertical axis; reverses orientation.
pub fn mirror(l: &Loop) -> Loop {
    map_steps(l, |s| match s {
        Step::E => Step::W,
        Step::W => Step::E,
        other => other,
    })
}

/// Anticlockwise rotation by a quarter turn about the origin.
pub fn rotate_quarter(l: &Loop) -> Loop {
    map_steps(l, |s| match s {
        Step::E => Step::N,
        Step::N => Step::W,
        Step::W => Step::S,
        Step::S => Step::E,
    })
}

/// The boundary of every unit cell inside a bounded face of `l`'s graph, each
/// reached from the origin along the axes. Drawn together with `l` they cut
/// its faces into unit cells.
pub fn cell_cuts(l: &Loop) -> Result<Vec<Loop>, PlanarError> {
    let g = build_graph(std::slice::from_ref(l))?;
    let mut out = Vec::new();
    for f in g.faces() {
        for (x, y) in g.face_cells(f.id) {
            let h = if x >= 0 { Step::E } else { Step::W };
            let v = if y >= 0 { Step::N } else { Step::S };
            let mut steps: Vec<Step> = std::iter::repeat_n(h, x.unsigned_abs() as usize)
                .chain(std::iter::repeat_n(v, y.unsigned_abs() as usize))
                .collect();
            let back = invert_path(&steps);
            steps.extend([Step::E, Step::N, Step::W, Step::S]);
            steps.extend(back);
            out.push(Loop::from_steps(steps)?.reduce());
        }
    }
    Ok(out)
}

/// Random reduced loop of length at most `2 * half`: a non-backtracking walk
/// of `half` steps closed along the axes, then reduced.
pub fn random_loop<R: Rng>(half: usize, rng: &mut R) -> Loop {
    let dirs = [Step::N, Step::E, Step::S, Step::W];
    let mut steps: Vec<Step> = Vec::with_capacity(2 * half);
    let (mut x, mut y) = (0i64, 0i64);
    for _ in 0..half {
        let s = loop {
            let s = dirs[rng.random_range(0..4)];
            if steps.last() != Some(&s.inverse()) {
                break s;
            }
        };
        let (dx, dy) = s.delta();
        x += dx;
        y += dy;
        steps.push(s);
    }
    let horizontal = if x > 0 { Step::W } else { Step::E };
    let vertical = if y > 0 { Step::S } else { Step::N };
    let back_x = std::iter::repeat_n(horizontal, x.unsigned_abs() as usize);
    let back_y = std::iter::repeat_n(vertical, y.unsigned_abs() as usize);
    if rng.random_bool(0.5) {
        steps.extend(back_x.chain(back_y));
    } else {
        steps.extend(back_y.chain(back_x));
    }
    Loop::from_steps(steps)
        .expect("walk closed along the axes")
        .reduce()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_corpus_is_reduced() {
        let c = default_corpus();
        assert_eq!(c.len(), 10);
        assert!(c.iter().all(|l| l.is_reduced() && !l.is_empty()));
    }

    #[test]
    fn corpus_file() {
        let text = "# squares\nENWS\n\n  NESW  # clockwise\nEENWWS\n";
        assert_eq!(parse_corpus(text).unwrap().len(), 3);
        let err = parse_corpus("ENWS\nEN\n").unwrap_err();
        assert_eq!(err.0, 2);
    }

    #[test]
    fn transforms() {
        let l = Loop::parse("EENWNWSS").unwrap();
        assert_eq!(mirror(&l).signed_area2(), -l.signed_area2());
        assert_eq!(rotate_quarter(&l).signed_area2(), l.signed_area2());
        assert_eq!(
            rotate_quarter(&rotate_quarter(&rotate_quarter(&rotate_quarter(&l)))),
            l
        );
    }

    #[test]
    fn cuts_make_unit_faces() {
        let l = Loop::parse("EENWNWSS").unwrap();
        let mut drawn = vec![l.clone()];
        drawn.extend(cell_cuts(&l).unwrap());
        let g = build_graph(&drawn).unwrap();
        assert_eq!(g.faces().len(), 3);
        assert!(g.faces().iter().all(|f| f.area == 1));
    }

    #[test]
    fn random_loops_are_short_and_reduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let l = random_loop(12, &mut rng);
            assert!(l.len() <= 24);
            assert!(l.is_reduced());
        }
    }
}
