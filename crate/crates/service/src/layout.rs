//! Fruchterman-Reingold layout in the square `[-1, 1]^2`.

use graphfam::rng::{DeterministicStream, Domain};

const ITERATIONS: usize = 50;

/// Node positions for an undirected graph. The start positions come from
/// the layout stream keyed by `key`, so equal inputs give equal coordinates.
pub fn force_layout(n: usize, edges: &[[usize; 2]], key: &[u64]) -> Vec<[f64; 2]> {
    let mut stream = DeterministicStream::from_words(Domain::Layout, key);
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| [stream.uniform_in(-1.0, 1.0), stream.uniform_in(-1.0, 1.0)])
        .collect();
    if n < 2 {
        return pos;
    }
    let k = (4.0 / n as f64).sqrt();
    let mut disp = vec![[0.0f64; 2]; n];
    for iter in 0..ITERATIONS {
        let temperature = 0.1 * (1.0 - iter as f64 / ITERATIONS as f64);
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);
        for u in 0..n {
            for v in u + 1..n {
                let (dx, dy) = (pos[u][0] - pos[v][0], pos[u][1] - pos[v][1]);
                let dist2 = (dx * dx + dy * dy).max(1e-12);
                // Repulsion k^2 / d along the unit vector.
                let f = k * k / dist2;
                disp[u][0] += dx * f;
                disp[u][1] += dy * f;
                disp[v][0] -= dx * f;
                disp[v][1] -= dy * f;
            }
        }
        for &[u, v] in edges {
            let (dx, dy) = (pos[u][0] - pos[v][0], pos[u][1] - pos[v][1]);
            let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
            let f = dist / k;
            disp[u][0] -= dx * f;
            disp[u][1] -= dy * f;
            disp[v][0] += dx * f;
            disp[v][1] += dy * f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if len > 0.0 {
                let step = len.min(temperature) / len;
                p[0] = (p[0] + d[0] * step).clamp(-1.0, 1.0);
                p[1] = (p[1] + d[1] * step).clamp(-1.0, 1.0);
            }
        }
    }
    pos
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        let edges = [[0, 1], [1, 2], [2, 3], [3, 0], [0, 2]];
        let a = force_layout(5, &edges, &[1, 2, 3]);
        assert_eq!(a, force_layout(5, &edges, &[1, 2, 3]));
        assert_ne!(a, force_layout(5, &edges, &[1, 2, 4]));
        assert!(a.iter().flatten().all(|c| (-1.0..=1.0).contains(c)));
    }

    #[test]
    fn neighbors_end_up_closer_than_strangers() {
        // Two triangles joined by one edge.
        let edges = [[0, 1], [1, 2], [0, 2], [2, 3], [3, 4], [4, 5], [3, 5]];
        let p = force_layout(6, &edges, &[9]);
        let d = |a: usize, b: usize| ((p[a][0] - p[b][0]).powi(2) + (p[a][1] - p[b][1]).powi(2)).sqrt();
        assert!(d(0, 1) < d(0, 5));
        assert!(d(4, 5) < d(1, 4));
    }
}
