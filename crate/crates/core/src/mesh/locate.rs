use super::SpaceTimeMesh;
use crate::error::{Error, Result};

/// Uniform-grid bucket index over the triangles of a mesh, answering
/// "which triangle contains `(x, t)`" with a barycentric containment test.
#[derive(Debug, Clone)]
pub struct PointLocator<'m> {
    mesh: &'m SpaceTimeMesh,
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    bbox: (f64, f64, f64, f64),
    /// CSR-style bucket lists.
    offsets: Vec<usize>,
    items: Vec<usize>,
    tolerance: f64,
}

impl<'m> PointLocator<'m> {
    pub fn new(mesh: &'m SpaceTimeMesh) -> Self {
        let (x0, x1, t0, t1) = mesh.bounding_box();
        let n = (mesh.n_triangles() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [n, n];
        let cell = [
            ((x1 - x0) / n as f64).max(f64::MIN_POSITIVE),
            ((t1 - t0) / n as f64).max(f64::MIN_POSITIVE),
        ];
        let mut locator = Self {
            mesh,
            origin: [x0, t0],
            cell,
            dims,
            bbox: (x0, x1, t0, t1),
            offsets: Vec::new(),
            items: Vec::new(),
            tolerance: 1e-12,
        };

        let mut ranges = Vec::with_capacity(mesh.n_triangles());
        let mut counts = vec![0usize; n * n + 1];
        for k in 0..mesh.n_triangles() {
            let p = mesh.corners(k);
            let lo = locator.cell_of(
                p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min),
                p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min),
            );
            let hi = locator.cell_of(
                p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max),
                p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max),
            );
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    counts[j * n + i + 1] += 1;
                }
            }
            ranges.push((lo, hi));
        }
        for c in 1..counts.len() {
            counts[c] += counts[c - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0usize; counts[n * n]];
        for (k, (lo, hi)) in ranges.into_iter().enumerate() {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let b = j * n + i;
                    items[fill[b]] = k;
                    fill[b] += 1;
                }
            }
        }
        locator.offsets = counts;
        locator.items = items;
        locator
    }

    fn cell_of(&self, x: f64, t: f64) -> [usize; 2] {
        let clamp = |v: f64, d: usize| (v.max(0.0) as usize).min(d - 1);
        [
            clamp((x - self.origin[0]) / self.cell[0], self.dims[0]),
            clamp((t - self.origin[1]) / self.cell[1], self.dims[1]),
        ]
    }

    /// Containing triangle and the barycentric coordinates of the point.
    pub fn locate(&self, x: f64, t: f64) -> Result<(usize, [f64; 3])> {
        let (x0, x1, t0, t1) = self.bbox;
        let slack_x = self.tolerance * (x1 - x0).max(1.0);
        let slack_t = self.tolerance * (t1 - t0).max(1.0);
        if !(x >= x0 - slack_x && x <= x1 + slack_x && t >= t0 - slack_t && t <= t1 + slack_t) {
            return Err(Error::PointLocation { x, t });
        }
        let [i, j] = self.cell_of(x, t);
        let b = j * self.dims[0] + i;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &k in &self.items[self.offsets[b]..self.offsets[b + 1]] {
            let lambda = barycentric(&self.mesh.corners(k), x, t);
            let worst = lambda[0].min(lambda[1]).min(lambda[2]);
            if worst >= -self.tolerance && best.as_ref().map_or(true, |&(_, _, w)| worst > w) {
                best = Some((k, lambda, worst));
            }
        }
        best.map(|(k, l, _)| (k, l)).ok_or(Error::PointLocation { x, t })
    }
}

pub(crate) fn barycentric(p: &[[f64; 2]; 3], x: f64, t: f64) -> [f64; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let l1 = ((x - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (t - p[0][1])) / det;
    let l2 = ((p[1][0] - p[0][0]) * (t - p[0][1]) - (x - p[0][0]) * (p[1][1] - p[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use crate::problem::{Example1Variant, ProblemSpec};

    #[test]
    fn locates_centroids_and_vertices() {
        let mesh = build_mesh(&ProblemSpec::example1(Example1Variant::Moving), 9).unwrap();
        let locator = PointLocator::new(&mesh);
        for k in 0..mesh.n_triangles() {
            let p = mesh.corners(k);
            let xc = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
            let tc = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            let (found, lambda) = locator.locate(xc, tc).unwrap();
            assert_eq!(found, k);
            assert!(lambda.iter().all(|&l| (l - 1.0 / 3.0).abs() < 1e-12));
        }
        for &[x, t] in &mesh.vertices {
            locator.locate(x, t).unwrap();
        }
    }

    #[test]
    fn outside_point_is_an_error() {
        let mesh = build_mesh(&ProblemSpec::example1(Example1Variant::Static), 4).unwrap();
        let locator = PointLocator::new(&mesh);
        assert!(matches!(
            locator.locate(1.5, 0.5),
            Err(Error::PointLocation { .. })
        ));
        assert!(locator.locate(0.5, -0.01).is_err());
    }
}
