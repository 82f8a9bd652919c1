/// Quadrature rule on a triangle in barycentric coordinates. Weights sum to 1
/// and are scaled by the element area at use.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    /// Three interior points, exact for quadratics.
    pub fn degree2() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    /// Seven-point rule exact for quintics.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        let orbit = |a: f64| {
            let b = 1.0 - 2.0 * a;
            [[a, a, b], [a, b, a], [b, a, a]]
        };
        let mut points = vec![[1.0 / 3.0; 3]];
        points.extend(orbit(a1));
        points.extend(orbit(a2));
        let mut weights = vec![9.0 / 40.0];
        weights.extend([w1; 3]);
        weights.extend([w2; 3]);
        Self {
            points,
            weights,
            degree: 5,
        }
    }

    /// Composite rule on the `4^levels` congruent sub-triangles obtained by
    /// repeated midpoint refinement. The degree is unchanged.
    pub fn subdivided(&self, levels: usize) -> Self {
        let mut cells: Vec<[[f64; 3]; 3]> = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(4 * cells.len());
            for [a, b, c] in cells {
                let mid = |p: [f64; 3], q: [f64; 3]| {
                    [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]
                };
                let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]);
            }
            cells = next;
        }
        let scale = 1.0 / cells.len() as f64;
        let mut points = Vec::with_capacity(cells.len() * self.points.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for cell in &cells {
            for (lambda, &w) in self.points.iter().zip(&self.weights) {
                let mut p = [0.0; 3];
                for (k, corner) in cell.iter().enumerate() {
                    for d in 0..3 {
                        p[d] += lambda[k] * corner[d];
                    }
                }
                points.push(p);
                weights.push(w * scale);
            }
        }
        Self {
            points,
            weights,
            degree: self.degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical points `(x, t)` of the rule on the triangle with these corners.
    pub fn map(&self, corners: &[[f64; 2]; 3]) -> impl Iterator<Item = ([f64; 2], &[f64; 3], f64)> + '_ {
        let corners = *corners;
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            let x = l[0] * corners[0][0] + l[1] * corners[1][0] + l[2] * corners[2][0];
            let t = l[0] * corners[0][1] + l[1] * corners[1][1] + l[2] * corners[2][1];
            ([x, t], l, w)
        })
    }
}
