use crate::mesh::{BoundaryTag, SpaceTimeMesh};

/// Discrete space selecting which vertices carry homogeneous constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Space {
    /// No constraints; all vertices free.
    Unconstrained,
    /// Zero on the lateral boundary `x = x_min`, `x = x_max`.
    W,
    /// `W` and additionally zero at `t = 0`.
    U,
}

impl Space {
    pub fn label(self) -> &'static str {
        match self {
            Space::Unconstrained => "full",
            Space::W => "W_h",
            Space::U => "U_h",
        }
    }

    fn constrained_tags(self) -> BoundaryTag {
        match self {
            Space::Unconstrained => BoundaryTag::INTERIOR,
            Space::W => BoundaryTag::X_MIN | BoundaryTag::X_MAX,
            Space::U => BoundaryTag::X_MIN | BoundaryTag::X_MAX | BoundaryTag::T_START,
        }
    }
}

/// P1 degrees of freedom: global dof `i` is vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    space: Space,
    constrained: Vec<bool>,
    n_free: usize,
}

impl DofMap {
    pub fn new(mesh: &SpaceTimeMesh, space: Space) -> Self {
        let mask = space.constrained_tags();
        let constrained: Vec<bool> = mesh
            .boundary_tags
            .iter()
            .map(|&tag| tag.intersects(mask))
            .collect();
        let n_free = constrained.iter().filter(|&&c| !c).count();
        Self {
            space,
            constrained,
            n_free,
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n_dofs(&self) -> usize {
        self.constrained.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn n_constrained(&self) -> usize {
        self.constrained.len() - self.n_free
    }

    #[inline]
    pub fn is_constrained(&self, i: usize) -> bool {
        self.constrained[i]
    }

    pub fn free(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_dofs()).filter(|&i| !self.constrained[i])
    }

    pub fn constrained(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_dofs()).filter(|&i| self.constrained[i])
    }

    /// Zero the constrained entries of `v`.
    pub fn apply(&self, v: &mut [f64]) {
        for (x, &c) in v.iter_mut().zip(&self.constrained) {
            if c {
                *x = 0.0;
            }
        }
    }
}
