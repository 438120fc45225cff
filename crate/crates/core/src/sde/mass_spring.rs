//! Damped mass-spring networks.
//!
//! State layout is `x = [q, v]` with `q` and `v` each of length `p·d`, mass
//! major (`q[i*d + c]` is coordinate `c` of mass `i`). The dynamics are
//!
//! ```text
//! dq = v dt
//! dv = -γ v dt - ∇U(q) dt + σ db
//! U(q) = ½ Σ_{i<j} C_ij (‖q_i - q_j‖ - D_ij)²
//! ```

use nalgebra::DMatrix;

use super::model::Basis;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MassSpring {
    adjacency: DMatrix<f64>,
    rest_lengths: DMatrix<f64>,
    damping: f64,
    sigma: f64,
    space_dim: usize,
    edges: Vec<(usize, usize)>,
}

impl MassSpring {
    pub fn new(
        adjacency: DMatrix<f64>,
        rest_lengths: DMatrix<f64>,
        damping: f64,
        sigma: f64,
        space_dim: usize,
    ) -> Result<Self> {
        let p = adjacency.nrows();
        if !adjacency.is_square() || p == 0 {
            return Err(Error::invalid("adjacency must be square and non-empty"));
        }
        if rest_lengths.shape() != adjacency.shape() {
            return Err(Error::DimensionMismatch { expected: p, found: rest_lengths.nrows() });
        }
        if space_dim == 0 {
            return Err(Error::invalid("spatial dimension must be positive"));
        }
        if !(damping >= 0.0) || !damping.is_finite() {
            return Err(Error::invalid(format!("damping must be >= 0, got {damping}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(format!("noise amplitude must be > 0, got {sigma}")));
        }
        let mut edges = Vec::new();
        for i in 0..p {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("adjacency has a self-loop at {i}")));
            }
            for j in 0..p {
                let c = adjacency[(i, j)];
                if c != 0.0 && c != 1.0 {
                    return Err(Error::invalid("adjacency entries must be 0 or 1"));
                }
                if c != adjacency[(j, i)] || rest_lengths[(i, j)] != rest_lengths[(j, i)] {
                    return Err(Error::invalid("adjacency and rest lengths must be symmetric"));
                }
                if c == 1.0 && !(rest_lengths[(i, j)] > 0.0) {
                    return Err(Error::invalid(format!("spring ({i},{j}) needs a positive rest length")));
                }
                if c == 1.0 && i < j {
                    edges.push((i, j));
                }
            }
        }
        Ok(Self { adjacency, rest_lengths, damping, sigma, space_dim, edges })
    }

    pub fn masses(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn state_dim(&self) -> usize {
        2 * self.masses() * self.space_dim
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn rest_lengths(&self) -> &DMatrix<f64> {
        &self.rest_lengths
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Springs as `(i, j)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn potential(&self, q: &[f64]) -> f64 {
        let d = self.space_dim;
        self.edges
            .iter()
            .map(|&(i, j)| {
                let len = distance(&q[i * d..(i + 1) * d], &q[j * d..(j + 1) * d]);
                0.5 * (len - self.rest_lengths[(i, j)]).powi(2)
            })
            .sum()
    }

    /// `∇U(q)` written into `grad` (length `p·d`).
    pub fn potential_gradient(&self, q: &[f64], grad: &mut [f64]) -> Result<()> {
        let d = self.space_dim;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for &(i, j) in &self.edges {
            let (qi, qj) = (&q[i * d..(i + 1) * d], &q[j * d..(j + 1) * d]);
            let len = distance(qi, qj);
            if len == 0.0 {
                return Err(Error::CoincidentMasses { i, j });
            }
            let scale = 1.0 - self.rest_lengths[(i, j)] / len;
            for c in 0..d {
                let f = scale * (qi[c] - qj[c]);
                grad[i * d + c] += f;
                grad[j * d + c] -= f;
            }
        }
        Ok(())
    }

    pub(crate) fn drift(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.masses() * self.space_dim;
        let (q, v) = x.split_at(n);
        let (dq, dv) = out.split_at_mut(n);
        dq.copy_from_slice(v);
        self.potential_gradient(q, dv)?;
        for (o, vi) in dv.iter_mut().zip(v) {
            *o = -self.damping * vi - *o;
        }
        Ok(())
    }

    /// The nonlinear feature catalog `[v, Δ, Δ/‖Δ‖]` for this network.
    pub fn basis(&self) -> MassSpringBasis {
        MassSpringBasis::new(self.masses(), self.space_dim)
    }

    /// Coefficient matrix `A` (shape `2pd x q`) with `F(x) = A · basis(x)`.
    pub fn basis_coefficients(&self) -> DMatrix<f64> {
        let basis = self.basis();
        let (p, d) = (self.masses(), self.space_dim);
        let n = p * d;
        let mut a = DMatrix::zeros(2 * n, basis.len());
        for i in 0..p {
            for c in 0..d {
                a[(i * d + c, basis.velocity_index(i, c))] = 1.0;
                a[(n + i * d + c, basis.velocity_index(i, c))] = -self.damping;
            }
        }
        for &(i, j) in &self.edges {
            let rest = self.rest_lengths[(i, j)];
            for c in 0..d {
                // Δ^(ij) = q_i - q_j enters mass i with sign -1 and mass j with +1.
                a[(n + i * d + c, basis.difference_index(i, j, c))] = -1.0;
                a[(n + j * d + c, basis.difference_index(i, j, c))] = 1.0;
                a[(n + i * d + c, basis.direction_index(i, j, c))] = rest;
                a[(n + j * d + c, basis.direction_index(i, j, c))] = -rest;
            }
        }
        a
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `[v, −γ v − ∇U(q)]` for positions `q` and velocities `v`.
pub fn mass_spring_drift(
    q: &[f64],
    v: &[f64],
    adjacency: &DMatrix<f64>,
    rest_lengths: &DMatrix<f64>,
    damping: f64,
) -> Result<Vec<f64>> {
    let p = adjacency.nrows();
    if p == 0 || !q.len().is_multiple_of(p) || q.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: q.len(), found: v.len() });
    }
    // sigma does not enter the drift
    let ms = MassSpring::new(adjacency.clone(), rest_lengths.clone(), damping, 1.0, q.len() / p)?;
    let mut x = q.to_vec();
    x.extend_from_slice(v);
    let mut out = vec![0.0; x.len()];
    ms.drift(&x, &mut out)?;
    Ok(out)
}

/// Features `[v_(i,c)]`, `[Δ^(ij)_c]`, `[Δ^(ij)_c / ‖Δ^(ij)‖]` over all unordered
/// pairs `i < j` and coordinates `c`; `p·d + 2·d·p(p-1)/2` columns in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MassSpringBasis {
    masses: usize,
    space_dim: usize,
}

impl MassSpringBasis {
    pub fn new(masses: usize, space_dim: usize) -> Self {
        Self { masses, space_dim }
    }

    pub fn pairs(&self) -> usize {
        self.masses * (self.masses.saturating_sub(1)) / 2
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.masses);
        // pairs enumerated row by row: (0,1), (0,2), ..., (1,2), ...
        i * self.masses - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn velocity_index(&self, i: usize, c: usize) -> usize {
        i * self.space_dim + c
    }

    pub fn difference_index(&self, i: usize, j: usize, c: usize) -> usize {
        self.masses * self.space_dim + self.pair_index(i, j) * self.space_dim + c
    }

    pub fn direction_index(&self, i: usize, j: usize, c: usize) -> usize {
        self.masses * self.space_dim + self.pairs() * self.space_dim + self.pair_index(i, j) * self.space_dim + c
    }
}

impl Basis for MassSpringBasis {
    fn state_dim(&self) -> usize {
        2 * self.masses * self.space_dim
    }

    fn len(&self) -> usize {
        self.masses * self.space_dim + 2 * self.space_dim * self.pairs()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let (p, d) = (self.masses, self.space_dim);
        let n = p * d;
        if x.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: x.len() });
        }
        let (q, v) = x.split_at(n);
        out[..n].copy_from_slice(v);
        for i in 0..p {
            for j in i + 1..p {
                let (qi, qj) = (&q[i * d..(i + 1) * d], &q[j * d..(j + 1) * d]);
                let len = distance(qi, qj);
                if len == 0.0 {
                    return Err(Error::CoincidentMasses { i, j });
                }
                for c in 0..d {
                    let delta = qi[c] - qj[c];
                    out[self.difference_index(i, j, c)] = delta;
                    out[self.direction_index(i, j, c)] = delta / len;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::rng;

    fn chain(p: usize, rest: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut c = DMatrix::zeros(p, p);
        let mut d = DMatrix::zeros(p, p);
        for i in 0..p - 1 {
            c[(i, i + 1)] = 1.0;
            c[(i + 1, i)] = 1.0;
            d[(i, i + 1)] = rest;
            d[(i + 1, i)] = rest;
        }
        (c, d)
    }

    #[test]
    fn rest_configuration_has_zero_drift() {
        let (c, d) = chain(3, 1.0);
        let out = mass_spring_drift(&[0.0, 1.0, 2.0], &[0.0; 3], &c, &d, 2.0).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn stretched_pair_attracts() {
        // ∇_{q1} U = (1 - 1/2)(0 - 2) = -1, so the velocity drift of mass 1 is +1.
        let (c, d) = chain(2, 1.0);
        let out = mass_spring_drift(&[0.0, 2.0], &[0.0, 0.0], &c, &d, 2.0).unwrap();
        assert!((out[2] - 1.0).abs() < 1e-15);
        assert!((out[3] + 1.0).abs() < 1e-15);
        // finite-difference oracle on U(q1) = ½(|q1 - 2| - 1)²
        let u = |q1: f64| 0.5 * ((q1 - 2.0).abs() - 1.0).powi(2);
        let h = 1e-5;
        let fd = (u(h) - u(-h)) / (2.0 * h);
        assert!((fd - (-1.0)).abs() < 1e-8);
    }

    #[test]
    fn coincident_connected_masses_fail() {
        let (c, d) = chain(2, 1.0);
        let err = mass_spring_drift(&[1.0, 1.0], &[0.0, 0.0], &c, &d, 1.0).unwrap_err();
        assert!(matches!(err, Error::CoincidentMasses { i: 0, j: 1 }));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = rng::from_seed(11);
        let p = 4;
        let mut c = DMatrix::from_element(p, p, 1.0);
        c.fill_diagonal(0.0);
        let d = DMatrix::from_fn(p, p, |i, j| if i == j { 0.0 } else { 0.5 + 0.1 * (i + j) as f64 });
        let ms = MassSpring::new(c, d, 1.0, 1.0, 2).unwrap();
        let q: Vec<f64> = (0..p * 2).map(|_| rng.random::<f64>() * 4.0).collect();
        let mut grad = vec![0.0; q.len()];
        ms.potential_gradient(&q, &mut grad).unwrap();
        let h = 1e-5;
        for k in 0..q.len() {
            let (mut qp, mut qm) = (q.clone(), q.clone());
            qp[k] += h;
            qm[k] -= h;
            let fd = (ms.potential(&qp) - ms.potential(&qm)) / (2.0 * h);
            assert!((fd - grad[k]).abs() <= 1e-6 * grad[k].abs().max(1.0), "{k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn basis_catalog_size_for_two_masses() {
        for d in 1..=3 {
            let b = MassSpringBasis::new(2, d);
            assert_eq!(b.len(), (2 * d) + 2 * d);
        }
        assert_eq!(MassSpringBasis::new(9, 2).len(), 18 + 2 * 2 * 36);
    }

    #[test]
    fn basis_representation_reproduces_drift() {
        let mut rng = rng::from_seed(5);
        let (c, d) = chain(4, 1.3);
        let ms = MassSpring::new(c, d, 0.7, 0.5, 2).unwrap();
        let basis = ms.basis();
        let coeffs = ms.basis_coefficients();
        let x: Vec<f64> = (0..ms.state_dim()).map(|_| rng.random::<f64>() * 3.0 - 1.5).collect();
        let mut f = vec![0.0; basis.len()];
        basis.eval(&x, &mut f).unwrap();
        let via_basis = &coeffs * nalgebra::DVector::from_vec(f);
        let mut direct = vec![0.0; x.len()];
        ms.drift(&x, &mut direct).unwrap();
        for (a, b) in via_basis.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
