//! Small dense helpers on top of nalgebra: full SVD with a complete right
//! basis, numerical rank, null spaces, minimum-norm solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Default relative rank threshold for a map with `domain_dim` inputs.
pub fn default_rank_tol(domain_dim: usize) -> f64 {
    domain_dim.max(1) as f64 * f64::EPSILON * 64.0
}

/// Singular values (descending) and a complete orthonormal right basis
/// (columns of `v`, matching order; trailing columns span the null space).
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl FullSvd {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        if cols == 0 {
            return FullSvd {
                singular_values: Vec::new(),
                v: DMatrix::zeros(0, 0),
            };
        }
        // Zero-pad wide matrices so the decomposition returns all `cols`
        // right singular vectors, not only the first `rows`.
        let work = if rows < cols {
            let mut padded = DMatrix::zeros(cols, cols);
            padded.view_mut((0, 0), (rows, cols)).copy_from(m);
            padded
        } else {
            m.clone()
        };
        let svd = work.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
        let mut v = DMatrix::zeros(cols, cols);
        for (j, &i) in order.iter().enumerate() {
            v.set_column(j, &v_t.row(i).transpose());
        }
        // Only min(rows, cols) values are meaningful for the original matrix.
        let singular_values = singular_values.into_iter().take(rows.min(cols)).collect();
        FullSvd { singular_values, v }
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cutoff = rel_tol * self.sigma_max();
        self.singular_values.iter().filter(|&&s| s > cutoff && s > 0.0).count()
    }

    /// Orthonormal null-space basis, one vector per column, oriented so the
    /// first non-negligible component of each column is positive.
    pub fn null_space(&self, rel_tol: f64) -> DMatrix<f64> {
        let d = self.v.nrows();
        let rank = self.rank(rel_tol);
        let mut basis = self.v.columns(rank, d - rank).into_owned();
        for mut col in basis.column_iter_mut() {
            orient(&mut col);
        }
        basis
    }
}

fn orient<S>(col: &mut nalgebra::Matrix<f64, nalgebra::Dyn, nalgebra::U1, S>)
where
    S: nalgebra::StorageMut<f64, nalgebra::Dyn, nalgebra::U1>,
{
    let scale = col.amax();
    if let Some(first) = col.iter().copied().find(|c| c.abs() > 1e-10 * scale) {
        if first < 0.0 {
            col.neg_mut();
        }
    }
}

/// Minimum-norm least-squares solution of `a x = b`, discarding singular
/// values below `rel_tol * sigma_max`.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.max();
    let cutoff = rel_tol * smax;
    let mut x = DVector::zeros(a.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let coeff = u.column(i).dot(b) / s;
            x.axpy(coeff, &v_t.row(i).transpose(), 1.0);
        }
    }
    x
}

/// Symmetric square root of a symmetric positive semidefinite matrix.
pub fn sym_sqrt(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Rotate the columns of `basis` (orthonormal, `d x r`) by the orthogonal
/// `r x r` matrix that best maps them onto `reference`.
pub fn procrustes_align(basis: &DMatrix<f64>, reference: &DMatrix<f64>) -> DMatrix<f64> {
    if basis.ncols() == 0 {
        return basis.clone();
    }
    let cross = basis.transpose() * reference;
    let svd = cross.svd(true, true);
    let rot = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
    basis * rot
}

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases of equal rank.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 && b.ncols() == 0 {
        return 0.0;
    }
    // sine of the largest angle is the norm of b's component outside span(a);
    // asin keeps small angles accurate where acos of a cosine would not
    let residual = b - a * (a.transpose() * b);
    let s = residual.singular_values().max();
    s.clamp(0.0, 1.0).asin()
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol
}
