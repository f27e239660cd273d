//! Slow reference implementations used to cross-check the fast paths.
//! None of these share code with the solvers they check.

use cgm_core::geometry::VelocityPolytope;
use cgm_core::linalg::{self, Matrix};
use cgm_core::problems::{HalfSpace, Operator, ProblemConstants, ProblemInstance, Structure};

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-12 · max|A|`.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                for (r, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *r -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// `proj_v` by enumerating which restricted coordinates sit at zero.
///
/// For each zero set `S ⊆ N` the projection onto `{∑p = 1, p_S = 0}` is a
/// uniform shift of the remaining coordinates; the answer is the closest
/// such point that also satisfies `p_i ≥ 0` on `N \ S`.
pub fn brute_force_proj_v(q: &[f64], restricted: &[usize]) -> Vec<f64> {
    let d = q.len();
    let n = restricted.len();
    assert!(n <= 20, "enumeration over 2^{n} subsets");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let zero: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).map(|b| restricted[b]).collect();
        let free = d - zero.len();
        if free == 0 {
            continue;
        }
        let free_sum: f64 = (0..d).filter(|i| !zero.contains(i)).map(|i| q[i]).sum();
        let shift = (1.0 - free_sum) / free as f64;
        let p: Vec<f64> = (0..d).map(|i| if zero.contains(&i) { 0.0 } else { q[i] + shift }).collect();
        if restricted.iter().any(|&i| p[i] < -1e-14) {
            continue;
        }
        let dist = linalg::distance(&p, q);
        if best.as_ref().is_none_or(|(b, _)| dist < *b) {
            best = Some((dist, p));
        }
    }
    best.expect("the simplex face {p_N = 0} with a free coordinate, or the full simplex, is always feasible")
        .1
}

/// `argmin ½‖v + F‖²` over the polytope by enumerating working sets.
///
/// Each subset `W` of rows gives the candidate `v = −F − G_Wᵀλ` with
/// `G_W v = −b_W`. Singular subsets are skipped; dependent rows are still
/// covered by their independent subsets. Returns `None` if no candidate is
/// feasible, i.e. the polytope is empty.
pub fn brute_force_qp(poly: &VelocityPolytope, fx: &[f64]) -> Option<Vec<f64>> {
    let k = poly.len();
    assert!(k <= 16, "enumeration over 2^{k} working sets");
    let scale = 1.0 + linalg::norm(fx) + linalg::norm(&poly.offsets);
    let tol = 1e-10 * scale;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << k) {
        let w: Vec<usize> = (0..k).filter(|b| mask & (1 << b) != 0).collect();
        let v = if w.is_empty() {
            fx.iter().map(|f| -f).collect::<Vec<_>>()
        } else {
            let gram: Vec<Vec<f64>> = w
                .iter()
                .map(|&i| w.iter().map(|&j| linalg::dot(poly.normals.row(i), poly.normals.row(j))).collect())
                .collect();
            let rhs: Vec<f64> = w
                .iter()
                .map(|&i| poly.offsets[i] - linalg::dot(poly.normals.row(i), fx))
                .collect();
            let Some(lambda) = solve_dense(gram, rhs) else {
                continue;
            };
            let mut v: Vec<f64> = fx.iter().map(|f| -f).collect();
            for (&i, l) in w.iter().zip(&lambda) {
                linalg::axpy(-l, poly.normals.row(i), &mut v);
            }
            v
        };
        if poly.max_violation(&v) > tol {
            continue;
        }
        let obj: f64 = v.iter().zip(fx).map(|(a, b)| (a + b) * (a + b)).sum();
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, v));
        }
    }
    best.map(|(_, v)| v)
}

/// `−min_{½zᵀBz ≤ c} zᵀF` from the KKT system of the ellipsoid.
///
/// The minimizer is radial along `−B⁻¹F`: `z = −B⁻¹F/λ` with `λ` fixed by
/// `½zᵀBz = c`. `B⁻¹F` comes from Gaussian elimination, not Cholesky.
/// Returns `(gap, z, kkt residual)`.
pub fn radial_kkt_gap(b: &Matrix, c: f64, fz: &[f64]) -> Option<(f64, Vec<f64>, f64)> {
    let n = fz.len();
    if linalg::norm(fz) == 0.0 {
        return Some((0.0, vec![0.0; n], 0.0));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| b.row(i).to_vec()).collect();
    let w = solve_dense(rows, fz.to_vec())?;
    let quad = linalg::dot(fz, &w);
    if !(quad > 0.0) {
        return None;
    }
    let lambda = (quad / (2.0 * c)).sqrt();
    let z: Vec<f64> = w.iter().map(|v| -v / lambda).collect();
    // stationarity F + λBz = 0 and the boundary condition
    let bz = b.mul_vec(&z);
    let stat: f64 = fz.iter().zip(&bz).map(|(f, v)| (f + lambda * v).abs()).fold(0.0, f64::max);
    let boundary = (0.5 * linalg::dot(&z, &bz) - c).abs();
    Some((-linalg::dot(&z, fz), z, stat.max(boundary)))
}

/// Central differences of a scalar function.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = h * (1.0 + x[i].abs());
            xp[i] = x[i] + step;
            let up = f(&xp);
            xp[i] = x[i] - step;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// `max_i |a_i − b_i| / (1 + |b_i|)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / (1.0 + y.abs())).fold(0.0, f64::max)
}

/// Largest finite-difference error of every constraint gradient at `x`.
pub fn check_constraint_gradients(problem: &ProblemInstance, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for g in problem.constraints() {
        let analytic = g.gradient(x);
        let fd = fd_gradient(&|y| g.value(y), x, 1e-6);
        worst = worst.max(relative_error(&fd, &analytic));
    }
    worst
}

/// Finite-difference error of `F` against the potential it derives from,
/// or `None` if the instance has no potential or a stochastic operator.
pub fn check_operator(problem: &ProblemInstance, x: &[f64]) -> Option<f64> {
    if problem.is_stochastic() {
        return None;
    }
    let potential = problem.potential.as_ref()?;
    let mut fd = fd_gradient(&|y| potential.value(y), x, 1e-6);
    potential.operator_from_gradient(&mut fd);
    Some(relative_error(&fd, &problem.mean_operator(x)))
}

/// The affine operator `F(z) = Mz + c` on `ℝ^d` posed two ways: over the
/// implicit simplex, and over the explicit system `−z_i ≤ 0`, `∑z − 1 ≤ 0`,
/// `1 − ∑z ≤ 0` solved by the generic direction QP.
pub fn simplex_pair(m: Matrix, c: Vec<f64>) -> (ProblemInstance, ProblemInstance) {
    let d = c.len();
    assert_eq!((m.rows(), m.cols()), (d, d));
    let make_op = || {
        let m = m.clone();
        let c = c.clone();
        Operator::Deterministic(Box::new(move |z: &[f64], out: &mut [f64]| {
            m.mul_vec_into(z, out);
            linalg::axpy(1.0, &c, out);
        }))
    };
    let constants = ProblemConstants::with_radius(1.0);
    let implicit = ProblemInstance::builder("affine_simplex_implicit", d, make_op())
        .structure(Structure::Simplex)
        .constants(constants.clone())
        .build()
        .expect("well formed");
    let mut explicit = ProblemInstance::builder("affine_simplex_explicit", d, make_op())
        .structure(Structure::Generic)
        .constants(constants);
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = -1.0;
        explicit = explicit.constraint(HalfSpace::new(e, 0.0));
    }
    explicit = explicit
        .constraint(HalfSpace::new(vec![1.0; d], 1.0))
        .constraint(HalfSpace::new(vec![-1.0; d], -1.0));
    (implicit, explicit.build().expect("well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cgm_core::geometry::proj_v;

    #[test]
    fn dense_solver() {
        let x = solve_dense(vec![vec![0.0, 2.0], vec![1.0, 1.0]], vec![4.0, 3.0]).unwrap();
        assert!(linalg::max_abs_diff(&x, &[1.0, 2.0]) < 1e-15);
        assert!(solve_dense(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn brute_proj_matches_hand_examples() {
        // full simplex projection of (1, 1) is (½, ½); of (2, 0) is (1, 0)
        assert!(linalg::max_abs_diff(&brute_force_proj_v(&[1.0, 1.0], &[0, 1]), &[0.5, 0.5]) < 1e-15);
        assert!(linalg::max_abs_diff(&brute_force_proj_v(&[2.0, 0.0], &[0, 1]), &[1.0, 0.0]) < 1e-15);
        // unrestricted coordinates may go negative
        let q = [2.0, -3.0, 0.5];
        assert!(linalg::max_abs_diff(&brute_force_proj_v(&q, &[0]), &proj_v(&q, &[0])) < 1e-14);
    }

    #[test]
    fn brute_qp_box_corner() {
        // v ≤ (−1, −1) componentwise from rows e_1, e_2 with offsets 1
        let poly = VelocityPolytope::from_rows(2, 1.0, &[(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0)]).unwrap();
        let v = brute_force_qp(&poly, &[0.0, 0.0]).unwrap();
        assert!(linalg::max_abs_diff(&v, &[-1.0, -1.0]) < 1e-14);
        let empty = VelocityPolytope::from_rows(1, 1.0, &[(vec![1.0], 1.0), (vec![-1.0], 1.0)]).unwrap();
        assert!(brute_force_qp(&empty, &[0.0]).is_none());
    }

    #[test]
    fn radial_gap_identity_example() {
        let (gap, z, res) = radial_kkt_gap(&Matrix::identity(2), 0.5, &[1.0, 0.0]).unwrap();
        assert!((gap - 1.0).abs() < 1e-15);
        assert!(linalg::max_abs_diff(&z, &[-1.0, 0.0]) < 1e-15);
        assert!(res < 1e-15);
    }
}
