//! Hilbert's projective metric and Birkhoff's contraction coefficient.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::{Kernel, KernelConfig, RankVector};
use crate::weights::WeightFunction;

/// Largest dense dimension accepted by [`birkhoff_coefficient`].
pub const BIRKHOFF_MAX_N: usize = 512;

/// `d_H(x, y) = max_i ln(x_i / y_i) + max_j ln(y_j / x_j)` for positive vectors.
pub fn hilbert_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut up = f64::NEG_INFINITY;
    let mut down = f64::NEG_INFINITY;
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::BoundaryPoint(i));
        }
        let r = (a / b).ln();
        up = up.max(r);
        down = down.max(-r);
    }
    Ok((up + down).max(0.0))
}

/// `tau_B(A) = (1 - sqrt(phi)) / (1 + sqrt(phi))` where `phi` is the smallest
/// cross ratio `A_ik A_jl / (A_jk A_il)`. For a row pair the smallest cross
/// ratio is `min_k r_k / max_k r_k` with `r_k = A_ik / A_jk`.
pub fn birkhoff_coefficient(a: &DMatrix<f64>) -> Result<f64> {
    let (rows, cols) = a.shape();
    if rows > BIRKHOFF_MAX_N || cols > BIRKHOFF_MAX_N {
        return Err(Error::TooLarge {
            what: "birkhoff_coefficient",
            n: rows.max(cols),
            max: BIRKHOFF_MAX_N,
        });
    }
    for i in 0..rows {
        for j in 0..cols {
            if !(a[(i, j)] > 0.0) {
                return Err(Error::NonPositive { row: i, col: j });
            }
        }
    }
    let mut phi: f64 = 1.0;
    for i in 0..rows {
        for j in (i + 1)..rows {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for k in 0..cols {
                let r = a[(i, k)] / a[(j, k)];
                lo = lo.min(r);
                hi = hi.max(r);
            }
            phi = phi.min(lo / hi);
        }
    }
    let s = phi.sqrt();
    Ok((1.0 - s) / (1.0 + s))
}

/// `ln(alpha / beta)` with `alpha`, `beta` the extreme entrywise ratios
/// `M(x)_ij / M(y)_ij`: an upper bound on the projective distance between
/// the kernels `M(x)` and `M(y)`.
pub fn kernel_distance_bound(
    graph: &Graph,
    weights: &WeightFunction,
    config: &KernelConfig,
    x: &RankVector,
    y: &RankVector,
) -> Result<f64> {
    if !graph.is_positive() {
        let dense = graph.to_dense();
        let (row, col) = (0..graph.n())
            .flat_map(|i| (0..graph.n()).map(move |j| (i, j)))
            .find(|&(i, j)| dense[(i, j)] <= 0.0)
            .unwrap_or((0, 0));
        return Err(Error::NonPositive { row, col });
    }
    for v in [x, y] {
        if let Some(i) = v.as_slice().iter().position(|&e| e <= 0.0) {
            return Err(Error::BoundaryPoint(i));
        }
    }
    let kernel = Kernel::new(graph, weights, config.clone())?;
    let mx = kernel.transition_matrix(x)?;
    let my = kernel.transition_matrix(y)?;
    let mut alpha = f64::NEG_INFINITY;
    let mut beta = f64::INFINITY;
    for (a, b) in mx.iter().zip(my.iter()) {
        let r = a / b;
        alpha = alpha.max(r);
        beta = beta.min(r);
    }
    Ok((alpha / beta).ln().max(0.0))
}

/// Row-vector product `x A`.
pub fn row_times(x: &[f64], a: &DMatrix<f64>) -> Vec<f64> {
    (0..a.ncols())
        .map(|j| x.iter().enumerate().map(|(i, &v)| v * a[(i, j)]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;
    use crate::rng::{random_simplex, seeded};
    use crate::weights::Temperature;
    use rand::Rng;

    fn random_positive_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(0.01..10.0)).collect()
    }

    #[test]
    fn hilbert_examples() {
        let x = [0.2, 0.3, 0.5];
        assert_eq!(hilbert_distance(&x, &x).unwrap(), 0.0);
        let d = hilbert_distance(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-15);
        let y = [0.4, 0.1, 0.5];
        let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert_eq!(
            hilbert_distance(&x, &y).unwrap(),
            hilbert_distance(&doubled, &y).unwrap()
        );
        assert!(matches!(
            hilbert_distance(&[0.0, 1.0], &[0.5, 0.5]),
            Err(Error::BoundaryPoint(0))
        ));
    }

    #[test]
    fn hilbert_zero_iff_proportional() {
        let mut rng = seeded(4);
        for _ in 0..200 {
            let x = random_positive_vec(&mut rng, 5);
            let c = rng.gen_range(0.1..5.0);
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            assert!(hilbert_distance(&x, &scaled).unwrap() < 1e-12);
            let y = random_positive_vec(&mut rng, 5);
            assert!(hilbert_distance(&x, &y).unwrap() > 0.0);
        }
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = seeded(8);
        for _ in 0..1000 {
            let n = rng.gen_range(2..8);
            let (x, y, z) = (
                random_positive_vec(&mut rng, n),
                random_positive_vec(&mut rng, n),
                random_positive_vec(&mut rng, n),
            );
            let xz = hilbert_distance(&x, &z).unwrap();
            let xy = hilbert_distance(&x, &y).unwrap();
            let yz = hilbert_distance(&y, &z).unwrap();
            assert!(xz <= xy + yz + 1e-12);
        }
    }

    #[test]
    fn birkhoff_examples() {
        for n in 1..6 {
            let ones = DMatrix::from_element(n, n, 1.0);
            assert_eq!(birkhoff_coefficient(&ones).unwrap(), 0.0);
        }
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((birkhoff_coefficient(&a).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        assert!(matches!(
            birkhoff_coefficient(&z),
            Err(Error::NonPositive { row: 0, col: 1 })
        ));
    }

    #[test]
    fn birkhoff_matches_sampled_supremum() {
        // sampled sup of d_H(xA, yA) / d_H(x, y) approaches 1/3 from below
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let tau = birkhoff_coefficient(&a).unwrap();
        let mut rng = seeded(12);
        let mut sup: f64 = 0.0;
        for _ in 0..100_000 {
            let x = random_positive_vec(&mut rng, 2);
            let y = random_positive_vec(&mut rng, 2);
            let d = hilbert_distance(&x, &y).unwrap();
            if d < 1e-9 {
                continue;
            }
            let ratio = hilbert_distance(&row_times(&x, &a), &row_times(&y, &a)).unwrap() / d;
            sup = sup.max(ratio);
        }
        assert!(sup <= tau + 1e-12);
        assert!(sup > tau - 1e-3, "sampled sup {sup}");
    }

    #[test]
    fn contraction_definition() {
        let mut rng = seeded(13);
        for _ in 0..20 {
            let n = rng.gen_range(2..7);
            let a = generators::random_positive(n, 0.1, 3.0, &mut rng).to_dense();
            let tau = birkhoff_coefficient(&a).unwrap();
            assert!((0.0..1.0).contains(&tau));
            for _ in 0..500 {
                let x = random_positive_vec(&mut rng, n);
                let y = random_positive_vec(&mut rng, n);
                let lhs = hilbert_distance(&row_times(&x, &a), &row_times(&y, &a)).unwrap();
                assert!(lhs <= tau * hilbert_distance(&x, &y).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_has_zero_coefficient() {
        let mut rng = seeded(14);
        let u = random_positive_vec(&mut rng, 4);
        let v = random_positive_vec(&mut rng, 4);
        let a = DMatrix::from_fn(4, 4, |i, j| u[i] * v[j]);
        assert!(birkhoff_coefficient(&a).unwrap() < 1e-7);
    }

    #[test]
    fn kernel_bound_examples() {
        let mut rng = seeded(15);
        let g = generators::random_positive(4, 0.5, 2.0, &mut rng);
        let w = WeightFunction::exp_identity();
        let temp = Temperature::new(0.7).unwrap();
        let cfg = KernelConfig::plain(temp);
        let x = random_simplex(&mut rng, 4);
        assert_eq!(kernel_distance_bound(&g, &w, &cfg, &x, &x).unwrap(), 0.0);

        let l_plus = w.lip_bounds(temp).unwrap().l_plus;
        let kernel = Kernel::new(&g, &w, cfg.clone()).unwrap();
        for _ in 0..200 {
            let x = random_simplex(&mut rng, 4);
            let y = random_simplex(&mut rng, 4);
            let bound = kernel_distance_bound(&g, &w, &cfg, &x, &y).unwrap();
            let dxy = hilbert_distance(x.as_slice(), y.as_slice()).unwrap();
            assert!(bound <= 2.0 * l_plus * dxy + 1e-9);
            let mx = kernel.transition_matrix(&x).unwrap();
            let my = kernel.transition_matrix(&y).unwrap();
            for _ in 0..5 {
                let z = random_positive_vec(&mut rng, 4);
                let sampled = hilbert_distance(&row_times(&z, &mx), &row_times(&z, &my)).unwrap();
                assert!(sampled <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn kernel_bound_errors() {
        let w = WeightFunction::exp_identity();
        let cfg = KernelConfig::plain(Temperature::new(1.0).unwrap());
        let g = Graph::from_dense(&[[1.0, 1.0], [1.0, 0.0]]).unwrap();
        let x = RankVector::uniform(2);
        assert!(matches!(
            kernel_distance_bound(&g, &w, &cfg, &x, &x),
            Err(Error::NonPositive { row: 1, col: 1 })
        ));
        let g = generators::complete(2);
        let b = RankVector::vertex(2, 0);
        assert!(matches!(
            kernel_distance_bound(&g, &w, &cfg, &x, &b),
            Err(Error::BoundaryPoint(1))
        ));
    }
}
