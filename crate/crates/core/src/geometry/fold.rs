use super::transform::{w_alpha_into, w_alpha_inverse};
use super::{Composition, EuclideanPoint, FoldBranch, HelmertSubmatrix, FOLD_SCALE_FLOOR};
use crate::error::{Error, Result};

/// `min_i (1 + α·(Hᵀy)_i)`; positive exactly on `A_α`. Always `1` at α = 0.
pub fn region_margin(y: &EuclideanPoint, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    let helmert = HelmertSubmatrix::new(y.dim() + 1).expect("dimension >= 1");
    let v = helmert.apply_transpose(y.values());
    min_margin(&v, alpha)
}

pub(crate) fn min_margin(v: &[f64], alpha: f64) -> f64 {
    v.iter()
        .map(|vi| 1.0 + alpha * vi)
        .fold(f64::INFINITY, f64::min)
}

/// Membership in `A_α`: `min_i(1 + α(Hᵀy)_i) > 0`, boundary excluded.
/// Every point is inside when α = 0.
pub fn in_alpha_region(y: &EuclideanPoint, alpha: f64) -> bool {
    alpha == 0.0 || region_margin(y, alpha) > 0.0
}

/// `min_i(α·v_i)`: the fold scale `q*` of a Helmert pre-image `v = Hᵀy`, or
/// `w*` of a `w_α` vector. Equals `α·min v` for α > 0 and `α·max v` for α < 0.
pub(crate) fn scaled_min(v: &[f64], alpha: f64) -> f64 {
    v.iter().map(|vi| alpha * vi).fold(f64::INFINITY, f64::min)
}

/// Fold scale `w*_α(x) = min_i(α·w_α(x)_i)`, which lies in `(−1, 0]` for any
/// composition; zero only at the barycenter.
pub fn fold_scale(x: &Composition, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero("fold_scale"));
    }
    let mut w = vec![0.0; x.dim()];
    w_alpha_into(x.parts(), alpha, &mut w);
    Ok(scaled_min(&w, alpha))
}

/// Folding map from ℝ^{D−1} onto the simplex.
///
/// Points of `A_α` go through the ordinary inverse `z_α⁻¹`. A point outside
/// is sent to `w_α⁻¹(Hᵀy / q*²)` with `q* = min_i(α(Hᵀy)_i) ≤ −1`, whose
/// image has `min_i(α m_i) = 1/q* ∈ [−1, 0)`.
pub fn fold(y: &EuclideanPoint, alpha: f64) -> Result<(Composition, FoldBranch)> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero("fold"));
    }
    let helmert = HelmertSubmatrix::new(y.dim() + 1)?;
    let mut v = helmert.apply_transpose(y.values());
    fold_preimage(&mut v, alpha)
}

/// Folds a Helmert pre-image `v = Hᵀy` in place and inverts it.
pub(crate) fn fold_preimage(v: &mut [f64], alpha: f64) -> Result<(Composition, FoldBranch)> {
    if min_margin(v, alpha) > 0.0 {
        return Ok((w_alpha_inverse(v, alpha)?, FoldBranch::Inside));
    }
    let q = scaled_min(v, alpha);
    if q.abs() < FOLD_SCALE_FLOOR {
        return Err(Error::SingularFold(q));
    }
    let scale = 1.0 / (q * q);
    v.iter_mut().for_each(|vi| *vi *= scale);
    match w_alpha_inverse(v, alpha) {
        Ok(x) => Ok((x, FoldBranch::Folded)),
        Err(Error::OutOfRegion { min_margin }) => Err(Error::FoldFailure { min_margin }),
        Err(e) => Err(e),
    }
}

/// Inverse of [`fold`] on a given branch: `z_α(x)` for [`FoldBranch::Inside`],
/// `z_α(x)/w*²` for [`FoldBranch::Folded`].
pub fn unfold(x: &Composition, alpha: f64, branch: FoldBranch) -> Result<EuclideanPoint> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero("unfold"));
    }
    let helmert = HelmertSubmatrix::new(x.dim())?;
    let mut w = vec![0.0; x.dim()];
    w_alpha_into(x.parts(), alpha, &mut w);
    let mut z = helmert.apply(&w);
    if branch == FoldBranch::Folded {
        let w_star = scaled_min(&w, alpha);
        if w_star.abs() < FOLD_SCALE_FLOOR {
            return Err(Error::SingularFold(w_star));
        }
        let scale = 1.0 / (w_star * w_star);
        z.iter_mut().for_each(|zi| *zi *= scale);
    }
    Ok(EuclideanPoint::from_unchecked(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{z_alpha, z_alpha_inverse};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_composition(rng: &mut impl Rng, d: usize) -> Composition {
        let parts: Vec<f64> = (0..d).map(|_| rng.random_range(0.02..1.0)).collect();
        Composition::closure(parts).unwrap()
    }

    #[test]
    fn origin_is_inside_for_every_alpha() {
        let origin = EuclideanPoint::new(vec![0.0, 0.0]).unwrap();
        for alpha in [-1.0, -0.2, 0.0, 0.4, 1.0] {
            assert!(in_alpha_region(&origin, alpha));
        }
    }

    #[test]
    fn far_point_leaves_region() {
        // Pushing the composition toward the third vertex and beyond drives
        // (Hᵀy)_1 below −1 at α = 1.
        let x = Composition::new(vec![0.2, 0.3, 0.5]).unwrap();
        let z = z_alpha(&x, 1.0);
        let direction = [0.0, -1.0];
        let outside = |t: f64| {
            EuclideanPoint::new(vec![
                z.values()[0] + t * direction[0],
                z.values()[1] + t * direction[1],
            ])
            .unwrap()
        };
        assert!(in_alpha_region(&outside(0.0), 1.0));
        assert!(!in_alpha_region(&outside(5.0), 1.0));
        let h = HelmertSubmatrix::new(3).unwrap();
        let v = h.apply_transpose(outside(5.0).values());
        assert!(v.iter().sum::<f64>().abs() < 1e-12);
        assert!(v.iter().any(|vi| 1.0 + vi <= 0.0));
    }

    #[test]
    fn fold_inside_is_inverse_transform() {
        let x = Composition::new(vec![0.6, 0.3, 0.1]).unwrap();
        for alpha in [-0.7, 0.5, 1.0] {
            let (back, branch) = fold(&z_alpha(&x, alpha), alpha).unwrap();
            assert_eq!(branch, FoldBranch::Inside);
            for (a, b) in back.parts().iter().zip(x.parts()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn folded_branch_lands_in_simplex_and_unfolds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for alpha in [-1.0, -0.5, -0.1, 0.1, 0.5, 1.0] {
            for d in [3, 5, 10] {
                let mut seen = 0;
                while seen < 50 {
                    let y = EuclideanPoint::new(
                        (0..d - 1).map(|_| rng.random_range(-30.0..30.0)).collect(),
                    )
                    .unwrap();
                    if in_alpha_region(&y, alpha) {
                        continue;
                    }
                    seen += 1;
                    let (x, branch) = fold(&y, alpha).unwrap();
                    assert_eq!(branch, FoldBranch::Folded);
                    let back = unfold(&x, alpha, FoldBranch::Folded).unwrap();
                    for (a, b) in back.values().iter().zip(y.values()) {
                        assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn unfold_then_fold_recovers_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for alpha in [-1.0, -0.5, 0.3, 1.0] {
            for d in [3, 4, 7] {
                for _ in 0..50 {
                    let x = random_composition(&mut rng, d);
                    let y = unfold(&x, alpha, FoldBranch::Folded).unwrap();
                    assert!(!in_alpha_region(&y, alpha));
                    let (back, branch) = fold(&y, alpha).unwrap();
                    assert_eq!(branch, FoldBranch::Folded);
                    for (a, b) in back.parts().iter().zip(x.parts()) {
                        assert!((a - b).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn folded_image_is_continuous_near_unit_scale() {
        // Near the boundary of the simplex w* → −1, so the folded image of a
        // point is close to its unfolded image.
        let x = Composition::new(vec![0.5 - 5e-7, 0.5 - 5e-7, 1e-6]).unwrap();
        let inside = unfold(&x, 1.0, FoldBranch::Inside).unwrap();
        let folded = unfold(&x, 1.0, FoldBranch::Folded).unwrap();
        let w_star = fold_scale(&x, 1.0).unwrap();
        assert!((w_star + 1.0).abs() < 1e-5);
        for (a, b) in inside.values().iter().zip(folded.values()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn inside_region_holds_for_every_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = rng.random_range(2..9);
            let x = random_composition(&mut rng, d);
            let alpha = rng.random_range(-1.0..1.0);
            let z = z_alpha(&x, alpha);
            assert!(in_alpha_region(&z, alpha));
            assert!(z_alpha_inverse(&z, alpha).is_ok());
        }
    }

    #[test]
    fn barycenter_fold_is_singular() {
        let bary = Composition::barycenter(3).unwrap();
        assert!(matches!(
            unfold(&bary, 0.5, FoldBranch::Folded),
            Err(Error::SingularFold(_))
        ));
        assert_eq!(fold_scale(&bary, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn fold_scale_lies_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x = random_composition(&mut rng, 5);
            let alpha: f64 = rng.random_range(-1.0..1.0);
            let s = fold_scale(&x, alpha).unwrap();
            assert!(s > -1.0 && s <= 0.0);
        }
    }
}
