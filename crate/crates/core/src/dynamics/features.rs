//! Distance-augmented input features for three bodies in three dimensions.
//!
//! Layout, body-major then power-minor: for each body `i` the block is `r_i` followed, for each
//! `j ≠ i` in increasing order, by `d`, `d/|d|`, `d/|d|²`, `d/|d|³` with `d = r_i − r_j`.
//! That gives `3 + 2·4·3 = 27` entries per body and 81 in total.

use crate::error::{Error, Result};

pub const BODIES: usize = 3;
pub const SPACE_DIM: usize = 3;
const POWERS: usize = 3;
const BLOCK: usize = SPACE_DIM + (BODIES - 1) * (POWERS + 1) * SPACE_DIM;

/// Length of the vector produced by [`augmented_features`].
pub const FEATURE_DIM: usize = BODIES * BLOCK;

fn pair_delta(positions: &[f64], i: usize, j: usize) -> [f64; 3] {
    [
        positions[3 * i] - positions[3 * j],
        positions[3 * i + 1] - positions[3 * j + 1],
        positions[3 * i + 2] - positions[3 * j + 2],
    ]
}

fn norm3(d: &[f64; 3]) -> f64 {
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub(crate) fn check_separation(positions: &[f64], min_distance: f64) -> Result<()> {
    for i in 0..BODIES {
        for j in (i + 1)..BODIES {
            let distance = norm3(&pair_delta(positions, i, j));
            // Negated comparison so NaN distances are also rejected.
            if !(distance >= min_distance) {
                return Err(Error::CollinearSingularity {
                    i,
                    j,
                    distance,
                    threshold: min_distance,
                });
            }
        }
    }
    Ok(())
}

fn other_bodies(i: usize) -> impl Iterator<Item = usize> {
    (0..BODIES).filter(move |&j| j != i)
}

/// Builds the 81 features from nine position coordinates `[r_1, r_2, r_3]`.
pub fn augmented_features(positions: &[f64], min_distance: f64) -> Result<Vec<f64>> {
    if positions.len() != BODIES * SPACE_DIM {
        return Err(Error::DimensionMismatch {
            what: "three-body positions",
            expected: BODIES * SPACE_DIM,
            found: positions.len(),
        });
    }
    check_separation(positions, min_distance)?;
    let mut out = Vec::with_capacity(FEATURE_DIM);
    for i in 0..BODIES {
        out.extend_from_slice(&positions[3 * i..3 * i + 3]);
        for j in other_bodies(i) {
            let d = pair_delta(positions, i, j);
            let rho = norm3(&d);
            out.extend_from_slice(&d);
            let mut scale = 1.0;
            for _ in 0..POWERS {
                scale *= rho;
                out.extend(d.iter().map(|x| x / scale));
            }
        }
    }
    debug_assert_eq!(out.len(), FEATURE_DIM);
    Ok(out)
}

/// Adds `vᵀ ∂features/∂positions` into `grad_positions`.
pub fn augmented_features_vjp(positions: &[f64], v: &[f64], grad_positions: &mut [f64]) {
    let mut cursor = 0;
    for i in 0..BODIES {
        for a in 0..3 {
            grad_positions[3 * i + a] += v[cursor + a];
        }
        cursor += 3;
        for j in other_bodies(i) {
            let d = pair_delta(positions, i, j);
            let rho = norm3(&d);
            // Cotangent on d, accumulated over the raw block and the three scaled blocks.
            let mut gd = [v[cursor], v[cursor + 1], v[cursor + 2]];
            cursor += 3;
            for p in 1..=POWERS {
                let w = &v[cursor..cursor + 3];
                cursor += 3;
                let rp = rho.powi(p as i32);
                let wd = w[0] * d[0] + w[1] * d[1] + w[2] * d[2];
                let radial = p as f64 * wd / (rp * rho * rho);
                for a in 0..3 {
                    gd[a] += w[a] / rp - radial * d[a];
                }
            }
            for a in 0..3 {
                grad_positions[3 * i + a] += gd[a];
                grad_positions[3 * j + a] -= gd[a];
            }
        }
    }
}
