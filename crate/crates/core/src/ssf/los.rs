//! LOS direction and the rotation of NLOS directions onto it.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::LinkGeometry;

/// LOS departure and arrival directions, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosAngles {
    pub az_d: f64,
    pub az_a: f64,
    pub el_d: f64,
    pub el_a: f64,
}

// atan2(|dz|, d2d) with the sign of dz, so el(-dz) == -el(dz) bit for bit
fn elevation(dz: f64, d_2d: f64) -> f64 {
    dz.abs().atan2(d_2d).copysign(dz)
}

/// Departure direction from TX toward RX and arrival direction at RX back
/// toward TX. The arrival azimuth equals the departure azimuth plus π in
/// `(−π, π]`; it is computed from the reversed difference vector so that
/// swapping TX and RX exchanges the pairs exactly.
pub fn los_angles(geom: &LinkGeometry) -> Result<LosAngles> {
    geom.validate()?;
    let (tx, rx) = (&geom.tx, &geom.rx);
    let d_2d = geom.distance_2d();
    Ok(LosAngles {
        az_d: (rx.y - tx.y).atan2(rx.x - tx.x),
        az_a: (tx.y - rx.y).atan2(tx.x - rx.x),
        el_d: elevation(rx.z - tx.z, d_2d),
        el_a: elevation(tx.z - rx.z, d_2d),
    })
}

/// Rotation about the y-axis by the LOS elevation followed by rotation about
/// the z-axis by the LOS azimuth. Maps `(1, 0, 0)` onto the LOS direction.
pub fn rotation_matrix(los_az: f64, los_el: f64) -> [[f64; 3]; 3] {
    let (sp, cp) = los_az.sin_cos();
    let (st, ct) = los_el.sin_cos();
    [
        [ct * cp, -sp, -st * cp],
        [ct * sp, cp, -st * sp],
        [st, 0.0, ct],
    ]
}

pub fn to_unit_vector(az: f64, el: f64) -> [f64; 3] {
    let (sp, cp) = az.sin_cos();
    let (st, ct) = el.sin_cos();
    [ct * cp, ct * sp, st]
}

/// Azimuth in `(−π, π]` and elevation in `[−π/2, π/2]` of a vector.
pub fn to_spherical(c: [f64; 3]) -> (f64, f64) {
    let az = c[1].atan2(c[0]);
    let el = c[2].atan2((c[0] * c[0] + c[1] * c[1]).sqrt());
    (az, el)
}

/// Rotate every `(az, el)` pair by the LOS rotation and convert back.
pub fn rotate_to_los(az: &[f64], el: &[f64], los_az: f64, los_el: f64) -> (Vec<f64>, Vec<f64>) {
    let r = rotation_matrix(los_az, los_el);
    az.iter()
        .zip(el)
        .map(|(&a, &e)| {
            let c = to_unit_vector(a, e);
            let rc = [
                r[0][0] * c[0] + r[0][1] * c[1] + r[0][2] * c[2],
                r[1][0] * c[0] + r[1][1] * c[1] + r[1][2] * c[2],
                r[2][0] * c[0] + r[2][1] * c[1] + r[2][2] * c[2],
            ];
            to_spherical(rc)
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Position;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn umi_geometry_example() {
        let g = LinkGeometry::new(Position::new(0.0, 0.0, 10.0), Position::new(100.0, 0.0, 1.5)).unwrap();
        let los = los_angles(&g).unwrap();
        assert_eq!(los.az_d, 0.0);
        assert_eq!(los.az_a, PI);
        assert_abs_diff_eq!(los.el_d, (-8.5f64).atan2(100.0), epsilon = 1e-16);
        assert_abs_diff_eq!(los.el_d, -0.084_796_174_523_202_98, epsilon = 1e-12);
        assert_eq!(los.el_a, -los.el_d);
    }

    #[test]
    fn due_north_same_height() {
        let g = LinkGeometry::new(Position::new(5.0, 5.0, 2.0), Position::new(5.0, 50.0, 2.0)).unwrap();
        let los = los_angles(&g).unwrap();
        assert_abs_diff_eq!(los.az_d, FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(los.el_d, 0.0);
        assert_abs_diff_eq!(los.az_a, -FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn swap_exchanges_pairs() {
        let g = LinkGeometry::new(Position::new(-3.2, 7.7, 25.0), Position::new(40.1, -12.6, 1.5)).unwrap();
        let a = los_angles(&g).unwrap();
        let b = los_angles(&g.swapped()).unwrap();
        assert_eq!(a.az_d.to_bits(), b.az_a.to_bits());
        assert_eq!(a.az_a.to_bits(), b.az_d.to_bits());
        assert_eq!(a.el_d.to_bits(), b.el_a.to_bits());
        assert_eq!(a.el_a.to_bits(), b.el_d.to_bits());
    }

    #[test]
    fn zero_rotation_is_identity() {
        let az = [0.3, -2.0, 1.0];
        let el = [0.1, -0.4, 1.2];
        let (a, e) = rotate_to_los(&az, &el, 0.0, 0.0);
        for i in 0..3 {
            assert_abs_diff_eq!(a[i], az[i], epsilon = 1e-15);
            assert_abs_diff_eq!(e[i], el[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn origin_maps_to_los_direction() {
        let (a, e) = rotate_to_los(&[0.0], &[0.0], -2.1, 0.35);
        assert_abs_diff_eq!(a[0], -2.1, epsilon = 1e-15);
        assert_abs_diff_eq!(e[0], 0.35, epsilon = 1e-15);
    }

    #[test]
    fn matrix_is_orthonormal() {
        let r = rotation_matrix(0.7, -0.4);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                assert_abs_diff_eq!(dot, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-15);
            }
        }
    }
}
