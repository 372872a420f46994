//! The fans shipped with the tool, as in-memory values.

use crate::fan::Fan;

fn build(name: &str, dim: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Fan {
    Fan::new(
        dim,
        rays.iter().map(|r| r.to_vec()).collect(),
        cones.iter().map(|c| c.to_vec()).collect(),
    )
    .expect("fixture is well formed")
    .with_name(name)
}

/// Projective space `P^3`.
pub fn p3() -> Fan {
    build(
        "p3",
        3,
        &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]],
        &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]],
    )
}

/// Weighted projective space `P(1,1,1,3)`; the last variable has weight 3.
pub fn p111_3() -> Fan {
    build(
        "p111_3",
        3,
        &[&[1, 0, 0], &[0, 1, 0], &[-1, -1, -3], &[0, 0, 1]],
        &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]],
    )
}

/// `P^1 x P^1 x P^1`, rays ordered `e1, -e1, e2, -e2, e3, -e3`.
pub fn p1p1p1() -> Fan {
    let mut cones: Vec<Vec<usize>> = Vec::new();
    for a in [0, 1] {
        for b in [2, 3] {
            for c in [4, 5] {
                cones.push(vec![a, b, c]);
            }
        }
    }
    let cones: Vec<&[usize]> = cones.iter().map(|c| c.as_slice()).collect();
    build(
        "p1p1p1",
        3,
        &[
            &[1, 0, 0],
            &[-1, 0, 0],
            &[0, 1, 0],
            &[0, -1, 0],
            &[0, 0, 1],
            &[0, 0, -1],
        ],
        &cones,
    )
}

/// Hirzebruch surface `F_2` times `P^1`; not Fano.
pub fn f2xp1() -> Fan {
    build(
        "f2xp1",
        3,
        &[
            &[1, 0, 0],
            &[0, 1, 0],
            &[-1, 2, 0],
            &[0, -1, 0],
            &[0, 0, 1],
            &[0, 0, -1],
        ],
        &[
            &[0, 1, 4],
            &[1, 2, 4],
            &[2, 3, 4],
            &[0, 3, 4],
            &[0, 1, 5],
            &[1, 2, 5],
            &[2, 3, 5],
            &[0, 3, 5],
        ],
    )
}

/// Projective space `P^4`.
pub fn p4() -> Fan {
    build(
        "p4",
        4,
        &[
            &[1, 0, 0, 0],
            &[0, 1, 0, 0],
            &[0, 0, 1, 0],
            &[0, 0, 0, 1],
            &[-1, -1, -1, -1],
        ],
        &[
            &[0, 1, 2, 3],
            &[0, 1, 2, 4],
            &[0, 1, 3, 4],
            &[0, 2, 3, 4],
            &[1, 2, 3, 4],
        ],
    )
}

/// Every shipped fixture, in a fixed order.
pub fn all() -> Vec<Fan> {
    vec![p3(), p111_3(), p1p1p1(), f2xp1(), p4()]
}
