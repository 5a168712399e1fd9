//! Small published designs and construction inputs, kept as regression
//! fixtures. Matrices are given row by row unless noted.

use crate::array::IntegerMatrix;

fn cols(n: usize, columns: &[&[usize]]) -> IntegerMatrix {
    IntegerMatrix::from_columns(n, columns).expect("fixture shape")
}

fn rows(rows: &[&[usize]]) -> IntegerMatrix {
    IntegerMatrix::from_rows(rows).expect("fixture shape")
}

/// D1 of the 8-run DCD with two 2-level factors.
pub fn dcd8_d1() -> IntegerMatrix {
    cols(8, &[&[0, 1, 0, 1, 0, 1, 0, 1], &[0, 1, 1, 0, 0, 1, 1, 0]])
}

/// D2 of the 8-run DCD: four quantitative columns.
pub fn dcd8_d2() -> IntegerMatrix {
    cols(
        8,
        &[
            &[1, 0, 6, 7, 4, 5, 3, 2],
            &[0, 4, 2, 6, 5, 1, 7, 3],
            &[0, 4, 6, 2, 5, 1, 3, 7],
            &[1, 0, 2, 3, 4, 5, 6, 7],
        ],
    )
}

/// `floor(D2 / 2)` of the 8-run DCD.
pub fn dcd8_d2_collapsed() -> IntegerMatrix {
    cols(
        8,
        &[
            &[0, 0, 3, 3, 2, 2, 1, 1],
            &[0, 2, 1, 3, 2, 0, 3, 1],
            &[0, 2, 3, 1, 2, 0, 1, 3],
            &[0, 0, 1, 1, 2, 2, 3, 3],
        ],
    )
}

/// `floor(D2 / 4)` of the 8-run DCD.
pub fn dcd8_d2_collapsed_twice() -> IntegerMatrix {
    cols(
        8,
        &[
            &[0, 0, 1, 1, 1, 1, 0, 0],
            &[0, 1, 0, 1, 1, 0, 1, 0],
            &[0, 1, 1, 0, 1, 0, 0, 1],
            &[0, 0, 0, 0, 1, 1, 1, 1],
        ],
    )
}

/// D2 meeting the two-column condition but not the three-column one,
/// paired with [`dcd8_d1`].
pub fn counterexample_a_d2() -> IntegerMatrix {
    cols(8, &[&[1, 0, 6, 7, 3, 2, 4, 5], &[0, 4, 2, 6, 5, 1, 7, 3]])
}

/// D2 meeting the three-column condition but not the two-column one.
pub fn counterexample_b_d2() -> IntegerMatrix {
    cols(8, &[&[6, 0, 1, 4, 3, 5, 7, 2], &[2, 4, 0, 5, 7, 1, 6, 3]])
}

/// The three OA(9, 4, 3, 2) in block form used for the 27-run,
/// three-factor construction by stacking.
pub fn dcd27_stack_arrays() -> [IntegerMatrix; 3] {
    [
        rows(&[
            &[0, 0, 0, 0],
            &[1, 1, 2, 0],
            &[2, 2, 1, 0],
            &[0, 2, 2, 1],
            &[1, 0, 1, 1],
            &[2, 1, 0, 1],
            &[0, 1, 1, 2],
            &[1, 2, 0, 2],
            &[2, 0, 2, 2],
        ]),
        rows(&[
            &[0, 0, 1, 0],
            &[1, 1, 0, 0],
            &[2, 2, 2, 0],
            &[0, 2, 0, 1],
            &[1, 0, 2, 1],
            &[2, 1, 1, 1],
            &[0, 1, 2, 2],
            &[1, 2, 1, 2],
            &[2, 0, 0, 2],
        ]),
        rows(&[
            &[0, 0, 2, 0],
            &[1, 1, 1, 0],
            &[2, 2, 0, 0],
            &[0, 2, 1, 1],
            &[1, 0, 0, 1],
            &[2, 1, 2, 1],
            &[0, 1, 0, 2],
            &[1, 2, 2, 2],
            &[2, 0, 1, 2],
        ]),
    ]
}

/// `v_k` for the stacking construction, one per quantitative column.
pub const DCD27_STACK_V: [[usize; 3]; 3] = [[1, 2, 0], [0, 2, 1], [1, 0, 2]];

/// `w_kj`: column `k`, stacked block `j`.
pub const DCD27_STACK_W: [[[usize; 3]; 3]; 3] = [
    [[0, 1, 2], [1, 0, 2], [0, 2, 1]],
    [[1, 2, 0], [1, 0, 2], [0, 1, 2]],
    [[2, 0, 1], [0, 1, 2], [1, 0, 2]],
];

/// Columns of B produced by the stacking construction.
pub fn dcd27_stack_b() -> IntegerMatrix {
    cols(
        27,
        &[
            &[
                1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0,
            ],
            &[
                0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 2, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1,
            ],
            &[
                1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 2, 2, 2, 2, 2, 2, 2, 2,
            ],
        ],
    )
}

/// Columns of C produced by the stacking construction.
pub fn dcd27_stack_c() -> IntegerMatrix {
    cols(
        27,
        &[
            &[
                0, 0, 0, 1, 1, 1, 2, 2, 2, 1, 1, 1, 0, 0, 0, 2, 2, 2, 0, 0, 0, 2, 2, 2, 1, 1, 1,
            ],
            &[
                1, 1, 1, 2, 2, 2, 0, 0, 0, 1, 1, 1, 0, 0, 0, 2, 2, 2, 0, 0, 0, 1, 1, 1, 2, 2, 2,
            ],
            &[
                2, 2, 2, 0, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 1, 2, 2, 2, 1, 1, 1, 0, 0, 0, 2, 2, 2,
            ],
        ],
    )
}

/// Published D1 of the stacked 27-run design (strength 3).
pub fn dcd27_stack_d1() -> IntegerMatrix {
    cols(
        27,
        &[
            &[
                0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2,
            ],
            &[
                0, 1, 2, 2, 0, 1, 1, 2, 0, 0, 1, 2, 2, 0, 1, 1, 2, 0, 0, 1, 2, 2, 0, 1, 1, 2, 0,
            ],
            &[
                0, 2, 1, 2, 1, 0, 1, 0, 2, 1, 0, 2, 0, 2, 1, 2, 1, 0, 2, 1, 0, 1, 0, 2, 0, 2, 1,
            ],
        ],
    )
}

/// Published D2 of the stacked 27-run design.
pub fn dcd27_stack_d2() -> IntegerMatrix {
    cols(
        27,
        &[
            &[
                9, 10, 11, 13, 14, 12, 15, 16, 17, 22, 23, 21, 19, 18, 20, 24, 25, 26, 2, 0, 1, 7,
                8, 6, 4, 5, 3,
            ],
            &[
                3, 5, 4, 6, 7, 8, 0, 1, 2, 21, 22, 23, 19, 20, 18, 26, 24, 25, 11, 10, 9, 13, 14,
                12, 16, 15, 17,
            ],
            &[
                16, 17, 15, 10, 11, 9, 12, 13, 14, 1, 2, 0, 4, 5, 3, 8, 7, 6, 21, 22, 23, 19, 20,
                18, 24, 25, 26,
            ],
        ],
    )
}

/// B for the 27-run design built from copies of one array.
pub fn dcd27_copies_b() -> IntegerMatrix {
    cols(
        27,
        &[
            &[
                2, 0, 1, 2, 0, 1, 2, 0, 1, 0, 1, 2, 0, 1, 2, 0, 1, 2, 1, 2, 0, 1, 2, 0, 1, 2, 0,
            ],
            &[
                2, 1, 0, 0, 2, 1, 1, 0, 2, 0, 2, 1, 1, 0, 2, 2, 1, 0, 1, 0, 2, 2, 1, 0, 0, 2, 1,
            ],
            &[
                0, 2, 1, 2, 1, 0, 1, 0, 2, 1, 0, 2, 0, 2, 1, 2, 1, 0, 2, 1, 0, 1, 0, 2, 0, 2, 1,
            ],
        ],
    )
}

/// `w_k` for the copies construction.
pub const DCD27_COPIES_W: [[usize; 3]; 3] = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];

/// Published D2 of the 27-run copies design.
pub fn dcd27_copies_d2() -> IntegerMatrix {
    cols(
        27,
        &[
            &[
                19, 1, 9, 22, 3, 13, 25, 8, 17, 0, 11, 18, 5, 14, 21, 6, 16, 24, 10, 20, 2, 12, 23,
                4, 15, 26, 7,
            ],
            &[
                23, 12, 4, 7, 26, 17, 10, 1, 19, 3, 22, 14, 16, 8, 25, 18, 9, 0, 13, 5, 21, 24, 15,
                6, 2, 20, 11,
            ],
            &[
                8, 26, 17, 20, 10, 2, 13, 5, 21, 16, 7, 25, 1, 19, 11, 22, 14, 3, 24, 15, 6, 9, 0,
                18, 4, 23, 12,
            ],
        ],
    )
}

/// The 3-column A and 4-column B of the 8-run general construction, in
/// their printed column order.
pub fn dcd8_general_a() -> IntegerMatrix {
    cols(
        8,
        &[
            &[0, 0, 1, 1, 0, 0, 1, 1],
            &[0, 1, 0, 1, 0, 1, 0, 1],
            &[0, 1, 1, 0, 0, 1, 1, 0],
        ],
    )
}

pub fn dcd8_general_b() -> IntegerMatrix {
    cols(
        8,
        &[
            &[0, 0, 1, 1, 1, 1, 0, 0],
            &[0, 1, 0, 1, 1, 0, 1, 0],
            &[0, 1, 1, 0, 1, 0, 0, 1],
            &[0, 0, 0, 0, 1, 1, 1, 1],
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::level_collapse;

    #[test]
    fn collapsed_fixtures_agree() {
        assert_eq!(level_collapse(&dcd8_d2(), 2), dcd8_d2_collapsed());
        assert_eq!(level_collapse(&dcd8_d2(), 4), dcd8_d2_collapsed_twice());
    }

    #[test]
    fn stacked_d1_is_the_stack_minus_last_column() {
        let stacked = IntegerMatrix::vstack(&dcd27_stack_arrays()).unwrap();
        assert_eq!(stacked.select_columns(&[0, 1, 2]), dcd27_stack_d1());
    }
}
