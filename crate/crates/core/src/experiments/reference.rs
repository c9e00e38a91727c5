//! Reference iteration counts and error tables for the benchmark sweeps.
//!
//! Count rows follow the variant order `D, U, L, D^, U^, L^` (hat = inexact
//! inner solves) and the point order of [`super::bench::TableId::points`].

use super::bench::TableId;

pub const VARIANT_ORDER: [&str; 6] = ["D", "U", "L", "D^", "U^", "L^"];

const T3: [[u32; 12]; 6] = [
    [21, 28, 38, 40, 40, 38, 38, 38, 38, 36, 33, 29],
    [12, 13, 14, 15, 15, 15, 14, 14, 14, 13, 11, 8],
    [13, 14, 14, 15, 15, 15, 14, 14, 14, 13, 11, 8],
    [29, 38, 44, 46, 44, 43, 44, 44, 44, 45, 44, 40],
    [16, 18, 23, 22, 23, 21, 23, 21, 20, 19, 15, 12],
    [20, 22, 21, 22, 20, 20, 21, 21, 20, 16, 15, 12],
];

const T3B: [[u32; 25]; 6] = [
    [35, 39, 40, 38, 35, 32, 39, 40, 40, 39, 34, 39, 40, 40, 39, 33, 37, 38, 38, 38, 33, 38, 38, 38, 38],
    [17, 16, 15, 14, 12, 17, 16, 15, 14, 13, 17, 16, 15, 14, 14, 18, 16, 15, 14, 14, 17, 16, 15, 14, 14],
    [16, 15, 15, 14, 12, 16, 15, 15, 14, 13, 16, 16, 15, 14, 13, 15, 15, 15, 14, 13, 16, 16, 15, 14, 13],
    [39, 44, 46, 47, 46, 39, 44, 45, 45, 45, 38, 44, 45, 46, 43, 38, 45, 45, 44, 43, 39, 44, 45, 45, 43],
    [22, 20, 20, 20, 20, 22, 21, 20, 20, 20, 23, 21, 19, 19, 19, 23, 20, 19, 19, 19, 22, 19, 19, 19, 19],
    [20, 21, 19, 19, 16, 21, 20, 19, 18, 17, 20, 20, 19, 18, 17, 19, 20, 19, 18, 17, 20, 20, 19, 18, 18],
];

const T4: [[u32; 12]; 6] = [
    [4, 4, 5, 14, 21, 25, 13, 13, 13, 10, 9, 6],
    [2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2],
    [3, 3, 4, 4, 3, 3, 5, 5, 5, 4, 4, 3],
    [5, 6, 10, 29, 36, 38, 23, 23, 23, 20, 18, 11],
    [4, 4, 4, 6, 9, 16, 7, 7, 7, 5, 5, 5],
    [5, 5, 6, 8, 8, 11, 9, 9, 9, 7, 7, 7],
];

const T5: [[u32; 25]; 6] = [
    [15, 15, 12, 10, 8, 22, 20, 18, 16, 14, 25, 23, 21, 20, 18, 25, 25, 24, 22, 21, 26, 26, 26, 25, 23],
    [2, 2, 2, 2, 2, 3, 2, 2, 2, 2, 3, 2, 2, 2, 2, 3, 2, 2, 2, 2, 3, 2, 2, 2, 2],
    [4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 3, 3, 4, 4, 4, 3, 3, 3, 3, 3, 3, 3],
    [22, 23, 21, 20, 17, 29, 33, 36, 33, 30, 30, 33, 35, 36, 37, 31, 38, 39, 34, 36, 31, 38, 39, 38, 36],
    [7, 6, 5, 5, 5, 10, 8, 7, 6, 7, 11, 11, 9, 8, 7, 13, 12, 15, 12, 9, 14, 13, 14, 15, 13],
    [7, 7, 7, 6, 7, 9, 8, 8, 7, 8, 11, 10, 9, 8, 8, 11, 12, 11, 10, 8, 10, 11, 11, 10, 11],
];

/// Reference counts, `[variant][point]`.
pub fn reference_counts(table: TableId) -> Vec<Vec<u32>> {
    fn rows<const N: usize>(t: &[[u32; N]; 6]) -> Vec<Vec<u32>> {
        t.iter().map(|r| r.to_vec()).collect()
    }
    match table {
        TableId::KNu => rows(&T3),
        TableId::HTau => rows(&T3B),
        TableId::CantileverKNu => rows(&T4),
        TableId::CantileverHTau => rows(&T5),
    }
}

/// Manufactured-case errors `(energy, pressure)` on `N = 4, 8, 16, 32, 64`.
pub struct ErrorRow {
    pub permeability: f64,
    pub energy: [f64; 5],
    pub pressure: [f64; 5],
}

pub const ERROR_SIZES: [usize; 5] = [4, 8, 16, 32, 64];

pub const STABILIZED_ERRORS: [ErrorRow; 4] = [
    ErrorRow {
        permeability: 1e-4,
        energy: [0.0369, 0.0183, 0.0093, 0.0047, 0.0024],
        pressure: [0.0511, 0.0185, 0.0034, 0.0006, 0.0001],
    },
    ErrorRow {
        permeability: 1e-6,
        energy: [0.0377, 0.0189, 0.0091, 0.0045, 0.0022],
        pressure: [0.0593, 0.0346, 0.0155, 0.0062, 0.0019],
    },
    ErrorRow {
        permeability: 1e-8,
        energy: [0.0377, 0.0189, 0.0092, 0.0045, 0.0023],
        pressure: [0.0594, 0.0349, 0.0162, 0.0074, 0.0035],
    },
    ErrorRow {
        permeability: 1e-10,
        energy: [0.0377, 0.0189, 0.0092, 0.0045, 0.0023],
        pressure: [0.0594, 0.0349, 0.0162, 0.0074, 0.0035],
    },
];

pub const UNSTABILIZED_ERRORS: [ErrorRow; 4] = [
    ErrorRow {
        permeability: 1e-4,
        energy: [0.0509, 0.0270, 0.0135, 0.0068, 0.0034],
        pressure: [0.1160, 0.0535, 0.0088, 0.0015, 0.0003],
    },
    ErrorRow {
        permeability: 1e-6,
        energy: [0.0570, 0.0543, 0.0314, 0.0081, 0.0034],
        pressure: [0.1587, 0.3277, 0.3199, 0.0763, 0.0099],
    },
    ErrorRow {
        permeability: 1e-8,
        energy: [0.0571, 0.0571, 0.0565, 0.0478, 0.0169],
        pressure: [0.1591, 0.3553, 0.7157, 1.1509, 0.6537],
    },
    ErrorRow {
        permeability: 1e-10,
        energy: [0.0571, 0.0571, 0.0571, 0.0570, 0.0550],
        pressure: [0.1588, 0.3550, 0.7271, 1.4616, 2.9182],
    },
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_match_sweeps() {
        for t in TableId::ALL {
            let r = reference_counts(t);
            assert_eq!(r.len(), 6);
            assert!(r.iter().all(|row| row.len() == t.points().len()));
        }
    }
}
