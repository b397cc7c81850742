//! Membership predicates for `Sp(2n, Z)` and `SO(4, Z)` and the entry/minor
//! relations they imply at rank 4.
//!
//! `SO(4, Z)` is finite: an integral matrix with orthonormal columns is a
//! signed permutation matrix.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::matrix::{minor_digits, IntMatrix, Matrix};
use crate::weyl::Permutation;
use crate::{Error, Result};

/// `J = [[0, I_n], [-I_n, 0]]` of size `2n`.
pub fn symplectic_form(n: usize) -> IntMatrix {
    Matrix::from_fn(2 * n, |r, c| {
        if c == r + n {
            BigInt::one()
        } else if r == c + n {
            -BigInt::one()
        } else {
            BigInt::zero()
        }
    })
}

/// `Aᵀ J A = J`.
pub fn is_symplectic(a: &IntMatrix) -> Result<bool> {
    let size = a.size();
    if !size.is_multiple_of(2) {
        return Err(Error::OddSize(size));
    }
    let j = symplectic_form(size / 2);
    Ok(IntMatrix::product([&a.transpose(), &j, a])? == j)
}

/// `M_{13,J} + M_{24,J} - J_{j k}` for the six column pairs
/// `J = {j, k}`, in the order `12, 34, 13, 14, 23, 24`.
pub fn sp4_minor_relations(a: &IntMatrix) -> Result<[(&'static str, BigInt); 6]> {
    if a.size() != 4 {
        return Err(Error::BadRank(a.size()));
    }
    let target = |cols: &str| -> BigInt {
        match cols {
            "13" | "24" => BigInt::one(),
            _ => BigInt::zero(),
        }
    };
    Ok(["12", "34", "13", "14", "23", "24"].map(|cols| {
        let v = minor_digits(a, "13", cols) + minor_digits(a, "24", cols) - target(cols);
        (cols, v)
    }))
}

/// Residuals of `AᵀA = I` and `det A = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalReport {
    /// `Σ_i A_ij² - 1` per column.
    pub column_norms: Vec<BigInt>,
    /// `Σ_i A_ij A_ik` for `j < k`.
    pub column_products: Vec<((usize, usize), BigInt)>,
    /// `det A - 1`.
    pub det: BigInt,
}

impl OrthogonalReport {
    pub fn all_zero(&self) -> bool {
        self.column_norms.iter().all(Zero::is_zero)
            && self.column_products.iter().all(|(_, v)| v.is_zero())
            && self.det.is_zero()
    }
}

pub fn so4_relations(a: &IntMatrix) -> Result<OrthogonalReport> {
    if a.size() != 4 {
        return Err(Error::BadRank(a.size()));
    }
    let col_dot = |j: usize, k: usize| -> BigInt { (0..4).map(|i| &a[(i, j)] * &a[(i, k)]).sum() };
    let mut column_products = Vec::new();
    for j in 0..4 {
        for k in j + 1..4 {
            column_products.push(((j + 1, k + 1), col_dot(j, k)));
        }
    }
    Ok(OrthogonalReport {
        column_norms: (0..4).map(|j| col_dot(j, j) - BigInt::one()).collect(),
        column_products,
        det: a.det() - BigInt::one(),
    })
}

/// All `2^n n!` signed permutation matrices of size `n`.
pub fn signed_permutation_matrices(n: usize) -> Vec<IntMatrix> {
    let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                (0..n)
                    .filter(|v| !p.contains(v))
                    .map(|v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let mut out = Vec::new();
    for p in perms {
        for signs in 0u32..(1 << n) {
            out.push(Matrix::from_fn(n, |r, c| {
                if p[r] != c {
                    BigInt::zero()
                } else if signs >> r & 1 == 1 {
                    -BigInt::one()
                } else {
                    BigInt::one()
                }
            }));
        }
    }
    out
}

/// `diag(P, P^{-T})` for `P ∈ GL2(Z)`, `[[I, B], [0, I]]` and
/// `[[I, 0], [C, I]]` for symmetric `B, C`, and `J`: each is symplectic.
pub fn sp4_generator<R: Rng + ?Sized>(rng: &mut R) -> IntMatrix {
    let k = |rng: &mut R| BigInt::from(rng.gen_range(-2i64..=2));
    match rng.gen_range(0..4) {
        0 => {
            // P = elementary or swap; P^{-T} written out
            let t = k(rng);
            let (p, pit) = if rng.gen_bool(0.5) {
                (
                    [[BigInt::one(), t.clone()], [BigInt::zero(), BigInt::one()]],
                    [[BigInt::one(), BigInt::zero()], [-t, BigInt::one()]],
                )
            } else {
                (
                    [
                        [BigInt::zero(), BigInt::one()],
                        [-BigInt::one(), BigInt::zero()],
                    ],
                    [
                        [BigInt::zero(), BigInt::one()],
                        [-BigInt::one(), BigInt::zero()],
                    ],
                )
            };
            Matrix::from_fn(4, |r, c| match (r < 2, c < 2) {
                (true, true) => p[r][c].clone(),
                (false, false) => pit[r - 2][c - 2].clone(),
                _ => BigInt::zero(),
            })
        }
        kind @ (1 | 2) => {
            let (a, b, d) = (k(rng), k(rng), k(rng));
            let sym = [[a, b.clone()], [b, d]];
            let mut m = IntMatrix::identity(4);
            for r in 0..2 {
                for c in 0..2 {
                    if kind == 1 {
                        m[(r, c + 2)] = sym[r][c].clone();
                    } else {
                        m[(r + 2, c)] = sym[r][c].clone();
                    }
                }
            }
            m
        }
        _ => symplectic_form(2),
    }
}

/// A product of `len` random generators.
pub fn random_symplectic_word<R: Rng + ?Sized>(len: usize, rng: &mut R) -> IntMatrix {
    let factors: Vec<IntMatrix> = (0..len).map(|_| sp4_generator(rng)).collect();
    IntMatrix::product(&factors).unwrap_or_else(|_| IntMatrix::identity(4))
}

/// A random signed permutation matrix of size `n`.
pub fn random_signed_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> IntMatrix {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    let p = Permutation::new(images.iter().map(|v| v + 1).collect()).expect("shuffled identity");
    let mut m = p.to_matrix();
    for r in 0..n {
        if rng.gen_bool(0.5) {
            for c in 0..n {
                m[(r, c)] = -m[(r, c)].clone();
            }
        }
    }
    m
}
