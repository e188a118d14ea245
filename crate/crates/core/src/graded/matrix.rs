//! Matrices over the function algebra of a chart, and the Berezinian.

use alloc::format;
use alloc::vec::Vec;

use super::chart::{Chart, Parity};
use super::scalar::GradedScalar;
use crate::error::{Error, Result};

/// A matrix of [`GradedScalar`]s with a parity attached to every row and
/// column. It is *even* when entry `(i, j)` has parity `row_i + col_j`.
#[derive(Clone, PartialEq, Debug)]
pub struct SuperMatrix {
    chart: Chart,
    rows: Vec<Parity>,
    cols: Vec<Parity>,
    entries: Vec<Vec<GradedScalar>>,
}

impl SuperMatrix {
    pub fn new(
        chart: &Chart,
        rows: Vec<Parity>,
        cols: Vec<Parity>,
        entries: Vec<Vec<GradedScalar>>,
    ) -> Result<Self> {
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::Dimension(format!(
                "matrix shape does not match {}x{} parity layout",
                rows.len(),
                cols.len()
            )));
        }
        if entries.iter().flatten().any(|e| e.chart() != chart) {
            return Err(Error::ChartMismatch);
        }
        Ok(SuperMatrix {
            chart: chart.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn identity(chart: &Chart, parities: &[Parity]) -> Self {
        let n = parities.len();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            GradedScalar::one(chart)
                        } else {
                            GradedScalar::zero(chart)
                        }
                    })
                    .collect()
            })
            .collect();
        SuperMatrix {
            chart: chart.clone(),
            rows: parities.to_vec(),
            cols: parities.to_vec(),
            entries,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_parities(&self) -> &[Parity] {
        &self.rows
    }

    pub fn col_parities(&self) -> &[Parity] {
        &self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GradedScalar {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<GradedScalar>] {
        &self.entries
    }

    pub fn is_even(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, e)| e.has_parity(self.rows[i] + self.cols[j]))
        })
    }

    pub fn mul(&self, other: &SuperMatrix) -> Result<SuperMatrix> {
        if self.ncols() != other.nrows() || self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        if self.chart != other.chart {
            return Err(Error::ChartMismatch);
        }
        let entries = (0..self.nrows())
            .map(|i| {
                (0..other.ncols())
                    .map(|j| {
                        let mut acc = GradedScalar::zero(&self.chart);
                        for k in 0..self.ncols() {
                            acc = &acc + &(&self.entries[i][k] * &other.entries[k][j]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(SuperMatrix {
            chart: self.chart.clone(),
            rows: self.rows.clone(),
            cols: other.cols.clone(),
            entries,
        })
    }

    /// Left inverse `K` with `K · self = 1`, by Gauss–Jordan elimination on
    /// `[self | 1]` with row operations acting from the left. A pivot is any
    /// entry whose body is a nonzero rational function.
    pub fn inverse(&self) -> Result<SuperMatrix> {
        let n = self.nrows();
        if n != self.ncols() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix is not square",
                n,
                self.ncols()
            )));
        }
        let mut a = self.entries.clone();
        let mut inv = SuperMatrix::identity(&self.chart, &self.rows).entries;
        for k in 0..n {
            let p = (k..n)
                .find(|&r| !a[r][k].body().is_zero())
                .ok_or(Error::ZeroBody)?;
            a.swap(k, p);
            inv.swap(k, p);
            let piv_inv = a[k][k].inverse()?;
            for j in 0..n {
                a[k][j] = &piv_inv * &a[k][j];
                inv[k][j] = &piv_inv * &inv[k][j];
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let factor = a[i][k].clone();
                for j in 0..n {
                    a[i][j] = &a[i][j] - &(&factor * &a[k][j]);
                    inv[i][j] = &inv[i][j] - &(&factor * &inv[k][j]);
                }
            }
        }
        // rows of the inverse are indexed like the columns of self
        Ok(SuperMatrix {
            chart: self.chart.clone(),
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            entries: inv,
        })
    }

    /// Solve `self · v = rhs` for the column `v`.
    pub fn solve(&self, rhs: &[GradedScalar]) -> Result<Vec<GradedScalar>> {
        if rhs.len() != self.nrows() {
            return Err(Error::Dimension(format!(
                "{} right-hand sides for {} rows",
                rhs.len(),
                self.nrows()
            )));
        }
        let inv = self.inverse()?;
        Ok((0..inv.nrows())
            .map(|i| {
                let mut acc = GradedScalar::zero(&self.chart);
                for (k, r) in rhs.iter().enumerate() {
                    acc = &acc + &(&inv.entries[i][k] * r);
                }
                acc
            })
            .collect())
    }

    fn block(&self, rp: Parity, cp: Parity) -> Vec<Vec<GradedScalar>> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(i, _)| self.rows[*i] == rp)
            .map(|(_, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| self.cols[*j] == cp)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect()
    }

    /// `Ber = det(A − B D⁻¹ C) · det(D)⁻¹` for an even square super matrix.
    pub fn berezinian(&self) -> Result<GradedScalar> {
        let count = |ps: &[Parity], p: Parity| ps.iter().filter(|&&q| q == p).count();
        if count(&self.rows, Parity::Even) != count(&self.cols, Parity::Even)
            || count(&self.rows, Parity::Odd) != count(&self.cols, Parity::Odd)
        {
            return Err(Error::Dimension(alloc::string::String::from(
                "Berezinian needs a square super matrix",
            )));
        }
        if !self.is_even() {
            return Err(Error::Precondition(alloc::string::String::from(
                "Berezinian needs an even super matrix",
            )));
        }
        let chart = &self.chart;
        let a = self.block(Parity::Even, Parity::Even);
        let b = self.block(Parity::Even, Parity::Odd);
        let c = self.block(Parity::Odd, Parity::Even);
        let d = self.block(Parity::Odd, Parity::Odd);
        let d_inv = inverse_by_series(chart, &d)?;
        let n_odd = d.len();
        let n_even = a.len();
        let bdc = mat_mul(chart, &mat_mul(chart, &b, &d_inv, n_odd), &c, n_even);
        let schur: Vec<Vec<GradedScalar>> = a
            .iter()
            .zip(&bdc)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
            .collect();
        let det_schur = determinant(chart, &schur);
        let det_d = determinant(chart, &d);
        Ok(&det_schur * &det_d.inverse()?)
    }
}

fn mat_mul(
    chart: &Chart,
    x: &[Vec<GradedScalar>],
    y: &[Vec<GradedScalar>],
    ncols: usize,
) -> Vec<Vec<GradedScalar>> {
    let inner = y.len();
    x.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| {
                    let mut acc = GradedScalar::zero(chart);
                    for k in 0..inner {
                        acc = &acc + &(&row[k] * &y[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `D⁻¹ = Σ_k (−D₀⁻¹N)^k D₀⁻¹` where `D₀` is the body matrix and `N` the
/// nilpotent remainder; the series terminates.
fn inverse_by_series(chart: &Chart, d: &[Vec<GradedScalar>]) -> Result<Vec<Vec<GradedScalar>>> {
    let n = d.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let body: Vec<Vec<GradedScalar>> = d
        .iter()
        .map(|r| {
            r.iter()
                .map(|e| GradedScalar::from_ratfunc(chart, e.body()))
                .collect()
        })
        .collect();
    let nil: Vec<Vec<GradedScalar>> = d
        .iter()
        .zip(&body)
        .map(|(r, b)| r.iter().zip(b).map(|(e, f)| e - f).collect())
        .collect();
    let evens = alloc::vec![Parity::Even; n];
    let body_inv = SuperMatrix::new(chart, evens.clone(), evens, body)?
        .inverse()?
        .entries;
    let step: Vec<Vec<GradedScalar>> = mat_mul(chart, &body_inv, &nil, n)
        .into_iter()
        .map(|r| r.into_iter().map(|e| -e).collect())
        .collect();
    let mut sum = body_inv.clone();
    let mut term = body_inv;
    loop {
        term = mat_mul(chart, &step, &term, n);
        if term.iter().flatten().all(|e| e.is_zero()) {
            break;
        }
        sum = sum
            .iter()
            .zip(&term)
            .map(|(r, t)| r.iter().zip(t).map(|(a, b)| a + b).collect())
            .collect();
    }
    Ok(sum)
}

/// Determinant of a matrix with pairwise commuting (even) entries by
/// cofactor expansion along the first row. The empty matrix has
/// determinant 1.
pub fn determinant(chart: &Chart, m: &[Vec<GradedScalar>]) -> GradedScalar {
    let n = m.len();
    match n {
        0 => GradedScalar::one(chart),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = GradedScalar::zero(chart);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<GradedScalar>> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let t = &m[0][j] * &determinant(chart, &minor);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{ratfunc::RatFunc, Q};
    use num_bigint::BigInt;

    fn chart() -> Chart {
        Chart::new(&[
            ("x", Parity::Even),
            ("y", Parity::Even),
            ("a", Parity::Odd),
            ("b", Parity::Odd),
        ])
        .unwrap()
    }

    fn v(c: &Chart, n: &str) -> GradedScalar {
        GradedScalar::named(c, n).unwrap()
    }

    fn int(c: &Chart, n: i64) -> GradedScalar {
        GradedScalar::int(c, n)
    }

    #[test]
    fn even_matrix_berezinian_is_determinant() {
        let c = chart();
        let m = SuperMatrix::new(
            &c,
            alloc::vec![Parity::Even; 2],
            alloc::vec![Parity::Even; 2],
            alloc::vec![
                alloc::vec![v(&c, "x"), int(&c, 2)],
                alloc::vec![int(&c, 3), v(&c, "y")]
            ],
        )
        .unwrap();
        let expect = &(&v(&c, "x") * &v(&c, "y")) - &int(&c, 6);
        assert_eq!(m.berezinian().unwrap(), expect);
    }

    #[test]
    fn odd_block_berezinian_is_inverse_determinant() {
        let c = chart();
        let m = SuperMatrix::new(
            &c,
            alloc::vec![Parity::Odd; 2],
            alloc::vec![Parity::Odd; 2],
            alloc::vec![
                alloc::vec![v(&c, "x"), int(&c, 1)],
                alloc::vec![int(&c, 0), int(&c, 2)]
            ],
        )
        .unwrap();
        let expect = v(&c, "x").scale_int(2).inverse().unwrap();
        assert_eq!(m.berezinian().unwrap(), expect);
    }

    #[test]
    fn one_one_berezinian_by_hand() {
        // [[a, β], [γ, d]] → a/d − βγ/d²
        let c = chart();
        let a = &v(&c, "x") + &int(&c, 1);
        let d = &v(&c, "y") + &int(&c, 2);
        let beta = &v(&c, "a") * &v(&c, "x");
        let gamma = v(&c, "b");
        let m = SuperMatrix::new(
            &c,
            alloc::vec![Parity::Even, Parity::Odd],
            alloc::vec![Parity::Even, Parity::Odd],
            alloc::vec![
                alloc::vec![a.clone(), beta.clone()],
                alloc::vec![gamma.clone(), d.clone()]
            ],
        )
        .unwrap();
        let dinv = d.inverse().unwrap();
        let expect = &(&a * &dinv) - &(&(&beta * &gamma) * &(&dinv * &dinv));
        assert_eq!(m.berezinian().unwrap(), expect);
    }

    #[test]
    fn inverse_of_mixed_matrix() {
        let c = chart();
        let m = SuperMatrix::new(
            &c,
            alloc::vec![Parity::Even, Parity::Odd],
            alloc::vec![Parity::Even, Parity::Odd],
            alloc::vec![
                alloc::vec![&v(&c, "x") + &int(&c, 1), v(&c, "a")],
                alloc::vec![v(&c, "b"), &int(&c, 3) + &(&v(&c, "a") * &v(&c, "b"))],
            ],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        let id = SuperMatrix::identity(&c, &[Parity::Even, Parity::Odd]);
        assert_eq!(inv.mul(&m).unwrap(), id);
        assert_eq!(m.mul(&inv).unwrap(), id);
    }

    #[test]
    fn singular_body_is_rejected() {
        let c = chart();
        let m = SuperMatrix::new(
            &c,
            alloc::vec![Parity::Odd],
            alloc::vec![Parity::Odd],
            alloc::vec![alloc::vec![&v(&c, "a") * &v(&c, "b")]],
        )
        .unwrap();
        assert_eq!(m.berezinian(), Err(Error::ZeroBody));
        let _ = RatFunc::constant(2, Q::from_integer(BigInt::from(1)));
    }
}
