//! Right nullspace of a matrix over ℚ[m]. The default route evaluates at
//! integer points, solves over ℚ and reconstructs rational functions of
//! `m`; a fraction-free elimination over ℚ[m] is kept as a second route.

use num_traits::Zero;

use super::poly::Poly;
use super::rational::{int, Rational};

/// Univariate rational function, used only during back substitution.
#[derive(Clone, Debug)]
struct Frac {
    num: Poly,
    den: Poly,
}

impl Frac {
    fn from_poly(p: Poly) -> Self {
        Frac { num: p, den: Poly::one() }
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Frac { num, den: Poly::one() };
        }
        let g = Poly::gcd(&num, &den);
        let num = num.div_exact(&g).expect("gcd divides");
        let den = den.div_exact(&g).expect("gcd divides");
        let c = den.leading().recip();
        Frac { num: num.scale(&c), den: den.scale(&c) }
    }

    fn mul_poly(&self, p: &Poly) -> Frac {
        Frac::reduce(&self.num * p, self.den.clone())
    }

    fn add(&self, o: &Frac) -> Frac {
        if self.den == o.den {
            return Frac::reduce(&self.num + &o.num, self.den.clone());
        }
        Frac::reduce(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }
}

fn row_primitive(row: &mut [Poly]) {
    let mut g = Poly::zero();
    for e in row.iter() {
        if e.is_zero() {
            continue;
        }
        g = if g.is_zero() { e.primitive() } else { Poly::gcd(&g, e) };
    }
    if g.is_zero() {
        return;
    }
    // polynomial gcd is monic; fold in the rational content as well
    let mut contents = Vec::new();
    for e in row.iter() {
        if !e.is_zero() {
            contents.push(e.div_exact(&g).expect("gcd divides").content());
        }
    }
    let rc = Poly::new(contents.iter().map(|c| num_traits::Signed::abs(c)).collect::<Vec<Rational>>()).content();
    let rc = num_traits::Signed::abs(&rc);
    let divisor = g.scale(&rc);
    for e in row.iter_mut() {
        if !e.is_zero() {
            *e = e.div_exact(&divisor).expect("content divides");
        }
    }
}

/// Size heuristic used for pivot choice: degree first, then coefficient bits.
fn weight(p: &Poly) -> (usize, u64) {
    let bits = p.coeffs().iter().map(|c| c.numer().bits() + c.denom().bits()).sum();
    (p.degree().unwrap_or(0), bits)
}

/// Basis of `{v : M v = 0}` over ℚ(m), by fraction-free elimination.
///
/// Columns are eliminated from right to left. Each basis vector is cleared
/// of denominators, made content-free, and signed so that its last nonzero
/// entry has a positive leading coefficient.
pub fn nullspace_by_elimination(matrix: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let ncols = matrix.iter().map(Vec::len).max().unwrap_or(0);
    let mut rows: Vec<Vec<Poly>> = matrix
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.resize(ncols, Poly::zero());
            r
        })
        .filter(|r| r.iter().any(|e| !e.is_zero()))
        .collect();
    for r in rows.iter_mut() {
        row_primitive(r);
    }
    let mut used = vec![false; rows.len()];
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (column, row)
    for col in (0..ncols).rev() {
        let cand = (0..rows.len()).filter(|&r| !used[r] && !rows[r][col].is_zero()).min_by_key(|&r| {
            let nz = rows[r].iter().filter(|e| !e.is_zero()).count();
            (weight(&rows[r][col]), nz, r)
        });
        let Some(pr) = cand else { continue };
        used[pr] = true;
        pivots.push((col, pr));
        let pivot_row = rows[pr].clone();
        let pv = pivot_row[col].clone();
        for r in 0..rows.len() {
            if used[r] || rows[r][col].is_zero() {
                continue;
            }
            let a = rows[r][col].clone();
            let g = Poly::gcd(&pv, &a);
            let pf = pv.div_exact(&g).expect("gcd divides");
            let af = a.div_exact(&g).expect("gcd divides");
            let new_row: Vec<Poly> = rows[r].iter().zip(&pivot_row).map(|(x, y)| &(&pf * x) - &(&af * y)).collect();
            rows[r] = new_row;
            row_primitive(&mut rows[r]);
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|p| p.0).collect();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut order = pivots.clone();
    order.sort_by_key(|p| p.0);
    let mut basis = Vec::new();
    for &f in &free {
        let mut x: Vec<Option<Frac>> = vec![None; ncols];
        for &g in &free {
            x[g] = Some(Frac::from_poly(if g == f { Poly::one() } else { Poly::zero() }));
        }
        // a pivot row involves only columns below its pivot among pivot
        // columns, so increasing column order resolves everything
        for &(col, r) in &order {
            let row = &rows[r];
            let mut acc = Frac::from_poly(Poly::zero());
            for (j, e) in row.iter().enumerate() {
                if j == col || e.is_zero() {
                    continue;
                }
                let xj = x[j].as_ref().expect("dependency resolved");
                acc = acc.add(&xj.mul_poly(e));
            }
            // x_col = -acc / row[col]
            let v = Frac::reduce(-&acc.num, &acc.den * &row[col]);
            x[col] = Some(v);
        }
        let fracs: Vec<Frac> = x.into_iter().map(|v| v.expect("all columns set")).collect();
        basis.push(clear_and_normalize(&fracs));
    }
    basis
}

/// Basis of `{v : M v = 0}` over ℚ(m), with the same pivot choice and
/// normalization as [`nullspace_by_elimination`].
///
/// The matrix is specialized at integer points `m`, the kernel is solved
/// over ℚ with the generic pivot structure, and every coordinate is
/// recovered as a rational function of `m` by Padé reconstruction. More
/// points are added until the result annihilates the matrix exactly; the
/// degree bound from the row degrees guarantees termination.
pub fn solve_nullspace(matrix: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    let ncols = matrix.iter().map(Vec::len).max().unwrap_or(0);
    let rows: Vec<Vec<Poly>> = matrix
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.resize(ncols, Poly::zero());
            r
        })
        .filter(|r| r.iter().any(|e| !e.is_zero()))
        .collect();
    if ncols == 0 {
        return Vec::new();
    }
    // generic pivot structure: the larger rank of two unrelated points
    let structure = [int(104_729), int(-7_919)]
        .iter()
        .map(|m| pivot_structure(&eval_rows(&rows, m)))
        .max_by_key(|s| s.cols.len())
        .expect("two points");
    let free: Vec<usize> = (0..ncols).filter(|c| !structure.cols.contains(c)).collect();
    if free.is_empty() {
        return Vec::new();
    }
    let sub: Vec<&Vec<Poly>> = structure.rows.iter().map(|&r| &rows[r]).collect();
    let row_degrees: usize = sub.iter().map(|r| r.iter().filter_map(Poly::degree).max().unwrap_or(0)).sum();
    // numerator and denominator of every coordinate have degree ≤ row_degrees
    let max_points = 2 * row_degrees + 4;

    let mut points: Vec<Rational> = Vec::new();
    let mut values: Vec<Vec<Vec<Rational>>> = Vec::new(); // [point][free][pivot col]
    let mut next = 0i64;
    let mut target = 8usize;
    loop {
        while points.len() < target.min(max_points) {
            // 0, 1, −1, 2, −2, … keeps the numbers small
            let m = int(if next % 2 == 0 { -(next / 2) } else { next / 2 + 1 });
            next += 1;
            let at: Vec<Vec<Rational>> = sub.iter().map(|r| r.iter().map(|e| e.eval(&m)).collect()).collect();
            if let Some(sol) = solve_at(&at, &structure.cols, &free) {
                points.push(m);
                values.push(sol);
            }
        }
        if let Some(basis) = reconstruct(&rows, &structure.cols, &free, &points, &values, ncols) {
            return basis;
        }
        assert!(points.len() < max_points, "nullspace reconstruction exceeded its degree bound");
        target = (target * 2).min(max_points);
    }
}

struct PivotStructure {
    /// Pivot columns in elimination order (right to left).
    cols: Vec<usize>,
    /// The row chosen for each pivot column.
    rows: Vec<usize>,
}

fn eval_rows(rows: &[Vec<Poly>], m: &Rational) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|e| e.eval(m)).collect()).collect()
}

/// Greedy right-to-left pivots of a rational matrix.
fn pivot_structure(a: &[Vec<Rational>]) -> PivotStructure {
    let mut a: Vec<Vec<Rational>> = a.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut used = vec![false; a.len()];
    let (mut cols, mut rows) = (Vec::new(), Vec::new());
    for col in (0..ncols).rev() {
        let Some(pr) = (0..a.len()).find(|&r| !used[r] && !a[r][col].is_zero()) else {
            continue;
        };
        used[pr] = true;
        cols.push(col);
        rows.push(pr);
        let pivot_row = a[pr].clone();
        for r in 0..a.len() {
            if used[r] || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot_row[col];
            for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
    }
    PivotStructure { cols, rows }
}

/// Solves `A[:, P] x = −A[:, f]` for every free column `f`, where `A` is
/// square on the pivot columns. `None` when the point is singular.
fn solve_at(a: &[Vec<Rational>], pivots: &[usize], free: &[usize]) -> Option<Vec<Vec<Rational>>> {
    let n = pivots.len();
    let mut aug: Vec<Vec<Rational>> =
        a.iter().map(|r| pivots.iter().map(|&c| r[c].clone()).chain(free.iter().map(|&f| -&r[f])).collect()).collect();
    for col in 0..n {
        let pr = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pr);
        let inv = aug[col][col].recip();
        for x in aug[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = aug[col].clone();
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for (x, y) in aug[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some((0..free.len()).map(|j| (0..n).map(|i| aug[i][n + j].clone()).collect()).collect())
}

/// Newton interpolation through `(xs[i], ys[i])`.
fn interpolate(xs: &[Rational], ys: &[Rational]) -> Poly {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    let mut p = Poly::zero();
    for i in (0..n).rev() {
        p = &(&p * &Poly::linear(int(1), -&xs[i])) + &Poly::constant(dd[i].clone());
    }
    p
}

/// Padé reconstruction of `num/den` from its values, holding the last two
/// points back as checks.
fn rational_from_values(xs: &[Rational], ys: &[Rational]) -> Option<Frac> {
    let n = xs.len().checked_sub(2)?;
    let (fit_x, check_x) = xs.split_at(n);
    let (fit_y, check_y) = ys.split_at(n);
    let modulus = fit_x.iter().fold(Poly::one(), |acc, x| &acc * &Poly::linear(int(1), -x));
    let (mut r0, mut r1) = (modulus, interpolate(fit_x, fit_y));
    let (mut t0, mut t1) = (Poly::zero(), Poly::one());
    loop {
        let dr = r1.degree().map_or(0, |d| d);
        let dt = t1.degree().unwrap_or(0);
        if dr + dt < n {
            let ok = check_x.iter().zip(check_y).all(|(x, y)| {
                let d = t1.eval(x);
                !d.is_zero() && r1.eval(x) / d == *y
            });
            if ok && fit_x.iter().all(|x| !t1.eval(x).is_zero()) {
                return Some(Frac::reduce(r1, t1));
            }
        }
        if r1.is_zero() {
            return None;
        }
        let (q, r) = r0.div_rem(&r1);
        let mut t = &t0 - &(&q * &t1);
        let mut r = r;
        // rescaling a row by a constant leaves r/t unchanged and keeps
        // the coefficients small
        if !r.is_zero() {
            let c = r.content().recip();
            r = r.scale(&c);
            t = t.scale(&c);
        }
        r0 = std::mem::replace(&mut r1, r);
        t0 = std::mem::replace(&mut t1, t);
    }
}

fn reconstruct(
    rows: &[Vec<Poly>],
    pivots: &[usize],
    free: &[usize],
    points: &[Rational],
    values: &[Vec<Vec<Rational>>],
    ncols: usize,
) -> Option<Vec<Vec<Poly>>> {
    let mut basis = Vec::new();
    for (j, &f) in free.iter().enumerate() {
        let mut x: Vec<Frac> = (0..ncols).map(|_| Frac::from_poly(Poly::zero())).collect();
        x[f] = Frac::from_poly(Poly::one());
        // running common denominator: once it is complete the remaining
        // coordinates reconstruct as plain polynomials
        let mut common = Poly::one();
        for (i, &c) in pivots.iter().enumerate() {
            let ys: Vec<Rational> = values.iter().zip(points).map(|(v, m)| &v[j][i] * common.eval(m)).collect();
            let part = rational_from_values(points, &ys)?;
            x[c] = Frac::reduce(part.num, &part.den * &common);
            common = &common * &part.den;
        }
        let v = clear_and_normalize(&x);
        if !mat_vec(rows, &v).iter().all(Poly::is_zero) {
            return None;
        }
        basis.push(v);
    }
    Some(basis)
}

fn clear_and_normalize(fracs: &[Frac]) -> Vec<Poly> {
    let mut l = Poly::one();
    for f in fracs {
        let g = Poly::gcd(&l, &f.den);
        l = (&l * &f.den).div_exact(&g).expect("gcd divides");
    }
    let mut v: Vec<Poly> =
        fracs.iter().map(|f| (&f.num * &l).div_exact(&f.den).expect("lcm clears denominators")).collect();
    row_primitive(&mut v);
    if let Some(last) = v.iter().rev().find(|e| !e.is_zero()) {
        if last.leading() < Rational::zero() {
            v = v.iter().map(|e| -e).collect();
        }
    }
    v
}

/// `M v` for a matrix over ℚ[m].
pub fn mat_vec(matrix: &[Vec<Poly>], v: &[Poly]) -> Vec<Poly> {
    matrix.iter().map(|row| row.iter().zip(v).fold(Poly::zero(), |acc, (a, b)| &acc + &(a * b))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_trivial_kernel() {
        let m = vec![vec![Poly::one(), Poly::zero()], vec![Poly::zero(), Poly::one()]];
        assert!(solve_nullspace(&m).is_empty());
    }

    #[test]
    fn single_row() {
        let m = vec![vec![Poly::x(), -&Poly::one()]];
        let ns = solve_nullspace(&m);
        assert_eq!(ns, vec![vec![Poly::one(), Poly::x()]]);
    }

    #[test]
    fn both_routes_agree_on_polynomial_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let nrows = rng.gen_range(1..5);
            let ncols = rng.gen_range(2..7);
            let mut m: Vec<Vec<Poly>> = (0..nrows)
                .map(|_| {
                    (0..ncols)
                        .map(|_| {
                            let deg = rng.gen_range(0..4);
                            Poly::from_i64s(&(0..=deg).map(|_| rng.gen_range(-5..=5)).collect::<Vec<i64>>())
                        })
                        .collect()
                })
                .collect();
            if nrows > 1 && rng.gen_bool(0.5) {
                // a dependent row over ℚ(m)
                let scaled: Vec<Poly> = m[0].iter().map(|e| e * &Poly::from_i64s(&[1, 2])).collect();
                m.push(scaled);
            }
            assert_eq!(solve_nullspace(&m), nullspace_by_elimination(&m));
        }
    }

    #[test]
    fn high_degree_rational_kernel() {
        // kernel (m^5 + 1, −(m^2 − 3)·m) of a single row
        let m = vec![vec![Poly::from_i64s(&[0, -3, 0, 1]), Poly::from_i64s(&[1, 0, 0, 0, 0, 1])]];
        let ns = solve_nullspace(&m);
        assert_eq!(ns, nullspace_by_elimination(&m));
        assert!(mat_vec(&m, &ns[0]).iter().all(Poly::is_zero));
    }

    #[test]
    fn rank_deficient_polynomial_matrix() {
        // rows: [m, 1, m+1], [m^2, m, m^2+m]  (second = m * first)
        let m = vec![
            vec![Poly::x(), Poly::one(), Poly::from_i64s(&[1, 1])],
            vec![Poly::from_i64s(&[0, 0, 1]), Poly::x(), Poly::from_i64s(&[0, 1, 1])],
        ];
        let ns = solve_nullspace(&m);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&m, v).iter().all(Poly::is_zero));
            let last = v.iter().rev().find(|e| !e.is_zero()).unwrap();
            assert!(last.leading() > Rational::zero());
        }
    }
}
