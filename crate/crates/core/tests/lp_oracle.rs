//! The simplex solver against brute-force vertex enumeration on small,
//! box-bounded random LPs, plus strong duality on random packing LPs.

use proptest::prelude::*;
use qnetcap::lp::{solve, LpBuilder, LpStatus, RowKind, Sense};

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` if singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

#[derive(Debug)]
struct Dense {
    cost: Vec<f64>,
    /// rows `a x (<= | >=) b`
    rows: Vec<(Vec<f64>, bool, f64)>,
    upper: f64,
}

impl Dense {
    /// Every constraint as `g x <= h`, including `0 <= x <= upper`.
    fn halfspaces(&self) -> Vec<(Vec<f64>, f64)> {
        let n = self.cost.len();
        let mut out = Vec::new();
        for (a, ge, b) in &self.rows {
            if *ge {
                out.push((a.iter().map(|v| -v).collect(), -b));
            } else {
                out.push((a.clone(), *b));
            }
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            out.push((e.clone(), self.upper));
            e[j] = -1.0;
            out.push((e, 0.0));
        }
        out
    }

    /// Best objective over all basic feasible points, or `None` if empty.
    fn enumerate(&self) -> Option<f64> {
        let n = self.cost.len();
        let hs = self.halfspaces();
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        fn combos(k: usize, start: usize, m: usize, pick: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
            if k == pick.len() {
                out(pick);
                return;
            }
            for i in start..m {
                pick[k] = i;
                combos(k + 1, i + 1, m, pick, out);
            }
        }
        combos(0, 0, hs.len(), &mut pick, &mut |idx| {
            let a = idx.iter().map(|&i| hs[i].0.clone()).collect();
            let b = idx.iter().map(|&i| hs[i].1).collect();
            if let Some(x) = solve_square(a, b) {
                let feasible = hs
                    .iter()
                    .all(|(g, h)| g.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= h + 1e-7);
                if feasible {
                    let v: f64 = self.cost.iter().zip(&x).map(|(c, x)| c * x).sum();
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        });
        best
    }

    fn simplex(&self) -> (LpStatus, Option<f64>) {
        let mut b = LpBuilder::new(Sense::Maximize);
        let vars: Vec<usize> = self.cost.iter().map(|&c| b.add_var(c, 0.0, Some(self.upper))).collect();
        for (a, ge, rhs) in &self.rows {
            let kind = if *ge { RowKind::Ge } else { RowKind::Le };
            b.add_row(vars.iter().zip(a).map(|(&v, &c)| (v, c)).collect(), kind, *rhs);
        }
        let sol = solve(&b.build()).unwrap();
        (sol.status, sol.objective)
    }
}

fn coeff() -> impl Strategy<Value = f64> {
    (-4i32..=4).prop_map(f64::from)
}

fn dense_lp() -> impl Strategy<Value = Dense> {
    (2usize..=4, 1usize..=5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(coeff(), n),
            prop::collection::vec((prop::collection::vec(coeff(), n), prop::bool::weighted(0.25), -3i32..=8), m),
            1i32..=5,
        )
            .prop_map(|(cost, rows, upper)| Dense {
                cost,
                rows: rows.into_iter().map(|(a, ge, b)| (a, ge, f64::from(b))).collect(),
                upper: f64::from(upper),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(lp in dense_lp()) {
        let (status, value) = lp.simplex();
        match lp.enumerate() {
            None => prop_assert_eq!(status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(status, LpStatus::Optimal);
                let v = value.unwrap();
                prop_assert!((v - best).abs() <= 1e-6 * (1.0 + best.abs()), "simplex {} vs vertices {}", v, best);
            }
        }
    }

    /// max c x s.t. A x <= b, x >= 0 with A, b, c >= 0 and its dual
    /// min b y s.t. A^T y >= c, y >= 0 reach the same value.
    #[test]
    fn strong_duality_on_packing_lps(
        (a, b, c) in (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| (
            prop::collection::vec(prop::collection::vec(1u8..=5, n), m),
            prop::collection::vec(1u8..=9, m),
            prop::collection::vec(0u8..=6, n),
        ))
    ) {
        let n = c.len();
        let mut primal = LpBuilder::new(Sense::Maximize);
        let x: Vec<usize> = c.iter().map(|&cj| primal.add_var(f64::from(cj), 0.0, None)).collect();
        for (row, &bi) in a.iter().zip(&b) {
            primal.add_row(x.iter().zip(row).map(|(&v, &aij)| (v, f64::from(aij))).collect(), RowKind::Le, f64::from(bi));
        }
        let mut dual = LpBuilder::new(Sense::Minimize);
        let y: Vec<usize> = b.iter().map(|&bi| dual.add_var(f64::from(bi), 0.0, None)).collect();
        for j in 0..n {
            dual.add_row(y.iter().zip(&a).map(|(&v, row)| (v, f64::from(row[j]))).collect(), RowKind::Ge, f64::from(c[j]));
        }
        let p = solve(&primal.build()).unwrap().objective.unwrap();
        let d = solve(&dual.build()).unwrap().objective.unwrap();
        prop_assert!((p - d).abs() <= 1e-7 * (1.0 + p.abs()), "primal {} dual {}", p, d);
    }
}
