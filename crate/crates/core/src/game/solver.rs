use crate::scalar::Scalar;

/// Row player's maximin strategy and the value it guarantees.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedStrategy<S> {
    pub sigma: Vec<S>,
    pub value: S,
}

impl<S: Scalar> MixedStrategy<S> {
    /// Worst-case payoff of `sigma` over the column player's pure replies.
    pub fn guarantee(&self, payoff: &[Vec<S>]) -> S {
        guarantee(&self.sigma, payoff)
    }
}

pub fn guarantee<S: Scalar>(sigma: &[S], payoff: &[Vec<S>]) -> S {
    let cols = payoff.first().map_or(0, Vec::len);
    (0..cols).map(|j| sigma.iter().zip(payoff).map(|(&s, row)| s * row[j]).sum::<S>()).fold(S::infinity(), S::min)
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
fn solve_linear<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>, tol: S) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == S::zero() {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Maximin mixed strategy of the row player in the zero-sum game `payoff`
/// (rows maximize, columns minimize), by enumerating equal-size supports.
///
/// Every extreme optimal strategy makes some set of `k` columns indifferent on
/// a support of `k` rows, so the best guarantee over all nonnegative solutions
/// of those square systems is the game value.
pub fn solve_zero_sum<S: Scalar>(payoff: &[Vec<S>]) -> MixedStrategy<S> {
    let rows = payoff.len();
    let cols = payoff.first().map_or(0, Vec::len);
    if rows == 0 {
        return MixedStrategy { sigma: Vec::new(), value: S::zero() };
    }
    if cols == 0 {
        let mut sigma = vec![S::zero(); rows];
        sigma[0] = S::one();
        return MixedStrategy { sigma, value: S::zero() };
    }
    let scale = payoff.iter().flatten().fold(S::one(), |m, v| m.max(v.abs()));
    let tol = S::epsilon() * S::lit(1e3) * scale;
    let mut best: Option<MixedStrategy<S>> = None;
    for k in 1..=rows.min(cols) {
        let row_sets = subsets(rows, k);
        let col_sets = subsets(cols, k);
        for rs in &row_sets {
            for cs in &col_sets {
                // unknowns: x over rs, then v
                let mut a = vec![vec![S::zero(); k + 1]; k + 1];
                let mut b = vec![S::zero(); k + 1];
                for (eq, &j) in cs.iter().enumerate() {
                    for (u, &i) in rs.iter().enumerate() {
                        a[eq][u] = payoff[i][j];
                    }
                    a[eq][k] = -S::one();
                }
                for u in 0..k {
                    a[k][u] = S::one();
                }
                b[k] = S::one();
                let Some(x) = solve_linear(a, b, tol) else { continue };
                if x[..k].iter().any(|&xi| xi < -tol) {
                    continue;
                }
                let mut sigma = vec![S::zero(); rows];
                for (u, &i) in rs.iter().enumerate() {
                    sigma[i] = x[u].max(S::zero());
                }
                let z: S = sigma.iter().copied().sum();
                sigma.iter_mut().for_each(|s| *s /= z);
                let value = guarantee(&sigma, payoff);
                if best.as_ref().is_none_or(|b| value > b.value + tol) {
                    best = Some(MixedStrategy { sigma, value });
                }
            }
        }
    }
    best.unwrap_or_else(|| {
        let mut sigma = vec![S::zero(); rows];
        sigma[0] = S::one();
        let value = guarantee(&sigma, payoff);
        MixedStrategy { sigma, value }
    })
}
