use std::collections::HashSet;

use super::{DiophError, DiophSystem};
use crate::limits::Limits;

fn dominated(v: &[u64], by: &[Vec<u64>]) -> bool {
    by.iter().any(|b| b.iter().zip(v).all(|(x, y)| x <= y))
}

/// Irreducible solutions of `A·y ≥ 0`: nonzero solutions that are not the
/// sum of two nonzero solutions. Sorted lexicographically.
///
/// Slack variables turn the system into `A·y − s = 0`, whose irreducible
/// solutions correspond one-to-one to ours since `s` is determined by `y`.
/// The equality system is solved by completion: a frontier vector `p` with
/// `M·p ≠ 0` is extended by a unit `e_j` only when `⟨M·p, M·e_j⟩ < 0`, and
/// vectors dominating a found solution are pruned.
pub fn hilbert_basis(sys: &DiophSystem, limits: &Limits) -> Result<Vec<Vec<u64>>, DiophError> {
    let v = sys.vars();
    let e = sys.rows().len();
    let width = v + e;
    // columns of M = [A | −I]
    let columns: Vec<Vec<i64>> = (0..width)
        .map(|j| {
            (0..e)
                .map(|r| if j < v { sys.rows()[r][j] } else if j - v == r { -1 } else { 0 })
                .collect()
        })
        .collect();
    let dot = |a: &[i64], b: &[i64]| -> i64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    let mut found: Vec<Vec<u64>> = Vec::new();
    let mut frontier: Vec<(Vec<u64>, Vec<i64>)> = (0..width)
        .map(|j| {
            let mut p = vec![0u64; width];
            p[j] = 1;
            (p, columns[j].clone())
        })
        .collect();
    while !frontier.is_empty() {
        if limits.expired() {
            return Err(DiophError::LimitExceeded("deadline passed during Hilbert basis completion".into()));
        }
        let (done, open): (Vec<_>, Vec<_>) = frontier.into_iter().partition(|(_, mp)| mp.iter().all(|&x| x == 0));
        found.extend(done.into_iter().map(|(p, _)| p));
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut next = Vec::new();
        for (p, mp) in open {
            for (j, col) in columns.iter().enumerate() {
                if dot(&mp, col) >= 0 {
                    continue;
                }
                let mut q = p.clone();
                q[j] += 1;
                if dominated(&q, &found) || !seen.insert(q.clone()) {
                    continue;
                }
                let mq: Vec<i64> = mp.iter().zip(col).map(|(a, b)| a + b).collect();
                next.push((q, mq));
            }
        }
        if next.len() > limits.max_frontier {
            return Err(DiophError::LimitExceeded(format!("completion frontier exceeds {}", limits.max_frontier)));
        }
        frontier = next;
    }
    let mut basis: Vec<Vec<u64>> = found.into_iter().map(|mut z| {
        z.truncate(v);
        z
    }).collect();
    basis.sort();
    basis.dedup();
    Ok(basis)
}

/// Writes `m` as a natural combination of `basis`; returns the multiplicity
/// of each basis element.
///
/// Repeatedly subtracts the largest multiple `λ·h` that leaves a solution.
/// For a complete basis some element always fits, so a failure means the
/// basis is wrong.
pub fn decompose_solution(sys: &DiophSystem, m: &[u64], basis: &[Vec<u64>]) -> Result<Vec<u64>, DiophError> {
    if !sys.is_solution(m) {
        return Err(DiophError::NotASolution);
    }
    let mut rest = m.to_vec();
    let mut mult = vec![0u64; basis.len()];
    let values = |y: &[u64]| -> Vec<i128> {
        sys.rows().iter().map(|row| row.iter().zip(y).map(|(&a, &x)| a as i128 * x as i128).sum()).collect()
    };
    while rest.iter().any(|&x| x != 0) {
        let ar = values(&rest);
        let mut progressed = false;
        for (k, h) in basis.iter().enumerate() {
            if h.iter().all(|&x| x == 0) {
                continue;
            }
            // λ ≤ rest/h coordinatewise and A(rest − λh) ≥ 0
            let mut lambda = h.iter().zip(&rest).filter(|(&x, _)| x > 0).map(|(&x, &r)| r / x).min().unwrap_or(0) as i128;
            for (row_value, ah) in ar.iter().zip(values(h)) {
                if ah > 0 {
                    lambda = lambda.min(row_value / ah);
                }
            }
            if lambda > 0 {
                for (r, &x) in rest.iter_mut().zip(h) {
                    *r -= x * lambda as u64;
                }
                mult[k] += lambda as u64;
                progressed = true;
                break;
            }
        }
        if !progressed {
            return Err(DiophError::NoDecomposition);
        }
    }
    Ok(mult)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(vars: usize, rows: &[&[i64]]) -> DiophSystem {
        DiophSystem::new(vars, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn small_examples() {
        let lim = Limits::default();
        assert_eq!(hilbert_basis(&sys(2, &[&[1, -1]]), &lim).unwrap(), vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(hilbert_basis(&sys(2, &[&[1, 1]]), &lim).unwrap(), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(hilbert_basis(&sys(2, &[&[-1, 0]]), &lim).unwrap(), vec![vec![0, 1]]);
        assert_eq!(hilbert_basis(&sys(3, &[]), &lim).unwrap(), vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn equality_like_system() {
        // y1 − 2 y2 ≥ 0 and 2 y2 − y1 ≥ 0 force y1 = 2 y2
        let s = sys(2, &[&[1, -2], &[-1, 2]]);
        assert_eq!(hilbert_basis(&s, &Limits::default()).unwrap(), vec![vec![2, 1]]);
    }

    #[test]
    fn decomposition_examples() {
        let s = sys(2, &[&[1, -1]]);
        let basis = vec![vec![1, 0], vec![1, 1]];
        let mult = decompose_solution(&s, &[2, 1], &basis).unwrap();
        assert_eq!(mult, vec![1, 1]);
        assert_eq!(decompose_solution(&s, &[1, 1], &basis).unwrap(), vec![0, 1]);
        assert_eq!(decompose_solution(&s, &[0, 0], &basis).unwrap(), vec![0, 0]);
        assert_eq!(decompose_solution(&s, &[0, 1], &basis), Err(DiophError::NotASolution));
        assert_eq!(decompose_solution(&s, &[1, 1], &[vec![1, 0]]), Err(DiophError::NoDecomposition));
    }
}
