//! Reference implementations shared by the integration tests. They follow the
//! textbook definitions directly and share no code with the library.

#![allow(dead_code)]

pub mod dd;

use outlier_core::probability::SequenceBatch;

/// `Σ q log₂(q/p)` straight from the definition.
pub fn kl_bits(q: &[f64], p: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return f64::INFINITY;
        }
        total += qi * (qi / pi).log2();
    }
    total
}

/// Relative frequencies of every row.
pub fn row_types(batch: &SequenceBatch) -> Vec<Vec<f64>> {
    let k = batch.alphabet_size();
    batch
        .rows()
        .map(|row| {
            let mut f = vec![0.0; k];
            for &s in row {
                f[s as usize] += 1.0;
            }
            f.iter().map(|c| c / row.len() as f64).collect()
        })
        .collect()
}

/// Every size-`t` subset of `0..m` in lexicographic order.
pub fn subsets(m: usize, t: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, t, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive GLRT: the subset `S` minimizing `Σ_{j∉S} D(P_j ‖ mean_{k∉S} P_k)`,
/// objectives within `tol` of the minimum resolved to the lexicographically first.
pub fn brute_glrt(batch: &SequenceBatch, t: usize, tol: f64) -> Vec<usize> {
    let types = row_types(batch);
    let m = types.len();
    let k = batch.alphabet_size();
    let objective = |s: &[usize]| {
        let kept: Vec<&Vec<f64>> = (0..m).filter(|i| !s.contains(i)).map(|i| &types[i]).collect();
        let mut nu = vec![0.0; k];
        for ty in &kept {
            for y in 0..k {
                nu[y] += ty[y] / kept.len() as f64;
            }
        }
        kept.iter().map(|ty| kl_bits(ty, &nu)).sum::<f64>()
    };
    let all = subsets(m, t);
    let values: Vec<f64> = all.iter().map(|s| objective(s)).collect();
    let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let i = values.iter().position(|&v| v <= best + tol).unwrap();
    all[i].clone()
}

/// Lexicographically first subset maximizing the summed scores.
pub fn brute_top_sum(scores: &[f64], t: usize) -> Vec<usize> {
    let mut best = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    for s in subsets(scores.len(), t) {
        let v: f64 = s.iter().map(|&i| scores[i]).sum();
        if v > best {
            best = v;
            arg = s;
        }
    }
    arg
}
