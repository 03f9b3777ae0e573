use crate::traffic::ActionMatrix;

/// Column-max decode: keep the `n_c` channels whose best score is largest and
/// hand each to its argmax request. Ties go to the lowest index.
///
/// `scores` is indexed `[request][channel]`.
pub fn decode_action(scores: &[Vec<f64>], num_channels: usize, n_c: usize) -> ActionMatrix {
    let n_r = scores.len();
    let mut a = ActionMatrix::new(n_r, num_channels);
    if n_r == 0 {
        return a;
    }
    let best: Vec<(usize, f64)> = (0..num_channels)
        .map(|c| {
            let mut arg = 0;
            for k in 1..n_r {
                if scores[k][c] > scores[arg][c] {
                    arg = k;
                }
            }
            (arg, scores[arg][c])
        })
        .collect();
    let mut order: Vec<usize> = (0..num_channels).collect();
    // stable sort keeps lower channel indices first among equal maxima
    order.sort_by(|&x, &y| best[y].1.total_cmp(&best[x].1));
    for &c in order.iter().take(n_c.min(num_channels)) {
        a.set(best[c].0, c, true);
    }
    a
}

/// Greedy decode on the latest rate history instead of network output.
pub fn max_rate_action(history: &[Vec<f64>], num_channels: usize, n_c: usize) -> ActionMatrix {
    decode_action(history, num_channels, n_c)
}
