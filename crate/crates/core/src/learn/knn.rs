/// Majority vote among the `k` nearest stored points by Euclidean
/// distance. Distance ties go to the lower stored index; vote ties go to
/// the tied class whose member ranked nearest.
pub(crate) fn knn_vote(points: &[[f64; 3]], labels: &[usize], k: usize, query: &[f64; 3]) -> usize {
    let mut dist: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d2: f64 = p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let nearest = &dist[..k.min(dist.len())];

    // (votes, rank of first appearance) per class, in first-appearance order
    let mut tally: Vec<(usize, usize, usize)> = Vec::new();
    for (rank, &(_, i)) in nearest.iter().enumerate() {
        let label = labels[i];
        match tally.iter_mut().find(|t| t.0 == label) {
            Some(t) => t.1 += 1,
            None => tally.push((label, 1, rank)),
        }
    }
    tally
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
        .map(|t| t.0)
        .expect("k >= 1 and at least one stored point")
}
