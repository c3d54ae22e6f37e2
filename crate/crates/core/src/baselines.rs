//! Unsupervised comparison methods over tf-idf document vectors:
//! complete-link agglomerative clustering and seeded K-Means.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;
use crate::features::FeatureVector;
use crate::models::Assignment;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BaselineError {
    #[error("k = {k} out of range for {n} documents")]
    KOutOfRange { k: usize, n: usize },
    #[error("at least one repetition is required")]
    NoRepetitions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ClusteringMethod {
    HacComplete,
    KMeans,
    /// Groups induced by a classification, labels dropped.
    Classification,
}

impl ClusteringMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusteringMethod::HacComplete => "hac_complete",
            ClusteringMethod::KMeans => "kmeans",
            ClusteringMethod::Classification => "classification",
        }
    }
}

impl fmt::Display for ClusteringMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A partition of document ids into non-empty clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Clustering {
    pub clusters: Vec<Vec<String>>,
    pub method: ClusteringMethod,
    pub k: usize,
    pub seed: Option<u64>,
}

impl Clustering {
    pub fn num_documents(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }
}

/// A document id with its tf-idf vector.
pub type DocVector<'a> = (&'a str, &'a FeatureVector);

fn check_k(k: usize, n: usize) -> Result<(), BaselineError> {
    if k == 0 || k > n {
        return Err(BaselineError::KOutOfRange { k, n });
    }
    Ok(())
}

/// Complete-link agglomerative clustering with distance `1 - cosine`,
/// stopped at `k` clusters.
///
/// Among equally distant pairs the one whose smallest document ids are
/// lexicographically smallest is merged first.
pub fn hac_complete(docs: &[DocVector<'_>], k: usize) -> Result<Clustering, BaselineError> {
    let n = docs.len();
    check_k(k, n)?;
    // members[i] is kept sorted by doc id; None once merged away.
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = 1.0 - docs[i].1.cosine(docs[j].1);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let min_id = |m: &Vec<usize>| docs[m[0]].0;

    let mut active = n;
    while active > k {
        let mut best: Option<(usize, usize)> = None;
        let mut best_key: (f64, &str, &str) = (f64::INFINITY, "", "");
        for i in 0..n {
            let Some(mi) = &members[i] else { continue };
            for j in (i + 1)..n {
                let Some(mj) = &members[j] else { continue };
                let (a, b) = {
                    let (x, y) = (min_id(mi), min_id(mj));
                    if x <= y {
                        (x, y)
                    } else {
                        (y, x)
                    }
                };
                let d = dist[i][j];
                let better = match best {
                    None => true,
                    Some(_) => {
                        d < best_key.0 || (d == best_key.0 && (a, b) < (best_key.1, best_key.2))
                    }
                };
                if better {
                    best = Some((i, j));
                    best_key = (d, a, b);
                }
            }
        }
        let (i, j) = best.expect("more than k active clusters");
        let mj = members[j].take().expect("active");
        let mi = members[i].as_mut().expect("active");
        mi.extend(mj);
        mi.sort_by(|&x, &y| docs[x].0.cmp(docs[y].0));
        // Complete linkage: distance to the union is the larger of the two.
        for c in 0..n {
            if c != i && members[c].is_some() {
                let d = dist[i][c].max(dist[j][c]);
                dist[i][c] = d;
                dist[c][i] = d;
            }
        }
        active -= 1;
    }

    let mut clusters: Vec<Vec<String>> = members
        .into_iter()
        .flatten()
        .map(|m| m.into_iter().map(|i| String::from(docs[i].0)).collect())
        .collect();
    clusters.sort();
    Ok(Clustering {
        clusters,
        method: ClusteringMethod::HacComplete,
        k,
        seed: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub max_iterations: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            max_iterations: 100,
        }
    }
}

/// Result of one K-Means run, with the objective after every update step.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub clustering: Clustering,
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

fn dense(v: &FeatureVector, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    let norm = v.l2_norm();
    if norm > 0.0 {
        for (f, w) in v.iter() {
            out[f.index()] = w / norm;
        }
    }
    out
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm on L2-normalized vectors, so Euclidean distance
/// follows cosine geometry.
///
/// Initial centroids are `k` distinct documents drawn with a ChaCha8
/// generator seeded by `seed`. Iteration stops once assignments are stable
/// or after `max_iterations`. A cluster that empties out is re-seeded with
/// the point farthest from its centroid.
pub fn kmeans_run(
    docs: &[DocVector<'_>],
    k: usize,
    seed: u64,
    config: &KMeansConfig,
) -> Result<KMeansRun, BaselineError> {
    let n = docs.len();
    check_k(k, n)?;
    let dim = docs
        .iter()
        .flat_map(|(_, v)| v.iter().map(|(f, _)| f.index() + 1))
        .max()
        .unwrap_or(0);
    let points: Vec<Vec<f64>> = docs.iter().map(|(_, v)| dense(v, dim)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: Vec<usize> = sample(&mut rng, n, k).into_vec();
    seeds.sort_unstable();
    let mut centroids: Vec<Vec<f64>> = seeds.iter().map(|&i| points[i].clone()).collect();

    let nearest = |p: &[f64], centroids: &[Vec<f64>]| -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in centroids.iter().enumerate() {
            let d = sq_dist(p, centroid);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    };

    let mut assignment: Vec<usize> = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, _) = nearest(p, &centroids);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }
        changed |= reseed_empty(&points, &mut assignment, &centroids, k);
        centroids = update_centroids(&points, &assignment, k, dim);
        history.push(objective(&points, &assignment, &centroids));
        if !changed {
            break;
        }
    }

    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, &c) in assignment.iter().enumerate() {
        groups.entry(c).or_default().push(String::from(docs[i].0));
    }
    let mut clusters: Vec<Vec<String>> = groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g
        })
        .collect();
    clusters.sort();
    Ok(KMeansRun {
        clustering: Clustering {
            clusters,
            method: ClusteringMethod::KMeans,
            k,
            seed: Some(seed),
        },
        objective_history: history,
        iterations,
    })
}

fn reseed_empty(
    points: &[Vec<f64>],
    assignment: &mut [usize],
    centroids: &[Vec<f64>],
    k: usize,
) -> bool {
    let mut moved = false;
    loop {
        let mut sizes = vec![0usize; k];
        for &c in assignment.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return moved;
        };
        // Farthest point among clusters that can spare one.
        let far = (0..points.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .map(|i| (i, sq_dist(&points[i], &centroids[assignment[i]])))
            .fold(None, |acc: Option<(usize, f64)>, (i, d)| match acc {
                Some((_, best)) if best >= d => acc,
                _ => Some((i, d)),
            });
        match far {
            Some((i, _)) => {
                assignment[i] = empty;
                moved = true;
            }
            None => return moved,
        }
    }
}

fn update_centroids(
    points: &[Vec<f64>],
    assignment: &[usize],
    k: usize,
    dim: usize,
) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignment) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            for x in s.iter_mut() {
                *x /= n as f64;
            }
        }
    }
    sums
}

/// Sum of squared distances of every point to its assigned centroid.
fn objective(points: &[Vec<f64>], assignment: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, &c)| sq_dist(p, &centroids[c]))
        .sum()
}

pub fn kmeans(docs: &[DocVector<'_>], k: usize, seed: u64) -> Result<Clustering, BaselineError> {
    Ok(kmeans_run(docs, k, seed, &KMeansConfig::default())?.clustering)
}

/// K-Means with seeds `1..=reps`.
pub fn run_repetitions(
    docs: &[DocVector<'_>],
    k: usize,
    reps: usize,
    config: &KMeansConfig,
) -> Result<Vec<Clustering>, BaselineError> {
    if reps == 0 {
        return Err(BaselineError::NoRepetitions);
    }
    (1..=reps as u64)
        .map(|seed| kmeans_run(docs, k, seed, config).map(|r| r.clustering))
        .collect()
}

/// Groups documents by assigned candidate, dropping the labels. Only
/// documents accepted by `keep` are included.
pub fn assignment_to_clustering<F>(assignment: &Assignment, mut keep: F) -> Clustering
where
    F: FnMut(&str) -> bool,
{
    let mut groups: BTreeMap<&Label, Vec<String>> = BTreeMap::new();
    for (doc, label) in assignment.iter() {
        if keep(doc) {
            groups.entry(label).or_default().push(String::from(doc));
        }
    }
    let k = groups.len();
    let mut clusters: Vec<Vec<String>> = groups.into_values().collect();
    clusters.sort();
    Clustering {
        clusters,
        method: ClusteringMethod::Classification,
        k,
        seed: None,
    }
}
