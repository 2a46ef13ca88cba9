//! Deterministic generators: Das–Dennis lattices, simplex samplers, input
//! sequences, and the CSV formats they are stored in.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pareto::{ObjectiveVector, Solution};

const SIMPLEX_TOL: f64 = 1e-9;

/// Shape of the test front a sequence is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontKind {
    /// `Σ z_i = 1`, `z_i ≥ 0`.
    Simplex,
    /// `Σ z_i = m - 1`, `z_i ∈ [0, 1]`.
    Inverted,
}

impl FrontKind {
    pub const ALL: [FrontKind; 2] = [FrontKind::Simplex, FrontKind::Inverted];

    pub fn name(self) -> &'static str {
        match self {
            FrontKind::Simplex => "simplex",
            FrontKind::Inverted => "inverted",
        }
    }

    /// Coordinate sum of every point on this front.
    pub fn coordinate_sum(self, m: usize) -> f64 {
        match self {
            FrontKind::Simplex => 1.0,
            FrontKind::Inverted => (m - 1) as f64,
        }
    }

    /// Corners of the front triangle (or simplex), used for wireframes.
    pub fn vertices(self, m: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| match self {
                        FrontKind::Simplex => f64::from(u8::from(i == j)),
                        FrontKind::Inverted => f64::from(u8::from(i != j)),
                    })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for FrontKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FrontKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(FrontKind::Simplex),
            "inverted" | "inverted-simplex" | "inverted_simplex" => Ok(FrontKind::Inverted),
            other => Err(Error::InvalidParameter(format!("unknown front kind `{other}`"))),
        }
    }
}

/// Evenly spread directions on the unit simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVectorSet {
    vectors: Vec<Vec<f64>>,
    divisions: usize,
}

impl WeightVectorSet {
    /// Wraps explicit weights. Each must be non-negative and sum to one;
    /// `divisions` is reported as 0.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let m = vectors.first().map_or(0, Vec::len);
        for (index, w) in vectors.iter().enumerate() {
            if w.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: w.len(),
                });
            }
            let sum: f64 = w.iter().sum();
            if w.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::OffSimplex { index, sum });
            }
        }
        Ok(Self {
            vectors,
            divisions: 0,
        })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn divisions(&self) -> usize {
        self.divisions
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

/// `C(n, k)` without overflow for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Size of the lattice `das_dennis(m, h)`.
pub fn lattice_size(m: usize, h: usize) -> usize {
    binomial(h + m - 1, m - 1)
}

/// Finds the division count whose lattice has exactly `count` points.
pub fn divisions_for(m: usize, count: usize) -> Option<usize> {
    (1..=count).find(|&h| lattice_size(m, h) == count)
}

/// All vectors with entries in `{0, 1/h, ..., 1}` summing to one, in
/// descending lexicographic order.
pub fn das_dennis(m: usize, h: usize) -> Result<WeightVectorSet> {
    if m < 2 || h == 0 {
        return Err(Error::InvalidParameter(format!(
            "das_dennis needs m >= 2 and h >= 1 (got m={m}, h={h})"
        )));
    }
    let mut vectors = Vec::with_capacity(lattice_size(m, h));
    let mut counts = vec![0usize; m];
    fill_lattice(&mut counts, 0, h, h, &mut vectors);
    Ok(WeightVectorSet {
        vectors,
        divisions: h,
    })
}

fn fill_lattice(counts: &mut [usize], pos: usize, left: usize, h: usize, out: &mut Vec<Vec<f64>>) {
    if pos == counts.len() - 1 {
        counts[pos] = left;
        out.push(counts.iter().map(|&c| c as f64 / h as f64).collect());
        return;
    }
    for c in (0..=left).rev() {
        counts[pos] = c;
        fill_lattice(counts, pos + 1, left - c, h, out);
    }
}

/// Maps each unit-simplex point `z` to `1 - z`.
pub fn invert_simplex(points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL || p.iter().any(|&v| v < -SIMPLEX_TOL) {
                return Err(Error::OffSimplex { index, sum });
            }
            Ok(p.iter().map(|v| 1.0 - v).collect())
        })
        .collect()
}

/// `n` points uniform on the front: sorted uniforms, consecutive gaps, then
/// the inversion map for the inverted front.
pub fn sample_front(kind: FrontKind, m: usize, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m < 2 {
        return Err(Error::TooFewObjectives(m));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts = vec![0.0; m - 1];
    let simplex: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            for c in cuts.iter_mut() {
                *c = rng.gen::<f64>();
            }
            cuts.sort_by(f64::total_cmp);
            let mut point = Vec::with_capacity(m);
            let mut prev = 0.0;
            for &c in &cuts {
                point.push(c - prev);
                prev = c;
            }
            point.push(1.0 - prev);
            point
        })
        .collect();
    match kind {
        FrontKind::Simplex => Ok(simplex),
        FrontKind::Inverted => invert_simplex(&simplex),
    }
}

/// IGD reference front: the lattice itself, or its inversion.
pub fn reference_front(kind: FrontKind, m: usize, h: usize) -> Result<Vec<Vec<f64>>> {
    let lattice = das_dennis(m, h)?.vectors;
    match kind {
        FrontKind::Simplex => Ok(lattice),
        FrontKind::Inverted => invert_simplex(&lattice),
    }
}

/// How the flattened sequence is chopped into arrival batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSize {
    Fixed(usize),
    All,
}

/// An ordered stream of solution batches.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSequence {
    pub front_kind: FrontKind,
    pub base_seed: u64,
    pub shuffle_seed: u64,
    pub batches: Vec<Vec<Solution>>,
}

impl InputSequence {
    pub fn len(&self) -> usize {
        self.batches.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self) -> Vec<Solution> {
        self.batches.iter().flatten().cloned().collect()
    }

    /// Same solutions in the same order, re-chopped.
    pub fn rebatch(&self, batch_size: BatchSize) -> Result<Self> {
        Ok(Self {
            batches: chop(self.flatten(), batch_size)?,
            ..self.clone()
        })
    }
}

pub(crate) fn chop(solutions: Vec<Solution>, batch_size: BatchSize) -> Result<Vec<Vec<Solution>>> {
    match batch_size {
        BatchSize::Fixed(0) => Err(Error::InvalidParameter("batch size must be positive".into())),
        BatchSize::Fixed(k) => Ok(solutions.chunks(k).map(<[Solution]>::to_vec).collect()),
        BatchSize::All => Ok(vec![solutions]),
    }
}

/// Base points become solutions with ids by base position.
pub fn base_solutions(points: Vec<Vec<f64>>) -> Result<Vec<Solution>> {
    points
        .into_iter()
        .enumerate()
        .map(|(id, p)| Ok(Solution::new(id, ObjectiveVector::new(p)?)))
        .collect()
}

/// Seeded Fisher–Yates permutation of `solutions`.
pub fn shuffle_solutions(solutions: &mut [Solution], shuffle_seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    solutions.shuffle(&mut rng);
}

/// Samples the base set, shuffles it and chops it into batches.
pub fn build_sequence(
    kind: FrontKind,
    m: usize,
    n: usize,
    base_seed: u64,
    shuffle_seed: u64,
    batch_size: BatchSize,
) -> Result<InputSequence> {
    let base = base_solutions(sample_front(kind, m, n, base_seed)?)?;
    sequence_from_base(kind, &base, base_seed, shuffle_seed, batch_size)
}

/// Shuffles a pre-sampled base set; lets callers share one base set across
/// many shuffles.
pub fn sequence_from_base(
    kind: FrontKind,
    base: &[Solution],
    base_seed: u64,
    shuffle_seed: u64,
    batch_size: BatchSize,
) -> Result<InputSequence> {
    let mut solutions = base.to_vec();
    shuffle_solutions(&mut solutions, shuffle_seed);
    Ok(InputSequence {
        front_kind: kind,
        base_seed,
        shuffle_seed,
        batches: chop(solutions, batch_size)?,
    })
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub(crate) fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn objective_headers(m: usize) -> impl Iterator<Item = String> {
    (1..=m).map(|i| format!("f{i}"))
}

/// Writes `id,f1..fm,batch` rows in arrival order; batches are numbered
/// from 1.
pub fn write_sequence(path: &Path, batches: &[Vec<Solution>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let m = batches
        .iter()
        .flatten()
        .next()
        .map_or(0, |s| s.objectives.dim());
    let header: Vec<String> = std::iter::once("id".to_string())
        .chain(objective_headers(m))
        .chain(std::iter::once("batch".to_string()))
        .collect();
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (t, batch) in batches.iter().enumerate() {
        for s in batch {
            let row: Vec<String> = std::iter::once(s.id.to_string())
                .chain(s.values().iter().map(|&v| format_value(v)))
                .chain(std::iter::once((t + 1).to_string()))
                .collect();
            w.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a sequence file back into its batches.
pub fn read_sequence(path: &Path) -> Result<Vec<Vec<Solution>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    let width = header.len();
    if width < 4 || &header[0] != "id" || &header[width - 1] != "batch" {
        return Err(Error::format(path, "expected header id,f1,...,fm,batch"));
    }
    let m = width - 2;
    for (i, name) in objective_headers(m).enumerate() {
        if header[i + 1] != name {
            return Err(Error::format(path, format!("column {} should be {name}", i + 1)));
        }
    }
    let mut batches: Vec<Vec<Solution>> = Vec::new();
    let mut current_batch = 0usize;
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let bad = |what: &str| Error::format(path, format!("row {}: bad {what}", line + 1));
        let id: usize = record[0].parse().map_err(|_| bad("id"))?;
        let values = (1..=m)
            .map(|i| record[i].parse::<f64>().map_err(|_| bad("objective value")))
            .collect::<Result<Vec<_>>>()?;
        let batch: usize = record[m + 1].parse().map_err(|_| bad("batch"))?;
        if batch == 0 || batch < current_batch {
            return Err(bad("batch number (must be positive and non-decreasing)"));
        }
        if batch != current_batch {
            batches.push(Vec::new());
            current_batch = batch;
        }
        let objectives = ObjectiveVector::new(values).map_err(|e| bad(&e.to_string()))?;
        batches
            .last_mut()
            .expect("batch pushed above")
            .push(Solution::new(id, objectives));
    }
    Ok(batches)
}

/// Writes a reference set with an `f1..fm` header.
pub fn write_reference_set(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let m = points.first().map_or(0, Vec::len);
    w.write_record(objective_headers(m))
        .map_err(|e| Error::csv(path, e))?;
    for p in points {
        w.write_record(p.iter().map(|&v| format_value(v)))
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_reference_set(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let m = r.headers().map_err(|e| Error::csv(path, e))?.len();
    r.records()
        .enumerate()
        .map(|(line, record)| {
            let record = record.map_err(|e| Error::csv(path, e))?;
            (0..m)
                .map(|i| {
                    record[i].parse::<f64>().map_err(|_| {
                        Error::format(path, format!("row {}: bad value", line + 1))
                    })
                })
                .collect()
        })
        .collect()
}
