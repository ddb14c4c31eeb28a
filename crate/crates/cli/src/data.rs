//! Dataset loading and synthetic problem generators.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use proxsplit::linops::{SparseMatrix, Vector};

use crate::CliError;

/// Feature matrix (rows are samples) with ±1 labels.
#[derive(Debug)]
pub struct Dataset {
    pub a: SparseMatrix,
    pub labels: Vec<f64>,
    pub samples: usize,
    pub features: usize,
}

/// Parse the sparse "label idx:val idx:val ..." text format. Feature
/// indices are 1-based in the file; the column count is inferred from the
/// largest index. Labels in {0, 1} are coerced to {-1, +1} with a notice.
pub fn load_libsvm(path: &Path) -> Result<Dataset, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut labels = Vec::new();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_index = 0usize;
    let mut row = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let label_tok = fields.next().ok_or_else(|| {
            CliError::Data(format!("{}:{}: empty record", path.display(), lineno + 1))
        })?;
        let label: f64 = label_tok.parse().map_err(|_| {
            CliError::Data(format!(
                "{}:{}: bad label `{label_tok}`",
                path.display(),
                lineno + 1
            ))
        })?;
        labels.push(label);
        for tok in fields {
            let (idx, val) = tok.split_once(':').ok_or_else(|| {
                CliError::Data(format!(
                    "{}:{}: expected idx:val, got `{tok}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let idx: usize = idx.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}:{}: bad feature index `{idx}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let val: f64 = val.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}:{}: bad feature value `{val}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            if idx == 0 {
                return Err(CliError::Data(format!(
                    "{}:{}: feature indices are 1-based",
                    path.display(),
                    lineno + 1
                )));
            }
            max_index = max_index.max(idx);
            triplets.push((row, idx - 1, val));
        }
        row += 1;
    }
    if row == 0 {
        return Err(CliError::Data(format!("{}: no samples", path.display())));
    }
    // label convention: {0,1} files are coerced, otherwise labels must be ±1
    if labels.contains(&0.0) {
        if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(CliError::Data(format!(
                "{}: labels mix 0/1 and other values",
                path.display()
            )));
        }
        eprintln!("note: {} uses 0/1 labels; coercing 0 -> -1", path.display());
        for y in labels.iter_mut() {
            *y = if *y == 0.0 { -1.0 } else { 1.0 };
        }
    } else if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(CliError::Data(format!(
            "{}: labels must be -1/+1 (or 0/1)",
            path.display()
        )));
    }
    let a = SparseMatrix::from_triplets(row, max_index, &triplets)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(Dataset {
        a,
        labels,
        samples: row,
        features: max_index,
    })
}

fn gaussian(rng: &mut Xoshiro256PlusPlus) -> f64 {
    // Box-Muller on two uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Gaussian design matrix, k-sparse ground truth, noisy observations.
/// Deterministic per seed.
pub struct SynthLasso {
    pub a: SparseMatrix,
    pub b: Vector,
    pub x_true: Vector,
}

pub fn synth_lasso(
    seed: u64,
    m: usize,
    q: usize,
    sparsity: usize,
    noise: f64,
) -> Result<SynthLasso, CliError> {
    if m == 0 || q == 0 {
        return Err(CliError::Data(format!(
            "need positive dimensions, got m={m}, q={q}"
        )));
    }
    if sparsity > q {
        return Err(CliError::Data(format!(
            "sparsity {sparsity} exceeds dimension {q}"
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut triplets = Vec::with_capacity(m * q);
    for i in 0..m {
        for j in 0..q {
            triplets.push((i, j, gaussian(&mut rng) / (m as f64).sqrt()));
        }
    }
    let a =
        SparseMatrix::from_triplets(m, q, &triplets).map_err(|e| CliError::Data(e.to_string()))?;
    let mut x_true = vec![0.0; q];
    let mut placed = 0usize;
    while placed < sparsity {
        let j = rng.gen_range(0..q);
        if x_true[j] == 0.0 {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            x_true[j] = sign * (1.0 + rng.gen::<f64>());
            placed += 1;
        }
    }
    let x_true = Vector::from_slice(&x_true);
    let clean = proxsplit::linops::LinearMap::apply(&a, &x_true);
    let noisy: Vec<f64> = clean
        .iter()
        .map(|v| v + noise * gaussian(&mut rng))
        .collect();
    Ok(SynthLasso {
        a,
        b: Vector::from_slice(&noisy),
        x_true,
    })
}

/// Gaussian features with labels from the sign of a planted sparse
/// predictor, a few flipped. Deterministic per seed.
pub fn synth_logistic(seed: u64, m: usize, q: usize) -> Result<Dataset, CliError> {
    if m == 0 || q == 0 {
        return Err(CliError::Data(format!(
            "need positive dimensions, got m={m}, q={q}"
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut triplets = Vec::with_capacity(m * q);
    for i in 0..m {
        for j in 0..q {
            triplets.push((i, j, gaussian(&mut rng)));
        }
    }
    let a =
        SparseMatrix::from_triplets(m, q, &triplets).map_err(|e| CliError::Data(e.to_string()))?;
    let k = (q / 5).max(1);
    let mut w = vec![0.0; q];
    for slot in 0..k {
        w[slot * (q / k)] = if slot % 2 == 0 { 1.0 } else { -1.0 };
    }
    let w = Vector::from_slice(&w);
    let scores = proxsplit::linops::LinearMap::apply(&a, &w);
    let labels: Vec<f64> = scores
        .iter()
        .map(|s| {
            let clean = if *s >= 0.0 { 1.0 } else { -1.0 };
            if rng.gen::<f64>() < 0.05 {
                -clean
            } else {
                clean
            }
        })
        .collect();
    Ok(Dataset {
        a,
        labels,
        samples: m,
        features: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proxsplit::linops::LinearMap;

    fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
        let path =
            std::env::temp_dir().join(format!("proxsplit_test_{name}_{}", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn parses_plain_record() {
        let p = write_temp("plain", "+1 1:0.5 3:2\n-1 2:1\n");
        let ds = load_libsvm(&p).unwrap();
        std::fs::remove_file(&p).ok();
        assert_eq!(ds.samples, 2);
        assert_eq!(ds.features, 3);
        assert_eq!(ds.labels, vec![1.0, -1.0]);
        let x = Vector::from_slice(&[1.0, 1.0, 1.0]);
        let out = ds.a.apply(&x);
        assert_eq!(out.as_slice(), &[2.5, 1.0]);
    }

    #[test]
    fn zero_one_labels_coerced() {
        let p = write_temp("zeroone", "0 1:1\n1 1:2\n");
        let ds = load_libsvm(&p).unwrap();
        std::fs::remove_file(&p).ok();
        assert_eq!(ds.labels, vec![-1.0, 1.0]);
    }

    #[test]
    fn feature_count_from_max_index() {
        let p = write_temp("maxidx", "+1 7:1\n-1 2:1\n");
        let ds = load_libsvm(&p).unwrap();
        std::fs::remove_file(&p).ok();
        assert_eq!(ds.features, 7);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let p = write_temp("bad", "+1 1:0.5\n-1 oops\n");
        let err = load_libsvm(&p).unwrap_err();
        std::fs::remove_file(&p).ok();
        assert!(err.to_string().contains(":2:"), "got {err}");
    }

    #[test]
    fn synth_is_deterministic_per_seed() {
        let a = synth_lasso(42, 5, 3, 2, 0.1).unwrap();
        let b = synth_lasso(42, 5, 3, 2, 0.1).unwrap();
        assert_eq!(a.b.as_slice(), b.b.as_slice());
        assert_eq!(a.x_true.as_slice(), b.x_true.as_slice());
        let c = synth_lasso(43, 5, 3, 2, 0.1).unwrap();
        assert_ne!(a.b.as_slice(), c.b.as_slice());
    }

    #[test]
    fn synth_rejects_degenerate_sizes() {
        assert!(synth_lasso(1, 0, 3, 1, 0.0).is_err());
        assert!(synth_lasso(1, 5, 3, 4, 0.0).is_err());
        assert!(synth_logistic(1, 0, 3).is_err());
    }
}
