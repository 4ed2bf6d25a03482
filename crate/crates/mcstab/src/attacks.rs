//! Shilling-attack simulation: ground-truth generation, targeted and mass
//! attacker columns, decomposition of attacks against the honest subspace,
//! and error accounting split between honest and attacker blocks.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::matcore::rmse;
use crate::subgeo::Subspace;

/// The two attacker archetypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackModel {
    /// Each attacker copies a random honest column and overwrites a few
    /// entries with ±k pushes/nukes, staying close to the honest subspace.
    Targeted,
    /// Each attacker rates i.i.d. uniformly on [−k, k], mostly orthogonal to
    /// the honest subspace.
    Mass,
}

impl std::fmt::Display for AttackModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttackModel::Targeted => write!(f, "targeted"),
            AttackModel::Mass => write!(f, "mass"),
        }
    }
}

/// Parameters of an attack block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    pub model: AttackModel,
    /// Number of attacker columns appended to the dataset.
    pub n_e: usize,
    /// Entries pushed to +k per targeted attacker.
    pub n_push: usize,
    /// Entries nuked to −k per targeted attacker.
    pub n_nuke: usize,
    /// Rating bound; push/nuke targets sit exactly at ±k.
    pub k: f64,
}

impl AttackSpec {
    fn validate(&self, m: usize) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rating bound k must be positive and finite, got {}",
                self.k
            )));
        }
        if self.n_push + self.n_nuke > m {
            return Err(Error::InvalidArgument(format!(
                "{} push + {} nuke targets exceed {m} rows",
                self.n_push, self.n_nuke
            )));
        }
        Ok(())
    }

    /// Maximum number of modified entries per targeted attacker column.
    pub fn s_max(&self) -> usize {
        self.n_push + self.n_nuke
    }
}

/// A complete attacked instance: observed data, the ground truth the
/// recovery is judged against, and the attack energy outside the honest
/// subspace.
#[derive(Debug, Clone)]
pub struct AttackedDataset {
    /// [Y | E]: honest columns followed by attacker columns.
    pub combined: DMatrix<f64>,
    /// [Y | E_gnd], where E_gnd is the attack projected onto the honest
    /// subspace — the best any rank-r model aligned with it could do.
    pub ground_truth: DMatrix<f64>,
    /// [0 | E_perp]: the attack energy orthogonal to the honest subspace.
    pub orthogonal_part: DMatrix<f64>,
    pub honest_cols: usize,
    pub attacker_cols: usize,
}

/// Draws a rank-r ground-truth matrix as the product G₁G₂ᵀ of two Gaussian
/// factors with entry standard deviation `scale`.
pub fn gen_ground_truth_gaussian(
    m: usize,
    n: usize,
    r: usize,
    scale: f64,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if r == 0 || r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range for a {m}x{n} matrix"
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows: usize, cols: usize| {
        let mut x = DMatrix::zeros(rows, cols);
        for c in 0..cols {
            for i in 0..rows {
                let g: f64 = StandardNormal.sample(&mut rng);
                x[(i, c)] = scale * g;
            }
        }
        x
    };
    let g1 = draw(m, r);
    let g2 = draw(n, r);
    Ok(g1 * g2.transpose())
}

/// Generates targeted attacker columns: each copies a uniformly chosen
/// column of `y`, then overwrites `n_push` entries with +k and `n_nuke`
/// entries with −k at distinct uniformly chosen rows.
pub fn targeted_attack(y: &DMatrix<f64>, spec: &AttackSpec, seed: u64) -> Result<DMatrix<f64>> {
    if spec.model != AttackModel::Targeted {
        return Err(Error::InvalidArgument(format!(
            "targeted_attack called with a {} spec",
            spec.model
        )));
    }
    let (m, n) = y.shape();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot target an empty honest matrix".into(),
        ));
    }
    spec.validate(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(m, spec.n_e);
    let mut positions: Vec<usize> = (0..m).collect();
    for a in 0..spec.n_e {
        let source = rng.random_range(0..n);
        for i in 0..m {
            out[(i, a)] = y[(i, source)];
        }
        // Partial shuffle gives s_max distinct target rows.
        let s = spec.s_max();
        for t in 0..s {
            let j = rng.random_range(t..m);
            positions.swap(t, j);
        }
        for (t, &row) in positions[..s].iter().enumerate() {
            out[(row, a)] = if t < spec.n_push { spec.k } else { -spec.k };
        }
    }
    Ok(out)
}

/// Generates mass attacker columns with i.i.d. uniform entries on [−k, k].
pub fn mass_attack(m: usize, spec: &AttackSpec, seed: u64) -> Result<DMatrix<f64>> {
    if spec.model != AttackModel::Mass {
        return Err(Error::InvalidArgument(format!(
            "mass_attack called with a {} spec",
            spec.model
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("attacker columns need rows".into()));
    }
    spec.validate(m)?;
    let dist = Uniform::new_inclusive(-spec.k, spec.k)
        .map_err(|e| Error::InvalidArgument(format!("bad uniform range: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(m, spec.n_e);
    for a in 0..spec.n_e {
        for i in 0..m {
            out[(i, a)] = dist.sample(&mut rng);
        }
    }
    Ok(out)
}

/// Splits an attack into its component inside the honest subspace and the
/// remainder: E_gnd = NNᵀE, E_perp = E − E_gnd.
pub fn decompose_against_subspace(
    e: &DMatrix<f64>,
    n_gnd: &Subspace,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if e.nrows() != n_gnd.ambient_dim() {
        return Err(Error::ShapeMismatch {
            expected_rows: n_gnd.ambient_dim(),
            expected_cols: e.ncols(),
            rows: e.nrows(),
            cols: e.ncols(),
        });
    }
    let coeffs = n_gnd.basis().transpose() * e;
    let e_gnd = n_gnd.basis() * coeffs;
    let e_perp = e - &e_gnd;
    Ok((e_gnd, e_perp))
}

/// Assembles the attacked dataset [Y | E] together with its ground truth
/// [Y | E_gnd] and the orthogonal attack energy [0 | E_perp].
pub fn assemble(y: &DMatrix<f64>, e: &DMatrix<f64>, n_gnd: &Subspace) -> Result<AttackedDataset> {
    if y.nrows() != e.nrows() {
        return Err(Error::ShapeMismatch {
            expected_rows: y.nrows(),
            expected_cols: e.ncols(),
            rows: e.nrows(),
            cols: e.ncols(),
        });
    }
    if y.nrows() != n_gnd.ambient_dim() {
        return Err(Error::ShapeMismatch {
            expected_rows: n_gnd.ambient_dim(),
            expected_cols: y.ncols(),
            rows: y.nrows(),
            cols: y.ncols(),
        });
    }
    let (m, n) = y.shape();
    let n_e = e.ncols();
    let (e_gnd, e_perp) = decompose_against_subspace(e, n_gnd)?;
    let mut combined = DMatrix::zeros(m, n + n_e);
    let mut ground_truth = DMatrix::zeros(m, n + n_e);
    let mut orthogonal_part = DMatrix::zeros(m, n + n_e);
    for j in 0..n {
        for i in 0..m {
            combined[(i, j)] = y[(i, j)];
            ground_truth[(i, j)] = y[(i, j)];
        }
    }
    for j in 0..n_e {
        for i in 0..m {
            combined[(i, n + j)] = e[(i, j)];
            ground_truth[(i, n + j)] = e_gnd[(i, j)];
            orthogonal_part[(i, n + j)] = e_perp[(i, j)];
        }
    }
    Ok(AttackedDataset {
        combined,
        ground_truth,
        orthogonal_part,
        honest_cols: n,
        attacker_cols: n_e,
    })
}

/// RMSE of a recovery against the dataset's ground truth, split into the
/// honest block and the attacker block. With no attackers the second
/// component is 0.
pub fn split_rmse(recovered: &DMatrix<f64>, dataset: &AttackedDataset) -> Result<(f64, f64)> {
    let m = dataset.ground_truth.nrows();
    let total = dataset.honest_cols + dataset.attacker_cols;
    if recovered.nrows() != m || recovered.ncols() != total {
        return Err(Error::ShapeMismatch {
            expected_rows: m,
            expected_cols: total,
            rows: recovered.nrows(),
            cols: recovered.ncols(),
        });
    }
    let honest_rec = recovered.columns(0, dataset.honest_cols).into_owned();
    let honest_gnd = dataset
        .ground_truth
        .columns(0, dataset.honest_cols)
        .into_owned();
    let rmse_honest = rmse(&honest_rec, &honest_gnd)?;
    let rmse_attack = if dataset.attacker_cols == 0 {
        0.0
    } else {
        let att_rec = recovered
            .columns(dataset.honest_cols, dataset.attacker_cols)
            .into_owned();
        let att_gnd = dataset
            .ground_truth
            .columns(dataset.honest_cols, dataset.attacker_cols)
            .into_owned();
        rmse(&att_rec, &att_gnd)?
    };
    Ok((rmse_honest, rmse_attack))
}

/// Writes the plain-text sidecar manifest describing an attack block:
/// one `key: value` line each for n, n_e, k, model, seed.
pub fn write_manifest<W: Write>(mut w: W, spec: &AttackSpec, n: usize, seed: u64) -> Result<()> {
    writeln!(w, "n: {n}")?;
    writeln!(w, "n_e: {}", spec.n_e)?;
    writeln!(w, "k: {}", spec.k)?;
    writeln!(w, "model: {}", spec.model)?;
    writeln!(w, "seed: {seed}")?;
    Ok(())
}
