//! Ensembles of projected NSE final states.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::levy::measure::LevyMeasureSpec;
use crate::nse::{final_state, ForcingPath, SolverConfig};
use crate::seed;
use crate::torus::{ModeIndex, ModeSet, SpectralVelocity};

/// Hex SHA-256 of the canonical JSON encoding of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// `F` spanned by a list of distinct resolved modes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSubspace {
    modes: Vec<ModeIndex>,
}

impl ProjectionSubspace {
    pub fn new(modes: Vec<ModeIndex>) -> Result<ProjectionSubspace> {
        if modes.is_empty() {
            return domain("projection subspace needs at least one mode");
        }
        for (i, m) in modes.iter().enumerate() {
            m.validate()?;
            if m.is_constant() {
                return domain("constant modes are not part of the dynamical state");
            }
            if modes[..i].contains(m) {
                return domain(format!("mode {m:?} listed twice"));
            }
        }
        Ok(ProjectionSubspace { modes })
    }

    /// The `dim` lowest-eigenvalue modes whose sites lie outside `K`.
    pub fn outside(k: &ModeSet, dim: usize, truncation: u32) -> Result<ProjectionSubspace> {
        let mut all: Vec<ModeIndex> = SpectralVelocity::zeros(truncation)
            .modes()
            .map(|(m, _)| m)
            .filter(|m| !k.contains((m.j1, m.j2)))
            .collect();
        all.sort_by_key(|m| (m.norm_sq(), *m));
        if all.len() < dim {
            return domain("not enough modes outside K");
        }
        ProjectionSubspace::new(all[..dim].to_vec())
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn check_within(&self, truncation: u32) -> Result<()> {
        let t = SpectralVelocity::zeros(truncation);
        match self.modes.iter().find(|m| t.index_of(**m).is_none()) {
            Some(m) => domain(format!("mode {m:?} of F outside truncation {truncation}")),
            None => Ok(()),
        }
    }

    /// `pi_F u`
    pub fn project(&self, u: &SpectralVelocity) -> Result<Vec<f64>> {
        self.modes.iter().map(|m| u.get(*m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseLaw {
    Zero,
    Levy { spec: LevyMeasureSpec, eps: f64 },
    Fbm { hurst: f64 },
}

/// Recipe for a forcing path: law, mode set and amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    /// Generator sites of `K`; closed under negation and the origin added.
    pub sites: Vec<(i32, i32)>,
    pub law: NoiseLaw,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl ForcingSpec {
    pub fn mode_set(&self) -> ModeSet {
        ModeSet::symmetrized(self.sites.iter().copied())
    }

    pub fn path(&self, config: &SolverConfig, seed: u64) -> Result<ForcingPath> {
        let k = self.mode_set();
        match self.law {
            NoiseLaw::Zero => Ok(ForcingPath::zero(&k, config.steps, config.dt)),
            NoiseLaw::Levy { spec, eps } => {
                ForcingPath::levy(&k, &spec, eps, config.steps, config.dt, self.amplitude, seed)
            }
            NoiseLaw::Fbm { hurst } => ForcingPath::fbm(&k, hurst, config.steps, config.dt, self.amplitude, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub base_seed: u64,
    /// Members `0..members`; member `m` draws from `derive(base_seed, [ENSEMBLE, m])`.
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    pub modes: Vec<ModeIndex>,
    /// `pi_F u(T)` per retained member, in member order.
    pub rows: Vec<Vec<f64>>,
    pub excluded: usize,
    pub provenance: Provenance,
}

impl EnsembleSample {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[c]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.provenance;
        writeln!(w, "# config_hash={},base_seed={},members={},excluded={}", p.config_hash, p.base_seed, p.members, self.excluded)?;
        let header: Vec<String> =
            self.modes.iter().map(|m| format!("{}_{}_{}", m.j1, m.j2, format!("{:?}", m.parity).to_lowercase())).collect();
        writeln!(w, "{}", header.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Largest tolerated fraction of diverged members.
pub const MAX_EXCLUSION: f64 = 0.01;
pub const MIN_MEMBERS: usize = 100;

#[derive(Serialize)]
struct HashInput<'a> {
    config: &'a SolverConfig,
    forcing: &'a ForcingSpec,
    u0: &'a SpectralVelocity,
    subspace: &'a ProjectionSubspace,
}

/// Seed of member `m` of the ensemble with `base_seed`.
pub fn member_seed(base_seed: u64, m: usize) -> u64 {
    seed::derive(base_seed, &[seed::stream::ENSEMBLE, m as u64])
}

/// `M` independent trajectories from `u0`, each reduced to `pi_F u(T)`.
/// Diverged members are dropped and counted; more than 1% fails the run.
pub fn run_ensemble(
    config: &SolverConfig,
    forcing: &ForcingSpec,
    u0: &SpectralVelocity,
    subspace: &ProjectionSubspace,
    members: usize,
    base_seed: u64,
    exec: Exec,
) -> Result<EnsembleSample> {
    config.validate()?;
    subspace.check_within(config.truncation)?;
    if members < MIN_MEMBERS {
        return Err(Error::InsufficientSamples { needed: MIN_MEMBERS, got: members });
    }
    if u0.truncation() != config.truncation {
        return Err(Error::TruncationMismatch { left: u0.truncation() as usize, right: config.truncation as usize });
    }
    let config_hash = config_hash(&HashInput { config, forcing, u0, subspace })?;
    let results: Vec<Result<Vec<f64>>> = exec.map(members, |m| {
        let path = forcing.path(config, member_seed(base_seed, m))?;
        let u = final_state(u0, &path, config)?;
        subspace.project(&u)
    });
    let mut rows = Vec::with_capacity(members);
    let mut excluded = 0;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(Error::Divergence { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if excluded as f64 > MAX_EXCLUSION * members as f64 {
        return Err(Error::ExcessiveExclusion { excluded, total: members });
    }
    Ok(EnsembleSample {
        modes: subspace.modes().to_vec(),
        rows,
        excluded,
        provenance: Provenance { config_hash, base_seed, members },
    })
}
