//! Universe, family and splits in one call, shared by every front end so
//! that all of them produce the same dataset bytes.

use std::sync::atomic::AtomicUsize;

use crate::error::Result;
use crate::io::{Dataset, DatasetMode};
use crate::sampler::generate_family_with_progress;
use crate::tasks::{make_node_splits, make_splits, SplitFractions};
use crate::types::{FamilyConfig, UniverseConfig};
use crate::universe::build_universe;

/// A generated dataset together with per-graph generation times.
pub struct Generated {
    pub dataset: Dataset,
    pub generation_secs: Vec<f64>,
}

/// Builds the universe, generates the family on the current rayon pool and
/// draws splits keyed by the family seed. The family seed is resolved in
/// the stored config.
pub fn generate_dataset(
    universe_config: &UniverseConfig,
    family: &FamilyConfig,
    mode: DatasetMode,
    progress: &AtomicUsize,
) -> Result<Generated> {
    let universe = build_universe(universe_config)?;
    let mut family = family.clone();
    family.seed = Some(family.effective_seed(&universe));
    let seed = family.seed.unwrap_or_default();
    let outcome = generate_family_with_progress(&universe, &family, progress)?;
    let splits = match mode {
        DatasetMode::Inductive => {
            // Positions become graph indices, which differ once a graph failed.
            let mut splits = make_splits(seed, outcome.instances.len(), SplitFractions::default())?;
            for part in [&mut splits.train, &mut splits.val, &mut splits.test] {
                part.iter_mut().for_each(|i| *i = outcome.instances[*i].graph_index);
            }
            splits
        }
        DatasetMode::Transductive => {
            let graph = outcome.instances.first().ok_or_else(|| {
                crate::error::GenError::InvalidArgument("transductive mode needs one graph".into())
            })?;
            make_node_splits(seed, &graph.node_community, SplitFractions::default())?
        }
    };
    Ok(Generated {
        dataset: Dataset {
            mode,
            universe,
            family,
            instances: outcome.instances,
            splits,
        },
        generation_secs: outcome.generation_secs,
    })
}
