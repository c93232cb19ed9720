//! Oversample the minority activity and check where the new records land.

use synthpriv::smote::{self, GapMode, SmoteConfig};
use synthpriv::surrogate::{self, SurrogateConfig};
use synthpriv::{Provenance, RngSeed};

fn main() -> synthpriv::Result<()> {
    let data = surrogate::generate(&SurrogateConfig {
        records: 4000,
        ..Default::default()
    });
    let minority = surrogate::minority_label();
    let before = data.count_of(&minority);

    for gap in [GapMode::PerAttribute, GapMode::PerRecord] {
        let cfg = SmoteConfig {
            amount_percent: 130,
            neighbors: 5,
            gap,
            seed: RngSeed(11),
            ..Default::default()
        };
        let merged = smote::run_smote(&data, &minority, &cfg)?;
        let after = merged.count_of(&minority);
        println!(
            "{gap:?}: minority {before} -> {after} (+{}, expected {}), provenance {:?}",
            after - before,
            cfg.synthetic_count(before),
            merged.provenance(),
        );
    }

    // The neighbour table on its own.
    let table = smote::NeighborTable::build_within(&data, &minority, 3, 2.0)?;
    let first = &table.row(0)[0];
    println!(
        "record 0 of the minority: nearest neighbour {} at distance {:.3}",
        first.index, first.distance
    );
    assert_eq!(data.provenance(), Provenance::Original);
    Ok(())
}
