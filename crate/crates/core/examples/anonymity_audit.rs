//! k-anonymity audit: how many released records sit in equivalence classes
//! smaller than k, for a few quasi-identifier choices.

use synthpriv::anonymity::{self, QuasiIdentifierSpec};
use synthpriv::surrogate::{self, SurrogateConfig};

fn main() -> synthpriv::Result<()> {
    let data = surrogate::generate(&SurrogateConfig {
        records: 6000,
        ..Default::default()
    });

    let chest = QuasiIdentifierSpec::binned(surrogate::QUASI_IDENTIFIERS, 10);
    let everything = QuasiIdentifierSpec::all_numeric(&data, 10);
    let coarse = QuasiIdentifierSpec::binned(surrogate::QUASI_IDENTIFIERS, 4);

    for (name, spec) in [
        ("chest unit", &chest),
        ("all channels", &everything),
        ("chest, 4 bins", &coarse),
    ] {
        for k in [2, 5] {
            let report = anonymity::audit(&data, spec, k)?;
            println!(
                "{name:<14} k = {k}: {:>5} classes, {:>5} of {} records at risk (risk {:.3})",
                report.equivalence_classes, report.at_risk_count, report.total_records, report.risk
            );
        }
    }

    let classes = anonymity::equivalence_classes(&data, &chest)?;
    let largest = classes.sizes().max().unwrap_or(0);
    println!("largest chest-unit class holds {largest} records");
    Ok(())
}
