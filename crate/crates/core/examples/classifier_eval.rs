//! Train each built-in classifier on one split and print its metrics.

use synthpriv::data::stratified_split;
use synthpriv::eval::{self, ClassifierKind, ClassifierParams};
use synthpriv::surrogate::{self, SurrogateConfig};
use synthpriv::RngSeed;

fn main() -> synthpriv::Result<()> {
    let data = surrogate::generate(&SurrogateConfig {
        records: 6000,
        ..Default::default()
    });
    let (train, test) = stratified_split(&data, 0.3, RngSeed(1))?;
    let params = ClassifierParams::default();

    println!(
        "{:<4} {:>8} {:>9} {:>7} {:>9}",
        "clf", "accuracy", "precision", "recall", "f-measure"
    );
    for kind in ClassifierKind::ALL {
        let r = eval::evaluate(kind, &params, &train, &test, RngSeed(2))?;
        println!(
            "{:<4} {:>8.4} {:>9.4} {:>7.4} {:>9.4}",
            r.classifier, r.accuracy, r.macro_precision, r.macro_recall, r.macro_f_measure
        );
    }

    let nb = eval::evaluate(ClassifierKind::Nb, &params, &train, &test, RngSeed(2))?;
    let minority = nb
        .per_class
        .iter()
        .find(|c| c.label == surrogate::minority_label())
        .expect("minority class in the test split");
    println!(
        "nb on the minority activity: precision {:.3}, recall {:.3}",
        minority.precision, minority.recall
    );
    Ok(())
}
