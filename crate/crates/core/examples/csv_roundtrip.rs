//! Load a CSV against a TOML schema, split it, and write it back.

use synthpriv::data::{self, Schema};
use synthpriv::RngSeed;

const SCHEMA: &str = r#"
[[columns]]
name = "temperature"
kind = "numeric"

[[columns]]
name = "power"
kind = "numeric"

[[columns]]
name = "room"
kind = "label"
"#;

const CSV: &str = "\
room,temperature,power
kitchen,21.5,310
kitchen,22.0,290
kitchen,23.1,450
bedroom,19.0,40
bedroom,18.5,35
bedroom,19.2,60
";

fn main() -> synthpriv::Result<()> {
    let schema = Schema::from_toml_str(SCHEMA)?;
    let table = data::read_csv(CSV.as_bytes(), &schema)?;
    println!(
        "{} records, features {:?}",
        table.len(),
        schema.feature_names().collect::<Vec<_>>()
    );
    println!("class counts {:?}", table.class_counts());

    let (train, test) = data::stratified_split(&table, 0.34, RngSeed(5))?;
    println!("train {} / test {}", train.len(), test.len());

    let mut buf = Vec::new();
    data::write_csv(&train, &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));

    // Malformed input is rejected with the offending cell.
    let bad = "room,temperature,power\nkitchen,warm,300\n";
    if let Err(e) = data::read_csv(bad.as_bytes(), &schema) {
        println!("rejected: {e}");
    }
    Ok(())
}
