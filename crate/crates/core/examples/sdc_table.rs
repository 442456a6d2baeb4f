//! Disclosure criteria for a released microdata table. Each class of
//! quasi-identifier values acts as an observation revealing the class's
//! confidential distribution.

use std::collections::BTreeMap;

use privest::sdc::{sdc_report, MicrodataTable, Role};

const TABLE: &str = "\
name,zip,age,disease
Ann,130**,<30,AIDS
Bea,130**,<30,AIDS
Cal,130**,<30,AIDS
Dee,130**,<30,flu
Eve,148**,>=40,AIDS
Fay,148**,>=40,flu
Gus,148**,>=40,flu
Hal,148**,>=40,flu
";

fn main() -> privest::Result<()> {
    let roles = BTreeMap::from([
        ("name".to_string(), Role::Identifier),
        ("zip".to_string(), Role::Key),
        ("age".to_string(), Role::Key),
        ("disease".to_string(), Role::Confidential),
    ]);
    let table = MicrodataTable::from_csv(TABLE.as_bytes(), &roles)?;
    let r = sdc_report(&table, "disease")?;

    println!("{} rows in {} classes", r.rows, r.classes);
    println!("k-anonymity        {}", r.k);
    println!(
        "l-diversity        {} distinct, {:.4} entropy",
        r.l_distinct, r.l_entropy
    );
    println!("privacy risk R     {:.4} bits", r.risk);
    println!("t-closeness        {:.4} bits", r.t);
    println!("delta-disclosure   {:.4}", r.delta);
    println!("R <= t <= delta    {}", r.risk <= r.t && r.t <= r.delta);
    for c in &r.per_class {
        println!(
            "  class {:?}: size {}, KL to prior {:.4}",
            c.key_tuple, c.size, c.kl_bits
        );
    }
    Ok(())
}
