//! Load a bundled specification and run every applicable command.

use std::path::PathBuf;

use defectscope::commands;
use defectscope::spec::load;

fn main() -> defectscope::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "hexagon".into());
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"));
    let p = load(&path)?;
    print!("{}", commands::analyze(&p)?.text);
    if p.field.is_some() {
        print!("{}", commands::check(&p)?.text);
    }
    print!("{}", commands::predict(&p)?.text);
    Ok(())
}
