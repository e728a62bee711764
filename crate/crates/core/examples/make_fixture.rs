//! Regenerates `tests/fixtures/fixture.png`.

use seamcarve::bench::{fixture_image, FIXTURE_SEED};
use seamcarve::raster::save_image;

fn main() -> seamcarve::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/fixture.png");
    save_image(&fixture_image(240, FIXTURE_SEED), path)?;
    println!("wrote {path}");
    Ok(())
}
