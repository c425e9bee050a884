// The analytic part of the reproduction suite. `radio-elect verify` runs
// all of it, including the long simulations.

use radio_elect::verify::verify;
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let report = verify(&[1, 2, 3, 4, 8])?;
    print!("{report}");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
