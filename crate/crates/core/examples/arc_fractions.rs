//! Border-arc measures used by the jamming rewards, next to a brute-force
//! count over sampled border points.

use jamsim::geometry::{adversarial_jam_fraction, eavesdropper_exposure, Position};
use jamsim::oracles::{sampled_exposure, sampled_jam_fraction};

fn main() {
    let radius = 10_000.0;
    let n = 200_000;

    let cases = [
        (Position::new(6000.0, 0.0), Position::new(9000.0, 3000.0)),
        (Position::new(0.0, 8000.0), Position::new(-4000.0, 8000.0)),
        (Position::new(-7000.0, -5000.0), Position::new(-9000.0, 0.0)),
    ];
    println!("{:>36} {:>36} {:>9} {:>9}", "transmitter", "jammer", "exact", "sampled");
    for (tx, cj) in cases {
        let exact = eavesdropper_exposure(tx, 5000.0, cj, 6000.0, radius);
        let sampled = sampled_exposure(tx, 5000.0, cj, 6000.0, radius, n);
        println!("{:>36} {:>36} {exact:9.5} {sampled:9.5}", format!("{tx:?}"), format!("{cj:?}"));
    }

    // A jammer on the border with range equal to the radius covers a third.
    for r in [1000.0, 5000.0, 10_000.0] {
        let j = Position::new(r, 0.0);
        println!(
            "jammer at {r:>7.0} m, range 10 km: {:.6} (sampled {:.6})",
            adversarial_jam_fraction(j, radius, radius),
            sampled_jam_fraction(j, radius, radius, n)
        );
    }
}
