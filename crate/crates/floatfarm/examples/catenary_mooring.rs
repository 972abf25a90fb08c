//! Solves the mooring catenary across its two regimes and prints the
//! restoring-force curve a single platform feels as it drifts downwind.

use floatfarm::farm::MooringSpec;
use floatfarm::platform::{mooring_force, solve_catenary, CatenaryRegime};
use floatfarm::vec2::Vec2;

fn main() -> floatfarm::Result<()> {
    let mooring = MooringSpec::default();
    println!("line: length {} m, depth {} m, weight {} N/m", mooring.line_length, mooring.water_depth, mooring.line_weight_per_length);

    println!("\nhorizontal tension vs fairlead-anchor span:");
    for span in [760.0, 800.0, 840.0, 880.0, 900.0, 910.0, 920.0, 925.0, 928.0] {
        let sol = solve_catenary(span, &mooring)?;
        let regime = match sol.regime {
            CatenaryRegime::PartiallyResting => "partially resting",
            CatenaryRegime::FullyLifted => "fully lifted",
        };
        println!(
            "  span {span:6.1} m: H = {:10.3e} N, grounded {:6.1} m ({regime})",
            sol.horizontal_tension, sol.grounded_length
        );
    }

    println!("\nnet mooring pull vs downwind platform offset (3 lines):");
    let neutral = Vec2::new(0.0, 0.0);
    for offset in [0.0, 25.0, 50.0, 75.0, 96.11, 110.0, 125.0] {
        let f = mooring_force(Vec2::new(offset, 0.0), neutral, &mooring)?;
        println!("  x = {offset:6.2} m: force ({:10.3e}, {:9.2e}) N", f.x, f.y);
    }
    println!("\nat 96.11 m the pull balances the 4.345e5 N rated-wind thrust");
    Ok(())
}
