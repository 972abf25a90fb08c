//! Builds row farms and prints their geometry: neutral platform positions,
//! mooring anchors, and the neighbor graph the controller communicates over.

use std::f64::consts::PI;

use floatfarm::farm::{make_row_farm, MooringSpec, TurbineSpec};
use floatfarm::vec2::Vec2;

fn main() -> floatfarm::Result<()> {
    let spec = TurbineSpec::default();
    println!(
        "turbine: rotor diameter {} m, swept area {:.0} m^2, effective mass {:.1e} kg",
        spec.rotor_diameter,
        spec.hub_area(),
        spec.effective_mass
    );
    let mooring = MooringSpec::default();
    println!(
        "mooring: {} lines, anchor radius {} m, line length {} m, depth {} m\n",
        mooring.num_lines, mooring.anchor_radius, mooring.line_length, mooring.water_depth
    );

    for n in [2, 5] {
        let farm = make_row_farm(n, 7.0, spec, mooring.clone())?;
        println!("1x{n} row, 7 diameter spacing:");
        for (i, t) in farm.turbines.iter().enumerate() {
            let neighbors: Vec<String> =
                farm.adjacency[i].iter().map(|j| j.to_string()).collect();
            println!(
                "  turbine {i}: neutral ({:8.1}, {:4.1}) m, neighbors [{}]",
                t.neutral.x,
                t.neutral.y,
                neighbors.join(", ")
            );
            if i == 0 {
                // One line points upwind, the rest spread evenly around.
                let step = 2.0 * PI / mooring.num_lines as f64;
                for k in 0..mooring.num_lines {
                    let anchor =
                        t.neutral + Vec2::from_angle(PI + k as f64 * step) * mooring.anchor_radius;
                    println!("    anchor {k}: ({:8.1}, {:8.1}) m", anchor.x, anchor.y);
                }
            }
        }
        println!();
    }
    Ok(())
}
