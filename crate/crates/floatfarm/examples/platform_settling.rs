//! Releases a single moored platform into a steady 8 m/s wind and tracks the
//! drift to its downwind equilibrium, then repeats with a 10 degree yaw to
//! show the crosswind walk the controller exploits.

use floatfarm::farm::{make_row_farm, MooringSpec, TurbineInput, TurbineSpec};
use floatfarm::vec2::Vec2;
use floatfarm::wake::step_farm;
use floatfarm::SIM_DT;

fn main() -> floatfarm::Result<()> {
    let config = make_row_farm(1, 7.0, TurbineSpec::default(), MooringSpec::default())?;
    let wind = Vec2::new(8.0, 0.0);

    for (label, yaw_deg) in [("zero yaw", 0.0_f64), ("10 degree yaw", 10.0)] {
        let inputs = vec![TurbineInput { induction: 1.0 / 3.0, yaw: yaw_deg.to_radians() }];
        let mut farm = floatfarm::wake::FarmState::with_states(config.neutral_states());
        println!("{label}:");
        for minute in 0..=30 {
            if minute % 5 == 0 {
                let s = &farm.states[0];
                println!(
                    "  t = {:4} s: position ({:6.2}, {:6.2}) m, speed {:.3} m/s",
                    minute * 60,
                    s.x,
                    s.y,
                    s.velocity().norm()
                );
            }
            if minute == 30 {
                break;
            }
            for _ in 0..60 {
                step_farm(&mut farm, &inputs, wind, SIM_DT, &config)?;
            }
        }
        println!();
    }
    println!("zero yaw parks ~96 m downwind; yawing trades a little of that for crosswind offset");
    Ok(())
}
