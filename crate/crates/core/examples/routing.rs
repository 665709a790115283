// Cheapest insertion and exact advancement on a single vehicle.

use ewt_reg::mdp::Mdp;
use ewt_reg::{Location, PassengerId, Route, TravelModel};

pub fn run_example() -> ewt_reg::Result<()> {
    let model = TravelModel::default();
    let mut route = Route::new(Location::new(0.5, 0.5), 6);
    let trips = [
        (Location::new(0.1, 0.9), Location::new(0.8, 0.2)),
        (Location::new(0.2, 0.7), Location::new(0.9, 0.4)),
        (Location::new(0.6, 0.1), Location::new(0.3, 0.3)),
    ];
    for (i, (o, d)) in trips.into_iter().enumerate() {
        route = route.insert_trip(PassengerId(i as u32), o, d, &model)?;
        println!(
            "after inserting p{i}: {} stops, completion {:.3} min",
            route.stops.len(),
            route.completion_time(&model)
        );
    }
    for p in 0..3 {
        println!("p{p} picked up in {:.3} min", route.pickup_time(PassengerId(p), &model)?);
    }

    let mdp = Mdp::default();
    for t in [0.0, 2.0, 4.0, 8.0] {
        let moved = route.advance(t, &model);
        println!(
            "t={t:>4}: vehicle at ({:.3}, {:.3}), {} onboard, {} stops left, EWT {:.3} min",
            moved.vehicle_position.x,
            moved.vehicle_position.y,
            moved.onboard.len(),
            moved.stops.len(),
            mdp.estimate_ewt_route(&moved)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> ewt_reg::Result<()> {
    run_example()
}
