use spillnet::*;

fn main() {
    // 1. Steep triangle enumeration at k = 3.95.
    let econ = Economy::new(
        vec![
            Player::new(10.0, 1.0, Preference::CobbDouglas { a: 0.99 }).unwrap(),
            Player::new(8.0, 1.0, Preference::CobbDouglas { a: 0.99 }).unwrap(),
            Player::new(8.0, 1.0, Preference::CobbDouglas { a: 0.99 }).unwrap(),
        ],
        3.95,
    )
    .unwrap();
    let res = enumerate_equilibria(&econ, Refinement::Nash).unwrap();
    println!("nash count = {}", res.equilibria.len());
    for (i, eq) in res.equilibria.iter().enumerate() {
        println!(
            "#{i}: edges {:?} x {:?} sociable={} strict={}",
            eq.profile.links.edges(),
            eq.profile.x.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            eq.verdict.is_sociable,
            eq.verdict.is_strict
        );
    }
    println!("classes: {:?}", res.symmetry_classes);

    // 2. Core construction on the steep triangle.
    match core_construction(&econ, &[0, 1]) {
        Ok(c) => println!("core ok xbar={} prov={:?}", c.core_consumption, c.provisions),
        Err(e) => {
            println!("core err: {e}");
            let cand_profile = {
                // rebuild by hand: mutual 0-1, player 2 links both
                let g = LinkProfile::from_edges(3, &[(0, 1), (1, 0), (2, 0), (2, 1)]).unwrap();
                consumption_fixed_point(&econ, &g).unwrap()
            };
            let v = check_equilibrium(&econ, &cand_profile).unwrap();
            println!("manual g** verdict nash={} witness={:?}", v.is_nash, v.witness);
        }
    }

    // 3. Efficiency for the homogeneous four-player economy.
    let econ4 = Economy::new(
        vec![
            Player::new(10.0, 1.0, Preference::CobbDouglas { a: 0.5 }).unwrap(),
            Player::new(9.0, 1.0, Preference::CobbDouglas { a: 0.5 }).unwrap(),
            Player::new(8.0, 1.0, Preference::CobbDouglas { a: 0.5 }).unwrap(),
            Player::new(4.0, 1.0, Preference::CobbDouglas { a: 0.5 }).unwrap(),
        ],
        1.0,
    )
    .unwrap();
    let sol = efficient_solution(&econ4).unwrap();
    println!("efficient shape={:?} welfare={} x={:?} y={:?}", sol.shape, sol.welfare, sol.x, sol.y);
}
