//! Builds cylindrical grids and walls and prints their sizes and degrees.

use dirlink::generators::{gen_cyl_grid, gen_cyl_wall, gen_random};
use dirlink::graph::strongly_connected_components;

fn main() {
    println!("k  grid_n grid_m wall_n wall_m max_wall_degree strong");
    for k in 1..=6 {
        let grid = gen_cyl_grid(k);
        let wall = gen_cyl_wall(k);
        let max_degree = (0..wall.g.n()).map(|v| wall.g.in_degree(v) + wall.g.out_degree(v)).max().unwrap();
        let strong = strongly_connected_components(&grid.g).len() == 1;
        println!(
            "{k:<2} {:>6} {:>6} {:>6} {:>6} {:>15} {strong}",
            grid.g.n(),
            grid.g.m(),
            wall.g.n(),
            wall.g.m(),
            max_degree
        );
    }
    let wall = gen_cyl_wall(3);
    println!("wall 3, first cycle: {:?}", wall.cycles[0]);
    println!("wall 3, first radial path: {:?}", wall.verticals[0]);
    let g = gen_random(8, 0.3, 42);
    println!("random n=8 p=0.3 seed=42: {} arcs", g.m());
}
