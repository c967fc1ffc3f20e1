//! Exhaustive routing check of the switch gadget, with and without the
//! full number of blue paths.

use dirlink::hardness::{build_switch, verify_switch_lemma, SwitchSetup};

fn main() {
    let (g, ports) = build_switch(2);
    println!("switch c=2: {} vertices, {} arcs, ports a={} b={} x={} y={}", g.n(), g.m(), ports.a, ports.b, ports.x, ports.y);
    let full = verify_switch_lemma(&SwitchSetup::standard(2)).unwrap();
    println!(
        "standard: {} routings, {} violations, {} unprimed, {} primed",
        full.routings, full.violations, full.unprimed, full.primed
    );
    let short = verify_switch_lemma(&SwitchSetup {
        b_paths: 1,
        ..SwitchSetup::standard(2)
    })
    .unwrap();
    println!("one blue path at b: {} routings, {} mixed", short.routings, short.mixed);
}
