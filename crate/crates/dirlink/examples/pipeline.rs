//! The full three-pair pipeline on walls attached behind a 2-separation.

use dirlink::generators::{gen_sep_fixture, AttachSpec};
use dirlink::oracle::{brute_force_solve, OracleAnswer, SearchBudget};
use dirlink::pipeline::{solve_3hi, PipelineAnswer, PipelineConfig};

fn main() {
    for seed in 0..6 {
        let spec = AttachSpec::random(3, 1 + seed as usize % 3, seed);
        let inst = gen_sep_fixture(3, &spec).unwrap();
        let rep = solve_3hi(&inst, &PipelineConfig::default()).unwrap();
        let answer = match &rep.answer {
            PipelineAnswer::Yes(_) => "yes".to_string(),
            PipelineAnswer::No => "no".to_string(),
            PipelineAnswer::Inconclusive(why) => format!("inconclusive ({why})"),
        };
        let oracle = match brute_force_solve(&inst, SearchBudget::default()).answer {
            OracleAnswer::Yes(_) => "yes",
            OracleAnswer::No => "no",
            OracleAnswer::Timeout => "timeout",
        };
        println!(
            "seed {seed}: n={} pairs={} separations={} reduced_n={} width={:?} answer={answer} oracle={oracle}",
            inst.g.n(),
            inst.k(),
            rep.separations,
            rep.reduced_n,
            rep.width
        );
    }
}
