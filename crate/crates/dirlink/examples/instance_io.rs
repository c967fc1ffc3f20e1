//! Parses an instance from the text format, solves it with the exhaustive
//! oracle and prints the solution document.

use dirlink::format::{parse_instance, serialize_instance, SolutionDoc, Status};
use dirlink::graph::verify_linkage;
use dirlink::oracle::{brute_force_solve, OracleAnswer, SearchBudget};

const TEXT: &str = "\
# two pairs crossing in the middle vertex
p dddp 5 2 2
a 1 3
a 2 3
a 3 4
a 3 5
s 1 1
t 1 5
s 2 2
t 2 4
";

fn main() {
    let inst = parse_instance(TEXT).expect("valid instance");
    print!("{}", serialize_instance(&inst));
    let start = std::time::Instant::now();
    let out = brute_force_solve(&inst, SearchBudget::default());
    let doc = match &out.answer {
        OracleAnswer::Yes(l) => {
            verify_linkage(&inst, l).expect("oracle witnesses are valid");
            SolutionDoc::new(Status::Yes, "brute", Some(l), out.nodes, start.elapsed())
        }
        OracleAnswer::No => SolutionDoc::new(Status::No, "brute", None, out.nodes, start.elapsed()),
        OracleAnswer::Timeout => SolutionDoc::new(Status::Timeout, "brute", None, out.nodes, start.elapsed()),
    };
    print!("{}", doc.to_text());

    let strict = dirlink::graph::Instance::new(inst.g.clone(), inst.pairs.clone(), 1);
    let verdict = matches!(brute_force_solve(&strict, SearchBudget::default()).answer, OracleAnswer::Yes(_));
    println!("with congestion 1: {}", if verdict { "yes" } else { "no" });
}
