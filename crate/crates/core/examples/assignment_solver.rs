//! The rectangular assignment solver on its own.
//!
//!     cargo run --example assignment_solver

use aspect_eval::assignment::{solve_assignment, CostMatrix};

fn main() -> aspect_eval::Result<()> {
    let cost = CostMatrix::from_rows(&[
        vec![0.9, 0.1, 0.5, 0.7],
        vec![0.2, 0.8, 0.3, 0.6],
        vec![0.4, 0.3, 0.9, 0.1],
    ])?;
    let pairing = solve_assignment(&cost)?;
    for &(r, c) in &pairing.pairs {
        println!("row {r} -> col {c} (cost {})", cost.get(r, c));
    }
    println!("total {:.2}", pairing.total_cost);

    // ties resolve to the lexicographically smallest pairing
    let tied = CostMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]])?;
    println!("tied: {:?}", solve_assignment(&tied)?.pairs);
    Ok(())
}
