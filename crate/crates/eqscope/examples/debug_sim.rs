use eqscope_conic::ClarabelBackend;
use eqscope_core::Metric;
use eqscope_cournot::*;
fn main() {
    let b = ClarabelBackend::default();
    let price = AffinePrice { alpha: 0.05 };
    for seed in 0..50u64 {
        let params = SimulationParams {
            n: 3, alpha: 0.05, a_hat: 0.01, sigma_game: 0.01,
            sigma_obs: 0.001, l: 3, n_g: 1, seed: 500 + seed,
        };
        let game = simulate_cournot(&params).unwrap().into_iter().next().unwrap();
        for degree in [1usize, 2, 3, 4] {
            match cournot_min_perturbation(&game.observations, Metric::SumOfSquares, degree, 3, &price, 0.05, &b) {
                Ok(rec) => { if !rec.delta_star.is_finite() { println!("seed {seed} d{degree}: NaN"); } },
                Err(e) => println!("seed {seed} d{degree}: {e}"),
            }
        }
    }
    println!("done");
}
