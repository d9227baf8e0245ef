//! Prints mean nn and CSLS precision@1 for a rotated Gaussian pair at
//! several noise levels.

fn main() -> Result<(), lexalign::Error> {
    let sigmas = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7];
    for p in lexalign::synthetic::noise_sweep(500, 32, &sigmas, 10, 10)? {
        println!("sigma {:.2}  nn {:6.2}  csls {:6.2}", p.sigma, p.nn_pct, p.csls_pct);
    }
    Ok(())
}
