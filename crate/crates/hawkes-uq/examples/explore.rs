use hawkes_uq::coverage::{run_coverage, CoverageOptions};
use hawkes_uq::kernels::KernelSpec;
use hawkes_uq::mle::SolverOptions;
use hawkes_uq::process::{KernelGrid, ModelParams};
use nalgebra::{DMatrix, DVector};

fn main() {
    let params = ModelParams::new(
        DVector::from_element(3, 0.4),
        DMatrix::from_element(3, 3, 0.15),
        KernelGrid::Shared(KernelSpec::exponential(1.0).unwrap()),
    ).unwrap();
    for seed in [17u64, 18, 99] {
        for t in [250.0, 1000.0, 4000.0] {
            let opts = CoverageOptions { epsilon: 0.05, n_reps: 12, seed, solver: SolverOptions::default() };
            let r = run_coverage(&params, t, &opts).unwrap();
            // pooled mean over per-rep per-entry ratios
            let mut ratios = Vec::new();
            for rep in &r.reps {
                if rep.error.is_some() { continue; }
                for e in &rep.entries {
                    if e.method == hawkes_uq::report::Method::Concentration && e.width.is_finite() {
                        let asym = rep.entries.iter().find(|x| x.i==e.i && x.j==e.j && x.method==hawkes_uq::report::Method::Asymptotic).unwrap();
                        ratios.push(e.width / asym.width);
                    }
                }
            }
            let mean: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let mut sorted = ratios.clone(); sorted.sort_by(|a,b| a.partial_cmp(b).unwrap());
            let med = sorted[sorted.len()/2];
            let max = sorted.last().unwrap();
            println!("seed={seed} T={t}: mean={mean:.3} median={med:.3} max={max:.3} n={}", ratios.len());
        }
    }
}
