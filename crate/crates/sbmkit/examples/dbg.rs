use sbmkit::kernels::*;
use sbmkit::model::DriftParams;
use sbmkit::numerics::QuadratureSpec;

fn main() {
    let pr = DriftParams::new(0.0, 0.0, 0.5).unwrap();
    let spec = QuadratureSpec::default();
    let est = joint_density_from_zero(&pr, 1.0, 0.5, 0.5, &spec).unwrap();
    println!("joint driftless: value={} err={:.3e} conv={}", est.value, est.error, est.converged);
    println!("want 0.24197072451914337, diff={:.3e}", (est.value - 0.24197072451914337).abs());

    let pr2 = DriftParams::new(1.0, -1.0, 0.5).unwrap();
    let est2 = joint_density_from_zero(&pr2, 1.0, 0.5, 0.5, &spec).unwrap();
    println!("joint (1,-1): value={} err={:.3e} conv={}", est2.value, est2.error, est2.converged);
    println!("want 0.14676266317373987, diff={:.3e}", (est2.value - 0.14676266317373987).abs());
}
