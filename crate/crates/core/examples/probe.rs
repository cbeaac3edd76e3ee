use kscube::cutcone::c1_distortion;
use kscube::metric::{hamming_cube, materialize_space};
use kscube::space::PqParams;
use std::time::Instant;

fn main() {
    let cube4 = hamming_cube(4, 16).unwrap();
    let t = Instant::now();
    let cert = c1_distortion(&cube4).unwrap();
    println!("cube4 lp: {:?} iters={} upper={:.12} gap={:.2e}", t.elapsed(), cert.iterations, cert.upper, cert.duality_gap);

    let space = materialize_space(2, &PqParams::new(1.0, 2.0).unwrap(), 16).unwrap();
    let t = Instant::now();
    let cert = c1_distortion(&space).unwrap();
    println!("pyth lp: {:?} iters={} lower={:.13} upper={:.13} gap={:.2e}", t.elapsed(), cert.iterations, cert.lower, cert.upper, cert.duality_gap);
    println!("(1+sqrt2)/2 = {:.13}", (1.0 + 2f64.sqrt()) / 2.0);
}
