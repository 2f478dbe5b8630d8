//! Simulates the rigid-body quadrotor under three canonical inputs —
//! hover, free fall, and a tilted-thrust arc — and prints where the
//! vehicle ends up.
//!
//! ```bash
//! cargo run --release --example simulate_hover
//! ```

use quadtrack::dynamics::{step, ControlInput, QuadParams, QuadState};
use quadtrack::math::Vec3;

fn main() -> quadtrack::Result<()> {
    let params = QuadParams::default();

    // hover: thrust exactly cancels gravity
    let hover = ControlInput::new(params.hover_thrust(), Vec3::ZERO);
    let mut s = QuadState::at_rest(Vec3::new(0.0, 0.0, 1.0));
    for _ in 0..3000 {
        s = step(&s, hover, &params)?;
    }
    println!("hover for 3 s:      p = {:?}  (drift {:.2e} m)", s.p, (s.p - Vec3::new(0.0, 0.0, 1.0)).norm());

    // free fall: zero thrust
    let mut s = QuadState::at_rest(Vec3::new(0.0, 0.0, 1.0));
    for _ in 0..1000 {
        s = step(&s, ControlInput::new(0.0, Vec3::ZERO), &params)?;
    }
    println!("free fall for 1 s:  p = {:?}  (expected z ≈ {:.4})", s.p, 1.0 - 0.5 * params.g_z);

    // pitch forward while thrusting: the vehicle accelerates horizontally
    let mut s = QuadState::at_rest(Vec3::ZERO);
    let pitch = ControlInput::new(params.f_max, Vec3::new(0.0, 1.0, 0.0));
    for _ in 0..500 {
        s = step(&s, pitch, &params)?;
    }
    println!("pitch + full thrust for 0.5 s: p = {:?}, v = {:?}", s.p, s.v);
    Ok(())
}
