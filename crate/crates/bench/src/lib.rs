//! Fixtures shared by the criterion benchmarks.

use pr3bp_core::{Branch, PhaseState, SystemParams};

/// Sun-Jupiter-like system with a small grain: weak drag, slight oblateness.
pub fn drag_system() -> SystemParams {
    SystemParams::new(0.01, 0.995, 1e-4, 1e3).expect("valid fixture")
}

/// A start displaced from the refined L4 point of [`drag_system`].
pub fn near_l4(p: &SystemParams) -> PhaseState {
    let pt = pr3bp_core::locate_triangular_point(p, Branch::L4, 1e-12, 50).expect("L4 converges");
    PhaseState::new(pt.x + 1e-3, pt.y, 0.0, 0.01, 0.0)
}
