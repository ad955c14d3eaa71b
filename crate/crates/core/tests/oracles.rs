mod common;

use common::*;

#[test]
fn tensor_product_matches_quadruple_loop() {
    assert!(tensor_error(11, 10) <= 1e-10);
}

#[test]
fn loss_matches_term_by_term_sum() {
    assert!(loss_error(12, 20) <= 1e-10);
}

#[test]
fn gradient_matches_central_differences() {
    let err = gradient_error(13, 20);
    assert!(err <= 1e-5, "relative error {err}");
}

#[test]
fn line_search_beats_fine_grid() {
    let r = line_search_check(14, 30, 1001);
    assert!(r.grid_excess <= 1e-9, "{r:?}");
    assert!(r.endpoint_error <= 1e-10, "{r:?}");
}

#[test]
fn exact_transport_matches_dense_references() {
    let r = lp_check(15, 200);
    assert!(r.simplex_error <= 1e-8, "{r:?}");
    assert!(r.enumeration_error <= 1e-8, "{r:?}");
    assert!(r.duality_gap <= 1e-9, "{r:?}");
    assert!(r.enumerated > 50);
}

#[test]
fn references_agree_on_a_hand_solved_problem() {
    // Two sources, two sinks: the cheap diagonal carries all mass it can.
    let cost = fgw_core::Matrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
    let (h, g) = ([0.7, 0.3], [0.4, 0.6]);
    // 0.4 stays on (0,0), 0.3 on (1,1), the remaining 0.3 moves at cost 1.
    assert!((ot_by_dense_simplex(&cost, &h, &g) - 0.3).abs() < 1e-15);
    assert!((ot_by_vertex_enumeration(&cost, &h, &g) - 0.3).abs() < 1e-15);
}
