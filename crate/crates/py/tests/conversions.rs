use nalgebra::DMatrix;
use num_complex::Complex64;
use phaselab_py::{matrix_to_rows, rows_to_matrix};

#[test]
fn rows_round_trip() {
    let m = DMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64));
    let rows = matrix_to_rows(&m);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][2], Complex64::new(1.0, 2.0));
    assert_eq!(rows_to_matrix(&rows).unwrap(), m);
}

#[test]
fn ragged_rows_rejected() {
    let rows = vec![vec![Complex64::new(1.0, 0.0)], vec![]];
    assert!(rows_to_matrix(&rows).is_err());
}
