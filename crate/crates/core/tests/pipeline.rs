use rrk_core::dense::max_abs_diff;
use rrk_core::experiments::{read_history_csv, run_trials, write_history_csv};
use rrk_core::problems::{gen_gaussian, load_problem, save_problem};
use rrk_core::{Method, RngStream, SolverConfig};

#[test]
fn saved_problem_solves_like_the_original() {
    let tmp = tempfile::tempdir().unwrap();
    let p = gen_gaussian(50, 10, 25, 3, false, &mut RngStream::new(21)).unwrap();
    save_problem(&p, tmp.path()).unwrap();
    let q = load_problem(tmp.path()).unwrap();

    let cfg =
        SolverConfig::new(Method::from_tag("rgs-rsk", None).unwrap(), 500, 1000).log_every(100);
    let a = run_trials(&p, &cfg, 4).unwrap();
    let b = run_trials(&q, &cfg, 4).unwrap();
    assert_eq!(
        max_abs_diff(&a.mean_final_iterate(), &b.mean_final_iterate()),
        0.0
    );

    let path = tmp.path().join("history.csv");
    write_history_csv(&path, &[&a]).unwrap();
    let back = read_history_csv(&path).unwrap();
    assert_eq!(back.len(), a.rows.len());
    for (rec, row) in back.iter().zip(&a.rows) {
        assert_eq!(rec.row.k, row.k);
        assert_eq!(rec.row.rel_residual, row.rel_residual.mean);
        assert_eq!(rec.row.rel_error, row.rel_error.map(|s| s.mean));
        assert_eq!(rec.trial_count, 4);
    }
}

#[test]
fn sparse_methods_beat_plain_ones_on_a_small_problem() {
    let p = gen_gaussian(120, 30, 60, 3, true, &mut RngStream::new(22)).unwrap();
    let final_error = |tag: &str| {
        let cfg =
            SolverConfig::new(Method::from_tag(tag, None).unwrap(), 6000, 1000).log_every(6000);
        run_trials(&p, &cfg, 4)
            .unwrap()
            .last()
            .unwrap()
            .rel_error
            .unwrap()
            .mean
    };
    let sparse = final_error("rk-rsk");
    let plain = final_error("rk-rk");
    assert!(
        sparse < 1e-2 && plain > 0.1,
        "sparse {sparse}, plain {plain}"
    );
}
