use std::sync::Arc;

use noma_core::{
    coset_leaders, cyclotomic_lattice, estimate_diversity, lattice_partition_scheme, simulate_ser,
    superimpose, ChannelConfig, CompositeScheme, Decoder, NomaError, SimOptions,
};

fn lp(p: u32) -> CompositeScheme {
    lattice_partition_scheme(Arc::new(cyclotomic_lattice(p).unwrap()), 1, 1).unwrap()
}

fn general(m1: u32, m2: u32, alpha: f64) -> CompositeScheme {
    let l = Arc::new(cyclotomic_lattice(5).unwrap());
    let c1 = coset_leaders(l.clone(), m1).unwrap();
    let c2 = coset_leaders(l, m2).unwrap();
    superimpose(&c1, &c2, alpha).unwrap()
}

fn opts(seed: u64, trials: u64, threads: usize) -> SimOptions {
    SimOptions {
        threads: Some(threads),
        ..SimOptions::new(seed, trials)
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let s = lp(5);
    let siso = ChannelConfig::siso(vec![10.0, 20.0]);
    let a = simulate_ser(&s, &siso, Decoder::Sic, &opts(7, 30_000, 1)).unwrap();
    let b = simulate_ser(&s, &siso, Decoder::Sic, &opts(7, 30_000, 3)).unwrap();
    assert_eq!(a, b);

    let s = general(2, 1, 0.31);
    let mimo = ChannelConfig::alamouti(vec![10.0, 20.0], 5.0);
    let a = simulate_ser(&s, &mimo, Decoder::SingleUser, &opts(7, 20_000, 1)).unwrap();
    let b = simulate_ser(&s, &mimo, Decoder::SingleUser, &opts(7, 20_000, 4)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn extension_towards_target_errors_is_deterministic() {
    let s = lp(5);
    let ch = ChannelConfig::siso(vec![25.0]);
    let mut o = opts(3, 10_000, 2);
    o.target_errors = 50;
    o.max_trials = 2_000_000;
    let a = simulate_ser(&s, &ch, Decoder::SingleUser, &o).unwrap();
    o.threads = Some(1);
    let b = simulate_ser(&s, &ch, Decoder::SingleUser, &o).unwrap();
    assert_eq!(a, b);
    let u1 = a.user(1)[0];
    let u2 = a.user(2)[0];
    assert_eq!(u1.trials, u2.trials);
    assert!(u1.errors.min(u2.errors) >= 50 || u1.trials == o.max_trials);
    assert!(u1.trials <= o.max_trials);
}

#[test]
fn seeds_change_the_estimate() {
    let s = lp(5);
    let ch = ChannelConfig::siso(vec![10.0]);
    let a = simulate_ser(&s, &ch, Decoder::SingleUser, &opts(1, 20_000, 2)).unwrap();
    let b = simulate_ser(&s, &ch, Decoder::SingleUser, &opts(2, 20_000, 2)).unwrap();
    assert_ne!(a.user(1)[0].errors, b.user(1)[0].errors);
}

#[test]
fn genie_sic_and_single_user_are_ordered() {
    let snr = vec![5.0, 10.0, 15.0, 20.0];
    for s in [lp(5), general(1, 1, 0.2), general(2, 1, 0.14)] {
        let ch = ChannelConfig::siso(snr.clone());
        let run = |d| simulate_ser(&s, &ch, d, &opts(11, 100_000, 4)).unwrap();
        let genie = run(Decoder::GenieSic);
        let sic = run(Decoder::Sic);
        let single = run(Decoder::SingleUser);
        for i in 0..snr.len() {
            let (g, c, u) = (genie.user(1)[i], sic.user(1)[i], single.user(1)[i]);
            let sigma = |p: f64, n: u64| 3.0 * (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                g.ser <= c.ser + sigma(c.ser, c.trials),
                "{}: {g:?} vs {c:?}",
                s.describe()
            );
            assert!(
                c.ser <= u.ser + sigma(u.ser, u.trials),
                "{}: {c:?} vs {u:?}",
                s.describe()
            );
        }
    }
}

#[test]
fn ser_falls_with_snr() {
    let s = lp(7);
    let ch = ChannelConfig::siso(vec![0.0, 10.0, 20.0]);
    let c = simulate_ser(&s, &ch, Decoder::SingleUser, &opts(5, 50_000, 4)).unwrap();
    for u in [1, 2] {
        let p = c.user(u);
        assert!(p[0].ser > p[1].ser && p[1].ser > p[2].ser, "{p:?}");
    }
}

#[test]
fn alamouti_counts_symbols() {
    let s = general(2, 1, 0.31);
    let ch = ChannelConfig::alamouti(vec![15.0], 5.0);
    let c = simulate_ser(&s, &ch, Decoder::GenieSic, &opts(9, 10_000, 2)).unwrap();
    assert_eq!(c.user(1)[0].trials, 20_000);
    assert!(c.user(1)[0].ser < 0.5);
    // Five dB weaker user 2 sees more errors.
    assert!(c.user(2)[0].ser > c.user(1)[0].ser);
}

#[test]
fn rejects_bad_options() {
    let s = lp(5);
    let ch = ChannelConfig::siso(vec![10.0]);
    let err = simulate_ser(&s, &ch, Decoder::SingleUser, &opts(1, 100, 1)).unwrap_err();
    assert!(matches!(
        err,
        NomaError::ConfigInvalid {
            field: "trials",
            ..
        }
    ));
    let ch = ChannelConfig::alamouti(vec![10.0], 0.0);
    let err = simulate_ser(&lp(7), &ch, Decoder::SingleUser, &opts(1, 10_000, 1)).unwrap_err();
    assert!(matches!(err, NomaError::UnsupportedDimension { n: 3 }));
    let ch = ChannelConfig::siso(vec![20.0, 10.0]);
    assert!(simulate_ser(&s, &ch, Decoder::SingleUser, &opts(1, 10_000, 1)).is_err());
}

#[test]
fn diversity_needs_three_nonzero_points() {
    let s = lp(5);
    let ch = ChannelConfig::siso(vec![10.0, 15.0, 20.0]);
    let c = simulate_ser(&s, &ch, Decoder::SingleUser, &opts(4, 20_000, 2)).unwrap();
    let d = estimate_diversity(&c, 1, 10.0, 20.0).unwrap();
    assert!(d > 0.5 && d < 3.0, "{d}");
    assert!(matches!(
        estimate_diversity(&c, 1, 10.0, 15.0),
        Err(NomaError::InsufficientData { .. })
    ));
}
