use volcap::panel::{load_panel, ratio_report, synthetic_panel, PanelFormat, QuantileGroups, WindowSpec};

#[test]
fn equal_vol_panel_reverts_toward_the_mean() {
    let spec = WindowSpec::default();
    let groups = QuantileGroups::default();
    for seed in [1u64, 2, 3] {
        let syn = synthetic_panel(1000, 20, &spec, 0.05, seed).unwrap();
        let report = ratio_report(&syn.panel, &spec, &groups, Some(syn.as_of_range));
        assert_eq!(report.dates.len(), 20);
        for d in &report.dates {
            assert_eq!(d.eligible + d.excluded, d.present);
            assert_eq!(d.counts.iter().sum::<usize>(), d.eligible);
            assert_eq!(d.counts, vec![10, 90, 800, 90, 10]);
        }
        let overall: Vec<f64> = report.overall.iter().map(|g| g.unwrap()).collect();
        assert!(overall[0] > 1.0 && overall[4] < 1.0, "{overall:?}");
        assert!(overall.windows(2).all(|w| w[0] > w[1]), "{overall:?}");
        assert!(overall[0] - overall[4] > 0.2);
    }
}

#[test]
fn shuffled_csv_gives_the_same_report() {
    let spec = WindowSpec::new(12, 6, 2).unwrap();
    let groups = QuantileGroups::new(vec![0.25, 0.75]).unwrap();
    let syn = synthetic_panel(40, 5, &spec, 0.05, 8).unwrap();

    let mut lines: Vec<String> = syn
        .panel
        .observations()
        .map(|o| format!("{},{},{}", o.date, o.security_id, o.ret))
        .collect();
    let to_csv = |rows: &[String]| format!("date,security_id,return\n{}\n", rows.join("\n"));
    let forward = load_panel(to_csv(&lines).as_bytes(), PanelFormat::default()).unwrap();
    // Deterministic scramble: reverse then interleave.
    lines.reverse();
    let (a, b) = lines.split_at(lines.len() / 2);
    let scrambled: Vec<String> = b
        .iter()
        .zip(a)
        .flat_map(|(x, y)| [x.clone(), y.clone()])
        .chain(b.iter().skip(a.len()).cloned())
        .collect();
    assert_eq!(scrambled.len(), lines.len());
    let shuffled = load_panel(to_csv(&scrambled).as_bytes(), PanelFormat::default()).unwrap();

    assert_eq!(forward, syn.panel);
    assert_eq!(forward, shuffled);
    assert_eq!(
        ratio_report(&forward, &spec, &groups, None),
        ratio_report(&shuffled, &spec, &groups, None)
    );
}

#[test]
fn every_reported_ratio_is_positive() {
    let spec = WindowSpec::new(10, 10, 2).unwrap();
    let syn = synthetic_panel(200, 30, &spec, 0.03, 5).unwrap();
    let report = ratio_report(&syn.panel, &spec, &QuantileGroups::default(), None);
    // Dates past the sized range still qualify while the future run is long enough.
    assert!(report.dates.len() > 30);
    for d in &report.dates {
        assert!(d.mean_ratio.iter().flatten().all(|&r| r > 0.0));
    }
}
