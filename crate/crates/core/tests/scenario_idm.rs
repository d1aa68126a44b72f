use ecodrive::idm::simulate;
use ecodrive::scenario::{builtin_names, load_scenario, parse_scenario};
use ecodrive::{Error, Trajectory};

#[test]
fn builtins_survive_a_toml_round_trip() {
    for name in builtin_names() {
        let s = load_scenario(name).unwrap();
        let text = s.to_toml(None).unwrap();
        let back = parse_scenario(&text, name, None).unwrap();
        assert_eq!(back.hash(), s.hash(), "{name}");
        assert_eq!(back.route, s.route, "{name}");
    }
}

#[test]
fn malformed_scenarios_name_the_offending_field() {
    let text = r#"
name = "bad"
[route]
length = 100.0
deadline = 30.0
[[signals]]
kind = "signal"
position = 150.0
cycle_period = 60.0
red_duration = 30.0
clock_offset = 0.0
"#;
    match parse_scenario(text, "bad.toml", None) {
        Err(Error::Config { path, .. }) => assert!(path.starts_with("signals[0]"), "{path}"),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn idm_run_is_well_formed_on_every_builtin() {
    for name in builtin_names() {
        let s = load_scenario(name).unwrap();
        let zeros = vec![0.0; s.route.signals.len()];
        let run = simulate(&s.route, &s.vehicle, &s.idm, &zeros).unwrap();
        let rows = &run.trajectory.rows;
        let last = rows.last().unwrap();
        assert!((last.distance - s.route.length).abs() < 1e-6, "{name}");
        assert!(last.velocity.abs() < 1e-6, "{name}");
        run.trajectory.check().unwrap();
        assert!(rows.iter().all(|r| r.fuel >= 0.0), "{name}");
        assert!(run.crossings.iter().all(|c| !c.violated), "{name}");

        let mut buf = Vec::new();
        run.trajectory.write_csv(&mut buf).unwrap();
        let back = Trajectory::read_csv(buf.as_slice(), name).unwrap();
        assert_eq!(back.rows.len(), rows.len());
        assert!((back.arrival_time().unwrap() - last.time).abs() < 1e-9);
    }
}
