use std::path::Path;

use ncbandit::config::{parse_config, parse_config_str, to_toml};
use ncbandit::AgentKind;

#[test]
fn shipped_example_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/two_arm.toml");
    let cfg = parse_config(&path).unwrap();
    assert_eq!(cfg.horizon, 1000);
    assert_eq!(cfg.agents.len(), 4);
    assert_eq!(cfg.agents[3].kind, AgentKind::TsLat);
    assert_eq!(cfg.agents[3].soft_start, 40);
    assert_eq!(parse_config_str(&to_toml(&cfg).unwrap()).unwrap(), cfg);
}

#[test]
fn nearly_stochastic_rows_are_renormalized() {
    let text = r#"schema_version = 1
[run]
horizon = 10
replications = 1
seed = 1
[environment]
mu = [0.6, 0.3]
pi = [[0.5, 0.499], [0.0, 1.0]]
[[agents]]
kind = "ts"
"#;
    let cfg = parse_config_str(text).unwrap();
    let env = cfg.environment.build().unwrap();
    let row = env.compliance().row(0, 0);
    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn unknown_keys_are_rejected() {
    let text = r#"schema_version = 1
[run]
horizon = 10
replications = 1
seed = 1
[environment]
mu = [0.6, 0.3]
pi = [[1.0, 0.0], [0.0, 1.0]]
colour = "red"
[[agents]]
kind = "ts"
"#;
    let err = parse_config_str(text).unwrap_err().to_string();
    assert!(err.contains("colour"), "{err}");
}
