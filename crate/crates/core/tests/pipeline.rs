mod support;

use chrono::NaiveDate;
use sentigranger::predict::{fit_return_models, EvalMode};
use sentigranger::sentiment::Source;
use sentigranger::synthgen::{generate, Direction, SyntheticSpec};
use sentigranger::vars::{B, ER, G, SR};
use sentigranger::AlignedFrame;
use sentigranger::{cli, granger};
use support::Normals;

fn dates(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2013, 11, 1).unwrap();
    (0..n)
        .map(|i| start + chrono::Duration::days(i as i64))
        .collect()
}

/// ER(t) = beta SR(t-1) + sqrt(1 - beta^2) e(t), with unit-variance SR, G and B.
fn planted_frame(rng: &mut Normals, n: usize, beta: f64) -> AlignedFrame {
    let sr = rng.vec(n);
    let g = rng.vec(n);
    let b = rng.vec(n);
    let noise = rng.vec(n);
    let scale = (1.0 - beta * beta).sqrt();
    let er: Vec<f64> = (0..n)
        .map(|t| {
            if t == 0 {
                noise[0]
            } else {
                beta * sr[t - 1] + scale * noise[t]
            }
        })
        .collect();
    AlignedFrame::from_columns(
        dates(n),
        vec![
            (ER.into(), er),
            (G.into(), g),
            (B.into(), b),
            (SR.into(), sr),
        ],
    )
    .unwrap()
}

#[test]
fn planted_sr_coefficient_recovered() {
    let mut rng = Normals::new(5);
    let frame = planted_frame(&mut rng, 600, 0.6);
    let c = fit_return_models("SYN", Source::Twitter, &frame, EvalMode::InSample).unwrap();
    let beta = c.m1.coefficient("SR_lag1").unwrap();
    let se = c.m1.se("SR_lag1").unwrap();
    assert!((beta - 0.6).abs() < 3.0 * se, "beta {beta} se {se}");
    assert!(c.rse_improvement_pct > 0.0);
}

#[test]
fn noise_sentiment_gives_no_improvement() {
    let mut rng = Normals::new(6);
    let reps = 500;
    let mut total = 0.0;
    for _ in 0..reps {
        let frame = planted_frame(&mut rng, 500, 0.0);
        let c = fit_return_models("SYN", Source::News, &frame, EvalMode::InSample).unwrap();
        assert!(c.m1.r_squared() >= c.m0.r_squared());
        total += c.rse_improvement_pct;
    }
    let mean = total / reps as f64;
    assert!(mean < 0.5, "mean improvement {mean}");
}

#[test]
fn planted_effect_improves_rse_in_most_replications() {
    let mut rng = Normals::new(7);
    let wins = (0..100)
        .filter(|_| {
            let frame = planted_frame(&mut rng, 200, 0.5);
            fit_return_models("SYN", Source::Twitter, &frame, EvalMode::InSample)
                .unwrap()
                .rse_improvement_pct
                > 0.0
        })
        .count();
    assert!(wins >= 95, "{wins}");
}

fn load(spec: &SyntheticSpec) -> (tempfile::TempDir, cli::RunConfig, cli::Inputs) {
    let tmp = tempfile::tempdir().unwrap();
    generate(spec).unwrap().write_to(tmp.path()).unwrap();
    let args = cli::DataArgs {
        news: Some(tmp.path().join("news.csv")),
        twitter: Some(tmp.path().join("twitter.csv")),
        market_dir: Some(tmp.path().join("market")),
        index: Some(tmp.path().join("index.csv")),
        out: Some(tmp.path().join("out")),
        ..Default::default()
    };
    let cfg = cli::RunConfig::resolve(&args).unwrap();
    let inputs = cli::Inputs::load(&cfg).unwrap();
    (tmp, cfg, inputs)
}

#[test]
fn synthetic_fixture_satisfies_analytics_invariants() {
    let spec = SyntheticSpec {
        seed: 42,
        ..Default::default()
    };
    let (_tmp, _cfg, inputs) = load(&spec);
    for c in &inputs.companies {
        for source in Source::ALL {
            for d in c.analytics(source) {
                assert_eq!(d.sa, d.g as i64 - d.b as i64);
                assert!(d.sr.abs() <= 1.0);
            }
        }
        assert!(c.financial.vol.values().iter().all(|v| *v >= 0.0));
        let frame = c.frame(Source::Twitter).unwrap();
        assert_eq!(frame.len(), spec.length - 1);
    }
}

#[test]
fn planted_direction_is_recovered_and_exclusive() {
    let spec = SyntheticSpec {
        seed: 3,
        companies: vec!["SYN.N".into()],
        ..Default::default()
    };
    let (_tmp, _cfg, inputs) = load(&spec);
    let frame = inputs.companies[0].frame(Source::Twitter).unwrap();
    let fwd = granger::granger_test("SYN.N", &frame, SR, ER, 1).unwrap();
    assert!(fwd.p_value() < 0.01, "{}", fwd.p_value());

    let spec = SyntheticSpec {
        direction: Direction::FinanceToSentiment,
        ..spec
    };
    let (_tmp, _cfg, inputs) = load(&spec);
    let frame = inputs.companies[0].frame(Source::Twitter).unwrap();
    let rev = granger::granger_test("SYN.N", &frame, ER, SR, 1).unwrap();
    assert!(rev.p_value() < 0.01, "{}", rev.p_value());
}

#[test]
fn planted_fixture_edge_appears_in_graph() {
    let spec = SyntheticSpec {
        seed: 9,
        ..Default::default()
    };
    let (_tmp, cfg, inputs) = load(&spec);
    let batteries = cli::cmd_granger(&cfg, &inputs).unwrap();
    let twitter = batteries
        .iter()
        .find(|b| b.source == Source::Twitter)
        .unwrap();
    let graph = granger::build_graph(&twitter.returns, 0.05);
    assert!(graph.label(SR, ER).is_some_and(|l| l.len() == 2));
    let dot = std::fs::read_to_string(cfg.out.join("granger/twitter_er.dot")).unwrap();
    assert!(dot.contains("SR -> ER"), "{dot}");

    let comps = cli::cmd_predict(&cfg, &inputs).unwrap();
    for c in comps
        .iter()
        .filter(|c| c.source == Source::Twitter && c.target.column() == ER)
    {
        assert!(
            c.rse_improvement_pct > 0.0,
            "{} {}",
            c.company,
            c.rse_improvement_pct
        );
    }
}

#[test]
fn null_fixture_has_empty_graphs_at_tiny_alpha() {
    let spec = SyntheticSpec {
        seed: 4,
        coupling: 0.0,
        direction: Direction::None,
        ..Default::default()
    };
    let (_tmp, mut cfg, inputs) = load(&spec);
    cfg.alpha = 1e-9;
    cli::cmd_granger(&cfg, &inputs).unwrap();
    for name in ["twitter_er", "twitter_vol", "news_er", "news_vol"] {
        let dot = std::fs::read_to_string(cfg.out.join(format!("granger/{name}.dot"))).unwrap();
        assert_eq!(dot, "digraph causality {\n}\n", "{name}");
    }
    let comps = cli::comparisons(&cfg, &inputs).unwrap();
    let mean: f64 = comps.iter().map(|c| c.rse_improvement_pct).sum::<f64>() / comps.len() as f64;
    assert!(mean.abs() < 1.0, "{mean}");
}
