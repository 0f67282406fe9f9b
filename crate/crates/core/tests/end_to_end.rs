use pipeadc::config::{AdcConfig, Preset};
use pipeadc::oracle::brute_force_convert;
use pipeadc::pipeline::run_stream;
use pipeadc::testbench::{sine_spectrum, SineTest};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn ideal_sndr_holds_across_coherent_bins() {
    let cfg = AdcConfig::ideal(8);
    let bins: Vec<usize> = (101..512).step_by(18).filter(|&j| gcd(j, 1024) == 1).collect();
    assert!(bins.len() >= 20, "{bins:?}");
    for j in bins {
        let r = sine_spectrum(&cfg, &SineTest { signal_bin: j, ..SineTest::default() }).unwrap();
        assert!((49.4..=50.4).contains(&r.sndr_db), "bin {j}: {}", r.sndr_db);
    }
}

#[test]
fn presets_survive_json_and_stream_like_the_reference() {
    for p in Preset::ALL {
        let cfg = AdcConfig::from_json_str(&p.config().to_json_pretty().unwrap()).unwrap();
        let xs: Vec<f64> = (0..2000).map(|i| -1.05 + 2.1 * i as f64 / 1999.0).collect();
        let codes = run_stream(&xs, &cfg).unwrap().codes;
        for (i, &x) in xs.iter().enumerate() {
            assert_eq!(codes[i], brute_force_convert(x, &cfg, i as u64).unwrap(), "{p} input {x}");
        }
    }
}
