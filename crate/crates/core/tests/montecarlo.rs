use hetnet_dc::association::all_case_probabilities;
use hetnet_dc::capacity::role_efficiency;
use hetnet_dc::montecarlo::{
    empirical_case_links, empirical_sir_capacity, estimate_subcase_frequencies, ppp_vs_model, sample_triple_model,
    InterfererField, InterfererRegion, Origin, RandomStream,
};
use hetnet_dc::{Cell, NetworkParams};

#[test]
fn rayleigh_marginals_of_model_triples() {
    let s = NetworkParams::reference(5.0).validate().unwrap().scenario();
    let mut rng = RandomStream::new(12, 0).rng();
    let n = 1_000_000;
    let (mut sum, mut sq, mut below) = (0.0, 0.0, 0u64);
    for _ in 0..n {
        let t = sample_triple_model(&s, &mut rng);
        sum += t.x_m;
        sq += t.x_m * t.x_m;
        below += (t.x_1 < t.x_2) as u64;
    }
    let mean = sum / n as f64;
    let sd = (sq / n as f64 - mean * mean).sqrt();
    assert!((mean - 0.5 / s.lambda_m.sqrt()).abs() < 3.0 * sd / (n as f64).sqrt());
    let f = below as f64 / n as f64;
    assert!((f - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt());
}

#[test]
fn equal_powers_give_no_decoupled_samples() {
    let mut raw = NetworkParams::reference(5.0);
    // eta = 1 is excluded by the power ordering, so approach it closely.
    raw.p_m_dbm = raw.p_s_dbm + 1e-9;
    let f = estimate_subcase_frequencies(&raw.validate().unwrap(), 100_000, Origin::Model, 4).unwrap();
    assert_eq!(f.case_count(3) + f.case_count(4) + f.case_count(5), 0);
}

#[test]
fn link_estimates_are_bit_reproducible() {
    let p = NetworkParams::reference(5.0).validate().unwrap();
    let a = empirical_sir_capacity(5, Cell::MCell, &p, 20_000, 99).unwrap();
    let b = empirical_sir_capacity(5, Cell::MCell, &p, 20_000, 99).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ppp_frequencies_close_to_model_at_case_level() {
    let p = NetworkParams::reference(5.0).validate().unwrap();
    let r = ppp_vs_model(&p, 100_000, 100_000, 8).unwrap();
    assert!(r.marginals_pass(), "{r:?}");
    assert!(r.ks_macro < 0.005 && r.ks_small < 0.005);
    let closed = all_case_probabilities(&p.scenario()).as_array();
    assert!(hetnet_dc::stats::total_variation(&closed, &r.model.case_frequencies()) < 0.01);
    assert!(r.case_tv < 0.2);
}

#[test]
fn exclusion_region_raises_capacity() {
    let p = NetworkParams::reference(5.0).validate().unwrap();
    let s = p.scenario();
    let full = InterfererField::from_scenario(&s, InterfererRegion::FullPlane).unwrap();
    let excl = InterfererField::from_scenario(&s, InterfererRegion::Exclusion).unwrap();
    let a = empirical_case_links(&s, 4, &[Cell::SCell1], 20_000, 6, &full).unwrap();
    let b = empirical_case_links(&s, 4, &[Cell::SCell1], 20_000, 6, &excl).unwrap();
    assert!(b.links[0].spectral_efficiency.mean() > a.links[0].spectral_efficiency.mean());
    let q = role_efficiency(4, Cell::SCell1, &s).unwrap().value;
    let rel = (a.links[0].spectral_efficiency.mean() - q).abs() / q;
    assert!(rel < 0.05, "{rel}");
}
