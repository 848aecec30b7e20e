//! Library results against independent test-side references.

mod common;

use common::{binom, ks_statistic, power_cdf, power_density, simpson, CdfTable, PhysicalFading};
use lrfhss_core::analytic::capture::{capture_coefficients, CaptureMethod, InterferenceMixture};
use lrfhss_core::analytic::disconnection::normalization_series;
use lrfhss_core::analytic::outage::{fragment_loss, noise_only_loss};
use lrfhss_core::analytic::{
    interference_counts, outage_d2d, p_cap, p_disc, p_ni, p_pl, AlphaRule, CaptureSeriesConfig, DataRate, LinkBudget,
};
use lrfhss_core::channel::{power_mgf, power_pdf, Environment, FadingSampler, ShadowedRiceParams};
use lrfhss_core::geometry::{
    elevation_from_ground_distance, footprint_area_km2, path_gain_at_ground_distance, path_loss_db, sample_positions,
    slant_distance_km, SatelliteGeometry,
};
use lrfhss_core::mcsim::traffic::Device;
use lrfhss_core::mcsim::{generate_hops, simulate};
use lrfhss_core::rng::stream_rng;
use lrfhss_core::specfun::SeriesControl;
use lrfhss_core::{Population, Scenario};

fn average() -> ShadowedRiceParams {
    ShadowedRiceParams::preset(Environment::Average)
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + rel * b.abs()
}

fn zenith_gain() -> f64 {
    path_gain_at_ground_distance(0.0, LinkBudget::default().frequency_mhz, &SatelliteGeometry::default()).unwrap()
}

#[test]
fn power_density_matches_envelope_model() {
    for env in Environment::ALL {
        let p = ShadowedRiceParams::preset(env);
        for x in [0.0, 0.05, 0.3, 1.0, 2.5, 6.0] {
            let want = power_density(x, p.b0, p.m, p.omega);
            let got = power_pdf(x, &p);
            assert!(close(got, want, 1e-9, 1e-300), "{env} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn power_density_mass_and_mean() {
    let p = average();
    let f = |x: f64| power_pdf(x, &p);
    let mass = simpson(f, 0.0, 30.0, 20_000);
    let mean = simpson(|x| x * f(x), 0.0, 30.0, 20_000);
    assert!((mass - 1.0).abs() < 1e-4, "mass {mass}");
    assert!((mean - 1.087).abs() < 1e-4, "mean {mean}");
}

#[test]
fn mgf_matches_physical_laplace_transform() {
    // E[exp(-s X)] for X = |A e^{j phi} + Z|^2, A^2 ~ Gamma(m, omega/m)
    for env in Environment::ALL {
        let p = ShadowedRiceParams::preset(env);
        for s in [0.1, 1.0, 5.0] {
            let scatter = 1.0 + 2.0 * p.b0 * s;
            let want = (1.0 / scatter) * (1.0 + p.omega * s / (p.m * scatter)).powf(-p.m);
            let got = power_mgf(-s, &p).unwrap();
            assert!(close(got, want, 1e-12, 0.0), "{env} s={s}: {got} vs {want}");
        }
    }
}

#[test]
fn normalization_series_sums_to_one() {
    for env in Environment::ALL {
        let p = ShadowedRiceParams::preset(env);
        let total = normalization_series(&p, &SeriesControl::default()).unwrap();
        assert!((total - 1.0).abs() < 1e-8, "{env}: {total}");
    }
}

#[test]
fn disconnection_matches_quadrature() {
    let g0 = zenith_gain();
    for env in Environment::ALL {
        let p = ShadowedRiceParams::preset(env);
        for tx in [0.0, 10.0, 20.0, 30.0] {
            let lb = LinkBudget {
                tx_power_dbm: tx,
                ..LinkBudget::default()
            };
            let want = power_cdf(lb.disconnection_threshold(g0), p.b0, p.m, p.omega);
            for ctl in [SeriesControl::default(), SeriesControl::paper()] {
                let got = p_disc(&p, &lb, g0, &ctl).unwrap();
                assert!(close(got, want, 1e-5, 1e-10), "{env} Pt={tx}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn sampler_moments_and_distribution() {
    let draws = 1_000_000;
    for env in [Environment::Average, Environment::Heavy] {
        let p = ShadowedRiceParams::preset(env);
        let sampler = FadingSampler::new(&p).unwrap();
        let mut rng = stream_rng(11, env as u64);
        let mut xs: Vec<f64> = (0..draws).map(|_| sampler.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let want = 2.0 * p.b0 + p.omega;
        assert!((mean / want - 1.0).abs() < 0.01, "{env} mean {mean} vs {want}");
        let table = CdfTable::new(p.b0, p.m, p.omega, 20.0 * want.max(0.2), 40_000);
        let d = ks_statistic(&mut xs, |x| table.cdf(x));
        assert!(d < 0.002, "{env} KS distance {d}");
    }
}

#[test]
fn single_interferer_cdf_is_scaled_fading_cdf() {
    let p = average();
    let g = 3.7e-12;
    let ctl = SeriesControl::new(1e-10, 20_000).unwrap();
    for rule in [AlphaRule::Balanced, AlphaRule::MinGainFactor(3.9999)] {
        let mut mix = InterferenceMixture::new(&[g], &p, rule).unwrap();
        for f in [0.5, 1.0, 2.0] {
            let x = f * p.mean_power() * g;
            let got = mix.interference_cdf(x, &ctl).unwrap();
            let want = power_cdf(x / g, p.b0, p.m, p.omega);
            assert!((got - want).abs() < 1e-4, "{rule:?} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn mixture_weights_reproduce_laplace_transform() {
    let p = average();
    let gains = [1.0, 0.5, 0.2];
    let cfg = CaptureSeriesConfig {
        alpha: AlphaRule::MinGainFactor(3.9999),
        ..CaptureSeriesConfig::default()
    };
    let co = capture_coefficients(gains.len(), &gains, &p, &cfg).unwrap();
    let s = 0.1 / co.alpha;
    let eta = 1.0 / (1.0 + co.alpha * s);
    let k = gains.len() as i32;
    let series: f64 = co
        .c_seq
        .iter()
        .enumerate()
        .map(|(i, c)| co.d_const * c * eta.powi(k + i as i32))
        .sum();
    let product: f64 = gains
        .iter()
        .map(|g| {
            let sg = s * g;
            let scatter = 1.0 + 2.0 * p.b0 * sg;
            (1.0 / scatter) * (1.0 + p.omega * sg / (p.m * scatter)).powf(-p.m)
        })
        .product();
    assert!((series - product).abs() < 1e-7, "{series} vs {product}");
}

fn capture_mc(p: &ShadowedRiceParams, g0: f64, gains: &[f64], sir: f64, draws: usize, seed: u64) -> Vec<f64> {
    let fading = PhysicalFading::new(p.b0, p.m, p.omega);
    let mut rng = stream_rng(seed, 0);
    let mut fails = vec![0u64; gains.len()];
    for _ in 0..draws {
        let h0 = g0 * fading.draw(&mut rng);
        let mut sum = 0.0;
        for (g, f) in gains.iter().zip(fails.iter_mut()) {
            sum += g * fading.draw(&mut rng);
            if h0 <= sir * sum {
                *f += 1;
            }
        }
    }
    fails.into_iter().map(|f| f as f64 / draws as f64).collect()
}

#[test]
fn capture_matches_physical_monte_carlo_equal_gains() {
    let p = average();
    let sir = LinkBudget::default().sir_threshold_linear();
    let gains = vec![1.0; 8];
    let mc = capture_mc(&p, 1.0, &gains, sir, 1_000_000, 21);
    let cfg = CaptureSeriesConfig::default();
    for k in 1..=8 {
        let got = p_cap(k, 1.0, &gains, &p, sir, &cfg).unwrap();
        assert!(close(got, mc[k - 1], 0.05, 0.0), "k={k}: {got} vs {}", mc[k - 1]);
    }
}

#[test]
fn capture_matches_physical_monte_carlo_mixed_gains() {
    let sir = LinkBudget::default().sir_threshold_linear();
    let gains = [0.05, 0.3, 1.0, 2.0];
    for env in [Environment::Average, Environment::Light, Environment::Heavy] {
        let p = ShadowedRiceParams::preset(env);
        let mc = capture_mc(&p, 1.0, &gains, sir, 400_000, 22);
        for method in [CaptureMethod::DesiredExpansion, CaptureMethod::InterferenceMixture] {
            let cfg = CaptureSeriesConfig {
                method,
                ..CaptureSeriesConfig::default()
            };
            for k in 1..=gains.len() {
                let got = p_cap(k, 1.0, &gains, &p, sir, &cfg).unwrap();
                assert!(
                    close(got, mc[k - 1], 0.05, 0.003),
                    "{env} {method:?} k={k}: {got} vs {}",
                    mc[k - 1]
                );
            }
        }
    }
}

#[test]
fn interference_count_examples() {
    let dr = DataRate::DR6.profile();
    let c = interference_counts(100_000.0, 1, 291.1, &dr).unwrap();
    assert_eq!(c.i_total, 670);
    assert!((c.i_hdr(10).unwrap() - 13.36).abs() < 0.005);
    assert!((c.i_pl(10).unwrap() - 8.66).abs() < 0.005);
    assert_eq!(c.k_hdr(10).unwrap(), 14);
    assert_eq!(c.k_pl(10).unwrap(), 9);
}

#[test]
fn header_replica_loss_example() {
    let capture = vec![1.0; 15];
    let per_replica = fragment_loss(14, 60, 0.01, &capture);
    let want = 0.01 + 0.99 * (1.0 - (59.0f64 / 60.0).powi(14));
    assert!((per_replica - want).abs() < 1e-12);
    assert!((per_replica - 0.2176).abs() < 5e-5);
    assert!((per_replica.powi(2) - 0.04735).abs() < 5e-5);
}

#[test]
fn fragment_loss_matches_binomial_sum() {
    // arbitrary capture curve, direct binomial enumeration
    let capture: Vec<f64> = (0..=30)
        .map(|k| if k == 0 { 0.0 } else { 1.0 - 0.6f64.powi(k) })
        .collect();
    for trials in [1u64, 5, 14, 30] {
        let collided: f64 = (1..=trials)
            .map(|k| binom(trials, k, 1.0 / 60.0) * capture[k as usize])
            .sum();
        let want = 0.02 + 0.98 * collided;
        let got = fragment_loss(trials, 60, 0.02, &capture);
        assert!((got - want).abs() < 1e-9, "K={trials}: {got} vs {want}");
    }
}

#[test]
fn payload_loss_example() {
    let dr = DataRate::DR6.profile();
    let want: f64 = (2..=5).map(|m| binom(5, m, 0.1)).sum();
    assert!((p_pl(&dr, 0.1) - want).abs() < 1e-9);
    assert!((want - 0.08146).abs() < 1e-5);
}

#[test]
fn no_interference_branch_example() {
    let dr = DataRate::DR6.profile();
    let c = interference_counts(100_000.0, 1, 291.1, &dr).unwrap();
    let prefactor = (51.0f64 / 52.0).powi(670);
    assert!((prefactor - 2.24e-6).abs() < 0.01e-6);
    let hdr = 0.01f64.powi(2);
    let pl: f64 = (2..=5).map(|m| binom(5, m, 0.01)).sum();
    let bracket = hdr + (1.0 - hdr) * pl;
    assert!(close(noise_only_loss(&dr, 0.01), bracket, 1e-10, 0.0));
    assert!(close(p_ni(&dr, 0.01, &c), prefactor * bracket, 1e-10, 0.0));
}

#[test]
fn cooperative_outage_by_enumeration() {
    let (o, pd) = (0.1f64, 0.8);
    // parity path: own packet lost and at least two of the other three lost
    let mut two_of_three = 0.0;
    for mask in 0u32..8 {
        let lost = mask.count_ones();
        if lost >= 2 {
            two_of_three += o.powi(lost as i32) * (1.0 - o).powi(3 - lost as i32);
        }
    }
    let want = pd * o * two_of_three + (1.0 - pd) * o * o;
    assert!((outage_d2d(o, pd) - want).abs() < 1e-15);
    assert!((want - 0.00424).abs() < 1e-12);
}

#[test]
fn slant_range_at_horizon() {
    let geo = SatelliteGeometry::default();
    let re = geo.earth_radius_km;
    let want = ((re + geo.orbital_height_km).powi(2) - re * re).sqrt();
    let got = slant_distance_km(0.0, &geo).unwrap();
    assert!((got - want).abs() < 1e-9);
    assert!((got - 3249.32).abs() < 0.01);
}

#[test]
fn edge_elevation_by_vectors() {
    let geo = SatelliteGeometry::default();
    let re = geo.earth_radius_km;
    let theta = geo.footprint_radius_km / re;
    let ground = (re * theta.sin(), re * theta.cos());
    let sat = (0.0, re + geo.orbital_height_km);
    let v = (sat.0 - ground.0, sat.1 - ground.1);
    let up = (theta.sin(), theta.cos());
    let want = ((v.0 * up.0 + v.1 * up.1) / v.0.hypot(v.1)).asin().to_degrees();
    let got = elevation_from_ground_distance(geo.footprint_radius_km, &geo).unwrap();
    assert!((got - want).abs() < 1e-9);
    assert!((got - 8.311).abs() < 1e-3);
}

#[test]
fn swept_area_matches_published_value() {
    let a = footprint_area_km2(&SatelliteGeometry::default(), 291.1);
    assert!((a / 2.4847e7 - 1.0).abs() < 1e-4, "{a}");
}

#[test]
fn zenith_path_loss_composition() {
    let geo = SatelliteGeometry::default();
    let f_mhz = 905.4385;
    let d_m = geo.orbital_height_km * 1e3;
    let fspl = 20.0 * (4.0 * std::f64::consts::PI * d_m * f_mhz * 1e6 / 299_792_458.0).log10();
    let tree = (25.8 * (-1.1f64 * 1.57).exp() + 1.5 * 3.937f64.cos()) * (f_mhz / 900.0).sqrt();
    let want = fspl + 0.1 + 0.1 + tree + 3.0;
    let got = path_loss_db(90.0, f_mhz, &geo).unwrap();
    assert!((got - want).abs() < 0.02, "{got} vs {want}");
}

#[test]
fn positions_fill_region_quadrants_evenly() {
    let geo = SatelliteGeometry::default();
    let slot = 291.1;
    let mid = geo.ground_speed_km_s * slot / 2.0;
    let mut rng = stream_rng(31, 0);
    let mut counts = [0f64; 4];
    for pos in sample_positions(&mut rng, 100_000, &geo, slot) {
        let q = (pos.along_track_km > mid) as usize * 2 + (pos.cross_track_km > 0.0) as usize;
        counts[q] += 1.0;
    }
    let e = 25_000.0;
    let chi2: f64 = counts.iter().map(|c| (c - e).powi(2) / e).sum();
    assert!(chi2 < 11.345, "chi2 {chi2} counts {counts:?}");
}

#[test]
fn hop_groups_are_uniform() {
    for rate in DataRate::ALL {
        let dr = rate.profile();
        let mut rng = stream_rng(41, rate as u64);
        let mut counts = vec![0f64; dr.groups as usize];
        let n = 1_000_000;
        for i in 0..n {
            let h = generate_hops(&mut rng, &dr);
            if i == 0 {
                assert_eq!(h.carriers.len() as u32, if rate == DataRate::DR5 { 8 } else { 7 });
            }
            assert!(h.carriers.iter().all(|&c| c < dr.carriers_per_group));
            counts[h.group as usize] += 1.0;
        }
        let e = n as f64 / dr.groups as f64;
        let chi2: f64 = counts.iter().map(|c| (c - e).powi(2) / e).sum();
        assert!(chi2 < 76.15, "{rate} chi2 {chi2}");
    }
}

#[test]
fn aggregate_inter_arrival_mean() {
    let n = 100_000;
    let slot = 291.1;
    let scn = Scenario::table_iii(DataRate::DR6);
    let mut dev = Device::new(lrfhss_core::geometry::DevicePosition::new(0.0, 0.0), &scn);
    dev.window = Some((0.0, slot));
    let mut rng = stream_rng(51, 0);
    let mut starts: Vec<f64> = (0..n).flat_map(|_| dev.draw_starts(&mut rng, 1, 0.0)).collect();
    starts.sort_by(f64::total_cmp);
    let mean_gap = (starts[n - 1] - starts[0]) / (n - 1) as f64;
    assert!((mean_gap / (slot / n as f64) - 1.0).abs() < 0.02, "{mean_gap}");
}

#[test]
fn lone_device_outage_is_noise_only() {
    let mut scn = Scenario::table_iii(DataRate::DR6);
    scn.fading = ShadowedRiceParams::preset(Environment::Heavy);
    scn.population = Population::Users(1);
    let sim = simulate(&scn, 40_000).unwrap();

    // a packet sent at a uniform time from a uniformly placed device sees the
    // satellite at a point uniform over the instantaneous footprint
    let dr = scn.dr();
    let geo = scn.geometry;
    let r = geo.footprint_radius_km;
    let p = scn.fading;
    let loss_at = |d: f64| {
        let g = path_gain_at_ground_distance(d.min(r), scn.link.frequency_mhz, &geo).unwrap();
        let pd = power_cdf(scn.link.disconnection_threshold(g), p.b0, p.m, p.omega);
        let hdr = pd.powi(dr.n_hdr as i32);
        let pl: f64 = (dr.omega() as u64..=dr.n_pl as u64)
            .map(|m| binom(dr.n_pl as u64, m, pd))
            .sum();
        hdr + (1.0 - hdr) * pl
    };
    let want = simpson(|d| 2.0 * d / (r * r) * loss_at(d), 0.0, r, 400);
    assert!(want > 0.01 && want < 0.99, "uninformative operating point {want}");
    let tol = 4.0 * sim.std_error + 0.02 * want;
    assert!(
        (sim.outage_estimate - want).abs() < tol,
        "sim {} +- {} vs {want}",
        sim.outage_estimate,
        sim.std_error
    );
}
