use edgeflow::config::Config;
use edgeflow::simulator::{run_open_loop, Motion, Scene, Trajectory};
use edgeflow::Quality;

fn constant_flow(px_x: f64, px_y: f64, frames: usize) -> Vec<edgeflow::simulator::LogRow> {
    let cfg = Config::default();
    let k = cfg.intrinsics();
    let tr = Trajectory::new(
        Motion::Constant {
            vx: px_x * cfg.frame_rate / k.focal_x(),
            vy: px_y * cfg.frame_rate / k.focal_y(),
        },
        1.0,
    );
    run_open_loop(
        &tr.samples(cfg.frame_rate, frames).unwrap(),
        &Scene::new(21),
        &cfg,
    )
    .unwrap()
}

#[test]
fn quarter_pixel_settles_on_horizon_four() {
    let rows = constant_flow(0.25, 0.0, 80);
    for r in &rows[30..] {
        assert_eq!(r.horizon.0, 4);
        assert!(
            (r.flow.0 - 0.25).abs() <= 0.05,
            "t={} flow {}",
            r.t,
            r.flow.0
        );
    }
}

#[test]
fn two_pixels_use_horizon_one() {
    let rows = constant_flow(2.0, 0.0, 60);
    for r in &rows[20..] {
        assert_eq!(r.horizon.0, 1);
        assert!(
            (r.flow.0 - 2.0).abs() <= 0.25,
            "t={} flow {}",
            r.t,
            r.flow.0
        );
    }
}

#[test]
fn vertical_axis_sub_pixel() {
    let rows = constant_flow(0.0, -0.2, 80);
    let tail = &rows[40..];
    let m = tail.iter().map(|r| r.flow.1).sum::<f64>() / tail.len() as f64;
    assert!((m + 0.2).abs() <= 0.05, "{m}");
    assert!(tail.iter().all(|r| r.horizon.1 == 5));
}

#[test]
fn warmup_flag_clears_when_ring_fills() {
    let rows = constant_flow(0.5, 0.5, 15);
    let cap = Config::default().horizon_max;
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(
            r.quality.contains(Quality::WARMUP),
            i < cap,
            "frame {i}: {}",
            r.quality
        );
    }
}

#[test]
fn velocity_carries_the_pinhole_scale() {
    // Flow is exact in pixels; converting with the angle-per-pixel model
    // reads (fov / width) * focal of the pinhole speed.
    let cfg = Config::default();
    let k = cfg.intrinsics();
    let rows = constant_flow(0.5, 0.0, 60);
    let truth = rows[0].truth.velocity.0;
    let est = rows[59].v_est.0;
    let ratio = k.fov_horizontal / k.image_width as f64 * k.focal_x();
    assert!(
        (est / truth - ratio).abs() < 0.01,
        "{} vs {ratio}",
        est / truth
    );
}
