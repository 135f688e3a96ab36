//! Bundled scenarios used by the end-to-end tests and the CLI demo.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{CameraSynthParams, NoiseSpec, PersonScript, Scenario};
use crate::model::Vec2;

/// Rectangular walking loop used by the multi-walker scenarios.
const LOOP: [Vec2; 4] = [
    Vec2::new(4.0, 4.0),
    Vec2::new(20.0, 4.0),
    Vec2::new(20.0, 12.0),
    Vec2::new(4.0, 12.0),
];

/// Waypoints for one full lap starting at arc offset `offset` along the
/// loop perimeter.
fn lap_from_offset(offset: f64) -> Vec<Vec2> {
    let mut lengths = [0.0f64; 4];
    let mut total = 0.0;
    for i in 0..4 {
        lengths[i] = (LOOP[(i + 1) % 4] - LOOP[i]).norm();
        total += lengths[i];
    }
    let mut s = offset % total;
    let mut seg = 0usize;
    while s >= lengths[seg] {
        s -= lengths[seg];
        seg += 1;
    }
    let dir = (LOOP[(seg + 1) % 4] - LOOP[seg]) / lengths[seg];
    let start = LOOP[seg] + s * dir;

    let mut waypoints = vec![start];
    for k in 1..=4 {
        waypoints.push(LOOP[(seg + k) % 4]);
    }
    waypoints.push(start);
    waypoints
}

fn corner_camera(id: &str, position: Vec2, yaw_deg: f64) -> CameraSynthParams {
    CameraSynthParams {
        camera_id: id.into(),
        position,
        mount_height: 3.5,
        yaw_deg,
        pitch_deg: 30.0,
        focal_px: 260.0,
        image_size: (640.0, 480.0),
        max_range: 35.0,
    }
}

/// Four people walking a shared loop with ~8.5 m minimum separation,
/// covered by four corner cameras. Noiseless by default, so the full
/// pipeline closes exactly on it.
pub fn four_walkers() -> Scenario {
    let perimeter = 48.0;
    let persons = (0..4)
        .map(|k| PersonScript {
            person_id: format!("p{k}"),
            waypoints: lap_from_offset(perimeter / 4.0 * k as f64),
            speed: 1.0,
            start_t: 0,
            stationary_orientations_deg: None,
        })
        .collect();
    // yaw from each corner toward the site center (12, 8)
    let center = Vec2::new(12.0, 8.0);
    let yaw_toward = |p: Vec2| {
        let d = center - p;
        d.x.atan2(d.y).to_degrees()
    };
    let positions = [
        Vec2::new(1.0, 1.0),
        Vec2::new(23.0, 1.0),
        Vec2::new(23.0, 15.0),
        Vec2::new(1.0, 15.0),
    ];
    let cameras = positions
        .iter()
        .enumerate()
        .map(|(i, &p)| corner_camera(&format!("cam{i}"), p, yaw_toward(p)))
        .collect();
    Scenario {
        site: (24.0, 16.0),
        persons,
        cameras,
        noise: NoiseSpec::none(),
        duration: 48,
        seed: 7,
    }
}

/// Two walkers crossing at 90 degrees with ~0.7 m closest approach: the
/// stress case where frame-by-frame matching swaps identities but a
/// velocity model carries them through.
pub fn crossing_walkers() -> Scenario {
    Scenario {
        site: (14.0, 14.0),
        persons: vec![
            PersonScript {
                person_id: "east".into(),
                waypoints: vec![Vec2::new(0.0, 5.0), Vec2::new(12.0, 5.0)],
                speed: 1.0,
                start_t: 0,
                stationary_orientations_deg: None,
            },
            PersonScript {
                person_id: "north".into(),
                waypoints: vec![Vec2::new(6.0, 0.0), Vec2::new(6.0, 12.0)],
                speed: 1.0,
                start_t: 0,
                stationary_orientations_deg: None,
            },
        ],
        cameras: vec![
            corner_camera("cam0", Vec2::new(1.0, 1.0), 40.0),
            corner_camera("cam1", Vec2::new(13.0, 1.0), 320.0),
        ],
        noise: NoiseSpec::none(),
        duration: 12,
        seed: 11,
    }
}
