//! End-to-end detector checks against rendered ground truth.

use fidmark_core::detector::{
    bundle_multi, detect_markers, disambiguate_ellipse, disambiguate_orig, segment_image, Detector, DetectorParams,
    MarkerDetection, Solution, Variant,
};
use fidmark_core::geometry::{Pose, Quaternion};
use fidmark_core::synth::presets::{self, preset_camera, BUNDLE_DIAMETER, BUNDLE_IDS};
use fidmark_core::synth::{render_sequence, GroundTruthRecord, RenderOptions, RenderedSequence, Scene, Trajectory, TrajectoryKind};
use fidmark_core::Error;
use image::GrayImage;
use nalgebra::Vector3;

const DEG: f64 = std::f64::consts::PI / 180.0;
const TILT_30: f64 = 30.0 * DEG;

fn render(scene: &Scene, traj: &Trajectory, sigma: f64, seed: u64) -> RenderedSequence {
    let opts = RenderOptions { noise_sigma: sigma, blur_radius: 0.6, seed, supersample: 2 };
    render_sequence(scene, traj, &preset_camera(), &opts).unwrap()
}

fn static_view(distance: f64, azimuth: f64, elevation: f64) -> Trajectory {
    Trajectory { azimuth, elevation, ..Trajectory::new(TrajectoryKind::Static, 0.1, 10.0, distance) }
}

fn single_frame(scene: &Scene, traj: &Trajectory, sigma: f64) -> (GrayImage, GroundTruthRecord) {
    let seq = render(scene, traj, sigma, 7);
    (seq.frames[0].clone(), seq.ground_truth[0].clone())
}

fn single() -> Scene {
    Scene::single(presets::single_marker())
}

fn bundle_params() -> DetectorParams {
    DetectorParams { circle_diameter: BUNDLE_DIAMETER, bundle_ids: BUNDLE_IDS.to_vec(), ..Default::default() }
}

/// Twenty frames swinging a degree or two around a 30° oblique view.
fn tilt_sequence() -> Trajectory {
    Trajectory {
        azimuth: TILT_30,
        amplitude: 0.03,
        ..Trajectory::new(TrajectoryKind::OrbitEastWest, 2.0, 10.0, 1.5)
    }
}

fn normal_error(pose: &Pose, gt: &GroundTruthRecord) -> f64 {
    pose.normal().angle(&gt.pose.normal())
}

fn true_solution(det: &MarkerDetection, gt: &GroundTruthRecord) -> Solution {
    if normal_error(&det.pose_a, gt) <= normal_error(&det.pose_b, gt) {
        Solution::A
    } else {
        Solution::B
    }
}

#[test]
fn frontal_static_marker_is_located() {
    let cam = preset_camera();
    let params = DetectorParams::default();
    let traj = Trajectory::new(TrajectoryKind::Static, 0.5, 10.0, 2.0);
    let seq = render(&single(), &traj, 0.0, 1);
    for (img, gt) in seq.frames.iter().zip(&seq.ground_truth) {
        let pairs = segment_image(img, &params);
        assert_eq!(pairs.len(), 1);
        let truth_px = cam.project(&gt.pose.position).unwrap();
        assert!((pairs[0].ellipse.center() - truth_px).norm() < 0.5);

        let dets = detect_markers(img, &cam, &params, gt.frame, gt.t);
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].id, Some(presets::SINGLE_ID));
        for pose in [&dets[0].pose_a, &dets[0].pose_b] {
            let err = (pose.position - gt.pose.position).norm();
            assert!(err < 0.02 && err < 0.01 * gt.pose.position.norm(), "error {err} m");
        }
    }
}

#[test]
fn bundle_image_has_three_pairs() {
    let (img, _) = single_frame(&presets::bundle_scene(), &static_view(1.0, 0.2, 0.1), 0.0);
    assert_eq!(segment_image(&img, &bundle_params()).len(), 3);
}

#[test]
fn oblique_view_has_exactly_one_true_candidate() {
    let cam = preset_camera();
    for (d, az, el) in [(1.5, TILT_30, 0.0), (1.0, 45.0 * DEG, 0.0), (3.0, 45.0 * DEG, 0.0), (2.0, 0.0, TILT_30)] {
        let (img, gt) = single_frame(&single(), &static_view(d, az, el), 0.0);
        let det = &detect_markers(&img, &cam, &DetectorParams::default(), 0, 0.0)[0];
        let close = [&det.pose_a, &det.pose_b].iter().filter(|p| normal_error(p, &gt) < 3.0 * DEG).count();
        assert_eq!(close, 1, "d={d} az={az} el={el}");
        assert!((det.position() - gt.pose.position).norm() < 0.02 * d);
    }
}

#[test]
fn thirty_degree_tilt_disambiguation() {
    let cam = preset_camera();
    let params = DetectorParams::default();
    let seq = render(&single(), &tilt_sequence(), 0.0, 3);
    let (mut orig_ok, mut ellipse_ok) = (0, 0);
    for (img, gt) in seq.frames.iter().zip(&seq.ground_truth) {
        let det = &detect_markers(img, &cam, &params, gt.frame, gt.t)[0];
        let o = disambiguate_orig(det, img, &cam, &params).unwrap();
        let e = disambiguate_ellipse(det, img, &cam, &params).unwrap();
        orig_ok += (normal_error(det.pose(o.solution), gt) < 3.0 * DEG) as usize;
        ellipse_ok += (normal_error(det.pose(e.solution), gt) < 3.0 * DEG) as usize;
    }
    let n = seq.frames.len();
    assert!(orig_ok as f64 >= 0.9 * n as f64, "orig correct on {orig_ok}/{n}");
    assert!(ellipse_ok >= orig_ok, "ellipse {ellipse_ok} < orig {orig_ok}");
}

#[test]
fn ellipse_scores_true_b_lower() {
    let cam = preset_camera();
    let params = DetectorParams::default();
    let (img, gt) = single_frame(&single(), &static_view(2.0, 0.3, 0.2), 0.0);
    let det = &detect_markers(&img, &cam, &params, 0, 0.0)[0];
    // the constructed view puts the truth on the candidate further from the line of sight
    assert_eq!(true_solution(det, &gt), Solution::B);
    assert!(normal_error(&det.pose_b, &gt) < 3.0 * DEG && normal_error(&det.pose_a, &gt) > 3.0 * DEG);
    let e = disambiguate_ellipse(det, &img, &cam, &params).unwrap();
    assert!(e.variance_b < e.variance_a, "{e:?}");
    assert_eq!(e.solution, Solution::B);
    assert!(!e.fallback);
}

#[test]
fn frontal_view_scores_tie() {
    let cam = preset_camera();
    let params = DetectorParams::default();
    let (img, _) = single_frame(&single(), &static_view(2.0, 0.0, 0.0), 0.0);
    let det = &detect_markers(&img, &cam, &params, 0, 0.0)[0];
    assert!(det.pose_a.normal().angle(&det.pose_b.normal()) < 0.1 * DEG);
    let o = disambiguate_orig(det, &img, &cam, &params).unwrap();
    assert!((o.variance_a - o.variance_b).abs() < 1e-9, "{o:?}");
    assert_eq!(o.solution, Solution::A);
    let e = disambiguate_ellipse(det, &img, &cam, &params).unwrap();
    assert!((e.variance_a - e.variance_b).abs() < 1e-9, "{e:?}");
}

#[test]
fn id_less_detection_is_rejected() {
    let cam = preset_camera();
    let params = DetectorParams::default();
    let (img, _) = single_frame(&single(), &static_view(2.0, 0.2, 0.0), 0.0);
    let mut det = detect_markers(&img, &cam, &params, 0, 0.0).remove(0);
    det.id = None;
    assert!(matches!(disambiguate_orig(&det, &img, &cam, &params), Err(Error::MissingId)));
    assert!(matches!(disambiguate_ellipse(&det, &img, &cam, &params), Err(Error::MissingId)));
}

#[test]
fn detection_contracts_hold_on_noisy_orbit() {
    let cam = preset_camera();
    let traj = Trajectory { azimuth: 0.0, elevation: 0.1, amplitude: 0.5, ..Trajectory::new(TrajectoryKind::OrbitEastWest, 3.0, 10.0, 1.5) };
    let seq = render(&single(), &traj, 8.0, 11);
    for variant in [Variant::Orig, Variant::Ellipse] {
        let det = Detector::new(cam, DetectorParams::default(), variant).unwrap();
        for (i, img) in seq.frames.iter().enumerate() {
            for d in det.process(img, i, seq.ground_truth[i].t) {
                let chosen = d.chosen.unwrap();
                let (mine, other) = match chosen {
                    Solution::A => (d.variance_a, d.variance_b),
                    Solution::B => (d.variance_b, d.variance_a),
                };
                assert!(mine <= other, "frame {i}: chosen {mine} > other {other}");
                let (na, nb) = (d.pose_a.position.norm(), d.pose_b.position.norm());
                assert!((na - nb).abs() < 1e-6);
                let (ta, tb) = (fidmark_core::detector::position_target(&d.pose_a), fidmark_core::detector::position_target(&d.pose_b));
                assert!((ta.norm() - tb.norm()).abs() < 1e-6);
                let (un, vn) = d.normalized_pixel;
                assert!((-1.0..=1.0).contains(&un) && (-1.0..=1.0).contains(&vn));
            }
        }
    }
}

fn id_accuracy(sigma: f64) -> f64 {
    let cam = preset_camera();
    let det = Detector::new(cam, DetectorParams::default(), Variant::Orig).unwrap();
    let (mut hits, mut total) = (0, 0);
    for name in ["east-west", "north-south", "in-out", "pan-tilt"] {
        let p = presets::find_preset(name).unwrap();
        let seq = render(&p.scene(presets::MarkerLayout::Single), &p.trajectory, sigma, p.seed);
        for (i, img) in seq.frames.iter().enumerate() {
            total += 1;
            let ids: Vec<u32> = detect_markers(img, &cam, det.params(), i, 0.0).iter().filter_map(|d| d.id).collect();
            hits += (ids == [presets::SINGLE_ID]) as usize;
        }
    }
    hits as f64 / total as f64
}

#[test]
fn light_noise_never_loses_the_ring() {
    let cam = preset_camera();
    let params = DetectorParams::default();
    let p = presets::find_preset("east-west").unwrap();
    for sigma in [1.0, 2.0, 3.0, 4.0] {
        let seq = render(&p.scene(presets::MarkerLayout::Single), &p.trajectory, sigma, 1);
        for (i, img) in seq.frames.iter().enumerate() {
            assert_eq!(detect_markers(img, &cam, &params, i, 0.0).len(), 1, "sigma {sigma} frame {i}");
        }
    }
}

#[test]
fn id_accuracy_noise_free_and_noisy() {
    assert_eq!(id_accuracy(0.0), 1.0);
    let noisy = id_accuracy(8.0);
    assert!(noisy >= 0.99, "{noisy}");
}

#[test]
fn east_shift_moves_east_target() {
    let cam = preset_camera();
    let det = Detector::new(cam, DetectorParams::default(), Variant::Orig).unwrap();
    for d in [1.0, 1.5] {
        let traj = Trajectory { target: Some(Vector3::zeros()), ..static_view(d, TILT_30, 0.0) };
        // moving the marker 10 cm west is the camera moving 10 cm east
        let mut moved = single();
        moved.markers[0].pose.position = Vector3::new(-0.1, 0.0, 0.0);
        let (i0, _) = single_frame(&single(), &traj, 0.0);
        let (i1, _) = single_frame(&moved, &traj, 0.0);
        let e0 = det.process(&i0, 0, 0.0)[0].position_target().x;
        let e1 = det.process(&i1, 0, 0.0)[0].position_target().x;
        let shift = e1 - e0;
        assert!((shift + 0.10).abs() <= 0.001, "d={d}: east changed by {shift}");
    }
}

fn wrong_candidate(det: &MarkerDetection, gt: &GroundTruthRecord) -> MarkerDetection {
    let mut d = det.clone();
    d.chosen = Some(match true_solution(det, gt) {
        Solution::A => Solution::B,
        Solution::B => Solution::A,
    });
    d
}

#[test]
fn bundle_recovers_plane_from_flipped_constituents() {
    let cam = preset_camera();
    let params = bundle_params();
    let (img, gts) = single_frame_all(&presets::bundle_scene(), &static_view(1.0, 20.0 * DEG, 0.05));
    let dets = detect_markers(&img, &cam, &params, 0, 0.0);
    assert_eq!(dets.len(), 3);
    let flipped: Vec<MarkerDetection> = dets
        .iter()
        .map(|d| {
            let gt = gts.iter().find(|g| Some(g.marker_id) == d.id).unwrap();
            let w = wrong_candidate(d, gt);
            assert!(normal_error(w.chosen_pose(), gt) > 3.0 * DEG, "oblique enough to separate candidates");
            w
        })
        .collect();
    let bundle = bundle_multi(&flipped, &cam).unwrap();
    assert!(bundle.pose_a.normal().angle(&gts[0].pose.normal()) < 3.0 * DEG);
    let mean = flipped.iter().map(|d| d.position()).sum::<Vector3<f64>>() / 3.0;
    assert_eq!(bundle.pose_a.position, mean);
    assert_eq!(bundle.id, Some(BUNDLE_IDS[0]));
}

fn single_frame_all(scene: &Scene, traj: &Trajectory) -> (GrayImage, Vec<GroundTruthRecord>) {
    let seq = render(scene, traj, 0.0, 5);
    (seq.frames[0].clone(), seq.ground_truth)
}

#[test]
fn bundle_on_exact_plane() {
    let cam = preset_camera();
    let (img, _) = single_frame(&single(), &static_view(2.0, 0.0, 0.0), 0.0);
    let template = detect_markers(&img, &cam, &DetectorParams::default(), 0, 0.0).remove(0);
    let positions = [Vector3::new(-0.2, 0.1, 2.0), Vector3::new(0.25, 0.05, 2.0), Vector3::new(0.0, -0.2, 2.0)];
    let dets: Vec<MarkerDetection> = positions
        .iter()
        .zip(BUNDLE_IDS)
        .map(|(p, id)| {
            // deliberately inconsistent constituent orientations
            let q = Quaternion::from_axis_angle(&Vector3::new(1.0, 0.3, 0.0), 2.5);
            let mut d = template.clone();
            d.id = Some(id);
            d.pose_a = Pose::new(*p, q);
            d.pose_b = d.pose_a;
            d
        })
        .collect();
    let bundle = bundle_multi(&dets, &cam).unwrap();
    assert!((bundle.pose_a.normal() - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    let centroid = positions.iter().sum::<Vector3<f64>>() / 3.0;
    assert_eq!(bundle.pose_a.position, centroid);
    assert!(matches!(bundle_multi(&dets[..2], &cam), Err(Error::TooFewConstituents(2))));
}

#[test]
fn multi_detector_tracks_tilted_bundle() {
    let cam = preset_camera();
    let det = Detector::new(cam, bundle_params(), Variant::Multi).unwrap();
    let traj = Trajectory { azimuth: 20.0 * DEG, amplitude: 0.05, ..Trajectory::new(TrajectoryKind::OrbitEastWest, 1.0, 10.0, 1.2) };
    let seq = render(&presets::bundle_scene(), &traj, 0.0, 9);
    for (i, img) in seq.frames.iter().enumerate() {
        let out = det.process(img, i, seq.ground_truth[3 * i].t);
        assert_eq!(out.len(), 1, "frame {i}");
        let truth = seq.ground_truth[3 * i].pose.normal();
        assert!(out[0].pose_a.normal().angle(&truth) < 3.0 * DEG);
    }
    assert!(Detector::new(cam, DetectorParams::default(), Variant::Multi).is_err());
}
