//! Synthetic ground truth: scenes, camera trajectories, ray-cast rendering,
//! flip injection and the named test-case presets.

pub mod flips;
pub mod presets;
pub mod render;
pub mod scene;
pub mod trajectory;

pub use flips::{inject_flips, FlipInjection};
pub use presets::{find_preset, MarkerLayout, Preset, PresetGroup};
pub use render::{ground_truth, render_frame, render_sequence, GroundTruthRecord, RenderOptions, RenderedSequence};
pub use scene::{PlacedMarker, Scene};
pub use trajectory::{CameraPose, Trajectory, TrajectoryKind};
