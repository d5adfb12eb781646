//! Bidirectional sensorimotor maps built from two self-organizing maps joined
//! by Oja-Hebbian connections.
//!
//! The motor map quantizes joint space and the sensory map quantizes task
//! space. Either map can be trained as a plain Kohonen map or as a
//! varying-density map that pulls nodes toward sparsely covered regions.
//! A distortion monitor detects changes in the arm and restarts learning
//! from the matching point of the original schedule.

pub mod adaptation;
pub mod arm;
pub mod association;
pub mod error;
pub mod lattice;
pub mod model;
pub mod density;
pub mod som;


pub use adaptation::{distortion, resolve_tau, AdaptationController, TauResolution};
pub use arm::{babble, babble_with, forward_kinematics, perturb, ArmModel, BabbleSample, BabbleSet, Normalizer, PerturbKind};
pub use association::{activities, oja_step, query_forward, query_inverse, train_bridge, AssociativeBridge, BridgeSchedule, Decode};
pub use error::{Error, Result};
pub use lattice::{grid_distance_sq, neighbors_within, GridSpec, NodeIndex, SomMap};
pub use model::{derive_seed, recent_window, run_readaptation, MapVariant, ModelConfig, Readaptation, SensorimotorModel, DISTORTION_WINDOW};
pub use som::{decayed, find_bmu, gaussian_neighborhood, som_step, train_som, TrainingSchedule, TrainingTrace};
pub use density::{density_coefficient, train_vdsom, vdsom_neighborhood, DensityParams};
