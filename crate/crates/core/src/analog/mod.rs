//! Functional model of the analog datapath.

pub mod conv;
pub mod mvm;
pub mod pcm;
pub mod quant;
pub mod rng;
pub mod tinycnn;

pub use conv::{conv2d_analog, im2col, lower_weights, ConvParams, ConvWeights, Tensor3};
pub use mvm::{noisy_mvm, noisy_mvm_serial, AccumulationTree, Matrix, MvmConfig, MvmKey, NoiseSpec, Readout};
pub use pcm::{pcm_program, EventLog, PcmArray, ProgramEvent, Programmed};
pub use quant::{quantize, quantize_signed, QuantSpec, SignedMode};
pub use rng::{inject_noise, KeyedRng, Site};
pub use tinycnn::{simulate_tinycnn, SimulationReport, TinyCnnOptions};
