pub use slitwave_core as core;
