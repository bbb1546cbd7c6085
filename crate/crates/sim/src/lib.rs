pub mod adversary;
pub mod broadcast;
pub mod crypto;
pub mod discovery;
pub mod kernel;
pub mod probes;
pub mod reconfig;
pub mod scenario;
pub mod trace;

pub use kernel::{
    explore, Adversary, Exploration, AdvCtx, Ctx, Probe, Protocol, RunStatus, ScheduleMode, SchedulePolicy, SimError, Silent,
    TobLiveness, View, World,
};
pub use trace::{Trace, TraceEvent};
