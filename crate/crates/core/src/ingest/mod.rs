//! Prediction record wire format.
//!
//! A record file is UTF-8 text, one record per line, fields separated by a
//! single tab:
//!
//! ```text
//! #fields:	learner_id	scenario_id	replication	t	x_query	y_true	y_pred
//! # config_hash: 9f2c...            (optional comment lines start with '#')
//! BMA	sw1_se0.03	0	1	-2.1752384733001640e0	4.1500000000000000e-1	...
//! ```
//!
//! Reals are written in scientific notation with 17 significant digits so
//! that every value round-trips bit-exactly. `t` is the number of
//! demonstrations the learner conditioned on; `x_query` and `y_true` are
//! `X_{t+1}` and `Y_{t+1}` of the replayed task.

mod records;
mod tasks;
mod validate;

pub use records::{
    format_real, parse_records, read_records, write_records, Dataset, PredictionRecord, RECORD_FIELDS,
};
pub use tasks::{read_tasks, write_tasks, TaskRow, TASK_FIELDS};
pub use validate::{validate_against_environment, Mismatch, ScenarioReport, ValidationReport, REPLAY_TOLERANCE};
