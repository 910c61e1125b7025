//! Walk-forward backtesting of daytime (open-to-close) E-mini S&P 500
//! futures strategies.
//!
//! The crate covers the whole path from raw CSV bars to performance
//! reports: [`data`] aligns ES, VIX and T-bill inputs, [`learners`] holds
//! from-scratch classifiers, [`signals`] wraps them as trading models,
//! [`backtest`] runs the walk-forward schedule and [`metrics`] and
//! [`report`] summarize the result. [`cli`] ties it together behind the
//! `es-daytime` binary.

pub mod backtest;
pub mod cli;
pub mod data;
pub mod learners;
pub mod metrics;
pub mod report;
pub mod signals;
pub mod synth;
pub mod types;
