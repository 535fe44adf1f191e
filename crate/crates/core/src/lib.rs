pub mod beamline;
pub mod constants;
pub mod decoherence;
pub mod grating;
pub mod quadrature;
pub mod scenarios;
pub mod talbot_lau;
pub mod units;
