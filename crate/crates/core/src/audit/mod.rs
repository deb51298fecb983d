//! Exact privacy certification and the numeric necessary conditions.

mod dual;
mod exact;
mod mgf;
mod tables;

pub use dual::{check_dual_certificate, enumerate_multisets, DualCertificate, DualCertificateReport};
pub use exact::{
    audit_binary, audit_binary_with, curve_csv, log_ratio_curve, ratio_upper_bound, transcript_dist, AuditOptions,
    AuditReport, AUDIT_HEADER,
};
pub use mgf::{mgf_ratio_check, tv_accuracy_check, MgfCheckReport, TvAccuracy};
pub use tables::{anti_concentration, eval_tail_inequality, pmk_table, AntiConcentration, ConvolutionTable, TailInequality};
