//! BER analysis: gamma SNR models, their sums, and the averaging integrals.

mod ber;
mod gamma;
pub mod quad;
mod special;

pub use ber::{
    approx_ber, approx_ber_cd_df, approx_ber_cd_ef, approx_fit, average_ber, conditional_ber, craig_closed_form,
    db_to_linear, df_terms, exact_ber_cd_df, exact_ber_cd_ef, exact_ber_nc, nc_snr, DfTerms, LinkBudget, LinkParams,
};
pub use gamma::{
    gamma_sum, gamma_sum_pdf, GammaDist, GammaSum, MoschopoulosSeries, DEFAULT_SERIES_TOL, SERIES_TERM_CAP,
};
pub use special::{gauss_2f1_special, log_gamma, q_function};
