"""Sample covariance, eigenvalues, the raw statistics U/W/V/R and spike-basis sums."""

from spectra.io import read_binary_matrix, read_csv_matrix, read_data_matrix, write_binary_matrix, write_csv_matrix
from spectra.spikes import s_k_squared, u_group_sum
from spectra.statistics import (
    EigenSpectrum,
    RawStatistics,
    as_data_matrix,
    eigen_spectrum,
    raw_statistics,
    sample_covariance,
)

__all__ = [
    "EigenSpectrum",
    "RawStatistics",
    "as_data_matrix",
    "eigen_spectrum",
    "raw_statistics",
    "read_binary_matrix",
    "read_csv_matrix",
    "read_data_matrix",
    "s_k_squared",
    "sample_covariance",
    "u_group_sum",
    "write_binary_matrix",
    "write_csv_matrix",
]
