"""Coherent broadband focusing for sparse linear arrays.

Periodogram averaging (AP) and spatial correlation resampling (SCR) focus
per-band coarray correlations onto one frequency; MDL / MDL-gap enumerate
sources and coarray MUSIC estimates directions. The incoherent
signal-subspace (ISS) method is provided as a baseline.
"""

from .acm import AugmentedCovariance, lra_acm, ss_acm_from_lra
from .correlation import (CorrelationVector, coarray_correlation, sample_covariance,
                          sample_covariances, spatial_smoothing_acm)
from .errors import *  # noqa: F401,F403
from .estimation import (EnumerationResult, MusicSpectrum, eig_sorted, enumerate_sources, mdl,
                         mdl_gap, music_spectrum, pick_peaks, resolved, rmse)
from .focusing import (APFocuser, SCRFocuser, UGrid, ap_focus, average_periodogram,
                       lag_domain_periodogram, narrowband_periodogram, rationalize,
                       resample_correlation_band, scr_correlations)
from .geometry import (ArrayGeometry, Coarray, difference_coarray, make_coprime, make_mra6,
                       make_nested, make_ula, steering_vector)
from .iss import iss_enumerate, iss_music, iss_run
from .synthesis import BandPlan, FrequencySnapshots, SourceSpec, ensemble_covariance, generate_snapshots

__version__ = "0.1.0"
