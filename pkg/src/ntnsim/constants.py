"""Shared physical constants.

Every module reads these from here so the whole simulator agrees on the
earth model and unit conventions.
"""

import math

EARTH_RADIUS_KM = 6371.0
MU_EARTH_KM3_S2 = 398600.4418
SPEED_OF_LIGHT_M_S = 299792458.0
SPEED_OF_LIGHT_KM_S = SPEED_OF_LIGHT_M_S / 1000.0
OMEGA_EARTH_RAD_S = 7.2921159e-5
SIDEREAL_DAY_S = 86164.0905
BOLTZMANN_J_K = 1.380649e-23

# -10*log10(k), the noise-floor constant of the dB-domain SNR budget.
BOLTZMANN_TERM_DB = -10.0 * math.log10(BOLTZMANN_J_K)
