"""Physical constants and atomic data used throughout the package.

All quantities are SI. Atomic numbers for Rb-85 are standard reference
data (Steck, "Rubidium 85 D Line Data"); they are defaults and can be
overridden per scenario.
"""

import math

MU0 = 4.0e-7 * math.pi  # vacuum permeability (T m / A)
HBAR = 1.054571817e-34  # reduced Planck constant (J s)
KB = 1.380649e-23  # Boltzmann constant (J / K)
G_EARTH = 9.80665  # standard gravity (m / s^2)


# Rb-85 D2 cooling transition.
RB85_MASS = 1.409e-25  # kg
RB85_WAVELENGTH = 780.0e-9  # m
RB85_LINEWIDTH = 2.0 * math.pi * 6.07e6  # rad / s
RB85_SATURATION_INTENSITY = 16.7  # W / m^2 (1.67 mW/cm^2)
# Effective Zeeman tuning rate mu'/hbar: 1.4 MHz/G = 1.4e10 Hz/T.
RB85_ZEEMAN_RATE = 2.0 * math.pi * 1.4e10  # rad / (s T)
