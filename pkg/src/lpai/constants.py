"""Physical constants and species convenience values (SI units)."""

HBAR = 1.054571817e-34  # J s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
GM_EARTH = 3.986004418e14  # m^3 / s^2
R_EARTH = 6.371e6  # m
OMEGA_EARTH = 7.292115e-5  # rad / s

# Convenience only: mass [kg] and effective two-photon wave number [1/m] for
# counter-propagating Raman beams on the D2 line.  Physics code always takes
# raw SI values; these are used by the scenario shorthand ``species: Rb87``.
SPECIES = {
    "Rb87": {"mass": 86.909180527 * ATOMIC_MASS_UNIT, "k_eff": 1.6105e7},
    "Cs133": {"mass": 132.905451961 * ATOMIC_MASS_UNIT, "k_eff": 1.4744e7},
}
