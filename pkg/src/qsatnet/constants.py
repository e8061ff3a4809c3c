"""Physical constants shared across the simulator (SI units)."""

MU_EARTH = 3.986004418e14  # m^3 / s^2
R_EARTH = 6.371e6  # m, spherical mean radius
OMEGA_EARTH = 7.2921159e-5  # rad / s, sidereal spin rate

SIDEREAL_DAY = 86164.0905  # s
