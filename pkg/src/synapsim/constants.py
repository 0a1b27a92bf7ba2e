"""Physical constants (SI units)."""

Q_E = 1.602176634e-19      # elementary charge, C
K_B = 1.380649e-23         # Boltzmann constant, J/K
EPS_0 = 8.8541878128e-12   # vacuum permittivity, F/m

EPS_SI = 11.7 * EPS_0      # silicon permittivity, F/m
EPS_OX = 3.9 * EPS_0       # SiO2 permittivity, F/m


def thermal_voltage(temp: float) -> float:
    """kT/q in volts."""
    return K_B * temp / Q_E
