#pragma once

namespace pscat::units {

// hbar*c used for every nm <-> natural-unit conversion at the CLI boundary.
inline constexpr double hbarc_ev_nm = 197.327;
inline constexpr double hbarc_mev_nm = hbarc_ev_nm * 1e-6;

// Natural units internally: energies/momenta in MeV, lengths in 1/MeV.
inline double nm_to_natural(double nm) { return nm / hbarc_mev_nm; }
inline double natural_to_nm(double inv_mev) { return inv_mev * hbarc_mev_nm; }

inline double kev_to_mev(double kev) { return kev * 1e-3; }
inline double mev_to_kev(double mev) { return mev * 1e3; }

// Width convention: sigma_p = 1/sigma_x exactly.
inline double sigma_p_of_sigma_x_nm(double sigma_x_nm) {
    return 1.0 / nm_to_natural(sigma_x_nm);
}

} // namespace pscat::units
