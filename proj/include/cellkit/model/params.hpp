#pragma once

#include <optional>

#include "cellkit/model/ocp.hpp"

namespace cellkit::model {

/// Dimensional (SI) description of the half cell.  Defaults are the reference
/// parameter set except `conc_solid_max`, which has no default and must be set.
struct PhysicalParameters {
  double faraday = 96487.0;
  double gas_constant = 8.314;
  double temperature = 298.15;
  double len_electrolyte = 20e-6;
  double len_active = 10e-6;
  double len_collector = 10e-6;
  double conc_electrolyte_init = 1000.0;
  double conc_solid_init = 13000.0;
  double conc_solid_max = 0.0;
  double diff_electrolyte = 1e-10;
  double diff_active = 3e-14;
  double cond_ionic = 1.0;
  double cond_active = 100.0;
  double cond_collector = 3700.0;
  double transference = 0.4;
  double activity_deriv = 0.0;
  double rate_const_scaled = 8.9e-7;
  double exch_current_li = 10.0;
  double anodic_strength = 0.5;
  OpenCircuitPotential ocp = OpenCircuitPotential::default_curve();
  std::optional<double> ref_current_override;
  /// Largest admissible |argument| of the kinetic sinh terms.
  double sinh_guard = 50.0;

  /// Reference parameter set with the given maximum solid concentration.
  static PhysicalParameters reference(double conc_solid_max);

  /// Throws ConfigError listing every violated invariant.
  void validate() const;

  double length() const { return len_electrolyte + len_active + len_collector; }
};

struct CharacteristicScales {
  double potential_scale;
  double length_scale;
  double time_scale;
  double conc_e_scale;
  double conc_s_scale;
  double molar_flux_e_scale;
  double molar_flux_s_scale;
  double current_e_scale;
  double current_s_scale;
  double bv_current_scale;
};

struct DimensionlessGroups {
  double kappa_d;
  double eps_diff;
  double eps_cond;
  double peclet;
  double zeta_e_c;
  double zeta_s_c;
  double zeta_s_phi;
  /// zeta_e_phi(c) = zeta_e_phi_const + zeta_e_phi_inv / c
  double zeta_e_phi_const;
  double zeta_e_phi_inv;

  double zeta_e_phi(double c) const { return zeta_e_phi_const + zeta_e_phi_inv / c; }
};

CharacteristicScales compute_scales(const PhysicalParameters& p);
DimensionlessGroups compute_groups(const PhysicalParameters& p, const CharacteristicScales& s);

/// One-hour full-charge current density i_1C in A/m^2.
double reference_current(const PhysicalParameters& p);

struct AnodeCurrent {
  double i;
  double di_dphi_e;
};

struct CathodeCurrent {
  double i;
  double di_dce;
  double di_dphi_e;
  double di_dcs;
  double di_dphi_s;
};

/// Parameters, scales and groups bundled with the kinetic laws.  Immutable.
class Model {
 public:
  explicit Model(PhysicalParameters params);

  const PhysicalParameters& params() const { return p_; }
  const CharacteristicScales& scales() const { return s_; }
  const DimensionlessGroups& groups() const { return g_; }

  /// Metal anode current, dimensionless (units of the 1 A/m^2 kinetic scale).
  AnodeCurrent bv_anode(double phi_e) const;

  /// Cathode current at the active material surface, all inputs dimensionless.
  CathodeCurrent bv_cathode(double c_e, double phi_e, double c_s, double phi_s) const;

  /// Dimensionless open-circuit potential U0(c_s)/Phi* and its derivative.
  Dual ocp_scaled(double c_s) const;

  double reference_current() const { return i_1c_; }

 private:
  PhysicalParameters p_;
  CharacteristicScales s_;
  DimensionlessGroups g_;
  double i_1c_;
  double cathode_prefactor_;
};

}  // namespace cellkit::model
