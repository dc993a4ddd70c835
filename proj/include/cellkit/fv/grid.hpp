#pragma once

#include <vector>

#include "cellkit/model/params.hpp"

namespace cellkit::fv {

/// Uniform 1D finite-volume grid over electrolyte | active material | collector,
/// in dimensionless coordinates.  Cells are numbered electrolyte first.
struct Grid {
  int n_e = 0;
  int n_am = 0;
  int n_cc = 0;
  double dx = 0.0;
  double len_e = 0.0;
  double len_am = 0.0;
  double len_cc = 0.0;

  int n_s() const { return n_am + n_cc; }
  int n() const { return n_e + n_am + n_cc; }

  double center(int cell) const { return (cell + 0.5) * dx; }
  double face(int f) const { return f * dx; }
  std::vector<double> centers() const;

  int face_anode() const { return 0; }
  int face_am_e() const { return n_e; }
  int face_am_cc() const { return n_e + n_am; }
  int face_collector() const { return n(); }

  /// Throws ConfigError unless every material has the same cell width.
  static Grid make(const model::Model& m, int n_e, int n_am, int n_cc);
  /// Cells split in proportion to the material lengths.
  static Grid from_total(const model::Model& m, int total);
};

}  // namespace cellkit::fv
