#include "cellkit/fv/grid.hpp"

#include <cmath>
#include <sstream>

#include "cellkit/errors.hpp"

namespace cellkit::fv {

std::vector<double> Grid::centers() const {
  std::vector<double> x(static_cast<std::size_t>(n()));
  for (int k = 0; k < n(); ++k) x[static_cast<std::size_t>(k)] = center(k);
  return x;
}

Grid Grid::make(const model::Model& m, int n_e, int n_am, int n_cc) {
  if (n_e < 1 || n_am < 1 || n_cc < 1) throw ConfigError("grid: every material needs at least one cell");
  const auto& p = m.params();
  const double L = m.scales().length_scale;
  Grid g;
  g.n_e = n_e;
  g.n_am = n_am;
  g.n_cc = n_cc;
  g.len_e = p.len_electrolyte / L;
  g.len_am = p.len_active / L;
  g.len_cc = p.len_collector / L;
  const double de = g.len_e / n_e, da = g.len_am / n_am, dc = g.len_cc / n_cc;
  const double rel = std::max({std::abs(de - da), std::abs(de - dc), std::abs(da - dc)}) / de;
  if (rel > 1e-12) {
    std::ostringstream os;
    os << "grid: cell counts (" << n_e << ", " << n_am << ", " << n_cc
       << ") do not give a uniform cell width; widths are " << de << ", " << da << ", " << dc;
    throw ConfigError(os.str());
  }
  g.dx = (g.len_e + g.len_am + g.len_cc) / g.n();
  return g;
}

Grid Grid::from_total(const model::Model& m, int total) {
  const auto& p = m.params();
  const double L = p.length();
  const int ne = static_cast<int>(std::lround(total * p.len_electrolyte / L));
  const int na = static_cast<int>(std::lround(total * p.len_active / L));
  const int nc = total - ne - na;
  return make(m, ne, na, nc);
}

}  // namespace cellkit::fv
