#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cellkit/errors.hpp"
#include "cellkit/fv/grid.hpp"
#include "cellkit/studies/studies.hpp"

namespace cellkit::studies {

using dae::Mat;

namespace {

Mat dense_jacobian(const dae::DaeSystem& sys, double t, const Vec& y) {
  dae::Triplets tr;
  sys.jacobian(t, y, tr);
  Mat j = Mat::Zero(sys.size(), sys.size());
  for (std::size_t k = 0; k < tr.size(); ++k) j(tr.row[k], tr.col[k]) += tr.val[k];
  return j;
}

// Newton matrix of an implicit Euler step: differential rows I - dt dF/dy,
// algebraic rows dG/dy.
Mat step_jacobian(const dae::DaeSystem& sys, double t, const Vec& y, double dt) {
  Mat j = dense_jacobian(sys, t, y);
  const auto nd = static_cast<Eigen::Index>(sys.n_differential());
  j.topRows(nd) *= -dt;
  j.topLeftCorner(nd, nd).diagonal().array() += 1.0;
  return j;
}

double cond2(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

std::vector<double> eigen_magnitudes(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) throw NonConvergence("eigenvalue iteration did not converge");
  std::vector<double> mag(a.rows());
  for (Eigen::Index k = 0; k < a.rows(); ++k) mag[k] = std::abs(es.eigenvalues()(k));
  std::sort(mag.begin(), mag.end());
  return mag;
}

// Full state and collector condition at time t (s) under a drive.
struct Snapshot {
  Vec y;
  model::ExternalCondition bc;
};

Snapshot snapshot(const fv::Discretization& d, const model::OperatingMode& mode, double t) {
  const Vec y0 = sim::initial_state(d, mode);
  const double ts = d.model().scales().time_scale;
  if (t <= 0.0) return {y0, model::resolve(mode.phases().front().drive, 0.0, d.model())};
  sim::MonolithicOptions o;
  o.rtol = 1e-10;
  o.store_steps = false;
  const auto r = sim::simulate(d, mode, t, o, y0);
  const auto bc = sim::phase_boundary(d.model(), mode.phases()[mode.phase_at(t)].drive, r.held_volts);
  return {r.y_end, bc(t / ts)};
}

std::string z_name(const fv::Grid& g, int k) {
  static const char* aux[] = {"c_e0+", "phi_e0+", "c_e-1-", "phi_e-1-", "c_s0+", "phi_s0+"};
  const int ne = g.n_e, n = g.n();
  if (k < ne) return fmt::format("phi_e[{}]", k);
  if (k < n) return fmt::format("phi_s[{}]", k - ne);
  return aux[k - n];
}

}  // namespace

ConditioningResult conditioning(const model::PhysicalParameters& p, const ConditioningSpec& spec) {
  const model::Model m(p);
  const double ts = m.scales().time_scale;
  ConditioningResult res;
  const std::vector<std::pair<std::string, model::OperatingMode>> drives{
      {"cc", model::OperatingMode::constant_current(spec.c_rate)},
      {"cv", spec.cv_volts > 0.0 ? model::OperatingMode::constant_voltage(spec.cv_volts)
                                 : model::OperatingMode::cc_then_cv(spec.c_rate, 11.0)}};
  for (const auto& [name, mode] : drives) {
    for (int n : spec.grids) {
      const fv::Discretization d(m, fv::Grid::from_total(m, n));
      const auto s = snapshot(d, mode, spec.t_eval);
      const auto bc = fv::constant_boundary(s.bc);
      const double t = spec.t_eval / ts;
      fv::FullSystem full(d, bc);
      fv::SubSystem elec(d, fv::Block::Electrolyte, bc, nullptr);
      fv::SubSystem solid(d, fv::Block::Solid, bc, nullptr);
      const auto fe = elec.foreign_indices(), fs = solid.foreign_indices();
      const std::array<double, 2> ue{s.y[fe[0]], s.y[fe[1]]}, us{s.y[fs[0]], s.y[fs[1]]};
      elec.set_foreign([ue](double) { return ue; });
      solid.set_foreign([us](double) { return us; });

      const std::vector<std::pair<std::string, Mat>> mats{
          {"full", step_jacobian(full, t, s.y, spec.dt)},
          {"electrolyte", step_jacobian(elec, t, elec.extract(s.y), spec.dt)},
          {"solid", step_jacobian(solid, t, solid.extract(s.y), spec.dt)}};
      for (const auto& [mname, a] : mats) {
        const auto mag = eigen_magnitudes(a);
        ConditioningRow row{name, mname, n, d.grid().dx, cond2(a), mag.front(), mag[mag.size() / 2], mag.back()};
        spdlog::info("conditioning {} {} N={} cond {:.3e} |eig| min {:.3e} median {:.3e}", name, mname, n, row.cond,
                     row.eig_min, row.eig_median);
        res.rows.push_back(row);
        for (std::size_t k = 0; k < mag.size(); ++k)
          res.eigenvalues.push_back({name, mname, n, static_cast<int>(k), mag[k]});
      }
    }
  }
  for (const auto& [name, mode] : drives) {
    for (const char* mname : {"full", "electrolyte", "solid"}) {
      std::vector<double> dx, c;
      for (const auto& r : res.rows)
        if (r.drive == name && r.matrix == mname) {
          dx.push_back(r.dx);
          c.push_back(r.cond);
        }
      if (dx.size() >= 2) res.fits.emplace_back(name + "/" + mname, fit_loglog(dx, c));
    }
  }
  return res;
}

IndexCheckResult index_check(const model::PhysicalParameters& p, const IndexCheckSpec& spec) {
  const model::Model m(p);
  const double ts = m.scales().time_scale;
  const auto mode = model::OperatingMode::constant_current(spec.c_rate);
  IndexCheckResult res;
  std::vector<double> dx0, cond0;
  for (int n : spec.grids) {
    const fv::Discretization d(m, fv::Grid::from_total(m, n));
    const Vec y0 = sim::initial_state(d, mode);
    sim::MonolithicOptions o;
    o.rtol = 1e-10;
    o.store_steps = false;
    for (double t : spec.times)
      if (t > 0.0) o.sample_times.push_back(t);
    const double t_end = *std::max_element(spec.times.begin(), spec.times.end());
    std::vector<std::pair<double, Vec>> states;
    if (std::find(spec.times.begin(), spec.times.end(), 0.0) != spec.times.end()) states.emplace_back(0.0, y0);
    if (t_end > 0.0) {
      const auto r = sim::simulate(d, mode, t_end, o, y0);
      for (std::size_t k = 0; k < r.samples.t.size(); ++k) states.emplace_back(r.samples.t[k] * ts, r.samples.y[k]);
    }
    const auto bc = fv::constant_boundary(model::resolve(mode.phases().front().drive, 0.0, m));
    fv::FullSystem sys(d, bc);
    const auto nd = static_cast<Eigen::Index>(sys.n_differential());
    const auto nz = static_cast<Eigen::Index>(sys.size()) - nd;
    for (const auto& [t, y] : states) {
      const Mat gz = dense_jacobian(sys, t / ts, y).bottomRightCorner(nz, nz);
      Eigen::JacobiSVD<Mat> svd(gz);
      const auto& sv = svd.singularValues();
      const double thresh = std::numeric_limits<double>::epsilon() * static_cast<double>(nz) * sv(0);
      const int rank = static_cast<int>((sv.array() > thresh).count());
      IndexRow row{n, d.grid().dx, t, static_cast<int>(nz), rank, sv(0), sv(nz - 1), sv(0) / sv(nz - 1)};
      spdlog::info("index check N={} t={} rank {}/{} cond {:.3e}", n, t, rank, nz, row.cond);
      res.rows.push_back(row);
      if (&states.front().second == &y) {
        dx0.push_back(row.dx);
        cond0.push_back(row.cond);
      }
      for (Eigen::Index i = 0; i < nz; ++i) {
        const double off = gz.row(i).cwiseAbs().sum() - std::abs(gz(i, i));
        if (std::abs(gz(i, i)) < off) {
          auto nm = fmt::format("N={} {}", n, z_name(d.grid(), static_cast<int>(i)));
          if (std::find(res.non_dominant_rows.begin(), res.non_dominant_rows.end(), nm) == res.non_dominant_rows.end())
            res.non_dominant_rows.push_back(std::move(nm));
        }
      }
    }
  }
  if (dx0.size() >= 2) res.fit = fit_loglog(dx0, cond0);
  return res;
}

}  // namespace cellkit::studies
