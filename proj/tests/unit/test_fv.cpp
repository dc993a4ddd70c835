#include <gtest/gtest.h>

#include <cmath>

#include "cellkit/dae/newton.hpp"
#include "cellkit/errors.hpp"
#include "cellkit/fv/discretization.hpp"
#include "cellkit/fv/grid.hpp"
#include "cellkit/fv/systems.hpp"

using namespace cellkit;
using namespace cellkit::fv;
using model::ExternalCondition;

namespace {

model::Model ref_model() { return model::Model(model::PhysicalParameters::reference(31000)); }

// A smooth, non-equilibrium state so every Jacobian entry is exercised.
Vec perturbed_state(const Discretization& d) {
  Vec y = d.initial_guess();
  const auto& g = d.grid();
  for (int i = 0; i < g.n_e; ++i) {
    y[d.ce(i)] = 1.0 + 0.1 * std::sin(0.7 * i);
    y[d.pe(i)] = -0.2 + 0.05 * std::cos(0.3 * i);
  }
  for (int j = 0; j < g.n_s(); ++j) {
    y[d.cs(j)] += 0.02 * std::cos(0.5 * j);
    y[d.ps(j)] += 0.01 * j;
  }
  y[d.aux(0)] = 1.05;
  y[d.aux(1)] = -0.25;
  y[d.aux(2)] = 0.93;
  y[d.aux(3)] = -0.1;
  y[d.aux(4)] += 0.01;
  y[d.aux(5)] += 0.2;
  return y;
}

}  // namespace

TEST(Grid, UniformCounts) {
  const auto m = ref_model();
  const auto g = Grid::make(m, 2, 1, 1);
  EXPECT_EQ(g.n(), 4);
  EXPECT_NEAR(g.dx, 0.25, 1e-15);
  EXPECT_EQ(g.face_am_e(), 2);
  EXPECT_EQ(g.face_am_cc(), 3);
  EXPECT_THROW(Grid::make(m, 3, 1, 1), ConfigError);
  EXPECT_THROW(Grid::make(m, 0, 1, 1), ConfigError);
  const auto h = Grid::from_total(m, 100);
  EXPECT_EQ(h.n_e, 50);
  EXPECT_EQ(h.n_am, 25);
  EXPECT_THROW(Grid::from_total(m, 50), ConfigError);
}

class JacobianCheck : public ::testing::TestWithParam<std::tuple<int, bool, int>> {};

TEST_P(JacobianCheck, AnalyticMatchesDifferences) {
  const auto [cells, cv, blk] = GetParam();
  const auto m = ref_model();
  const Discretization d(m, Grid::from_total(m, cells));
  const Block block = static_cast<Block>(blk);
  const ExternalCondition bc = cv ? ExternalCondition::potential(4.3) : ExternalCondition::current(-0.1);
  const Vec y = perturbed_state(d);
  auto res = [&](const Vec& x, Vec& f) {
    f = Vec::Zero(d.size());
    d.residual(x.data(), bc, f.data(), block);
  };
  const Mat fd = dae::jacobian_fd(res, y, 1e-6);
  dae::Triplets t;
  d.jacobian(y.data(), bc, t, block);
  const Mat an = dae::SparseMatrix::from_triplets(d.size(), d.size(), t).to_dense();
  Vec f0;
  res(y, f0);
  for (int r = 0; r < d.size(); ++r) {
    const bool computed = f0[r] != 0.0 || an.row(r).norm() > 0;
    if (!computed) continue;
    for (int c = 0; c < d.size(); ++c) {
      const double scale = std::max(1.0, fd.row(r).lpNorm<Eigen::Infinity>());
      EXPECT_NEAR(an(r, c), fd(r, c), 2e-6 * scale) << "row " << r << " col " << c;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Grids, JacobianCheck,
                         ::testing::Combine(::testing::Values(4, 8, 20), ::testing::Bool(), ::testing::Values(0, 1, 2)));

TEST(Discretization, PatternIsFixed) {
  const auto m = ref_model();
  const Discretization d(m, Grid::from_total(m, 8));
  dae::Triplets a, b;
  d.jacobian(d.initial_guess().data(), ExternalCondition::current(-0.1), a);
  d.jacobian(perturbed_state(d).data(), ExternalCondition::potential(4.0), b);
  EXPECT_EQ(a.row, b.row);
  EXPECT_EQ(a.col, b.col);
}

TEST(Discretization, BandOrderGivesNarrowBand) {
  const auto m = ref_model();
  const Discretization d(m, Grid::from_total(m, 100));
  dae::Triplets t;
  d.jacobian(d.initial_guess().data(), ExternalCondition::current(-0.1), t);
  const auto J = dae::SparseMatrix::from_triplets(d.size(), d.size(), t);
  const auto bw = dae::bandwidth(J, dae::invert_permutation(d.band_order()));
  EXPECT_LE(bw.first, 8u);
  EXPECT_LE(bw.second, 8u);
}

TEST(Discretization, RestStateIsEquilibrium) {
  const auto m = ref_model();
  const Discretization d(m, Grid::from_total(m, 8));
  const auto bc = ExternalCondition::current(0.0);
  const Vec y = consistent_init(d, d.initial_guess(), bc);
  Vec f(d.size());
  d.residual(y.data(), bc, f.data());
  EXPECT_LT(f.lpNorm<Eigen::Infinity>(), 1e-10);
  for (int i = 0; i < d.grid().n_e; ++i) EXPECT_NEAR(y[d.pe(i)], 0.0, 1e-10);
  const double u0 = m.ocp_scaled(13000.0 / 31000).value;
  for (int j = 0; j < d.grid().n_s(); ++j) EXPECT_NEAR(y[d.ps(j)], u0, 1e-10);
}

TEST(Discretization, ConsistentInitUnderCurrent) {
  const auto m = ref_model();
  const Discretization d(m, Grid::from_total(m, 20));
  const auto bc = model::resolve(model::ConstantCurrent{1.0}, 0.0, m);
  const Vec y = consistent_init(d, d.initial_guess(), bc);
  const Vec g = d.assemble_G(y, bc);
  EXPECT_LT(g.lpNorm<Eigen::Infinity>(), 1e-9);
  // Charge: lithium leaves the active material (positive cathode reaction
  // current) and plates at the anode; both carry the full external current.
  const double i_ext = bc.value * m.scales().current_s_scale;
  EXPECT_LT(i_ext, 0.0);
  EXPECT_NEAR(d.interface_current(y.data()), -i_ext, 1e-8 * std::abs(i_ext));
  EXPECT_NEAR(d.model().bv_anode(y[d.aux(1)]).i, i_ext, 1e-8 * std::abs(i_ext));
}

TEST(Systems, SubSystemsReproduceFullResidual) {
  const auto m = ref_model();
  const Discretization d(m, Grid::from_total(m, 8));
  const auto bc = ExternalCondition::current(-0.05);
  const Vec y = perturbed_state(d);
  Vec f(d.size());
  d.residual(y.data(), bc, f.data());
  for (Block b : {Block::Electrolyte, Block::Solid}) {
    SubSystem s(d, b, constant_boundary(bc), nullptr);
    const auto fi = s.foreign_indices();
    s.set_foreign([&, fi](double) { return std::array<double, 2>{y[fi[0]], y[fi[1]]}; });
    const Vec ys = s.extract(y);
    Vec fs;
    s.residual(0.0, ys, fs);
    Vec back = Vec::Zero(d.size());
    s.insert(fs, back);
    for (int k : s.map()) EXPECT_DOUBLE_EQ(back[k], f[k]);
    dae::Triplets t;
    s.jacobian(0.0, ys, t);
    auto rf = [&](const Vec& x, Vec& r) { s.residual(0.0, x, r); };
    const Mat fd = dae::jacobian_fd(rf, ys, 1e-6);
    const Mat an = dae::SparseMatrix::from_triplets(s.size(), s.size(), t).to_dense();
    EXPECT_LT((fd - an).lpNorm<Eigen::Infinity>(), 1e-4 * std::max(1.0, fd.lpNorm<Eigen::Infinity>()));
  }
}

TEST(Systems, LithiumInventoryAtRest) {
  const auto m = ref_model();
  const Discretization d(m, Grid::from_total(m, 8));
  const auto inv = lithium_inventory(d, d.initial_guess());
  EXPECT_NEAR(inv.electrolyte, 1000.0 * 20e-6, 1e-12);
  EXPECT_NEAR(inv.solid, 13000.0 * 10e-6, 1e-12);
}
