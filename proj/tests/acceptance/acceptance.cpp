// Runs every acceptance study at its pinned settings and prints one line per
// criterion.  Exit status is 0 only when all criteria pass.

#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "cellkit/studies/gates.hpp"

using namespace cellkit;
using namespace cellkit::studies;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::function<std::vector<Gate>()> run;
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const auto p = model::PhysicalParameters::reference(31000);
  constexpr double kAdaptiveTol = 5e-6;

  const std::vector<Criterion> criteria{
      {1, "space convergence",
       [&] {
         const auto t0 = std::chrono::steady_clock::now();
         auto g = space_gates(space_convergence(p, {}));
         g.push_back(runtime_gate("runtime", elapsed(t0), 300.0));
         return g;
       }},
      {2, "oracle verification", [&] { return oracle_gates(oracle_check(p, {})); }},
      {3, "coupling order",
       [&] {
         const auto t0 = std::chrono::steady_clock::now();
         auto g = coupling_gates(coupling_convergence(p, {}));
         g.push_back(runtime_gate("runtime", elapsed(t0), 900.0));
         return g;
       }},
      {4, "monolithic temporal order", [&] { return temporal_gates(temporal_order(p, {})); }},
      {5, "adaptive coupling",
       [&] {
         AdaptiveSpec s;
         s.tol = kAdaptiveTol;
         return adaptive_gates(sine_adaptive(p, s), kAdaptiveTol);
       }},
      {6, "work-precision", [&] { return work_precision_gates(work_precision(p, {})); }},
      {7, "index-1 and conditioning",
       [&] { return conditioning_gates(conditioning(p, {}), index_check(p, {})); }},
      {8, "invariants", [&] { return invariant_gates(p); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    std::vector<Gate> gates;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      gates = c.run();
    } catch (const std::exception& e) {
      gates.push_back({"run", false, std::string("exception: ") + e.what()});
    }
    const bool pass = all_pass(gates);
    failed += !pass;
    std::string failures;
    for (const auto& g : gates) {
      if (!g.pass) failures += (failures.empty() ? "" : "; ") + g.name + ": " + g.detail;
    }
    std::printf("criterion %d %-26s %s (%zu checks, %.1f s)%s%s\n", c.id, c.title.c_str(), pass ? "PASS" : "FAIL",
                gates.size(), elapsed(t0), failures.empty() ? "" : " -- ", failures.c_str());
    for (const auto& g : gates) std::fprintf(stderr, "  [%s] %s: %s\n", g.pass ? "ok" : "FAIL", g.name.c_str(), g.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
