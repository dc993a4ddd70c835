#pragma once

#include <algorithm>
#include <chrono>

namespace cellkit::studies {

template <class F>
double median_wall_time(int repetitions, F&& f) {
  std::vector<double> t;
  for (int k = 0; k < std::max(1, repetitions); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

}  // namespace cellkit::studies
