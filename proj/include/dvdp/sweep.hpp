#pragma once

// Ordered parallel map over independent cells. Each result lands at its
// input index, so output is identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "dvdp/errors.hpp"

namespace dvdp::sweep {

/// Worker count: explicit request, else DVDP_WORKERS, else hardware threads.
inline unsigned worker_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DVDP_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("DVDP_WORKERS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class In, class F>
auto ordered_map(const std::vector<In>& in, F&& f, unsigned workers = 0) {
  using Out = decltype(f(in.front()));
  std::vector<Out> out(in.size());
  const unsigned n = std::min<unsigned>(worker_count(workers), std::max<std::size_t>(1, in.size()));
  if (n <= 1) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errs(n);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < in.size();) out[i] = f(in[i]);
      } catch (...) {
        errs[w] = std::current_exception();
        next = in.size();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace dvdp::sweep
