#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace roughvol {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SelftestOptions {
  std::uint64_t seed = 7;
  int moment_paths = 20000;
  int pricing_paths = 100000;
};

/// The numerics suite: implied-vol round trip, FD exactness, W^H moments,
/// martingale and parity identities, degenerate cases, serial/parallel
/// agreement and the closed-form limits. Each check runs independently;
/// progress receives every result as it completes.
std::vector<CheckResult> run_numerics_suite(const SelftestOptions& options = {},
                                            const std::function<void(const CheckResult&)>& progress = {});

/// Round-trip grid: sigma in [0.05, 2], T in [0.005, 2], K/S in [0.5, 2].
struct RoundTripReport {
  std::size_t nodes = 0;
  std::size_t tested = 0;
  std::size_t excluded = 0;  // price not representable strictly inside its bounds
  double max_error = 0.0;    // |sigma_back - sigma| over tested nodes
};
RoundTripReport implied_vol_round_trip();

}  // namespace roughvol
