#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zrk {

/// Toolkit and on-disk format versions, printed by `zrk --version`.
inline constexpr const char* kToolkitVersion = "0.3.0";
inline constexpr const char* kMatrixFormatVersion = "ZRK1";

/// A pseudo-phone: index of a k-means centroid.
using Symbol = std::int32_t;
using SymbolString = std::vector<Symbol>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Metric { kEuclidean, kCosine };

Metric parse_metric(std::string_view name);
std::string metric_name(Metric m);

// Seeds for pipeline stages are derived from one master seed by hashing the
// stage name, so each stage can be rerun on its own.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);

// Worker count for the parallel loops below. 1 runs everything inline.
void set_num_threads(unsigned n);
unsigned num_threads();

// Runs fn(i) for i in [0, n). Callers write into per-index slots and reduce
// in index order afterwards, so results never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace zrk
