#pragma once

// Per-episode training metrics, written as CSV with the header
//   episode,total_reward,length,done_reason,rolling_mean,wall_ms
// rolling_mean averages total_reward over the last N episodes (fewer while
// under N have elapsed). Reals are written with round-trip precision.

#include <cstddef>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vdrive/env.hpp"

namespace vdrive {

struct MetricsRow {
  int episode = 0;
  double total_reward = 0.0;
  int length = 0;
  DoneReason done_reason = DoneReason::kNone;
  double rolling_mean = 0.0;
  double wall_ms = 0.0;
};

class RollingMean {
 public:
  explicit RollingMean(std::size_t n);
  double push(double value);

 private:
  std::size_t n_;
  std::deque<double> window_;
};

/// Recomputes the rolling column from the raw totals.
std::vector<double> rolling_means(const std::vector<double>& totals, std::size_t n);

inline constexpr const char* kMetricsHeader =
    "episode,total_reward,length,done_reason,rolling_mean,wall_ms";

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

DoneReason parse_done_reason(const std::string& name);

}  // namespace vdrive
