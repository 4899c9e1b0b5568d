#include "vdrive/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vdrive {

RollingMean::RollingMean(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("rolling window must be positive");
}

double RollingMean::push(double value) {
  window_.push_back(value);
  if (window_.size() > n_) window_.pop_front();
  // Summed afresh each time so no cancellation error accumulates.
  double sum = 0.0;
  for (double v : window_) sum += v;
  return sum / static_cast<double>(window_.size());
}

std::vector<double> rolling_means(const std::vector<double>& totals, std::size_t n) {
  RollingMean rm(n);
  std::vector<double> out;
  out.reserve(totals.size());
  for (double t : totals) out.push_back(rm.push(t));
  return out;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) {
    out << r.episode << ',' << fmt(r.total_reward) << ',' << r.length << ','
        << to_string(r.done_reason) << ',' << fmt(r.rolling_mean) << ',' << fmt(r.wall_ms) << '\n';
  }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metrics file " + path.string());
  write_metrics_csv(out, rows);
}

DoneReason parse_done_reason(const std::string& name) {
  for (DoneReason r : {DoneReason::kNone, DoneReason::kEndOfChunk, DoneReason::kCollision,
                       DoneReason::kOffRoad, DoneReason::kRestTimeout}) {
    if (to_string(r) == name) return r;
  }
  throw std::invalid_argument("unknown done reason: " + name);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read metrics file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw std::runtime_error("metrics file has an unexpected header: " + path.string());
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell[6];
    for (auto& c : cell) std::getline(ss, c, ',');
    MetricsRow r;
    r.episode = std::stoi(cell[0]);
    r.total_reward = std::stod(cell[1]);
    r.length = std::stoi(cell[2]);
    r.done_reason = parse_done_reason(cell[3]);
    r.rolling_mean = std::stod(cell[4]);
    r.wall_ms = std::stod(cell[5]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace vdrive
