#include "hrl/metrics.hpp"

#include <charconv>

#include "hrl/errors.hpp"

namespace hrl::harness {

namespace {

// Shortest text that reads back to the same double.
std::string real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_row(const MetricsRow& r) {
  std::string line = std::to_string(r.env_step) + "," + std::to_string(r.episode);
  for (double v : {r.eval_success_rate, r.eval_return, r.mean_reachability, r.high_actor_loss,
                   r.high_critic_loss, r.low_actor_loss, r.low_critic_loss}) {
    line += ",";
    line += real(v);
  }
  return line;
}

void MemorySink::emit(const MetricsRow& row) {
  std::lock_guard lock(mu_);
  rows_.push_back(row);
}

std::vector<MetricsRow> MemorySink::rows() const {
  std::lock_guard lock(mu_);
  return rows_;
}

CsvSink::CsvSink(const std::filesystem::path& path) : path_(path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw IoError("cannot open metrics file " + path.string());
  if (fresh) {
    out_ << kMetricsHeader << '\n';
    out_.flush();
    if (!out_) throw IoError("cannot write metrics header to " + path.string());
  }
}

void CsvSink::emit(const MetricsRow& row) {
  std::lock_guard lock(mu_);
  out_ << format_row(row) << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed on " + path_.string());
}

}  // namespace hrl::harness
