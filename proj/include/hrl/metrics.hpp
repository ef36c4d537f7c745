#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

namespace hrl::harness {

struct MetricsRow {
  long env_step = 0;
  int episode = 0;
  double eval_success_rate = 0.0;
  double eval_return = 0.0;
  double mean_reachability = 0.0;
  double high_actor_loss = 0.0;
  double high_critic_loss = 0.0;
  double low_actor_loss = 0.0;
  double low_critic_loss = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "env_step,episode,eval_success_rate,eval_return,mean_reachability,high_actor_loss,"
    "high_critic_loss,low_actor_loss,low_critic_loss";

// One CSV line (no trailing newline); reals use the shortest round-trip
// form, so equal values always print identically.
std::string format_row(const MetricsRow& row);

class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void emit(const MetricsRow& row) = 0;
};

// Keeps rows in memory; used by tests and sweeps.
class MemorySink : public MetricsSink {
 public:
  void emit(const MetricsRow& row) override;
  std::vector<MetricsRow> rows() const;

 private:
  mutable std::mutex mu_;
  std::vector<MetricsRow> rows_;
};

// Appends to a CSV file, writing the header when the file is created.
// Writes are serialized; an I/O failure throws IoError.
class CsvSink : public MetricsSink {
 public:
  explicit CsvSink(const std::filesystem::path& path);
  void emit(const MetricsRow& row) override;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace hrl::harness
