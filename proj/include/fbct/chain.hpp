#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace fbct {

/// One Gibbs iteration record. `mh_accepts` counts accepted proposals out of
/// the k_metro Metropolis-Hastings steps of that iteration.
struct GibbsRecord {
  int64_t iter = 0;
  double lambda = 0.0;
  double delta = 0.0;
  double c = 0.0;
  int mh_accepts = 0;
};

// Chain CSV format: header "iter,lambda,delta,c,mh_accepts", one row per
// Gibbs iteration, doubles printed with 17 significant digits so the
// round-trip is value-exact.

void write_chain_csv(const std::vector<GibbsRecord>& records, const std::string& path);
std::vector<GibbsRecord> read_chain_csv(const std::string& path);

/// Appends records one by one, flushing after each row, so an interrupted
/// run leaves a valid truncated chain behind.
class ChainCsvWriter {
 public:
  explicit ChainCsvWriter(const std::string& path);
  void append(const GibbsRecord& rec);

 private:
  std::ofstream os_;
  std::string path_;
};

std::string format_record(const GibbsRecord& rec);

}  // namespace fbct
