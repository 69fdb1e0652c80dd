#include "fbct/chain.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fbct {

namespace {
constexpr char kHeader[] = "iter,lambda,delta,c,mh_accepts";
}

std::string format_record(const GibbsRecord& rec) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%d",
                static_cast<long long>(rec.iter), rec.lambda, rec.delta, rec.c, rec.mh_accepts);
  return buf;
}

void write_chain_csv(const std::vector<GibbsRecord>& records, const std::string& path) {
  ChainCsvWriter writer(path);
  for (const auto& rec : records) writer.append(rec);
}

std::vector<GibbsRecord> read_chain_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(path + ": cannot open for reading");
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty chain file");
  if (line != kHeader) throw std::runtime_error(path + ": unexpected chain header");

  std::vector<GibbsRecord> records;
  size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    GibbsRecord rec;
    long long iter = 0;
    char* end = nullptr;
    const char* p = line.c_str();
    iter = std::strtoll(p, &end, 10);
    auto expect_comma = [&](const char* where) {
      if (*end != ',')
        throw std::runtime_error(path + ": malformed row " + std::to_string(line_no) + " at " +
                                 where);
      p = end + 1;
    };
    expect_comma("iter");
    rec.iter = iter;
    rec.lambda = std::strtod(p, &end);
    expect_comma("lambda");
    rec.delta = std::strtod(p, &end);
    expect_comma("delta");
    rec.c = std::strtod(p, &end);
    expect_comma("c");
    rec.mh_accepts = static_cast<int>(std::strtol(p, &end, 10));
    if (*end != '\0')
      throw std::runtime_error(path + ": trailing characters on row " + std::to_string(line_no));
    records.push_back(rec);
  }
  return records;
}

ChainCsvWriter::ChainCsvWriter(const std::string& path) : os_(path), path_(path) {
  if (!os_) throw std::runtime_error(path + ": cannot open for writing");
  os_ << kHeader << '\n';
  os_.flush();
}

void ChainCsvWriter::append(const GibbsRecord& rec) {
  os_ << format_record(rec) << '\n';
  os_.flush();
  if (!os_) throw std::runtime_error(path_ + ": write failed");
}

}  // namespace fbct
