#pragma once

#include <algorithm>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "avse/data/wav.hpp"
#include "avse/metrics/sisdr.hpp"
#include "avse/metrics/stoi.hpp"

namespace avse::metrics {

struct MetricReport {
  std::string id;
  double sisdr_db = 0.0;
  double stoi = 0.0;
  std::optional<double> pesq;  // filled by an external scorer, if any

  bool operator==(const MetricReport&) const = default;
};

struct ReportSummary {
  std::size_t count = 0;
  double sisdr_db = 0.0;
  double stoi = 0.0;
  std::optional<double> pesq;  // mean over the records that carry one

  bool operator==(const ReportSummary&) const = default;
};

inline ReportSummary summarize(const std::vector<MetricReport>& rows) {
  ReportSummary s;
  s.count = rows.size();
  if (rows.empty()) return s;
  double pesq_sum = 0.0;
  std::size_t pesq_n = 0;
  for (const auto& r : rows) {
    s.sisdr_db += r.sisdr_db;
    s.stoi += r.stoi;
    if (r.pesq) {
      pesq_sum += *r.pesq;
      ++pesq_n;
    }
  }
  s.sisdr_db /= double(rows.size());
  s.stoi /= double(rows.size());
  if (pesq_n) s.pesq = pesq_sum / double(pesq_n);
  return s;
}

inline nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["sisdr_db"] = r.sisdr_db;
  j["stoi"] = r.stoi;
  j["pesq"] = r.pesq ? nlohmann::ordered_json(*r.pesq) : nlohmann::ordered_json(nullptr);
  return j;
}

inline nlohmann::ordered_json to_json(const ReportSummary& s) {
  nlohmann::ordered_json j;
  j["aggregate"] = "mean";
  j["count"] = s.count;
  j["sisdr_db"] = s.sisdr_db;
  j["stoi"] = s.stoi;
  j["pesq"] = s.pesq ? nlohmann::ordered_json(*s.pesq) : nlohmann::ordered_json(nullptr);
  return j;
}

/// One record per pair, sorted by id, then the aggregate record.
inline void write_report(std::ostream& out, std::vector<MetricReport> rows) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& r : rows) out << to_json(r).dump() << '\n';
  out << to_json(summarize(rows)).dump() << '\n';
}

struct ParsedReport {
  std::vector<MetricReport> rows;
  std::optional<ReportSummary> summary;
};

inline ParsedReport read_report(std::istream& in) {
  ParsedReport out;
  std::string line;
  std::size_t lineno = 0;
  auto optional_number = [](const nlohmann::json& j) -> std::optional<double> {
    if (!j.contains("pesq") || j["pesq"].is_null()) return std::nullopt;
    return j["pesq"].get<double>();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("report line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      if (j.contains("aggregate")) {
        out.summary = ReportSummary{j.at("count").get<std::size_t>(), j.at("sisdr_db").get<double>(),
                                    j.at("stoi").get<double>(), optional_number(j)};
      } else {
        out.rows.push_back({j.at("id").get<std::string>(), j.at("sisdr_db").get<double>(),
                            j.at("stoi").get<double>(), optional_number(j)});
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("report line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Metrics of `enhanced` against `clean`, trimmed to the shorter length.
template <typename Real>
MetricReport evaluate_signals(const std::string& id, const Tensor<Real>& clean,
                              const Tensor<Real>& enhanced, double fs_hz) {
  const std::size_t n = std::min(clean.size(), enhanced.size());
  const auto trim = [n](const Tensor<Real>& x) {
    return Tensor<Real>({n}, std::vector<Real>(x.data().begin(), x.data().begin() + std::ptrdiff_t(n)));
  };
  const auto c = trim(clean), e = trim(enhanced);
  return {id, si_sdr(c, e), stoi(c, e, fs_hz), std::nullopt};
}

inline MetricReport evaluate_pair(const std::filesystem::path& clean_path,
                                  const std::filesystem::path& enhanced_path) {
  const auto clean = data::load_wav(clean_path);
  const auto enhanced = data::load_wav(enhanced_path);
  if (clean.sample_rate_hz != enhanced.sample_rate_hz) {
    throw UnsupportedFormatError("evaluate: " + clean_path.string() + " is at " +
                                 std::to_string(clean.sample_rate_hz) + " Hz but " +
                                 enhanced_path.string() + " is at " +
                                 std::to_string(enhanced.sample_rate_hz) + " Hz");
  }
  return evaluate_signals(clean_path.stem().string(), clean.samples, enhanced.samples,
                          double(clean.sample_rate_hz));
}

}  // namespace avse::metrics
